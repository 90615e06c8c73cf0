#include "tlskit/io.hpp"

#include <atomic>
#include <bit>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <png.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace tlskit::io {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; add byte swapping for this target");

// ---------------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------------

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

json get_field(const json& doc, const char* key, const fs::path& path) {
  if (!doc.contains(key))
    throw Error(Errc::ParseError, path.string() + ": missing field '" + key + "'");
  return doc.at(key);
}

void check_document_version(const json& doc, const fs::path& path) {
  // Documents without a version (e.g. hand-written box lists) are accepted.
  if (doc.is_object() && doc.contains("schema_version"))
    check_schema_version(doc.at("schema_version").get<std::string>(), path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view text, const fs::path& path) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw Error(Errc::ParseError, path.string() + ": bad number '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view text, const fs::path& path) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw Error(Errc::ParseError, path.string() + ": bad count '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits document text into lines, dropping '#' comments and blank lines.
std::vector<std::string_view> content_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    const std::string_view line = trim(text.substr(start, pos - start));
    if (!line.empty() && line.front() != '#') out.push_back(line);
    start = pos + 1;
  }
  return out;
}

std::uint8_t quantize_u8(float v) {
  const long q = std::lround(double(v));  // round half away from zero
  return std::uint8_t(std::clamp(q, 0L, 255L));
}

}  // namespace

void atomic_write(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  fs::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp =
      dir / (path.filename().string() + ".tmp" + std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot create " + tmp.string());
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw Error(Errc::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(Errc::IoError, "cannot move " + tmp.string() + " to " + path.string());
  }
}

void check_schema_version(const std::string& version, const fs::path& path) {
  const std::size_t dot = version.find('.');
  const std::string major = version.substr(0, dot);
  const std::string expected(kSchemaVersion.substr(0, kSchemaVersion.find('.')));
  if (major != expected)
    throw Error(Errc::ParseError, path.string() + ": unsupported schema_version '" + version +
                                      "' (expected major version " + expected + ")");
}

static void atomic_write_json(const fs::path& path, const json& doc) {
  atomic_write(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Nuclei CSV
// ---------------------------------------------------------------------------

std::string_view label_token(NucleusLabel label) {
  switch (label) {
    case NucleusLabel::Lymphocyte: return "lymphocyte";
    case NucleusLabel::NonLymphocyte: return "non_lymphocyte";
    case NucleusLabel::Unknown: return "unknown";
  }
  return "unknown";
}

NucleusLabel parse_label(std::string_view token) {
  if (token == "lymphocyte") return NucleusLabel::Lymphocyte;
  if (token == "non_lymphocyte") return NucleusLabel::NonLymphocyte;
  if (token == "unknown") return NucleusLabel::Unknown;
  throw Error(Errc::ParseError, "unknown nucleus label '" + std::string(token) + "'");
}

std::vector<NucleusRecord> read_nuclei_csv(const fs::path& path) {
  const std::string text = read_file(path);
  const auto lines = content_lines(text);
  if (lines.empty()) throw Error(Errc::ParseError, path.string() + ": empty nuclei file");

  const auto header = split(lines[0], ',');
  const bool with_confidence =
      header.size() == 4 && trim(header[3]) == "confidence";
  if (!(header.size() == 3 || with_confidence) || trim(header[0]) != "x_um" ||
      trim(header[1]) != "y_um" || trim(header[2]) != "label")
    throw Error(Errc::ParseError,
                path.string() + ": expected header x_um,y_um,label[,confidence]");

  std::vector<NucleusRecord> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], ',');
    if (cols.size() != header.size())
      throw Error(Errc::ParseError, path.string() + ": line " + std::to_string(i + 1) + " has " +
                                        std::to_string(cols.size()) + " columns, expected " +
                                        std::to_string(header.size()));
    NucleusRecord n;
    n.x_um = parse_double(trim(cols[0]), path);
    n.y_um = parse_double(trim(cols[1]), path);
    n.label = parse_label(trim(cols[2]));
    if (with_confidence) n.confidence = parse_double(trim(cols[3]), path);
    validate(n);
    out.push_back(n);
  }
  return out;
}

void write_nuclei_csv(const fs::path& path, std::span<const NucleusRecord> nuclei,
                      std::span<const std::string> header_comments) {
  std::string out;
  for (const std::string& c : header_comments) out += "# " + c + "\n";
  out += "x_um,y_um,label,confidence\n";
  for (const NucleusRecord& n : nuclei) {
    out += format_double(n.x_um);
    out += ',';
    out += format_double(n.y_um);
    out += ',';
    out += label_token(n.label);
    out += ',';
    out += format_double(n.confidence);
    out += '\n';
  }
  atomic_write(path, out);
}

// ---------------------------------------------------------------------------
// PGM / PPM
// ---------------------------------------------------------------------------

namespace {

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::string& text, const fs::path& path) {
  PnmHeader h;
  std::size_t pos = 0;
  const auto next_token = [&]() -> std::string {
    while (pos < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[pos]))) {
        ++pos;
      } else if (text[pos] == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw Error(Errc::ParseError, path.string() + ": truncated PNM header");
    return text.substr(start, pos - start);
  };

  h.magic = next_token();
  h.width = int(parse_u64(next_token(), path));
  h.height = int(parse_u64(next_token(), path));
  h.maxval = int(parse_u64(next_token(), path));
  h.data_offset = pos + 1;  // single whitespace byte after maxval
  if (h.width < 1 || h.height < 1)
    throw Error(Errc::ParseError, path.string() + ": bad PNM dimensions");
  if (h.maxval != 255)
    throw Error(Errc::ParseError, path.string() + ": only maxval 255 supported");
  return h;
}

}  // namespace

void write_pgm(const fs::path& path, const Raster<std::uint8_t>& image) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels().data()), image.size());
  atomic_write(path, out);
}

void write_pgm(const fs::path& path, const Raster<float>& image) {
  Raster<std::uint8_t> q(image.width(), image.height());
  auto src = image.pixels();
  auto dst = q.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = quantize_u8(src[i]);
  write_pgm(path, q);
}

Raster<std::uint8_t> read_pgm(const fs::path& path) {
  const std::string text = read_file(path);
  const PnmHeader h = parse_pnm_header(text, path);
  if (h.magic != "P5") throw Error(Errc::ParseError, path.string() + ": expected binary PGM (P5)");
  const std::size_t need = std::size_t(h.width) * h.height;
  if (text.size() < h.data_offset + need)
    throw Error(Errc::ParseError, path.string() + ": truncated PGM data");
  Raster<std::uint8_t> out(h.width, h.height);
  std::memcpy(out.pixels().data(), text.data() + h.data_offset, need);
  return out;
}

MultiChannelImage read_image(const fs::path& path) {
  const std::string text = read_file(path);
  const PnmHeader h = parse_pnm_header(text, path);
  if (h.magic == "P5") {
    const std::size_t need = std::size_t(h.width) * h.height;
    if (text.size() < h.data_offset + need)
      throw Error(Errc::ParseError, path.string() + ": truncated PGM data");
    MultiChannelImage img(h.width, h.height, {"Gray"});
    auto ch = img.channel(0);
    for (std::size_t i = 0; i < need; ++i)
      ch[i] = float(std::uint8_t(text[h.data_offset + i]));
    return img;
  }
  if (h.magic == "P6") {
    const std::size_t need = std::size_t(h.width) * h.height * 3;
    if (text.size() < h.data_offset + need)
      throw Error(Errc::ParseError, path.string() + ": truncated PPM data");
    MultiChannelImage img(h.width, h.height, {"R", "G", "B"});
    auto r = img.channel(0);
    auto g = img.channel(1);
    auto b = img.channel(2);
    const char* d = text.data() + h.data_offset;
    const std::size_t pixels = std::size_t(h.width) * h.height;
    for (std::size_t i = 0; i < pixels; ++i) {
      r[i] = float(std::uint8_t(d[3 * i]));
      g[i] = float(std::uint8_t(d[3 * i + 1]));
      b[i] = float(std::uint8_t(d[3 * i + 2]));
    }
    return img;
  }
  throw Error(Errc::ParseError, path.string() + ": expected P5 or P6, got '" + h.magic + "'");
}

// ---------------------------------------------------------------------------
// float32 rasters and multi-channel images
// ---------------------------------------------------------------------------

fs::path sidecar_header_path(const fs::path& data_path) {
  fs::path p = data_path;
  p.replace_extension(".json");
  return p;
}

namespace {

std::string float_bytes(std::span<const float> values) {
  std::string out(values.size() * sizeof(float), '\0');
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

void read_float_bytes(const std::string& text, std::span<float> out, const fs::path& path) {
  if (text.size() != out.size() * sizeof(float))
    throw Error(Errc::ParseError, path.string() + ": expected " +
                                      std::to_string(out.size() * sizeof(float)) + " bytes, found " +
                                      std::to_string(text.size()));
  std::memcpy(out.data(), text.data(), text.size());
}

}  // namespace

void write_f32_raster(const fs::path& data_path, const Raster<float>& raster) {
  json header{{"schema_version", kSchemaVersion},
              {"type", "f32_raster"},
              {"width", raster.width()},
              {"height", raster.height()},
              {"byte_order", "little"}};
  atomic_write_json(sidecar_header_path(data_path), header);
  atomic_write(data_path, float_bytes(raster.pixels()));
}

Raster<float> read_f32_raster(const fs::path& data_path) {
  const fs::path hp = sidecar_header_path(data_path);
  const json header = parse_json_file(hp);
  check_document_version(header, hp);
  if (get_field(header, "type", hp).get<std::string>() != "f32_raster")
    throw Error(Errc::ParseError, hp.string() + ": not an f32_raster header");
  Raster<float> out(get_field(header, "width", hp).get<int>(),
                    get_field(header, "height", hp).get<int>());
  read_float_bytes(read_file(data_path), out.pixels(), data_path);
  return out;
}

void write_mcb(const fs::path& data_path, const MultiChannelImage& image) {
  json header{{"schema_version", kSchemaVersion},
              {"type", "multi_channel_image"},
              {"width", image.width()},
              {"height", image.height()},
              {"channels", image.channels()},
              {"channel_names", image.channel_names()},
              {"byte_order", "little"}};
  atomic_write_json(sidecar_header_path(data_path), header);
  atomic_write(data_path, float_bytes(image.planes()));
}

MultiChannelImage read_mcb(const fs::path& data_path) {
  const fs::path hp = sidecar_header_path(data_path);
  const json header = parse_json_file(hp);
  check_document_version(header, hp);
  if (get_field(header, "type", hp).get<std::string>() != "multi_channel_image")
    throw Error(Errc::ParseError, hp.string() + ": not a multi_channel_image header");
  const auto names = get_field(header, "channel_names", hp).get<std::vector<std::string>>();
  const int channels = get_field(header, "channels", hp).get<int>();
  if (int(names.size()) != channels)
    throw Error(Errc::ParseError, hp.string() + ": channel_names/channels mismatch");
  MultiChannelImage out(get_field(header, "width", hp).get<int>(),
                        get_field(header, "height", hp).get<int>(), names);
  const std::string text = read_file(data_path);
  const std::size_t plane = std::size_t(out.width()) * out.height();
  if (text.size() != plane * channels * sizeof(float))
    throw Error(Errc::ParseError, data_path.string() + ": data size does not match header");
  for (int c = 0; c < channels; ++c)
    std::memcpy(out.channel(c).data(), text.data() + c * plane * sizeof(float),
                plane * sizeof(float));
  return out;
}

// ---------------------------------------------------------------------------
// Boxes
// ---------------------------------------------------------------------------

static BoundingBox box_from_json(const json& j, const fs::path& path) {
  BoundingBox b{get_field(j, "x_min", path).get<int>(), get_field(j, "y_min", path).get<int>(),
                get_field(j, "x_max", path).get<int>(), get_field(j, "y_max", path).get<int>()};
  validate(b);
  return b;
}

std::vector<BoundingBox> read_boxes_json(const fs::path& path) {
  const json doc = parse_json_file(path);
  check_document_version(doc, path);
  const json arr = doc.is_array() ? doc : get_field(doc, "boxes", path);
  if (!arr.is_array()) throw Error(Errc::ParseError, path.string() + ": 'boxes' must be an array");
  std::vector<BoundingBox> out;
  out.reserve(arr.size());
  for (const json& j : arr) out.push_back(box_from_json(j, path));
  return out;
}

void write_boxes_json(const fs::path& path, std::span<const BoundingBox> boxes) {
  json arr = json::array();
  for (const BoundingBox& b : boxes)
    arr.push_back(
        {{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}});
  atomic_write_json(path, json{{"schema_version", kSchemaVersion}, {"boxes", arr}});
}

// ---------------------------------------------------------------------------
// Masks
// ---------------------------------------------------------------------------

namespace {

BinaryMask mask_from_u8(const Raster<std::uint8_t>& img, const fs::path& path) {
  BinaryMask mask(img.width(), img.height());
  auto src = img.pixels();
  auto dst = mask.bits();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == 0) {
      dst[i] = 0;
    } else if (src[i] == 255) {
      dst[i] = 1;
    } else {
      throw Error(Errc::ParseError, path.string() + ": mask pixels must be 0 or 255, found " +
                                        std::to_string(int(src[i])));
    }
  }
  return mask;
}

Raster<std::uint8_t> mask_to_u8(const BinaryMask& mask) {
  Raster<std::uint8_t> img(mask.width(), mask.height());
  auto src = mask.bits();
  auto dst = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
  return img;
}

// 8-bit grayscale PNG codec on libpng. The longjmp error path only crosses
// frames that hold PODs; buffers live in the caller-visible locals declared
// before setjmp.
Raster<std::uint8_t> read_png_gray(const fs::path& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw Error(Errc::IoError, "cannot open " + path.string());

  std::vector<std::uint8_t> data;
  std::vector<png_bytep> rows;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  volatile int width = 0, height = 0;
  volatile bool ok = false;
  volatile bool gray8 = true;

  if (png && info && !setjmp(png_jmpbuf(png))) {
    png_init_io(png, fp);
    png_read_info(png, info);
    const int w = int(png_get_image_width(png, info));
    const int h = int(png_get_image_height(png, info));
    width = w;
    height = h;
    if (png_get_bit_depth(png, info) == 8 &&
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY) {
      data.resize(std::size_t(w) * h);
      rows.resize(h);
      for (int y = 0; y < h; ++y) rows[y] = data.data() + std::size_t(y) * w;
      png_read_image(png, rows.data());
      png_read_end(png, nullptr);
      ok = true;
    } else {
      gray8 = false;
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  if (!gray8)
    throw Error(Errc::ParseError, path.string() + ": mask PNG must be 8-bit grayscale");
  if (!ok) throw Error(Errc::ParseError, path.string() + ": PNG decode failed");

  Raster<std::uint8_t> out(width, height);
  std::memcpy(out.pixels().data(), data.data(), data.size());
  return out;
}

void write_png_gray(const fs::path& path, const Raster<std::uint8_t>& img) {
  static std::atomic<unsigned> counter{0};
  fs::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp =
      dir / (path.filename().string() + ".tmp" + std::to_string(counter.fetch_add(1)));

  std::FILE* fp = std::fopen(tmp.c_str(), "wb");
  if (!fp) throw Error(Errc::IoError, "cannot create " + tmp.string());

  std::vector<png_bytep> rows(img.height());
  auto pixels = img.pixels();
  for (int y = 0; y < img.height(); ++y)
    rows[y] = const_cast<png_bytep>(pixels.data() + std::size_t(y) * img.width());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  volatile bool ok = false;
  if (png && info && !setjmp(png_jmpbuf(png))) {
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);

  if (!ok) {
    fs::remove(tmp);
    throw Error(Errc::IoError, "PNG encode failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(Errc::IoError, "cannot move " + tmp.string() + " to " + path.string());
  }
}

bool has_extension(const fs::path& path, std::string_view ext) {
  std::string e = path.extension().string();
  for (char& c : e) c = char(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

}  // namespace

BinaryMask read_mask(const fs::path& path) {
  if (has_extension(path, ".png")) return mask_from_u8(read_png_gray(path), path);
  if (has_extension(path, ".pgm")) return mask_from_u8(read_pgm(path), path);
  throw Error(Errc::ParseError, path.string() + ": masks must be .png or .pgm");
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  if (has_extension(path, ".png")) {
    write_png_gray(path, mask_to_u8(mask));
  } else if (has_extension(path, ".pgm")) {
    write_pgm(path, mask_to_u8(mask));
  } else {
    throw Error(Errc::ParseError, path.string() + ": masks must be .png or .pgm");
  }
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

static json grid_to_json(const GridSpec& g) {
  return json{{"patch_size_px", g.patch_size_px}, {"pixel_pitch_um", g.pixel_pitch_um},
              {"width_px", g.width_px},           {"height_px", g.height_px},
              {"rows", g.rows()},                 {"cols", g.cols()}};
}

static GridSpec grid_from_json(const json& j, const fs::path& path) {
  GridSpec g;
  g.patch_size_px = get_field(j, "patch_size_px", path).get<int>();
  g.pixel_pitch_um = get_field(j, "pixel_pitch_um", path).get<double>();
  g.width_px = get_field(j, "width_px", path).get<int>();
  g.height_px = get_field(j, "height_px", path).get<int>();
  validate(g);
  return g;
}

void write_density_meta(const fs::path& path, const DensityMeta& meta) {
  atomic_write_json(path, json{{"schema_version", kSchemaVersion},
                               {"type", "density_map_meta"},
                               {"grid", grid_to_json(meta.grid)},
                               {"count_min", meta.count_min},
                               {"count_max", meta.count_max},
                               {"density_min", meta.density_min},
                               {"density_max", meta.density_max}});
}

DensityMeta read_density_meta(const fs::path& path) {
  const json doc = parse_json_file(path);
  check_document_version(doc, path);
  DensityMeta meta;
  meta.grid = grid_from_json(get_field(doc, "grid", path), path);
  meta.count_min = get_field(doc, "count_min", path).get<std::uint32_t>();
  meta.count_max = get_field(doc, "count_max", path).get<std::uint32_t>();
  meta.density_min = get_field(doc, "density_min", path).get<float>();
  meta.density_max = get_field(doc, "density_max", path).get<float>();
  return meta;
}

void write_loss_json(const fs::path& path, const LossBreakdown& loss) {
  atomic_write_json(path, json{{"schema_version", kSchemaVersion},
                               {"l_dice", loss.dice},
                               {"l_ce", loss.ce},
                               {"l_sdf", loss.sdf},
                               {"l_total", loss.total()}});
}

namespace {

json metric_to_json(const std::optional<double>& m) {
  return m ? json(*m) : json("undefined");
}

std::string beta_key(std::string_view prefix, double beta) {
  const long long i = llround(beta);
  if (double(i) == beta) return std::string(prefix) + std::to_string(i);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%g", std::string(prefix).c_str(), beta);
  return buf;
}

std::string_view criterion_name(MatchCriterion::Mode m) {
  switch (m) {
    case MatchCriterion::Mode::AnyOverlap: return "any_overlap";
    case MatchCriterion::Mode::IoUThreshold: return "iou";
    case MatchCriterion::Mode::BoxCoverage: return "box_coverage";
  }
  return "any_overlap";
}

}  // namespace

void write_eval_report(const fs::path& path, const EvalReport& report) {
  json criterion{{"mode", criterion_name(report.criterion.mode)}};
  if (report.criterion.mode != MatchCriterion::Mode::AnyOverlap)
    criterion["threshold"] = report.criterion.threshold;

  json metrics{{"precision", metric_to_json(report.precision)},
               {"recall", metric_to_json(report.recall)},
               {"sp", metric_to_json(report.sp)},
               {"br", metric_to_json(report.br)}};
  for (std::size_t i = 0; i < report.betas.size(); ++i) {
    metrics[beta_key("f", report.betas[i])] = metric_to_json(report.f[i]);
    metrics[beta_key("gf", report.betas[i])] = metric_to_json(report.gf[i]);
  }

  atomic_write_json(path, json{{"schema_version", kSchemaVersion},
                               {"criterion", criterion},
                               {"counts",
                                {{"tp", report.counts.tp},
                                 {"fp", report.counts.fp},
                                 {"fn", report.counts.fn},
                                 {"tps", report.counts.tps},
                                 {"tpb", report.counts.tpb},
                                 {"n_components", report.counts.n_components},
                                 {"n_boxes", report.counts.n_boxes}}},
                               {"metrics", metrics}});
}

namespace {

std::string_view group_token(PatientGroup g) {
  return g == PatientGroup::Invasion ? "invasion" : "no_invasion";
}

std::string_view method_token(TestMethod m) {
  switch (m) {
    case TestMethod::ShapiroWilk: return "shapiro_wilk";
    case TestMethod::MannWhitneyExact: return "mann_whitney_exact";
    case TestMethod::MannWhitneyNormalApprox: return "mann_whitney_normal_approx";
  }
  return "unknown";
}

json group_to_json(const GroupSummary& g) {
  json j{{"group", group_token(g.group)}, {"n", g.n}, {"median_density", g.median_density}};
  if (g.normality) {
    j["shapiro_wilk"] = {{"w", g.normality->statistic}, {"p_value", g.normality->p_value}};
  } else {
    j["shapiro_wilk"] = nullptr;
  }
  return j;
}

}  // namespace

void write_stats_json(const fs::path& path, const GroupComparison& comparison) {
  atomic_write_json(
      path, json{{"schema_version", kSchemaVersion},
                 {"groups", json::array({group_to_json(comparison.invasion),
                                         group_to_json(comparison.no_invasion)})},
                 {"mann_whitney",
                  {{"u", comparison.mann_whitney.statistic},
                   {"p_value", comparison.mann_whitney.p_value},
                   {"method", method_token(comparison.mann_whitney.method)}}}});
}

// ---------------------------------------------------------------------------
// Patient CSV
// ---------------------------------------------------------------------------

std::vector<PatientDensity> read_patient_csv(const fs::path& path) {
  const std::string text = read_file(path);
  const auto lines = content_lines(text);
  if (lines.empty()) throw Error(Errc::ParseError, path.string() + ": empty patient file");

  const auto header = split(lines[0], ',');
  if (header.size() != 4 || trim(header[0]) != "patient" || trim(header[1]) != "group" ||
      trim(header[2]) != "tls_count" || trim(header[3]) != "area_mm2")
    throw Error(Errc::ParseError, path.string() + ": expected header patient,group,tls_count,area_mm2");

  std::vector<PatientDensity> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], ',');
    if (cols.size() != 4)
      throw Error(Errc::ParseError, path.string() + ": line " + std::to_string(i + 1) +
                                        " has " + std::to_string(cols.size()) + " columns");
    const std::string_view group = trim(cols[1]);
    PatientGroup g;
    if (group == "invasion") {
      g = PatientGroup::Invasion;
    } else if (group == "no_invasion") {
      g = PatientGroup::NoInvasion;
    } else {
      throw Error(Errc::ParseError,
                  path.string() + ": group must be invasion or no_invasion, got '" +
                      std::string(group) + "'");
    }
    out.push_back(make_patient_density(std::string(trim(cols[0])), parse_u64(trim(cols[2]), path),
                                       parse_double(trim(cols[3]), path), g));
  }
  return out;
}

void write_patient_csv(const fs::path& path, std::span<const PatientDensity> patients) {
  std::string out = "patient,group,tls_count,area_mm2\n";
  for (const PatientDensity& p : patients) {
    out += p.patient_id;
    out += ',';
    out += group_token(p.group);
    out += ',';
    out += std::to_string(p.tls_count);
    out += ',';
    out += format_double(p.area_mm2);
    out += '\n';
  }
  atomic_write(path, out);
}

// ---------------------------------------------------------------------------
// Scene config
// ---------------------------------------------------------------------------

GridSpec SceneConfig::grid() const {
  GridSpec g;
  g.patch_size_px = patch_size_px;
  g.pixel_pitch_um = pixel_pitch_um;
  g.width_px = int(std::ceil(params.extent_w_um / pixel_pitch_um));
  g.height_px = int(std::ceil(params.extent_h_um / pixel_pitch_um));
  return g;
}

SceneConfig read_scene_config(const fs::path& path) {
  const json doc = parse_json_file(path);
  check_document_version(doc, path);
  SceneConfig c;
  const json extent = get_field(doc, "extent_um", path);
  if (!extent.is_array() || extent.size() != 2)
    throw Error(Errc::ParseError, path.string() + ": extent_um must be [width, height]");
  c.params.extent_w_um = extent[0].get<double>();
  c.params.extent_h_um = extent[1].get<double>();
  c.params.n_clusters = get_field(doc, "n_clusters", path).get<int>();
  c.params.cluster_radius_um = get_field(doc, "cluster_radius_um", path).get<double>();
  c.params.nuclei_per_cluster = get_field(doc, "nuclei_per_cluster", path).get<double>();
  c.params.background_per_mm2 = get_field(doc, "background_per_mm2", path).get<double>();
  c.params.non_lymphocyte_fraction = get_field(doc, "non_lymphocyte_fraction", path).get<double>();
  c.params.seed = get_field(doc, "seed", path).get<std::uint64_t>();
  c.pixel_pitch_um = get_field(doc, "pixel_pitch_um", path).get<double>();
  c.patch_size_px = get_field(doc, "patch_size_px", path).get<int>();
  return c;
}

void write_scene_config(const fs::path& path, const SceneConfig& c) {
  atomic_write_json(path,
                    json{{"schema_version", kSchemaVersion},
                         {"extent_um", {c.params.extent_w_um, c.params.extent_h_um}},
                         {"n_clusters", c.params.n_clusters},
                         {"cluster_radius_um", c.params.cluster_radius_um},
                         {"nuclei_per_cluster", c.params.nuclei_per_cluster},
                         {"background_per_mm2", c.params.background_per_mm2},
                         {"non_lymphocyte_fraction", c.params.non_lymphocyte_fraction},
                         {"seed", c.params.seed},
                         {"pixel_pitch_um", c.pixel_pitch_um},
                         {"patch_size_px", c.patch_size_px}});
}

}  // namespace tlskit::io
