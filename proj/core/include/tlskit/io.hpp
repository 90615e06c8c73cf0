#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlskit/core.hpp"
#include "tlskit/losses.hpp"
#include "tlskit/metrics.hpp"
#include "tlskit/stats.hpp"
#include "tlskit/synth.hpp"

// File-format contracts shared by the CLI, the tests, and downstream tools.
//
//   * nuclei CSV            header x_um,y_um,label[,confidence]
//   * masks                 8-bit PNG or PGM, 0 = background, 255 = foreground
//   * grayscale heatmaps    8-bit binary PGM (P5), round half away from zero
//   * float rasters         .f32 little-endian row-major + JSON sidecar
//   * multi-channel images  .mcb little-endian planar float32 + JSON sidecar
//   * boxes / reports       JSON with a schema_version field; readers reject
//                           unknown major versions
//
// All writers go through a temp-file-plus-rename so partial output is never
// observable at the target path.

namespace tlskit::io {

inline constexpr std::string_view kSchemaVersion = "1.0";

// --- nuclei CSV -------------------------------------------------------------

std::vector<NucleusRecord> read_nuclei_csv(const std::filesystem::path& path);
void write_nuclei_csv(const std::filesystem::path& path, std::span<const NucleusRecord> nuclei,
                      std::span<const std::string> header_comments = {});

std::string_view label_token(NucleusLabel label);
NucleusLabel parse_label(std::string_view token);

// --- grayscale / RGB rasters ------------------------------------------------

// Quantizes to 8 bits (round half away from zero, clamped to [0, 255]).
void write_pgm(const std::filesystem::path& path, const Raster<float>& image);
void write_pgm(const std::filesystem::path& path, const Raster<std::uint8_t>& image);
Raster<std::uint8_t> read_pgm(const std::filesystem::path& path);

// PGM (1 channel) or PPM (3 channels, names R,G,B) as float image.
MultiChannelImage read_image(const std::filesystem::path& path);

// --- binary masks -------------------------------------------------------------

// PNG or PGM by extension; every pixel must be exactly 0 or 255.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

// --- float32 rasters ----------------------------------------------------------

// Sidecar header path: data path with its extension replaced by ".json".
std::filesystem::path sidecar_header_path(const std::filesystem::path& data_path);

void write_f32_raster(const std::filesystem::path& data_path, const Raster<float>& raster);
Raster<float> read_f32_raster(const std::filesystem::path& data_path);

void write_mcb(const std::filesystem::path& data_path, const MultiChannelImage& image);
MultiChannelImage read_mcb(const std::filesystem::path& data_path);

// --- JSON documents -----------------------------------------------------------

std::vector<BoundingBox> read_boxes_json(const std::filesystem::path& path);
void write_boxes_json(const std::filesystem::path& path, std::span<const BoundingBox> boxes);

struct DensityMeta {
  GridSpec grid;
  std::uint32_t count_min = 0;
  std::uint32_t count_max = 0;
  float density_min = 0.0f;
  float density_max = 0.0f;
};

void write_density_meta(const std::filesystem::path& path, const DensityMeta& meta);
DensityMeta read_density_meta(const std::filesystem::path& path);

void write_loss_json(const std::filesystem::path& path, const LossBreakdown& loss);
void write_eval_report(const std::filesystem::path& path, const EvalReport& report);
void write_stats_json(const std::filesystem::path& path, const GroupComparison& comparison);

// --- patient densities CSV ------------------------------------------------------

// Columns: patient,group,tls_count,area_mm2 with group in
// {invasion, no_invasion}. Densities are computed on load.
std::vector<PatientDensity> read_patient_csv(const std::filesystem::path& path);
void write_patient_csv(const std::filesystem::path& path, std::span<const PatientDensity> patients);

// --- scene config -----------------------------------------------------------------

struct SceneConfig {
  SceneParams params;
  double pixel_pitch_um = 1.0;
  int patch_size_px = 32;

  GridSpec grid() const;
};

SceneConfig read_scene_config(const std::filesystem::path& path);
void write_scene_config(const std::filesystem::path& path, const SceneConfig& config);

// --- plumbing ----------------------------------------------------------------------

// Writes bytes to a temp file in the target directory, then renames.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

// Throws ParseError unless the document's schema_version has major version 1.
void check_schema_version(const std::string& version, const std::filesystem::path& path);

}  // namespace tlskit::io
