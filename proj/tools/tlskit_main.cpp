// tlskit command line: synthetic scenes, density/attention maps, signed
// distance fields, loss reports, detection evaluation and group statistics.
//
// Exit codes: 0 success, 1 internal error, 2 input or contract violation
// (the offending error name is printed on stderr).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "tlskit/core.hpp"
#include "tlskit/density.hpp"
#include "tlskit/io.hpp"
#include "tlskit/losses.hpp"
#include "tlskit/metrics.hpp"
#include "tlskit/sdt.hpp"
#include "tlskit/stats.hpp"
#include "tlskit/synth.hpp"

namespace {

using namespace tlskit;

std::pair<double, double> parse_extent(const std::string& text) {
  const std::size_t pos = text.find('x');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= text.size())
    throw Error(Errc::ParseError, "extent must look like 4000x4000, got '" + text + "'");
  try {
    return {std::stod(text.substr(0, pos)), std::stod(text.substr(pos + 1))};
  } catch (const std::exception&) {
    throw Error(Errc::ParseError, "extent must look like 4000x4000, got '" + text + "'");
  }
}

LabelFilter parse_labels(const std::string& csv) {
  LabelFilter f{false, false, false};
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t pos = csv.find(',', start);
    if (pos == std::string::npos) pos = csv.size();
    const std::string tok = csv.substr(start, pos - start);
    if (tok == "lymphocyte") {
      f.lymphocyte = true;
    } else if (tok == "non_lymphocyte") {
      f.non_lymphocyte = true;
    } else if (tok == "unknown") {
      f.unknown = true;
    } else if (!tok.empty()) {
      throw Error(Errc::ParseError, "unknown label '" + tok + "'");
    }
    start = pos + 1;
  }
  if (!f.lymphocyte && !f.non_lymphocyte && !f.unknown)
    throw Error(Errc::ParseError, "label filter selects nothing");
  return f;
}

MatchCriterion parse_criterion(const std::string& text) {
  if (text == "any-overlap") return MatchCriterion::any_overlap();
  const std::size_t eq = text.find('=');
  if (eq != std::string::npos) {
    const std::string name = text.substr(0, eq);
    double t = 0.0;
    try {
      t = std::stod(text.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad criterion threshold in '" + text + "'");
    }
    if (name == "iou") return MatchCriterion::iou(t);
    if (name == "box-coverage") return MatchCriterion::box_coverage(t);
  }
  throw Error(Errc::ParseError,
              "criterion must be any-overlap, iou=<t> or box-coverage=<t>, got '" + text + "'");
}

Raster<float> quantized_to_float(const Raster<std::uint8_t>& img) {
  Raster<float> out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = float(src[i]);
  return out;
}

// --- subcommand payloads -----------------------------------------------------

struct SynthArgs {
  std::string params_file;
  std::string extent = "4000x4000";
  int clusters = 5;
  double radius_um = 150.0;
  double nuclei_per_cluster = 100.0;
  double background_per_mm2 = 50.0;
  double nonlymph_fraction = 0.3;
  std::uint64_t seed = 1;
  double pitch_um = 1.0;
  int patch_size = 32;
  std::string out_nuclei = "nuclei.csv";
  std::string out_boxes = "boxes.json";
  std::string out_params;
};

void run_synth(const SynthArgs& a) {
  io::SceneConfig cfg;
  if (!a.params_file.empty()) {
    cfg = io::read_scene_config(a.params_file);
  } else {
    const auto [w, h] = parse_extent(a.extent);
    cfg.params = {w, h, a.clusters, a.radius_um, a.nuclei_per_cluster, a.background_per_mm2,
                  a.nonlymph_fraction, a.seed};
    cfg.pixel_pitch_um = a.pitch_um;
    cfg.patch_size_px = a.patch_size;
  }

  const GridSpec grid = cfg.grid();
  const Scene scene = generate_scene(cfg.params, grid);

  const std::vector<std::string> echo = {
      "tlskit synth scene",
      "extent_um=" + std::to_string(cfg.params.extent_w_um) + "x" +
          std::to_string(cfg.params.extent_h_um),
      "n_clusters=" + std::to_string(cfg.params.n_clusters),
      "cluster_radius_um=" + std::to_string(cfg.params.cluster_radius_um),
      "nuclei_per_cluster=" + std::to_string(cfg.params.nuclei_per_cluster),
      "background_per_mm2=" + std::to_string(cfg.params.background_per_mm2),
      "non_lymphocyte_fraction=" + std::to_string(cfg.params.non_lymphocyte_fraction),
      "seed=" + std::to_string(cfg.params.seed),
      "pixel_pitch_um=" + std::to_string(cfg.pixel_pitch_um),
      "patch_size_px=" + std::to_string(cfg.patch_size_px)};
  io::write_nuclei_csv(a.out_nuclei, scene.nuclei, echo);
  io::write_boxes_json(a.out_boxes, scene.gt_boxes);
  if (!a.out_params.empty()) io::write_scene_config(a.out_params, cfg);
  std::cout << "wrote " << scene.nuclei.size() << " nuclei, " << scene.gt_boxes.size()
            << " boxes\n";
}

struct DensityArgs {
  std::string nuclei;
  int patch_size = 32;
  double pitch_um = 1.0;
  std::string extent;
  std::string labels = "lymphocyte";
  std::string out = "density.pgm";
  std::string meta;
};

void run_density(const DensityArgs& a) {
  const auto [w, h] = parse_extent(a.extent);
  GridSpec spec{a.patch_size, a.pitch_um, int(std::lround(w)), int(std::lround(h))};
  validate(spec);

  const auto nuclei = io::read_nuclei_csv(a.nuclei);
  const CountGrid counts = count_nuclei(nuclei, spec, parse_labels(a.labels));
  const DensityMap density = normalize_density(counts);

  io::write_pgm(a.out, density.cells);

  auto counts_px = counts.cells.pixels();
  auto dens_px = density.cells.pixels();
  io::DensityMeta meta;
  meta.grid = spec;
  meta.count_min = *std::min_element(counts_px.begin(), counts_px.end());
  meta.count_max = *std::max_element(counts_px.begin(), counts_px.end());
  meta.density_min = *std::min_element(dens_px.begin(), dens_px.end());
  meta.density_max = *std::max_element(dens_px.begin(), dens_px.end());
  std::filesystem::path meta_path = a.meta.empty()
      ? std::filesystem::path(a.out).replace_extension(".meta.json")
      : std::filesystem::path(a.meta);
  io::write_density_meta(meta_path, meta);
}

void run_lda(const std::string& in, const std::string& out) {
  Raster<std::uint8_t> img = io::read_pgm(in);
  for (auto& v : img.pixels()) v = std::uint8_t(255 - v);
  io::write_pgm(out, img);
}

void run_pool(const std::string& in, int d, const std::string& out) {
  const std::filesystem::path p(in);
  const MultiChannelImage img =
      p.extension() == ".mcb" ? io::read_mcb(p) : io::read_image(p);
  io::write_mcb(out, mean_pool(img, d));
}

void run_assemble(const std::string& rgb, const std::string& lda_path, const std::string& out) {
  const MultiChannelImage rgb_img = io::read_mcb(rgb);
  Raster<float> att;
  const std::filesystem::path lp(lda_path);
  if (lp.extension() == ".mcb") {
    const MultiChannelImage m = io::read_mcb(lp);
    if (m.channels() != 1)
      throw Error(Errc::DimMismatch, "LDA image must have one channel, got " +
                                         std::to_string(m.channels()));
    att = Raster<float>(m.width(), m.height());
    auto src = m.channel(0);
    std::copy(src.begin(), src.end(), att.pixels().begin());
  } else {
    att = quantized_to_float(io::read_pgm(lp));
  }
  io::write_mcb(out, assemble_input(rgb_img, att));
}

void run_sdf(const std::string& mask_path, const std::string& out, std::string preview,
             bool no_preview) {
  const BinaryMask mask = io::read_mask(mask_path);
  const SdfField field = sdf(mask);
  io::write_f32_raster(out, field.values);

  if (no_preview) return;
  if (preview.empty())
    preview = std::filesystem::path(out).replace_extension(".preview.pgm").string();
  auto px = field.values.pixels();
  const auto [mn, mx] = std::minmax_element(px.begin(), px.end());
  Raster<float> shown(field.width(), field.height(), 0.0f);
  if (*mx > *mn) {
    auto dst = shown.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
      dst[i] = 255.0f * (px[i] - *mn) / (*mx - *mn);
  }
  io::write_pgm(preview, shown);
}

void run_loss(const std::string& pred_path, const std::string& gt_path, const std::string& out) {
  const BinaryMask pred = io::read_mask(pred_path);
  const BinaryMask gt = io::read_mask(gt_path);
  if (!pred.same_dims(gt))
    throw Error(Errc::DimMismatch, "prediction " + std::to_string(pred.width()) + "x" +
                                       std::to_string(pred.height()) + " vs ground truth " +
                                       std::to_string(gt.width()) + "x" +
                                       std::to_string(gt.height()));

  std::vector<double> s(pred.pixel_count()), g(gt.pixel_count());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = pred.bits()[i];
    g[i] = gt.bits()[i];
  }
  // Hard masks act as their own softmax outputs for the Dice and CE terms.
  const ProbArray sp = probabilities(std::move(s));
  const ProbArray gp = probabilities(std::move(g));
  LossBreakdown loss;
  loss.dice = dice_loss(sp, gp);
  loss.ce = ce_loss_from_probabilities(sp, gp);
  loss.sdf = sdf_loss(pred, gt);
  io::write_loss_json(out, loss);
}

struct EvalArgs {
  std::string pred;
  std::string boxes;
  std::string criterion = "any-overlap";
  std::string betas = "1,2";
  int connectivity = 8;
  std::string out = "report.json";
};

void run_eval(const EvalArgs& a) {
  const BinaryMask pred = io::read_mask(a.pred);
  const auto boxes = io::read_boxes_json(a.boxes);

  std::vector<double> betas;
  std::size_t start = 0;
  while (start <= a.betas.size()) {
    std::size_t pos = a.betas.find(',', start);
    if (pos == std::string::npos) pos = a.betas.size();
    const std::string tok = a.betas.substr(start, pos - start);
    if (!tok.empty()) {
      try {
        betas.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error(Errc::ParseError, "bad beta '" + tok + "'");
      }
    }
    start = pos + 1;
  }
  if (betas.empty()) throw Error(Errc::ParseError, "no beta values given");
  if (a.connectivity != 4 && a.connectivity != 8)
    throw Error(Errc::ParseError, "connectivity must be 4 or 8");

  const EvalReport report =
      evaluate_detection(pred, boxes, parse_criterion(a.criterion), betas,
                         a.connectivity == 4 ? Connectivity::Four : Connectivity::Eight);
  io::write_eval_report(a.out, report);
}

void run_stats(const std::string& in, const std::string& out) {
  const auto patients = io::read_patient_csv(in);
  io::write_stats_json(out, group_compare(patients));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TLS detection toolkit: density maps, SDF losses, detection metrics, statistics"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic nuclei scene with ground-truth boxes");
  synth_cmd->add_option("--params", synth_args.params_file, "Scene config JSON (overrides flags)");
  synth_cmd->add_option("--extent", synth_args.extent, "Scene extent in um, WxH");
  synth_cmd->add_option("--clusters", synth_args.clusters, "Number of lymphocyte clusters");
  synth_cmd->add_option("--radius-um", synth_args.radius_um, "Cluster radius (um)");
  synth_cmd->add_option("--nuclei-per-cluster", synth_args.nuclei_per_cluster, "Poisson mean per cluster");
  synth_cmd->add_option("--background-per-mm2", synth_args.background_per_mm2, "Background nuclei rate");
  synth_cmd->add_option("--nonlymph-fraction", synth_args.nonlymph_fraction, "Non-lymphocyte share of background");
  synth_cmd->add_option("--seed", synth_args.seed, "RNG seed");
  synth_cmd->add_option("--pitch-um", synth_args.pitch_um, "Pixel pitch (um/px)");
  synth_cmd->add_option("--patch-size", synth_args.patch_size, "Density patch size d (px)");
  synth_cmd->add_option("--out-nuclei", synth_args.out_nuclei, "Output nuclei CSV");
  synth_cmd->add_option("--out-boxes", synth_args.out_boxes, "Output boxes JSON");
  synth_cmd->add_option("--out-params", synth_args.out_params, "Echo resolved params to JSON");
  synth_cmd->callback([&] { run_synth(synth_args); });

  DensityArgs density_args;
  auto* density_cmd = app.add_subcommand("density", "Grid nuclei into a normalized density map");
  density_cmd->add_option("--nuclei", density_args.nuclei, "Input nuclei CSV")->required();
  density_cmd->add_option("--patch-size", density_args.patch_size, "Patch size d (px)");
  density_cmd->add_option("--pitch-um", density_args.pitch_um, "Pixel pitch (um/px)");
  density_cmd->add_option("--extent", density_args.extent, "WSI extent in px, WxH")->required();
  density_cmd->add_option("--labels", density_args.labels, "Comma list of labels to count");
  density_cmd->add_option("-o,--out", density_args.out, "Output density PGM");
  density_cmd->add_option("--meta", density_args.meta, "Output meta JSON (default: <out>.meta.json)");
  density_cmd->callback([&] { run_density(density_args); });

  std::string lda_in, lda_out = "lda.pgm";
  auto* lda_cmd = app.add_subcommand("lda", "Reverse a density map into an attention map");
  lda_cmd->add_option("--in", lda_in, "Input density PGM")->required();
  lda_cmd->add_option("-o,--out", lda_out, "Output attention PGM");
  lda_cmd->callback([&] { run_lda(lda_in, lda_out); });

  std::string pool_in, pool_out = "pooled.mcb";
  int pool_d = 32;
  auto* pool_cmd = app.add_subcommand("pool", "Mean-pool an image by d x d tiles");
  pool_cmd->add_option("--in", pool_in, "Input image (.pgm/.ppm/.mcb)")->required();
  pool_cmd->add_option("-d,--patch-size", pool_d, "Tile size d (px)");
  pool_cmd->add_option("-o,--out", pool_out, "Output .mcb image");
  pool_cmd->callback([&] { run_pool(pool_in, pool_d, pool_out); });

  std::string asm_rgb, asm_lda, asm_out = "input.mcb";
  auto* asm_cmd = app.add_subcommand("assemble", "Stack pooled RGB + LDA into a 4-channel input");
  asm_cmd->add_option("--rgb", asm_rgb, "Pooled RGB .mcb")->required();
  asm_cmd->add_option("--lda", asm_lda, "Attention map (.pgm or .mcb)")->required();
  asm_cmd->add_option("-o,--out", asm_out, "Output 4-channel .mcb");
  asm_cmd->callback([&] { run_assemble(asm_rgb, asm_lda, asm_out); });

  std::string sdf_mask, sdf_out = "sdf.f32", sdf_preview;
  bool sdf_no_preview = false;
  auto* sdf_cmd = app.add_subcommand("sdf", "Signed distance field of a binary mask");
  sdf_cmd->add_option("--mask", sdf_mask, "Input mask (.png/.pgm, values 0/255)")->required();
  sdf_cmd->add_option("-o,--out", sdf_out, "Output .f32 raster (+ .json header)");
  sdf_cmd->add_option("--preview", sdf_preview, "Preview PGM path (default: <out>.preview.pgm)");
  sdf_cmd->add_flag("--no-preview", sdf_no_preview, "Skip the preview heatmap");
  sdf_cmd->callback([&] { run_sdf(sdf_mask, sdf_out, sdf_preview, sdf_no_preview); });

  std::string loss_pred, loss_gt, loss_out = "loss.json";
  auto* loss_cmd = app.add_subcommand("loss", "Dice + CE + SDF loss between two masks");
  loss_cmd->add_option("--pred", loss_pred, "Predicted mask")->required();
  loss_cmd->add_option("--gt", loss_gt, "Ground-truth mask")->required();
  loss_cmd->add_option("-o,--out", loss_out, "Output loss JSON");
  loss_cmd->callback([&] { run_loss(loss_pred, loss_gt, loss_out); });

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Detection metrics of a mask against ground-truth boxes");
  eval_cmd->add_option("--pred", eval_args.pred, "Predicted mask")->required();
  eval_cmd->add_option("--boxes", eval_args.boxes, "Ground-truth boxes JSON")->required();
  eval_cmd->add_option("--criterion", eval_args.criterion, "any-overlap | iou=<t> | box-coverage=<t>");
  eval_cmd->add_option("--beta", eval_args.betas, "Comma list of F-score betas");
  eval_cmd->add_option("--connectivity", eval_args.connectivity, "Component connectivity (4 or 8)");
  eval_cmd->add_option("-o,--out", eval_args.out, "Output report JSON");
  eval_cmd->callback([&] { run_eval(eval_args); });

  std::string stats_in, stats_out = "stats.json";
  auto* stats_cmd = app.add_subcommand("stats", "Group comparison of per-patient TLS densities");
  stats_cmd->add_option("--in", stats_in, "Input CSV: patient,group,tls_count,area_mm2")->required();
  stats_cmd->add_option("-o,--out", stats_out, "Output stats JSON");
  stats_cmd->callback([&] { run_stats(stats_in, stats_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const tlskit::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
