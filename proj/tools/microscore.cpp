// microscore: score-based nonstationarity monitoring and diagnostics for
// grayscale micrographs, plus a 2D AR simulator for calibration and power
// studies. One JSON config per run; flag overrides via --set.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "microscore/arsim.hpp"
#include "microscore/charts.hpp"
#include "microscore/csv.hpp"
#include "microscore/diagnostics.hpp"
#include "microscore/image_io.hpp"
#include "microscore/micrograph.hpp"
#include "microscore/model.hpp"
#include "microscore/render.hpp"
#include "microscore/rng.hpp"
#include "microscore/score.hpp"
#include "microscore/wma.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace microscore;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("file not found: " + path);
  json j;
  in >> j;
  return j;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

std::string hash_string(const std::string& s) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (unsigned char ch : s) h = rng::mix64(h ^ ch);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunContext {
  json config;        // resolved configuration
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;

  fs::path out(const std::string& name) {
    artifacts.push_back(name);
    return out_dir / name;
  }
};

RunContext make_context(const std::string& config_path, const std::vector<std::string>& sets,
                        const std::string& out_override, bool has_seed_override,
                        std::uint64_t seed_override) {
  RunContext ctx;
  json j = config_path.empty() ? json::object() : load_json(config_path);
  // a run metadata record is directly re-executable
  if (j.contains("resolved_config")) j = j["resolved_config"];
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects /json/pointer=value");
    const std::string ptr = kv.substr(0, eq);
    j[json::json_pointer(ptr)] = json::parse(kv.substr(eq + 1));
  }
  if (!out_override.empty()) j["out_dir"] = out_override;
  if (has_seed_override) j["seed"] = seed_override;
  if (!j.contains("out_dir")) throw std::runtime_error("out_dir is required (config or --out)");
  ctx.config = j;
  ctx.out_dir = fs::path(j["out_dir"].get<std::string>());
  ctx.seed = j.value("seed", 0ULL);
  fs::create_directories(ctx.out_dir);
  return ctx;
}

void write_metadata(RunContext& ctx, const std::string& command, json extra = json::object()) {
  json meta;
  meta["format"] = "microscore-run";
  meta["version"] = 1;
  meta["command"] = command;
  meta["resolved_config"] = ctx.config;
  meta["config_hash"] = hash_string(ctx.config.dump());
  meta["seed"] = ctx.seed;
  meta["artifacts"] = ctx.artifacts;
  if (!extra.empty()) meta["results"] = extra;
  write_json(meta, ctx.out_dir / "run_metadata.json");
}

NeighborhoodSpec neighborhood_from(const json& cfg) {
  NeighborhoodSpec nb;
  const json n = cfg.value("neighborhood", json::object());
  nb.length_scale = n.value("length_scale", 5);
  nb.shape = n.value("shape", "non-causal") == std::string("causal") ? WindowShape::causal
                                                                     : WindowShape::non_causal;
  return nb;
}

WmaKernel kernel_from(const json& cfg) {
  const json k = cfg.value("kernel", json::object());
  const int l_w = k.value("l_w", 30);
  return build_kernel(l_w, k.value("sigma_w", static_cast<double>(l_w)));
}

ModelFamily family_from(const json& cfg) {
  const json m = cfg.value("model", json::object());
  ModelFamily fam;
  const std::string kind = m.value("kind", "linear");
  fam.kind = (kind == "mlp-1-hidden" || kind == "mlp") ? ModelKind::mlp : ModelKind::linear;
  fam.hidden_nodes = m.value("hidden_nodes", 10);
  fam.activation =
      m.value("activation", "tanh") == std::string("logistic") ? Activation::logistic
                                                               : Activation::tanh;
  return fam;
}

TrainOptions train_options_from(const json& cfg, std::uint64_t seed) {
  const json m = cfg.value("model", json::object());
  TrainOptions opts;
  opts.epochs = m.value("epochs", 100);
  opts.batch_size = m.value("batch_size", 64);
  opts.polish_iters = m.value("polish_iters", 400);
  opts.seed = rng::derive(seed, 0x747261696e);
  return opts;
}

std::vector<Micrograph> load_standardized(const std::vector<std::string>& paths) {
  std::vector<Micrograph> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(standardize(load_micrograph(p)));
  return out;
}

void write_chart_csv(const ChartResult& res, const fs::path& path) {
  CsvWriter w(path.string());
  w.row("r", "c", "t2_theta", "z_sigma", "c_theta", "c_sigma", "c_m", "rwma", "sig_theta",
        "sig_sigma", "sig_multi", "sig_rwma");
  const int n = static_cast<int>(res.t2_theta.rows());
  const int mcols = static_cast<int>(res.t2_theta.cols());
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < mcols; ++c)
      w.row(r + res.margin, c + res.margin, res.t2_theta(r, c), res.z_sigma(r, c),
            res.c_theta(r, c), res.c_sigma(r, c), res.c_m(r, c), res.rwma(r, c),
            static_cast<int>(res.sig_theta(r, c)), static_cast<int>(res.sig_sigma(r, c)),
            static_cast<int>(res.sig_multi(r, c)), static_cast<int>(res.sig_rwma(r, c)));
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// ---------------------------------------------------------------- train ---

int cmd_train(RunContext& ctx) {
  const json& cfg = ctx.config;
  const json tc = cfg.value("train", json::object());
  const std::vector<std::string> refs = tc.value("references", std::vector<std::string>{});
  if (refs.empty()) throw std::runtime_error("train.references must list reference micrographs");

  const NeighborhoodSpec nb = neighborhood_from(cfg);
  const WmaKernel kernel = kernel_from(cfg);
  const ModelFamily family = family_from(cfg);
  const double alpha = cfg.value("alpha_target", 0.01);
  const double cl_fraction = tc.value("cl_fraction", 0.5);
  const SplitGranularity gran = tc.value("split", "by-image") == std::string("by-pixel-block")
                                    ? SplitGranularity::by_pixel_block
                                    : SplitGranularity::by_image;

  std::vector<Micrograph> ms = load_standardized(refs);
  PixelDataset all = extract_dataset(ms, nb);
  ms.clear();
  auto [train_d, cl_d] = split_reference(all, cl_fraction, gran);
  all = PixelDataset{};

  const json mc = cfg.value("model", json::object());
  double lambda = mc.value("lambda", 0.01);
  std::vector<double> grid = mc.value("lambda_grid", std::vector<double>{});
  std::vector<double> cv_mse;
  const TrainOptions topts = train_options_from(cfg, ctx.seed);
  if (!grid.empty())
    lambda = cross_validate_lambda(train_d, family, grid, mc.value("cv_folds", 5), topts, &cv_mse);

  FittedModel model = train(train_d, family, lambda, topts);
  std::vector<ScoreField> train_fields = compute_scores(model, train_d);
  ReferenceStats ref = training_reference_stats(train_fields);
  const double score_mean_norm = ref.s_bar_theta.norm();
  train_fields.clear();
  train_d = PixelDataset{};

  std::vector<ScoreField> cl_fields = compute_scores(model, cl_d);
  cl_d = PixelDataset{};
  ChartCalibration cal = calibrate(ref, cl_fields, kernel, alpha);

  save_model(model, ctx.out("model.json").string());
  save_calibration(cal, ctx.out("calibration.json").string());

  json report;
  report["selected_lambda"] = lambda;
  if (!grid.empty()) {
    json table = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i)
      table.push_back({{"lambda", grid[i]}, {"mean_heldout_mse", cv_mse[i]}});
    report["cv_table"] = table;
  }
  report["score_mean_norm"] = score_mean_norm;
  report["sigma_score_mean"] = ref.s_sigma_mean;
  report["sigma_hat"] = model.sigma_hat;
  report["achieved_alpha"] = cal.achieved_alpha;
  report["alpha_component"] = cal.alpha_component;
  report["training_records"] = model.info.records;
  write_json(report, ctx.out("training_report.json"));

  write_metadata(ctx, "train",
                 {{"achieved_alpha", cal.achieved_alpha}, {"selected_lambda", lambda}});
  std::cout << "trained " << (family.kind == ModelKind::linear ? "linear" : "mlp")
            << " model on " << model.info.records << " records; achieved alpha "
            << cal.achieved_alpha << "\n";
  return 0;
}

// -------------------------------------------------------------- monitor ---

int cmd_monitor(RunContext& ctx) {
  const json& cfg = ctx.config;
  const json mc = cfg.value("monitor", json::object());
  const std::vector<std::string> images = mc.value("images", std::vector<std::string>{});
  if (images.empty()) throw std::runtime_error("monitor.images must list micrographs");

  FittedModel model = load_model(mc.value("model", (ctx.out_dir / "model.json").string()));
  ChartCalibration cal =
      load_calibration(mc.value("calibration", (ctx.out_dir / "calibration.json").string()));

  std::vector<Micrograph> ms;
  for (const auto& p : images) ms.push_back(load_micrograph(p));
  std::vector<ChartResult> results = monitor(ms, model, cal);

  CsvWriter summary(ctx.out("summary.csv").string());
  summary.row("image", "chart", "power", "signal_pixels", "valid_pixels");
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& res = results[i];
    const std::string stem = stem_of(images[i]);
    write_chart_csv(res, ctx.out("chart_" + stem + ".csv"));
    const auto valid = static_cast<long long>(res.t2_theta.size());
    const auto count = [&](const auto& mask) {
      long long n = 0;
      for (Eigen::Index k = 0; k < mask.size(); ++k) n += mask.data()[k] != 0;
      return n;
    };
    summary.row(stem, "swma-theta", res.power_theta, count(res.sig_theta), valid);
    summary.row(stem, "swma-sigma", res.power_sigma, count(res.sig_sigma), valid);
    summary.row(stem, "swma-m", res.power_multi, count(res.sig_multi), valid);
    summary.row(stem, "rwma", res.power_rwma, count(res.sig_rwma), valid);
  }

  // one shared color scale per statistic across the whole run
  using Getter = const Eigen::MatrixXd& (*)(const ChartResult&);
  const std::pair<const char*, Getter> stats[] = {
      {"t2_theta", [](const ChartResult& r) -> const Eigen::MatrixXd& { return r.t2_theta; }},
      {"z_sigma", [](const ChartResult& r) -> const Eigen::MatrixXd& { return r.z_sigma; }},
      {"c_theta", [](const ChartResult& r) -> const Eigen::MatrixXd& { return r.c_theta; }},
      {"c_sigma", [](const ChartResult& r) -> const Eigen::MatrixXd& { return r.c_sigma; }},
      {"c_m", [](const ChartResult& r) -> const Eigen::MatrixXd& { return r.c_m; }},
      {"rwma", [](const ChartResult& r) -> const Eigen::MatrixXd& { return r.rwma; }}};
  for (const auto& [name, get] : stats) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& res : results) {
      lo = std::min(lo, get(res).minCoeff());
      hi = std::max(hi, get(res).maxCoeff());
    }
    for (std::size_t i = 0; i < results.size(); ++i)
      write_heatmap_png(
          ctx.out("heatmap_" + std::string(name) + "_" + stem_of(images[i]) + ".png").string(),
          get(results[i]), lo, hi);
  }

  json extra;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& res = results[i];
    extra[stem_of(images[i])] = {{"swma_theta", res.power_theta},
                                 {"swma_sigma", res.power_sigma},
                                 {"swma_m", res.power_multi},
                                 {"rwma", res.power_rwma}};
    std::cout << stem_of(images[i]) << ": swma-theta " << res.power_theta << ", swma-sigma "
              << res.power_sigma << ", swma-m " << res.power_multi << ", rwma "
              << res.power_rwma << "\n";
  }
  write_metadata(ctx, "monitor", extra);
  return 0;  // signaling is data, not failure
}

// ------------------------------------------------------------- diagnose ---

int cmd_diagnose(RunContext& ctx) {
  const json& cfg = ctx.config;
  const json dc = cfg.value("diagnose", json::object());
  const std::vector<std::string> images = dc.value("images", std::vector<std::string>{});
  if (images.empty()) throw std::runtime_error("diagnose.images must list micrographs");
  const bool hint_mode = dc.value("hint_mode", false);
  const int k_clusters = dc.value("k", 0);
  if (!hint_mode && k_clusters < 1)
    throw std::runtime_error("diagnose.k must be given unless hint_mode is set");

  const NeighborhoodSpec nb = neighborhood_from(cfg);
  // ND default kernel scale is the PMMA example setting
  json kcfg = cfg.value("kernel", json::object());
  if (!kcfg.contains("l_w")) kcfg["l_w"] = 20;
  const int l_w = kcfg["l_w"].get<int>();
  const WmaKernel kernel = build_kernel(l_w, kcfg.value("sigma_w", static_cast<double>(l_w)));

  // single model trained on the (possibly multi-phase) target data itself
  std::vector<Micrograph> ms = load_standardized(images);
  PixelDataset d = extract_dataset(ms, nb);
  const json mc = cfg.value("model", json::object());
  FittedModel model =
      train(d, family_from(cfg), mc.value("lambda", 0.01), train_options_from(cfg, ctx.seed));
  std::vector<ScoreField> fields = compute_scores(model, d);
  d = PixelDataset{};

  // smoothed score vectors pooled over images, per-image grids retained
  std::vector<Eigen::MatrixXd> z_per_image;
  std::vector<std::pair<int, int>> grids;
  Eigen::Index total = 0;
  for (const auto& f : fields) {
    Eigen::MatrixXd z = smooth_components(f.s_theta, f.interior_rows(), f.interior_cols(), kernel);
    grids.emplace_back(f.interior_rows() - 2 * kernel.l_w, f.interior_cols() - 2 * kernel.l_w);
    total += z.rows();
    z_per_image.push_back(std::move(z));
  }
  fields.clear();
  Eigen::MatrixXd z(total, z_per_image.front().cols());
  Eigen::Index at = 0;
  for (const auto& zi : z_per_image) {
    z.middleRows(at, zi.rows()) = zi;
    at += zi.rows();
  }
  z_per_image.clear();

  PcaProjection pca = pca_top3(z);
  const int hint = estimate_k_hint(pca);
  json hint_report;
  hint_report["k_hint"] = hint;
  hint_report["advisory"] = "inspect the surface export; the hint is a rough mode count";
  hint_report["explained_shares"] = {pca.explained_shares(0), pca.explained_shares(1),
                                     pca.explained_shares(2)};
  write_json(hint_report, ctx.out("khint_report.json"));
  std::cout << "k hint: " << hint << "\n";

  // surface export (r, c, height, R, G, B) per image
  const int margin = nb.length_scale + kernel.l_w;
  at = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    CsvWriter surf(ctx.out("surface_" + stem_of(images[i]) + ".csv").string());
    surf.row("r", "c", "height", "R", "G", "B");
    const auto [rows, cols] = grids[i];
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const Eigen::Index p = at + static_cast<Eigen::Index>(r) * cols + c;
        surf.row(r + margin, c + margin, pca.magnitude(p), pca.rgb(p, 0), pca.rgb(p, 1),
                 pca.rgb(p, 2));
      }
    at += static_cast<Eigen::Index>(grids[i].first) * grids[i].second;
  }

  if (hint_mode && k_clusters < 1) {
    write_metadata(ctx, "diagnose", {{"k_hint", hint}});
    return 0;
  }

  const bool cluster_pca3 = dc.value("cluster_space", "full") == std::string("pca3");
  const Eigen::MatrixXd& cluster_input = cluster_pca3 ? pca.scores : z;

  const int stability_seeds = dc.value("stability_seeds", 10);
  std::vector<PhaseLabeling> labelings;
  for (int si = 0; si < std::max(stability_seeds, 1); ++si)
    labelings.push_back(cluster_scores(cluster_input, k_clusters,
                                       rng::derive(ctx.seed, 0x6e64, static_cast<std::uint64_t>(si))));
  const PhaseLabeling& lab = labelings.front();

  CsvWriter stab(ctx.out("stability_report.csv").string());
  stab.row("seed_i", "seed_j", "agreement");
  double min_agree = 1.0;
  for (std::size_t i = 0; i < labelings.size(); ++i)
    for (std::size_t j = i + 1; j < labelings.size(); ++j) {
      const double a = label_agreement(labelings[i].labels, labelings[j].labels);
      min_agree = std::min(min_agree, a);
      stab.row(i, j, a);
    }

  at = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto [rows, cols] = grids[i];
    Eigen::MatrixXi grid(rows, cols);
    CsvWriter lcsv(ctx.out("labels_" + stem_of(images[i]) + ".csv").string());
    lcsv.row("r", "c", "label");
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        grid(r, c) = lab.labels(at + static_cast<Eigen::Index>(r) * cols + c);
        lcsv.row(r + margin, c + margin, grid(r, c));
      }
    write_label_png(ctx.out("labels_" + stem_of(images[i]) + ".png").string(), grid, k_clusters);
    // overlay on the standardized source, cropped to the valid region
    write_overlay_png(ctx.out("overlay_" + stem_of(images[i]) + ".png").string(),
                      ms[i].pixels.block(margin, margin, rows, cols), grid);
    at += static_cast<Eigen::Index>(rows) * cols;
  }

  json extra;
  extra["k"] = k_clusters;
  extra["k_hint"] = hint;
  extra["inertia"] = lab.inertia;
  extra["min_pairwise_agreement"] = min_agree;
  write_metadata(ctx, "diagnose", extra);
  std::cout << "labeled " << images.size() << " image(s) with k=" << k_clusters
            << "; min pairwise agreement " << min_agree << "\n";
  return 0;
}

// ------------------------------------------------------------- simulate ---

int cmd_simulate(RunContext& ctx) {
  const json& cfg = ctx.config;
  const json sc = cfg.value("simulate", json::object());
  if (!sc.contains("ar")) throw std::runtime_error("simulate.ar block is required");
  ArSpec spec = arspec_from_json(sc["ar"]);
  const int height = sc.value("height", 256);
  const int width = sc.value("width", 256);
  const int count = sc.value("count", 1);

  for (int i = 0; i < count; ++i) {
    ArSpec s = spec;
    s.seed = rng::derive(ctx.seed, 0x73696d, static_cast<std::uint64_t>(i));
    Micrograph m = generate(s, height, width);
    const std::string name = "micrograph_" + std::to_string(i);
    const auto [lo, hi] = write_png_gray16(ctx.out(name + ".png").string(), m.pixels);
    json side;
    side["ar"] = arspec_to_json(s);
    side["height"] = height;
    side["width"] = width;
    side["value_range"] = {lo, hi};
    write_json(side, ctx.out(name + ".json"));
  }
  write_metadata(ctx, "simulate", {{"count", count}});
  std::cout << "wrote " << count << " micrograph(s) to " << ctx.out_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------- power-study ---

int cmd_power_study(RunContext& ctx) {
  const json& cfg = ctx.config;
  const json pc = cfg.value("power_study", json::object());

  GammaSweep sweep;
  sweep.base.c0 = pc.value("c0", 1.0);
  sweep.base.l_g = pc.value("l_g", 2);
  sweep.base.sigma_ar = pc.value("sigma_ar", 0.01);
  sweep.base.burn_margin = pc.value("burn_margin", 64);
  const std::string tr = pc.value("transform", "identity");
  sweep.base.transform =
      tr == "clamped-exp" ? PixelTransform::clamped_exp : PixelTransform::identity;

  auto phi_of = [&](const char* key) {
    const std::vector<double> v = pc.at(key);
    const int side = sweep.base.l_g + 1;
    if (static_cast<int>(v.size()) != side * side)
      throw std::runtime_error(std::string(key) + " must have (l_g+1)^2 entries");
    Eigen::MatrixXd m(side, side);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) m(r, c) = v[static_cast<std::size_t>(r) * side + c];
    return m;
  };
  sweep.phi0 = phi_of("phi0_row_major");
  sweep.phi1 = phi_of("phi1_row_major");
  sweep.base.phi = sweep.phi0;
  sweep.gammas = pc.value("gammas", std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  sweep.replicates = pc.value("replicates", 10);
  sweep.height = pc.value("height", 256);
  sweep.width = pc.value("width", 256);
  sweep.alpha_target = cfg.value("alpha_target", 0.01);
  sweep.seed = ctx.seed;

  PowerStudyOptions opts;
  opts.family = family_from(cfg);
  opts.lambda = cfg.value("model", json::object()).value("lambda", 0.01);
  opts.neighborhood = neighborhood_from(cfg);
  const WmaKernel kernel = kernel_from(cfg);
  opts.kernel_l_w = kernel.l_w;
  opts.kernel_sigma_w = kernel.sigma_w;
  opts.train_images = pc.value("train_images", 4);
  opts.cl_images = pc.value("cl_images", 4);
  opts.monitor_images = pc.value("monitor_images", 1);
  opts.direct_limits = pc.value("direct_limits", false);
  opts.train_opts = train_options_from(cfg, ctx.seed);

  PowerStudyResult res = power_study(sweep, opts);
  write_power_csv(res, ctx.out("power.csv").string());
  write_power_summary_csv(res, sweep.gammas, ctx.out("power_summary.csv").string());

  json extra;
  extra["achieved_alpha"] = res.achieved_alpha;
  json med = json::array();
  for (std::size_t gi = 0; gi < sweep.gammas.size(); ++gi)
    med.push_back({{"gamma", sweep.gammas[gi]},
                   {"swma_theta", res.median_by_gamma[gi][0]},
                   {"swma_sigma", res.median_by_gamma[gi][1]},
                   {"swma_m", res.median_by_gamma[gi][2]},
                   {"rwma", res.median_by_gamma[gi][3]}});
  extra["median_power"] = med;
  write_metadata(ctx, "power-study", extra);

  for (std::size_t gi = 0; gi < sweep.gammas.size(); ++gi)
    std::cout << "gamma " << sweep.gammas[gi] << ": median swma-m "
              << res.median_by_gamma[gi][2] << ", rwma " << res.median_by_gamma[gi][3] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"score-based nonstationarity monitoring and diagnostics for micrographs"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::vector<std::string> sets;
  std::uint64_t seed_override = 0;
  bool has_seed = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration (or a run_metadata.json)");
    sub->add_option("--out", out_override, "output directory (overrides config out_dir)");
    sub->add_option("--seed", seed_override, "top-level seed (overrides config)")
        ->each([&](const std::string&) { has_seed = true; });
    sub->add_option("--set", sets, "override a config entry: /json/pointer=value");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "fit the reference model and calibrate");
  CLI::App* monitor_cmd = app.add_subcommand("monitor", "chart new micrographs");
  CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "cluster score vectors into phases");
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "generate AR micrographs");
  CLI::App* power_cmd = app.add_subcommand("power-study", "Monte Carlo false-alarm/power sweep");
  for (CLI::App* sub : {train_cmd, monitor_cmd, diagnose_cmd, simulate_cmd, power_cmd})
    add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    RunContext ctx = make_context(config_path, sets, out_override, has_seed, seed_override);
    if (train_cmd->parsed()) return cmd_train(ctx);
    if (monitor_cmd->parsed()) return cmd_monitor(ctx);
    if (diagnose_cmd->parsed()) return cmd_diagnose(ctx);
    if (simulate_cmd->parsed()) return cmd_simulate(ctx);
    if (power_cmd->parsed()) return cmd_power_study(ctx);
  } catch (const std::exception& e) {
    // machine-readable error record on the diagnostic stream
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
