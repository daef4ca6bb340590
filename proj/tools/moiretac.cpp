// moiretac: reproducible moire-sensor experiments from one JSON config.
// Verbs: design, simulate, extract, calibrate, eval, gate.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "moire/config.hpp"
#include "moire/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace moire;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool overwrite = false;
};

RunConfig load_run_config(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? default_config() : load_config(args.config_path);
  if (args.seed) {
    cfg.render.seed = *args.seed;
    cfg.dataset.seed = *args.seed;
  }
  return cfg;
}

fs::path prepare_out_dir(const CommonArgs& args) {
  if (args.out_dir.empty()) throw Error("missing --out directory");
  fs::path dir(args.out_dir);
  if (fs::exists(dir) && !fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir) && !args.overwrite)
    throw Error(dir.string() + " is not empty; pass --overwrite to reuse it");
  fs::create_directories(dir);
  return dir;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& command,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
  json j;
  j["schema_version"] = "1";
  j["command"] = command;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = seed;
  j["outputs"] = outputs;
  j["annotation"] = {{"timestamp", timestamp_utc()}};
  write_text_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

json metrics_json(const Metrics& m) {
  static const char* axis_names[6] = {"Fx", "Fy", "Fz", "Tx", "Ty", "Tz"};
  json r2 = json::object(), mae = json::object();
  for (int a = 0; a < 6; ++a) {
    r2[axis_names[a]] = m.axes[a].r2 ? json(*m.axes[a].r2) : json(nullptr);
    mae[axis_names[a]] = m.axes[a].mae;
  }
  return json{{"samples", m.sample_count}, {"r2", r2}, {"mae", mae}};
}

void print_summary(const json& j) { std::cout << j.dump() << std::endl; }

// ---------------------------------------------------------------------------

int cmd_design(const CommonArgs& args) {
  const RunConfig cfg = load_run_config(args);
  const fs::path dir = prepare_out_dir(args);

  std::string csv = "p1,p2,a_over_Z,delta_obj,delta_eff_eq7,A_exact,Lambda_apparent,trend\n";
  json rows = json::array();
  for (const auto& [p1, p2] : cfg.design_pairs) {
    const double a_over_z = cfg.design_a_over_z;
    const double z = cfg.geometry.camera_distance;
    const SensorGeometryd geom(Gratingd(p1, 0.0), Gratingd(p2, 0.0), a_over_z * z, z);
    const double dobj = delta_obj(p1, p2);
    const double deff = delta_eff_approx(geom);
    json row = {{"p1", p1},
                {"p2", p2},
                {"a_over_Z", a_over_z},
                {"delta_obj", dobj},
                {"delta_eff_eq7", deff}};
    csv += format_double(p1) + "," + format_double(p2) + "," + format_double(a_over_z) + "," +
           format_double(dobj) + "," + format_double(deff) + ",";
    try {
      const double amp = amplification_exact(geom);
      const double lam = lambda_apparent(geom);
      std::string trend;
      try {
        trend = to_string(compression_trend(geom));
      } catch (const BoundaryCase&) {
        trend = "boundary";
      }
      csv += format_double(amp) + "," + format_double(lam) + "," + trend + "\n";
      row["A_exact"] = amp;
      row["Lambda_apparent"] = lam;
      row["trend"] = trend;
    } catch (const DegenerateGratings&) {
      csv += "nan,nan,degenerate\n";
      row["trend"] = "degenerate";
    }
    rows.push_back(row);
  }
  write_text_atomic(dir / "design.csv", csv);
  print_summary(json{{"command", "design"},
                     {"out", (dir / "design.csv").string()},
                     {"rows", rows},
                     {"config_hash", config_hash(cfg)}});
  return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& mode) {
  const RunConfig cfg = load_run_config(args);
  cfg.material.validate(cfg.geometry, cfg.ranges);
  const fs::path dir = prepare_out_dir(args);
  std::vector<std::string> outputs;

  RenderConfig ref_cfg = cfg.render;
  ref_cfg.noise_sigma = 0.0;

  if (mode == "dataset") {
    const auto plan = dataset_wrench_plan(cfg.dataset, cfg.ranges);
    const ImageGray reference = render_wrench(cfg.geometry, Wrench{}, cfg.material, ref_cfg);
    write_pgm(reference, dir / "reference.pgm");
    outputs.push_back("reference.pgm");
    std::vector<ImageGray> frames(plan.size());
    parallel_for(plan.size(), [&](std::size_t i) {
      RenderConfig fc = cfg.render;
      fc.seed = derive_seed(cfg.render.seed, i);
      frames[i] = render_wrench(cfg.geometry, plan[i].first, cfg.material, fc, cfg.ranges);
    });
    for (std::size_t i = 0; i < frames.size(); ++i) {
      write_pgm(frames[i], dir / frame_filename(int(i)));
      outputs.push_back(frame_filename(int(i)));
    }
    write_wrenches_csv(dir / "wrenches.csv", plan);
    outputs.push_back("wrenches.csv");
    write_manifest(dir, cfg, "simulate", cfg.render.seed, outputs);
    print_summary(json{{"command", "simulate"},
                       {"mode", mode},
                       {"frames", plan.size()},
                       {"out", dir.string()},
                       {"config_hash", config_hash(cfg)}});
    return 0;
  }

  if (mode != "fig2") throw ConfigError("simulate: mode must be 'dataset' or 'fig2'");

  // Pure-transform sweeps in the style of the press/shear/scale/rotation
  // simulation panels: each folder varies one deformation parameter.
  const int n = 10;
  struct SweepDef {
    const char* name;
    double lo, hi;
  };
  const SweepDef sweeps[4] = {{"press", 0.005, 0.100},  // mm of spacing reduction
                              {"shear", 0.0, 0.090},    // mm of lateral translation
                              {"scale", 0.0, 0.05},     // strain
                              {"rotation", 0.0, rad(9.0)}};
  for (int si = 0; si < 4; ++si) {
    const SweepDef& s = sweeps[si];
    const fs::path sub = dir / s.name;
    fs::create_directories(sub);
    for (int i = 0; i < n; ++i) {
      const double v = s.lo + (s.hi - s.lo) * i / (n - 1);
      DeformationState d;
      d.spacing = cfg.geometry.spacing;
      if (si == 0) d.spacing = cfg.geometry.spacing - v;
      if (si == 1) d.displacement = Vec2d(v, 0.0);
      if (si == 2) d.strain = v;
      if (si == 3) d.twist = v;
      RenderConfig fc = cfg.render;
      fc.seed = derive_seed(cfg.render.seed, std::uint64_t(i) + 1000ull * si);
      const ImageGray img = render(cfg.geometry, d, cfg.material, fc);
      write_pgm(img, sub / frame_filename(i));
      outputs.push_back(std::string(s.name) + "/" + frame_filename(i));
    }
  }
  write_manifest(dir, cfg, "simulate-fig2", cfg.render.seed, outputs);
  print_summary(json{{"command", "simulate"},
                     {"mode", mode},
                     {"frames", outputs.size()},
                     {"out", dir.string()},
                     {"config_hash", config_hash(cfg)}});
  return 0;
}

std::vector<fs::path> list_frames(const fs::path& in_dir) {
  std::vector<fs::path> frames;
  for (const auto& e : fs::directory_iterator(in_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && e.path().extension() == ".pgm")
      frames.push_back(e.path());
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

int cmd_extract(const CommonArgs& args, const std::string& in_dir, std::string reference_path) {
  const RunConfig cfg = load_run_config(args);
  const fs::path dir = prepare_out_dir(args);
  const fs::path in(in_dir);
  if (reference_path.empty()) reference_path = (in / "reference.pgm").string();
  const ImageGray reference = read_pgm(reference_path, cfg.render.scale);
  const auto frame_paths = list_frames(in);
  if (frame_paths.empty()) throw Error("extract: no frame_*.pgm files in " + in.string());

  const FeatureExtractor extractor(reference, cfg.features);
  std::vector<MoireObservables> rows(frame_paths.size());
  parallel_for(frame_paths.size(), [&](std::size_t i) {
    rows[i] = extractor.extract(read_pgm(frame_paths[i], cfg.render.scale));
  });
  write_features_csv(dir / "features.csv", rows);
  print_summary(json{{"command", "extract"},
                     {"frames", rows.size()},
                     {"out", (dir / "features.csv").string()},
                     {"reference_lambda_mm", extractor.reference_peak().lambda},
                     {"reference_theta_deg", deg(extractor.reference_peak().theta)}});
  return 0;
}

Dataset dataset_from_csv(const std::string& features_path, const std::string& wrenches_path) {
  const auto obs = read_features_csv(features_path);
  const auto wr = read_wrenches_csv(wrenches_path);
  if (obs.size() != wr.size())
    throw Error("features and wrenches row counts differ (" + std::to_string(obs.size()) +
                " vs " + std::to_string(wr.size()) + ")");
  Dataset data;
  data.samples.resize(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i)
    data.samples[i] = Sample{wr[i].first, obs[i], wr[i].second};
  return data;
}

int cmd_calibrate(const CommonArgs& args, const std::string& features_path,
                  const std::string& wrenches_path) {
  const RunConfig cfg = load_run_config(args);
  const fs::path dir = prepare_out_dir(args);
  const Dataset data = dataset_from_csv(features_path, wrenches_path);
  const FitResult result = fit(data, cfg.ridge_lambda, cfg.split_seed, cfg.test_fraction);
  save_model(result.model, dir / "model.json");
  write_dataset_csv(dir / "dataset.csv", data);
  print_summary(json{{"command", "calibrate"},
                     {"model", (dir / "model.json").string()},
                     {"dataset", (dir / "dataset.csv").string()},
                     {"train_samples", result.train_indices.size()},
                     {"held_out", metrics_json(result.held_out)}});
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& features_path,
             const std::string& wrenches_path) {
  const CalibrationModel model = load_model(model_path);
  const Dataset data = dataset_from_csv(features_path, wrenches_path);
  print_summary(json{{"command", "eval"}, {"metrics", metrics_json(evaluate(model, data))}});
  return 0;
}

int cmd_gate(const CommonArgs& args, const std::string& in_dir, std::string baseline_path) {
  const RunConfig cfg = load_run_config(args);
  const fs::path dir = prepare_out_dir(args);
  const fs::path in(in_dir);
  if (baseline_path.empty()) baseline_path = (in / "reference.pgm").string();
  const ImageGray baseline = read_pgm(baseline_path, cfg.render.scale);
  const auto frame_paths = list_frames(in);
  if (frame_paths.empty()) throw Error("gate: no frame_*.pgm files in " + in.string());

  GateConfig gate_cfg = cfg.gate;
  if (cfg.gate_auto_threshold) {
    const double p99 = noise_floor_er(baseline, cfg.render.noise_sigma, 100, cfg.render.seed,
                                      gate_cfg.roi_fraction);
    gate_cfg.t_on = 5.0 * std::max(p99, 1e-9);
  }
  gate_cfg.validate();

  std::string csv = "frame,er,mode\n";
  GateState state;
  const Roi roi = central_roi(baseline.height, baseline.width, gate_cfg.roi_fraction);
  state.baseline_energy =
      baseline.values.block(roi.r0, roi.c0, roi.rows(), roi.cols()).square().sum();
  int switches = 0;
  for (std::size_t i = 0; i < frame_paths.size(); ++i) {
    const ImageGray frame = read_pgm(frame_paths[i], cfg.render.scale);
    const double er = energy_ratio(frame, baseline, gate_cfg.roi_fraction);
    const Mode before = state.mode;
    auto [next, m] = update(state, er, gate_cfg);
    state = next;
    if (m != before) ++switches;
    csv += std::to_string(i) + "," + format_double(er) + "," + to_string(m) + "\n";
  }
  write_text_atomic(dir / "stream.csv", csv);
  print_summary(json{{"command", "gate"},
                     {"frames", frame_paths.size()},
                     {"t_on", gate_cfg.t_on},
                     {"t_off", gate_cfg.t_off()},
                     {"switches", switches},
                     {"final_mode", to_string(state.mode)},
                     {"out", (dir / "stream.csv").string()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MoireTac synthetic sensing toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string mode = "dataset";
  std::string in_dir, reference_path, baseline_path;
  std::string features_path, wrenches_path, model_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "run configuration JSON");
    sub->add_option("--out", common.out_dir, "output directory")->required();
    sub->add_option("--seed", common.seed, "override the configured seeds");
    sub->add_flag("--overwrite", common.overwrite, "allow writing into a non-empty directory");
  };

  CLI::App* design = app.add_subcommand("design", "emit the sensitivity design table");
  add_common(design);

  CLI::App* simulate = app.add_subcommand("simulate", "render a dataset or figure sweeps");
  add_common(simulate);
  simulate->add_option("--mode", mode, "dataset|fig2")->check(CLI::IsMember({"dataset", "fig2"}));

  CLI::App* extract = app.add_subcommand("extract", "extract features from rendered frames");
  add_common(extract);
  extract->add_option("--in", in_dir, "directory with reference.pgm and frame_*.pgm")->required();
  extract->add_option("--reference", reference_path, "override the reference frame path");

  CLI::App* calibrate = app.add_subcommand("calibrate", "fit the observable->wrench model");
  add_common(calibrate);
  calibrate->add_option("--features", features_path, "features CSV")->required();
  calibrate->add_option("--wrenches", wrenches_path, "wrenches CSV")->required();

  CLI::App* evalc = app.add_subcommand("eval", "evaluate a model on a dataset");
  evalc->add_option("--model", model_path, "model JSON")->required();
  evalc->add_option("--features", features_path, "features CSV")->required();
  evalc->add_option("--wrenches", wrenches_path, "wrenches CSV")->required();

  CLI::App* gate = app.add_subcommand("gate", "run the contact gate over a frame stream");
  add_common(gate);
  gate->add_option("--in", in_dir, "directory with frame_*.pgm")->required();
  gate->add_option("--baseline", baseline_path, "baseline frame (default <in>/reference.pgm)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (design->parsed()) return cmd_design(common);
    if (simulate->parsed()) return cmd_simulate(common, mode);
    if (extract->parsed()) return cmd_extract(common, in_dir, reference_path);
    if (calibrate->parsed()) return cmd_calibrate(common, features_path, wrenches_path);
    if (evalc->parsed()) return cmd_eval(model_path, features_path, wrenches_path);
    if (gate->parsed()) return cmd_gate(common, in_dir, baseline_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const Error& e) {
    // The domain error family maps to the numeric exit code; the base Error
    // covers file and format problems.
    const bool numeric = dynamic_cast<const DegenerateGratings*>(&e) ||
                         dynamic_cast<const BoundaryCase*>(&e) ||
                         dynamic_cast<const OutOfRange*>(&e) ||
                         dynamic_cast<const TiltWithoutPreload*>(&e) ||
                         dynamic_cast<const UndersampledGrating*>(&e) ||
                         dynamic_cast<const ZeroImage*>(&e) ||
                         dynamic_cast<const NoPeak*>(&e) ||
                         dynamic_cast<const DimensionMismatch*>(&e) ||
                         dynamic_cast<const SingularSystem*>(&e);
    std::cerr << (numeric ? "numeric error: " : "i/o error: ") << e.what() << std::endl;
    return numeric ? kExitNumeric : kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << std::endl;
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
