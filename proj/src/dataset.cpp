#include "moire/estimator.hpp"

namespace moire {

const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Fz: return "fz";
    case SweepKind::Fx: return "fx";
    case SweepKind::Fy: return "fy";
    case SweepKind::Tz: return "tz";
    case SweepKind::Tx: return "tx";
    case SweepKind::Ty: return "ty";
    case SweepKind::Mixed: return "mixed";
  }
  return "mixed";
}

SweepKind sweep_kind_from_string(const std::string& s) {
  for (SweepKind k : {SweepKind::Fz, SweepKind::Fx, SweepKind::Fy, SweepKind::Tz, SweepKind::Tx,
                      SweepKind::Ty, SweepKind::Mixed})
    if (s == to_string(k)) return k;
  throw OutOfRange("unknown sweep kind: " + s);
}

std::vector<Wrench> sweep_wrenches(SweepKind kind, int count, const WrenchRanges& ranges,
                                   const DatasetConfig& cfg) {
  if (count < 1) throw OutOfRange("sweep_wrenches: count must be >= 1");
  std::vector<Wrench> out(count);
  auto level = [&](int i, double lo, double hi) {
    return count == 1 ? (lo + hi) / 2 : lo + (hi - lo) * i / (count - 1);
  };
  for (int i = 0; i < count; ++i) {
    Wrench w;
    switch (kind) {
      case SweepKind::Fz:
        w.fz = level(i, 0.0, ranges.fz_max);
        break;
      case SweepKind::Fx:
        w.fz = cfg.shear_preload;
        w.fx = level(i, -ranges.f_lat_max, ranges.f_lat_max);
        break;
      case SweepKind::Fy:
        w.fz = cfg.shear_preload;
        w.fy = level(i, -ranges.f_lat_max, ranges.f_lat_max);
        break;
      case SweepKind::Tz:
        w.fz = cfg.shear_preload;
        w.tz = level(i, -ranges.tz_max, ranges.tz_max);
        break;
      case SweepKind::Tx:
        w.fz = cfg.tilt_preload;
        w.tx = w.fz * level(i, -cfg.tilt_offset_max, cfg.tilt_offset_max) / 1000.0;
        break;
      case SweepKind::Ty:
        w.fz = cfg.tilt_preload;
        w.ty = -w.fz * level(i, -cfg.tilt_offset_max, cfg.tilt_offset_max) / 1000.0;
        break;
      case SweepKind::Mixed:
        throw OutOfRange("sweep_wrenches: mixed is not a sweep");
    }
    out[i] = w;
  }
  return out;
}

std::vector<std::pair<Wrench, SweepKind>> dataset_wrench_plan(const DatasetConfig& cfg,
                                                              const WrenchRanges& ranges) {
  if (cfg.n < 1) throw OutOfRange("dataset_wrench_plan: n must be >= 1");
  const int mixed_n = int(std::lround(cfg.n * cfg.mixed_fraction));
  const int sweep_n = cfg.n - mixed_n;

  std::vector<std::pair<Wrench, SweepKind>> plan;
  plan.reserve(cfg.n);
  const SweepKind kinds[6] = {SweepKind::Fz, SweepKind::Fx, SweepKind::Fy,
                              SweepKind::Tz, SweepKind::Tx, SweepKind::Ty};
  for (int a = 0; a < 6; ++a) {
    const int m = sweep_n / 6 + (a < sweep_n % 6 ? 1 : 0);
    if (m == 0) continue;
    for (const Wrench& w : sweep_wrenches(kinds[a], m, ranges, cfg))
      plan.emplace_back(w, kinds[a]);
  }

  // Mixed samples: uniform lateral/twist loads, uniform normal load, and a
  // uniform contact location that induces the tilt moments (Tx = Fz*c_y,
  // Ty = -Fz*c_x), keeping the contact inside the sensing region.
  Rng rng(derive_seed(cfg.seed, 0x6d69786564ull));
  for (int i = 0; i < mixed_n; ++i) {
    Wrench w;
    w.fx = rng.uniform(-ranges.f_lat_max, ranges.f_lat_max);
    w.fy = rng.uniform(-ranges.f_lat_max, ranges.f_lat_max);
    w.fz = rng.uniform(cfg.mixed_fz_min, ranges.fz_max);
    w.tz = rng.uniform(-ranges.tz_max, ranges.tz_max);
    const double cy = rng.uniform(-cfg.mixed_offset_max, cfg.mixed_offset_max);
    const double cx = rng.uniform(-cfg.mixed_offset_max, cfg.mixed_offset_max);
    w.tx = w.fz * cy / 1000.0;
    w.ty = -w.fz * cx / 1000.0;
    plan.emplace_back(w, SweepKind::Mixed);
  }
  return plan;
}

Dataset build_dataset(const DatasetConfig& cfg, const SensorGeometryd& g, const MaterialModel& m,
                      const RenderConfig& render_cfg, const WrenchRanges& ranges,
                      const FeatureConfig& feat_cfg) {
  m.validate(g, ranges);
  const auto plan = dataset_wrench_plan(cfg, ranges);

  RenderConfig ref_cfg = render_cfg;
  ref_cfg.noise_sigma = 0.0;
  const ImageGray reference = render_wrench(g, Wrench{}, m, ref_cfg, ranges);
  const FeatureExtractor extractor(reference, feat_cfg);

  Dataset data;
  data.samples.resize(plan.size());
  parallel_for(plan.size(), [&](std::size_t i) {
    RenderConfig frame_cfg = render_cfg;
    frame_cfg.seed = derive_seed(render_cfg.seed, i);
    const ImageGray img = render_wrench(g, plan[i].first, m, frame_cfg, ranges);
    data.samples[i] = Sample{plan[i].first, extractor.extract(img), plan[i].second};
  });
  return data;
}

}  // namespace moire
