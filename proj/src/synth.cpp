#include "moire/synth.hpp"

#include <algorithm>

namespace moire {

namespace {

Vec2d perp(const Vec2d& k) { return Vec2d(-k.y(), k.x()); }

// One line-pattern axis of a grating, precomputed as separable phasor tables:
// cos(kx*x + ky*y + phase) = cr[r]*cc[c] - sr[r]*sc[c] with the constant
// phase folded into the column tables.
//
// The displacement u advances each pattern phase by +k*u, so the beat phase
// carries exactly +K*u.
struct AxisTables {
  Eigen::VectorXd cr, sr, cc, sc;
  double modulation = 1.0;

  AxisTables(const ImageGray& img, const Vec2d& k, double phase, double mod) : modulation(mod) {
    const int h = img.height, w = img.width;
    cr.resize(h);
    sr.resize(h);
    cc.resize(w);
    sc.resize(w);
    for (int r = 0; r < h; ++r) {
      const double a = k.y() * img.y_mm(r);
      cr[r] = std::cos(a);
      sr[r] = std::sin(a);
    }
    for (int c = 0; c < w; ++c) {
      const double b = k.x() * img.x_mm(c) + phase;
      cc[c] = std::cos(b);
      sc[c] = std::sin(b);
    }
  }

  // Transmission (1 + m*cos)/2 at (r, c) given the column phasor.
  double value(int r, double col_c, double col_s) const {
    return 0.5 * (1.0 + modulation * (cr[r] * col_c - sr[r] * col_s));
  }
};

std::vector<AxisTables> grating_axes(const ImageGray& img, const Gratingd& g, const Vec2d& u,
                                     const RenderConfig& cfg) {
  std::vector<AxisTables> axes;
  const Vec2d k = grating_wavevector(g);
  axes.emplace_back(img, k, g.phase_offset + k.dot(u), 1.0);
  if (cfg.grid_mode == GridMode::Crossed) {
    const Vec2d kq = perp(k);
    axes.emplace_back(img, kq, g.phase_offset + kq.dot(u), cfg.cross_modulation);
  }
  return axes;
}

// In-place box filter along each column (zero beyond the borders), then each
// row; `width` must be odd. Three passes approximate a Gaussian.
void box_pass(Eigen::ArrayXXd& f, int width) {
  const int half = width / 2;
  const int rows = static_cast<int>(f.rows()), cols = static_cast<int>(f.cols());
  const double inv = 1.0 / width;
  Eigen::VectorXd tmp(std::max(rows, cols));
  for (int c = 0; c < cols; ++c) {
    double acc = 0;
    for (int r = 0; r < std::min(half, rows); ++r) acc += f(r, c);
    for (int r = 0; r < rows; ++r) {
      if (r + half < rows) acc += f(r + half, c);
      tmp[r] = acc * inv;
      if (r - half >= 0) acc -= f(r - half, c);
    }
    f.col(c) = tmp.head(rows);
  }
  for (int r = 0; r < rows; ++r) {
    double acc = 0;
    for (int c = 0; c < std::min(half, cols); ++c) acc += f(r, c);
    for (int c = 0; c < cols; ++c) {
      if (c + half < cols) acc += f(r, c + half);
      tmp[c] = acc * inv;
      if (c - half >= 0) acc -= f(r, c - half);
    }
    f.row(r) = tmp.head(cols).transpose();
  }
}

void gaussian_blur(Eigen::ArrayXXd& f, double sigma_px) {
  if (sigma_px <= 0) return;
  // Triple box of matched variance: 3*(w^2-1)/12 = sigma^2.
  int w = static_cast<int>(std::lround(std::sqrt(4.0 * sigma_px * sigma_px + 1.0)));
  if (w % 2 == 0) ++w;
  if (w < 3) w = 3;
  for (int i = 0; i < 3; ++i) box_pass(f, w);
}

// kappa * P + rim before blurring; only the contact bounding box is touched.
Eigen::ArrayXXd contact_field(const ImageGray& img, const DeformationState& d,
                              const MaterialModel& m, const RenderConfig& cfg) {
  Eigen::ArrayXXd f = Eigen::ArrayXXd::Zero(img.height, img.width);
  if (d.contact_radius <= 0) return f;
  const double rim_sigma = cfg.rim_width / 2.0;
  const double extent = d.contact_radius + 4.0 * rim_sigma;
  const double half_h = img.height_mm() / 2, half_w = img.width_mm() / 2;
  const int r0 = std::max(0, int(std::floor((d.contact_center.y() + half_h - extent) * img.scale)));
  const int r1 = std::min(img.height,
                          int(std::ceil((d.contact_center.y() + half_h + extent) * img.scale)) + 1);
  const int c0 = std::max(0, int(std::floor((d.contact_center.x() + half_w - extent) * img.scale)));
  const int c1 = std::min(img.width,
                          int(std::ceil((d.contact_center.x() + half_w + extent) * img.scale)) + 1);
  for (int c = c0; c < c1; ++c) {
    const double x = img.x_mm(c);
    for (int r = r0; r < r1; ++r) {
      const Vec2d p(x, img.y_mm(r));
      double v = m.brightness_gain * pressure_at(d, p);
      if (cfg.rim_gain > 0) {
        const double dr = (p - d.contact_center).norm() - d.contact_radius;
        v += cfg.rim_gain * std::exp(-0.5 * (dr / rim_sigma) * (dr / rim_sigma));
      }
      f(r, c) = v;
    }
  }
  return f;
}

}  // namespace

ImageGray render(const SensorGeometryd& g, const DeformationState& d, const MaterialModel& m,
                 const RenderConfig& cfg) {
  cfg.validate();
  const SensorGeometryd def = deformed_geometry(g, d);
  const auto [far_app, near_app] = apparent_gratings(def);
  const double min_pitch_px = 3.0;
  if (far_app.pitch * cfg.scale < min_pitch_px || near_app.pitch * cfg.scale < min_pitch_px)
    throw UndersampledGrating("render: grating period below 3 pixels");

  ImageGray img(cfg.resolution, cfg.resolution, cfg.scale);

  const auto far_axes = grating_axes(img, far_app, d.displacement, cfg);
  const auto near_axes = grating_axes(img, near_app, d.displacement, cfg);

  const bool contact = d.contact_radius > 0 && (m.brightness_gain > 0 || cfg.rim_gain > 0);
  Eigen::ArrayXXd add;
  if (contact) {
    add = contact_field(img, d, m, cfg);
    gaussian_blur(add, m.psf_sigma * cfg.scale);
  }

  const double i0 = cfg.baseline_intensity;
  const double span = 1.0 - i0;
  Rng rng(cfg.seed);
  const bool noisy = cfg.noise_sigma > 0;
  for (int c = 0; c < img.width; ++c) {
    double* col = img.values.col(c).data();
    const double* addcol = contact ? add.col(c).data() : nullptr;
    for (int r = 0; r < img.height; ++r) {
      double t = 1.0;
      for (const AxisTables& ax : far_axes) t *= ax.value(r, ax.cc[c], ax.sc[c]);
      for (const AxisTables& ax : near_axes) t *= ax.value(r, ax.cc[c], ax.sc[c]);
      double v = i0 + t * span;
      if (addcol) v += addcol[r];
      if (noisy) v += cfg.noise_sigma * rng.gaussian();
      col[r] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

ImageGray render_wrench(const SensorGeometryd& g, const Wrench& w, const MaterialModel& m,
                        const RenderConfig& cfg, const WrenchRanges& ranges) {
  return render(g, wrench_to_deformation(w, m, g, ranges), m, cfg);
}

std::vector<ImageGray> render_sequence(const std::vector<Wrench>& trace, const SensorGeometryd& g,
                                       const MaterialModel& m, const RenderConfig& cfg,
                                       const WrenchRanges& ranges) {
  if (trace.empty()) throw OutOfRange("render_sequence: empty trace");
  std::vector<ImageGray> frames(trace.size());
  parallel_for(trace.size(), [&](std::size_t i) {
    RenderConfig sub = cfg;
    sub.seed = derive_seed(cfg.seed, i);
    frames[i] = render_wrench(g, trace[i], m, sub, ranges);
  });
  return frames;
}

}  // namespace moire
