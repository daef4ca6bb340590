#include "moire/estimator.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "moire/io.hpp"

namespace moire {

Eigen::VectorXd feature_vector(const MoireObservables& obs) {
  Eigen::VectorXd f(kFeatureDim);
  f << obs.mean_brightness, obs.centroid.x(), obs.centroid.y(), obs.phase_offset.x(),
      obs.phase_offset.y(), std::sin(2.0 * obs.theta), std::cos(2.0 * obs.theta),
      1.0 / obs.lambda;
  if (!f.allFinite()) throw OutOfRange("feature_vector: non-finite feature");
  return f;
}

namespace {

Metrics metrics_on(const CalibrationModel& model, const Dataset& data,
                   const std::vector<int>& idx) {
  Metrics out;
  out.sample_count = int(idx.size());
  if (idx.empty()) return out;
  Eigen::MatrixXd pred(idx.size(), 6), truth(idx.size(), 6);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Sample& s = data.samples[idx[i]];
    pred.row(i) = predict(model, s.obs).vector().transpose();
    truth.row(i) = s.wrench.vector().transpose();
  }
  for (int a = 0; a < 6; ++a) {
    const Eigen::VectorXd err = pred.col(a) - truth.col(a);
    out.axes[a].mae = err.cwiseAbs().mean();
    const double mean = truth.col(a).mean();
    const double ss_tot = (truth.col(a).array() - mean).matrix().squaredNorm();
    if (ss_tot < 1e-30)
      out.axes[a].r2 = std::nullopt;  // constant target: R^2 undefined
    else
      out.axes[a].r2 = 1.0 - err.squaredNorm() / ss_tot;
  }
  return out;
}

}  // namespace

Wrench CalibrationModel::predict_features(const Eigen::VectorXd& f) const {
  if (f.size() != feature_means.size())
    throw DimensionMismatch("predict: feature dimension mismatch");
  const Eigen::VectorXd z = (f - feature_means).cwiseQuotient(feature_scales);
  return Wrench::from_vector(weights * z + bias);
}

Wrench predict(const CalibrationModel& model, const MoireObservables& obs) {
  return model.predict_features(feature_vector(obs));
}

FitResult fit(const Dataset& data, double ridge_lambda, std::uint64_t split_seed,
              double test_fraction) {
  const int n = int(data.samples.size());
  if (n < 2 * kFeatureDim) throw OutOfRange("fit: need at least 2d samples");
  if (ridge_lambda < 0) throw OutOfRange("fit: ridge lambda must be >= 0");

  // Stratified split: shuffle within each sweep stratum, hold out the tail.
  std::vector<std::vector<int>> strata(7);
  for (int i = 0; i < n; ++i) strata[int(data.samples[i].sweep)].push_back(i);
  FitResult result;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    auto& idx = strata[s];
    if (idx.empty()) continue;
    Rng rng(derive_seed(split_seed, s));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.next_u64() % i]);
    const std::size_t test_m = std::size_t(std::lround(idx.size() * test_fraction));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < idx.size() - test_m ? result.train_indices : result.test_indices).push_back(idx[i]);
  }
  std::sort(result.train_indices.begin(), result.train_indices.end());
  std::sort(result.test_indices.begin(), result.test_indices.end());

  const int tn = int(result.train_indices.size());
  Eigen::MatrixXd x(tn, kFeatureDim);
  Eigen::MatrixXd y(tn, 6);
  for (int i = 0; i < tn; ++i) {
    const Sample& s = data.samples[result.train_indices[i]];
    x.row(i) = feature_vector(s.obs).transpose();
    y.row(i) = s.wrench.vector().transpose();
  }

  CalibrationModel& model = result.model;
  model.feature_means = x.colwise().mean();
  Eigen::VectorXd var =
      (x.rowwise() - model.feature_means.transpose()).array().square().colwise().mean();
  model.feature_scales = var.array().sqrt().max(1e-12);
  const Eigen::MatrixXd xs = (x.rowwise() - model.feature_means.transpose()).array().rowwise() /
                             model.feature_scales.transpose().array();

  Eigen::MatrixXd normal = xs.transpose() * xs;
  normal.diagonal().array() += ridge_lambda;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal);
  const double emin = es.eigenvalues().minCoeff(), emax = es.eigenvalues().maxCoeff();
  if (!(emin > 0) || emax / emin > 1e12)
    throw SingularSystem("fit: regularized normal matrix is numerically singular");

  model.ridge_lambda = ridge_lambda;
  model.bias = y.colwise().mean();
  model.weights.resize(6, kFeatureDim);
  const auto ldlt = normal.ldlt();
  for (int a = 0; a < 6; ++a) {
    const Eigen::VectorXd yc = y.col(a).array() - model.bias[a];
    model.weights.row(a) = ldlt.solve(xs.transpose() * yc).transpose();
  }

  result.held_out = metrics_on(model, data, result.test_indices);
  return result;
}

Metrics evaluate(const CalibrationModel& model, const Dataset& data) {
  if (data.samples.empty()) throw OutOfRange("evaluate: empty dataset");
  std::vector<int> all(data.samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
  return metrics_on(model, data, all);
}

TiltFit fit_tilt_matrix(const Dataset& tilt_samples) {
  const int n = int(tilt_samples.samples.size());
  if (n < 3) throw OutOfRange("fit_tilt_matrix: need at least 3 samples");
  Eigen::MatrixXd a(n, 3);
  Eigen::MatrixXd t(n, 2);
  for (int i = 0; i < n; ++i) {
    const Sample& s = tilt_samples.samples[i];
    a.row(i) << s.obs.centroid.x(), s.obs.centroid.y(), 1.0;
    t.row(i) << s.wrench.tx, s.wrench.ty;
  }
  const Eigen::Matrix3d normal = a.transpose() * a;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(normal);
  const double emin = es.eigenvalues().minCoeff(), emax = es.eigenvalues().maxCoeff();
  if (!(emin > 0) || emax / emin > 1e12)
    throw SingularSystem("fit_tilt_matrix: no centroid excitation");
  const Eigen::MatrixXd coef = normal.ldlt().solve(a.transpose() * t);  // 3 x 2

  TiltFit fit;
  fit.m = coef.topRows<2>().transpose();
  const Vec2d intercept = coef.row(2).transpose();
  const Eigen::Matrix2d minv = fit.m.inverse();
  if (!minv.allFinite()) throw SingularSystem("fit_tilt_matrix: tilt matrix not invertible");
  fit.c0 = -minv * intercept;
  fit.residual_norm = std::sqrt((a * coef - t).squaredNorm() / n);
  return fit;
}

void save_model(const CalibrationModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema_version"] = "1";
  j["feature_order"] = model.feature_order;
  j["ridge_lambda"] = model.ridge_lambda;
  j["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + 6);
  j["feature_means"] = std::vector<double>(model.feature_means.data(),
                                           model.feature_means.data() + model.feature_means.size());
  j["feature_scales"] = std::vector<double>(
      model.feature_scales.data(), model.feature_scales.data() + model.feature_scales.size());
  std::vector<std::vector<double>> w(6);
  for (int a = 0; a < 6; ++a)
    w[a] = std::vector<double>(model.weights.row(a).begin(), model.weights.row(a).end());
  j["weights"] = w;
  write_text_atomic(path, j.dump(2) + "\n");
}

CalibrationModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_model: cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("schema_version", "") != "1")
    throw OutOfRange("load_model: unsupported schema version");
  CalibrationModel m;
  m.feature_order = j.at("feature_order").get<std::string>();
  if (m.feature_order != kFeatureOrder)
    throw OutOfRange("load_model: feature order mismatch: " + m.feature_order);
  m.ridge_lambda = j.at("ridge_lambda").get<double>();
  const auto bias = j.at("bias").get<std::vector<double>>();
  const auto means = j.at("feature_means").get<std::vector<double>>();
  const auto scales = j.at("feature_scales").get<std::vector<double>>();
  const auto w = j.at("weights").get<std::vector<std::vector<double>>>();
  if (bias.size() != 6 || w.size() != 6 || means.size() != scales.size())
    throw OutOfRange("load_model: malformed model file");
  m.bias = Eigen::Map<const Vec6d>(bias.data());
  m.feature_means = Eigen::Map<const Eigen::VectorXd>(means.data(), means.size());
  m.feature_scales = Eigen::Map<const Eigen::VectorXd>(scales.data(), scales.size());
  m.weights.resize(6, int(means.size()));
  for (int a = 0; a < 6; ++a) {
    if (w[a].size() != means.size()) throw OutOfRange("load_model: malformed weights");
    m.weights.row(a) = Eigen::Map<const Eigen::VectorXd>(w[a].data(), w[a].size()).transpose();
  }
  return m;
}

}  // namespace moire
