#include "eitvent/classifiers/svm_rbf.hpp"

#include <algorithm>
#include <cmath>

#include "eitvent/errors.hpp"
#include "eitvent/rng.hpp"

namespace eitvent {

namespace {

constexpr double kKktTol = 1e-3;
// Internal working tolerance, tighter than the contract so the final
// violations stay below kKktTol with margin.
constexpr double kWorkTol = 2e-4;
constexpr double kAlphaEps = 1e-12;
constexpr int kMaxPasses = 2000;

class SmoSolver {
 public:
  SmoSolver(const std::vector<std::vector<double>>& x,
            const std::vector<double>& y, double c, double gamma,
            std::uint64_t seed)
      : x_(x), y_(y), c_(c), gamma_(gamma), n_(static_cast<int>(x.size())),
        alpha_(x.size(), 0.0), error_(x.size()), scan_rng_(mix_seed(seed, 0x510u)) {
    kernel_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double k = kernel_value(i, j);
        kernel_[static_cast<std::size_t>(i) * n_ + j] = k;
        kernel_[static_cast<std::size_t>(j) * n_ + i] = k;
      }
    }
    // f(x) = 0 initially, so E_i = -y_i.
    for (int i = 0; i < n_; ++i) error_[static_cast<std::size_t>(i)] = -y_[static_cast<std::size_t>(i)];
  }

  SvmRbfModel::TrainInfo solve() {
    SvmRbfModel::TrainInfo info;
    int num_changed = 0;
    bool examine_all = true;
    while ((num_changed > 0 || examine_all) && info.passes < kMaxPasses) {
      num_changed = 0;
      for (int i = 0; i < n_; ++i) {
        if (examine_all || is_free(i)) num_changed += examine(i);
      }
      if (examine_all) {
        examine_all = false;
      } else if (num_changed == 0) {
        examine_all = true;
      }
      ++info.passes;
    }
    info.converged = info.passes < kMaxPasses;
    info.max_kkt_violation = max_kkt_violation();
    return info;
  }

  const std::vector<double>& alphas() const { return alpha_; }
  double bias() const { return bias_; }

  double max_kkt_violation() const {
    double worst = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double yf =
          y_[static_cast<std::size_t>(i)] *
          (error_[static_cast<std::size_t>(i)] + y_[static_cast<std::size_t>(i)]);
      const double a = alpha_[static_cast<std::size_t>(i)];
      double violation = 0.0;
      if (a <= kAlphaEps) {
        violation = std::max(0.0, 1.0 - yf);
      } else if (a >= c_ - kAlphaEps) {
        violation = std::max(0.0, yf - 1.0);
      } else {
        violation = std::abs(yf - 1.0);
      }
      worst = std::max(worst, violation);
    }
    return worst;
  }

 private:
  double kernel_value(int i, int j) const {
    const auto& a = x_[static_cast<std::size_t>(i)];
    const auto& b = x_[static_cast<std::size_t>(j)];
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double diff = a[k] - b[k];
      d2 += diff * diff;
    }
    return std::exp(-gamma_ * d2);
  }

  double kernel(int i, int j) const {
    return kernel_[static_cast<std::size_t>(i) * n_ + j];
  }

  bool is_free(int i) const {
    const double a = alpha_[static_cast<std::size_t>(i)];
    return a > kAlphaEps && a < c_ - kAlphaEps;
  }

  int examine(int i2) {
    const double y2 = y_[static_cast<std::size_t>(i2)];
    const double alph2 = alpha_[static_cast<std::size_t>(i2)];
    const double e2 = error_[static_cast<std::size_t>(i2)];
    const double r2 = e2 * y2;
    const bool violates = (r2 < -kWorkTol && alph2 < c_ - kAlphaEps) ||
                          (r2 > kWorkTol && alph2 > kAlphaEps);
    if (!violates) return 0;

    // Heuristic 1: maximize |E1 - E2| over free multipliers.
    int best = -1;
    double best_gap = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (!is_free(i)) continue;
      const double gap = std::abs(error_[static_cast<std::size_t>(i)] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best >= 0 && take_step(best, i2)) return 1;

    // Heuristic 2: free multipliers from a rotating start.
    const int start1 = static_cast<int>(scan_rng_.below(static_cast<std::uint64_t>(n_)));
    for (int k = 0; k < n_; ++k) {
      const int i1 = (start1 + k) % n_;
      if (is_free(i1) && take_step(i1, i2)) return 1;
    }
    // Heuristic 3: the whole set from a rotating start.
    const int start2 = static_cast<int>(scan_rng_.below(static_cast<std::uint64_t>(n_)));
    for (int k = 0; k < n_; ++k) {
      const int i1 = (start2 + k) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(int i1, int i2) {
    if (i1 == i2) return false;
    const double alph1 = alpha_[static_cast<std::size_t>(i1)];
    const double alph2 = alpha_[static_cast<std::size_t>(i2)];
    const double y1 = y_[static_cast<std::size_t>(i1)];
    const double y2 = y_[static_cast<std::size_t>(i2)];
    const double e1 = error_[static_cast<std::size_t>(i1)];
    const double e2 = error_[static_cast<std::size_t>(i2)];
    const double s = y1 * y2;

    double lo;
    double hi;
    if (s < 0.0) {
      lo = std::max(0.0, alph2 - alph1);
      hi = std::min(c_, c_ + alph2 - alph1);
    } else {
      lo = std::max(0.0, alph1 + alph2 - c_);
      hi = std::min(c_, alph1 + alph2);
    }
    if (lo >= hi) return false;

    const double k11 = kernel(i1, i1);
    const double k12 = kernel(i1, i2);
    const double k22 = kernel(i2, i2);
    const double eta = 2.0 * k12 - k11 - k22;

    double a2;
    if (eta < 0.0) {
      a2 = alph2 - y2 * (e1 - e2) / eta;
      a2 = std::clamp(a2, lo, hi);
    } else {
      // Degenerate curvature: evaluate the objective at both ends.
      const double f1 = y1 * (e1 + bias_) - alph1 * k11 - s * alph2 * k12;
      const double f2 = y2 * (e2 + bias_) - s * alph1 * k12 - alph2 * k22;
      const double l1 = alph1 + s * (alph2 - lo);
      const double h1 = alph1 + s * (alph2 - hi);
      const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                            0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                            0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (lo_obj < hi_obj - kAlphaEps) {
        a2 = lo;
      } else if (lo_obj > hi_obj + kAlphaEps) {
        a2 = hi;
      } else {
        a2 = alph2;
      }
    }
    if (std::abs(a2 - alph2) < kAlphaEps * (a2 + alph2 + kAlphaEps)) return false;

    const double a1 = alph1 + s * (alph2 - a2);
    const double da1 = a1 - alph1;
    const double da2 = a2 - alph2;

    const double b1 = bias_ - e1 - y1 * da1 * k11 - y2 * da2 * k12;
    const double b2 = bias_ - e2 - y1 * da1 * k12 - y2 * da2 * k22;
    double new_bias;
    if (a1 > kAlphaEps && a1 < c_ - kAlphaEps) {
      new_bias = b1;
    } else if (a2 > kAlphaEps && a2 < c_ - kAlphaEps) {
      new_bias = b2;
    } else {
      new_bias = (b1 + b2) / 2.0;
    }
    const double db = new_bias - bias_;

    for (int i = 0; i < n_; ++i) {
      error_[static_cast<std::size_t>(i)] +=
          y1 * da1 * kernel(i1, i) + y2 * da2 * kernel(i2, i) + db;
    }
    alpha_[static_cast<std::size_t>(i1)] = a1;
    alpha_[static_cast<std::size_t>(i2)] = a2;
    bias_ = new_bias;
    return true;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& y_;
  const double c_;
  const double gamma_;
  const int n_;
  std::vector<double> alpha_;
  std::vector<double> error_;  // E_i = f(x_i) - y_i, maintained exactly
  std::vector<double> kernel_;
  double bias_ = 0.0;
  Rng scan_rng_;
};

}  // namespace

std::unique_ptr<SvmRbfModel> SvmRbfModel::train(const TrainingSet& data,
                                                const SvmParams& params,
                                                std::uint64_t seed,
                                                TrainInfo* info) {
  data.validate();
  if (!(params.c > 0.0) || !(params.gamma > 0.0)) {
    throw DataError("SVM requires positive C and gamma");
  }
  const int n = data.n;
  const int d = data.d;

  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  std::vector<double> scale(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += data.at(i, j);
  }
  for (double& m : mean) m /= n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const double dv = data.at(i, j) - mean[static_cast<std::size_t>(j)];
      scale[static_cast<std::size_t>(j)] += dv * dv;
    }
  }
  for (double& s : scale) {
    s = std::sqrt(s / n);
    if (s == 0.0) s = 1.0;
  }

  std::vector<std::vector<double>> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = z[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      row[static_cast<std::size_t>(j)] =
          (data.at(i, j) - mean[static_cast<std::size_t>(j)]) /
          scale[static_cast<std::size_t>(j)];
    }
  }
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = data.y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  }

  SmoSolver solver(z, y, params.c, params.gamma, seed);
  TrainInfo train_info = solver.solve();
  train_info.alphas = solver.alphas();
  if (info != nullptr) *info = std::move(train_info);

  std::vector<std::vector<double>> support;
  std::vector<double> coeff;
  for (int i = 0; i < n; ++i) {
    const double a = solver.alphas()[static_cast<std::size_t>(i)];
    if (a > kAlphaEps) {
      support.push_back(z[static_cast<std::size_t>(i)]);
      coeff.push_back(a * y[static_cast<std::size_t>(i)]);
    }
  }
  return std::make_unique<SvmRbfModel>(std::move(mean), std::move(scale),
                                       std::move(support), std::move(coeff),
                                       solver.bias(), params, seed);
}

Prediction SvmRbfModel::predict(std::span<const double> features) const {
  if (features.size() != feat_mean_.size()) {
    throw DataError("feature dimension mismatch: got " +
                    std::to_string(features.size()) + ", expected " +
                    std::to_string(feat_mean_.size()));
  }
  std::vector<double> z(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    z[j] = (features[j] - feat_mean_[j]) / feat_scale_[j];
  }
  double f = bias_;
  for (std::size_t i = 0; i < support_vectors_.size(); ++i) {
    const auto& sv = support_vectors_[i];
    double d2 = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double diff = sv[j] - z[j];
      d2 += diff * diff;
    }
    f += coefficients_[i] * std::exp(-params_.gamma * d2);
  }
  return {f >= 0.0 ? Label::kNonHealthy : Label::kHealthy, f};
}

nlohmann::json SvmRbfModel::params_to_json() const {
  return {{"mean", feat_mean_},
          {"scale", feat_scale_},
          {"support_vectors", support_vectors_},
          {"coefficients", coefficients_},
          {"bias", bias_}};
}

std::unique_ptr<SvmRbfModel> SvmRbfModel::from_json(const nlohmann::json& j) {
  SvmParams params;
  params.c = j.at("hyperparameters").at("C").get<double>();
  params.gamma = j.at("hyperparameters").at("gamma").get<double>();
  const auto& p = j.at("parameters");
  return std::make_unique<SvmRbfModel>(
      p.at("mean").get<std::vector<double>>(),
      p.at("scale").get<std::vector<double>>(),
      p.at("support_vectors").get<std::vector<std::vector<double>>>(),
      p.at("coefficients").get<std::vector<double>>(),
      p.at("bias").get<double>(), params, j.at("seed").get<std::uint64_t>());
}

}  // namespace eitvent
