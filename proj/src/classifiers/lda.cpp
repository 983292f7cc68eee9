#include "eitvent/classifiers/lda.hpp"

#include <algorithm>
#include <cmath>

#include "eitvent/errors.hpp"

namespace eitvent {

namespace {

/// In-place Cholesky factorization of a symmetric matrix (row-major,
/// d x d). Returns false when the matrix is not positive definite.
bool cholesky(std::vector<double>& a, int d) {
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[static_cast<std::size_t>(i) * d + j];
      for (int k = 0; k < j; ++k) {
        sum -= a[static_cast<std::size_t>(i) * d + k] *
               a[static_cast<std::size_t>(j) * d + k];
      }
      if (i == j) {
        if (sum <= 0.0 || !std::isfinite(sum)) return false;
        a[static_cast<std::size_t>(i) * d + j] = std::sqrt(sum);
      } else {
        a[static_cast<std::size_t>(i) * d + j] =
            sum / a[static_cast<std::size_t>(j) * d + j];
      }
    }
  }
  return true;
}

/// Solves L L^T x = b given the Cholesky factor L (lower triangle).
std::vector<double> cholesky_solve(const std::vector<double>& l, int d,
                                   const std::vector<double>& b) {
  std::vector<double> x(b);
  for (int i = 0; i < d; ++i) {
    double sum = x[static_cast<std::size_t>(i)];
    for (int k = 0; k < i; ++k) {
      sum -= l[static_cast<std::size_t>(i) * d + k] * x[static_cast<std::size_t>(k)];
    }
    x[static_cast<std::size_t>(i)] = sum / l[static_cast<std::size_t>(i) * d + i];
  }
  for (int i = d - 1; i >= 0; --i) {
    double sum = x[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < d; ++k) {
      sum -= l[static_cast<std::size_t>(k) * d + i] * x[static_cast<std::size_t>(k)];
    }
    x[static_cast<std::size_t>(i)] = sum / l[static_cast<std::size_t>(i) * d + i];
  }
  return x;
}

}  // namespace

std::unique_ptr<LdaModel> LdaModel::train(const TrainingSet& data,
                                          const LdaParams& params,
                                          std::uint64_t seed) {
  data.validate();
  const int d = data.d;
  const int n = data.n;
  const int n0 = data.count(Label::kHealthy);
  const int n1 = n - n0;

  std::vector<double> mean0(static_cast<std::size_t>(d), 0.0);
  std::vector<double> mean1(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i) {
    auto& mean = data.y[static_cast<std::size_t>(i)] == 0 ? mean0 : mean1;
    for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += data.at(i, j);
  }
  for (int j = 0; j < d; ++j) {
    mean0[static_cast<std::size_t>(j)] /= n0;
    mean1[static_cast<std::size_t>(j)] /= n1;
  }

  // Pooled within-class covariance (divides by n - 2).
  std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> centered(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    const auto& mean = data.y[static_cast<std::size_t>(i)] == 0 ? mean0 : mean1;
    for (int j = 0; j < d; ++j) {
      centered[static_cast<std::size_t>(j)] =
          data.at(i, j) - mean[static_cast<std::size_t>(j)];
    }
    for (int a = 0; a < d; ++a) {
      const double ca = centered[static_cast<std::size_t>(a)];
      for (int b = a; b < d; ++b) {
        cov[static_cast<std::size_t>(a) * d + b] +=
            ca * centered[static_cast<std::size_t>(b)];
      }
    }
  }
  const double denom = std::max(1, n - 2);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      const double v = cov[static_cast<std::size_t>(a) * d + b] / denom;
      cov[static_cast<std::size_t>(a) * d + b] = v;
      cov[static_cast<std::size_t>(b) * d + a] = v;
    }
  }

  double trace = 0.0;
  for (int j = 0; j < d; ++j) trace += cov[static_cast<std::size_t>(j) * d + j];
  const double identity_scale = trace > 0.0 ? trace / d : 1.0;

  // Shrink toward the scaled identity; the 1e-6 floor keeps singular
  // covariances factorizable. If factorization still fails the amount
  // is doubled until it succeeds.
  double shrink = std::clamp(params.shrinkage, 1e-6, 1.0);
  std::vector<double> factor;
  while (true) {
    factor.assign(cov.begin(), cov.end());
    for (std::size_t idx = 0; idx < factor.size(); ++idx) factor[idx] *= 1.0 - shrink;
    for (int j = 0; j < d; ++j) {
      factor[static_cast<std::size_t>(j) * d + j] += shrink * identity_scale;
    }
    if (cholesky(factor, d)) break;
    if (shrink >= 1.0) {
      throw DataError("LDA covariance could not be regularized");
    }
    shrink = std::min(1.0, std::max(shrink * 2.0, 1e-3));
  }

  const std::vector<double> w0 = cholesky_solve(factor, d, mean0);
  const std::vector<double> w1 = cholesky_solve(factor, d, mean1);

  double c0 = std::log(static_cast<double>(n0) / n);
  double c1 = std::log(static_cast<double>(n1) / n);
  for (int j = 0; j < d; ++j) {
    c0 -= 0.5 * mean0[static_cast<std::size_t>(j)] * w0[static_cast<std::size_t>(j)];
    c1 -= 0.5 * mean1[static_cast<std::size_t>(j)] * w1[static_cast<std::size_t>(j)];
  }

  std::vector<double> weights(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    weights[static_cast<std::size_t>(j)] =
        w1[static_cast<std::size_t>(j)] - w0[static_cast<std::size_t>(j)];
  }
  return std::make_unique<LdaModel>(std::move(weights), c1 - c0, shrink, params,
                                    seed);
}

Prediction LdaModel::predict(std::span<const double> features) const {
  if (features.size() != weights_.size()) {
    throw DataError("feature dimension mismatch: got " +
                    std::to_string(features.size()) + ", expected " +
                    std::to_string(weights_.size()));
  }
  double score = bias_;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    score += weights_[j] * features[j];
  }
  return {score >= 0.0 ? Label::kNonHealthy : Label::kHealthy, score};
}

nlohmann::json LdaModel::params_to_json() const {
  return {{"weights", weights_},
          {"bias", bias_},
          {"shrinkage_used", shrinkage_used_}};
}

std::unique_ptr<LdaModel> LdaModel::from_json(const nlohmann::json& j) {
  LdaParams params;
  params.shrinkage = j.at("hyperparameters").at("shrinkage").get<double>();
  const auto& p = j.at("parameters");
  return std::make_unique<LdaModel>(
      p.at("weights").get<std::vector<double>>(), p.at("bias").get<double>(),
      p.at("shrinkage_used").get<double>(), params,
      j.at("seed").get<std::uint64_t>());
}

}  // namespace eitvent
