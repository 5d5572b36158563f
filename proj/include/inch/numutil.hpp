#ifndef INCH_NUMUTIL_HPP
#define INCH_NUMUTIL_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include "inch/errors.hpp"
#include "inch/types.hpp"

namespace inch {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf/nan)
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

inline double log_sum_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (!std::isfinite(a)) return a;
  return a + std::log1p(std::exp(b - a));
}

// Running logsumexp over a stream of terms; avoids materialising large
// enumeration vectors.
class LogSumAccumulator {
 public:
  void add(double log_term) {
    if (log_term == neg_inf) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }
  double value() const {
    if (max_ == neg_inf) return neg_inf;
    return max_ + std::log(sum_);
  }

 private:
  double max_ = neg_inf;
  double sum_ = 0.0;
};

// alpha'(j) = logsumexp_i alpha(i) + logP(i,j)
inline Vec log_mat_vec(const Mat& logP, const Vec& alpha) {
  const auto n = alpha.size();
  Vec out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    LogSumAccumulator acc;
    for (Eigen::Index i = 0; i < n; ++i) acc.add(alpha[i] + logP(i, j));
    out[j] = acc.value();
  }
  return out;
}

// beta'(i) = logsumexp_j logP(i,j) + beta(j)
inline Vec log_vec_mat(const Mat& logP, const Vec& beta) {
  const auto n = beta.size();
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    LogSumAccumulator acc;
    for (Eigen::Index j = 0; j < n; ++j) acc.add(logP(i, j) + beta[j]);
    out[i] = acc.value();
  }
  return out;
}

// C(i,k) = logsumexp_j A(i,j) + B(j,k)
inline Mat log_mat_mat(const Mat& A, const Mat& B) {
  const auto n = A.rows();
  Mat out(n, B.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < B.cols(); ++k) {
      LogSumAccumulator acc;
      for (Eigen::Index j = 0; j < A.cols(); ++j) acc.add(A(i, j) + B(j, k));
      out(i, k) = acc.value();
    }
  }
  return out;
}

// Log density of an isotropic Gaussian N(mean, var*I) at x.
inline double log_gaussian_iso(const Vec& x, const Vec& mean, double var) {
  if (!(var > 0.0) || !std::isfinite(var))
    throw DegenerateCovariance("isotropic Gaussian variance must be positive");
  const double d = static_cast<double>(x.size());
  const double r2 = (x - mean).squaredNorm();
  return -0.5 * d * std::log(2.0 * M_PI * var) - 0.5 * r2 / var;
}

// Log density of N(mean, cov) at x, via a Cholesky factor supplied by the
// caller so it can be reused across evaluations.
inline double log_gaussian(const Vec& x, const Vec& mean,
                           const Eigen::LLT<Mat>& chol) {
  const auto d = x.size();
  Vec z = chol.matrixL().solve(x - mean);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    log_det += std::log(chol.matrixL()(i, i));
  return -0.5 * d * std::log(2.0 * M_PI) - log_det - 0.5 * z.squaredNorm();
}

inline double log_gaussian(const Vec& x, const Vec& mean, const Mat& cov) {
  Eigen::LLT<Mat> chol(cov);
  if (chol.info() != Eigen::Success)
    throw DegenerateCovariance("covariance not positive definite");
  return log_gaussian(x, mean, chol);
}

}  // namespace inch

#endif
