#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "fgspca/data.hpp"
#include "fgspca/errors.hpp"
#include "fgspca/fgs.hpp"
#include "fgspca/linalg.hpp"

namespace fgspca {

struct FgspcaConfig {
  int k{2};
  double lambda{0.05};
  std::vector<double> lambda1{0.1};  // scalar broadcasts; else one per component
  double lambda2{0.005};
  double tau{0.05};
  double lambda3{0.0};
  int max_alternations{200};
  double alternation_tol{1e-6};

  double lambda1_for(int j) const {
    return lambda1.size() == 1 ? lambda1[0] : lambda1[static_cast<size_t>(j)];
  }

  void validate(Eigen::Index p) const {
    if (k < 1) throw InvalidInputError("config: k must be >= 1");
    if (k > p)
      throw InvalidInputError("config: k (" + std::to_string(k) +
                              ") exceeds variable count (" + std::to_string(p) + ")");
    if (!(tau > 0.0)) throw InvalidInputError("config: tau must be > 0");
    if (lambda < 0 || lambda2 < 0 || lambda3 < 0)
      throw InvalidInputError("config: negative penalty weight");
    if (lambda1.size() != 1 && lambda1.size() != static_cast<size_t>(k))
      throw InvalidInputError("config: lambda1 needs 1 or k entries");
    for (double v : lambda1)
      if (v < 0) throw InvalidInputError("config: negative lambda1");
    if (max_alternations < 1)
      throw InvalidInputError("config: max_alternations must be >= 1");
  }
};

struct ProcrustesResult {
  Matrix rotation;  // p x k, orthonormal columns
  bool unique{true};
};

// Reduced-rank Procrustes rotation: U V^T from the thin SVD of m. Flags
// non-uniqueness when m is (numerically) rank deficient.
inline ProcrustesResult procrustes_rotation(const Matrix& m) {
  require_finite(m, "procrustes_rotation");
  if (m.cols() > m.rows())
    throw InvalidShapeError("procrustes_rotation: k > p");
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ProcrustesResult out;
  out.rotation = dec.matrixU() * dec.matrixV().transpose();
  const auto& s = dec.singularValues();
  out.unique =
      s.size() > 0 && s(0) > 0.0 && s(s.size() - 1) >= 1e-12 * s(0);
  return out;
}

struct FgspcaResult {
  Matrix a;  // p x k, orthonormal
  Matrix b;  // p x k, penalized coefficients
  Matrix v;  // p x k, unit (or zero) columns, sign-normalized
  int alternations{0};
  bool converged{false};
  std::vector<double> objective_trace;  // full criterion per alternation
  bool covariance_clamped{false};       // negative eigenvalues dropped in the root
  std::vector<uint8_t> zero_loading_columns;
  Matrix design;  // the X actually fitted (matrix root in covariance mode)
};

namespace detail {

inline Matrix design_from(const DatasetInput& data, bool* clamped) {
  if (data.kind == DataKind::covariance) {
    PsdRoot root = psd_root(data.matrix);
    if (clamped) *clamped = root.clamped;
    return root.root;
  }
  if (clamped) *clamped = false;
  Matrix x = data.matrix;
  center_columns(x);
  return x;
}

inline double column_penalties(const Vector& beta, double lambda, double lambda1,
                               double lambda2, double tau, double lambda3) {
  const Eigen::Index p = beta.size();
  double val = lambda * beta.squaredNorm();
  for (Eigen::Index l = 0; l < p; ++l) {
    val += lambda1 * std::min(std::abs(beta(l)) / tau, 1.0);
    const double neg = std::min(beta(l), 0.0);
    val += lambda3 * neg * neg;
  }
  if (lambda2 != 0.0)
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = a + 1; b < p; ++b)
        val += lambda2 * std::min(std::abs(beta(a) - beta(b)) / tau, 1.0);
  return val;
}

// Full FGSPCA criterion: reconstruction + all penalties of B.
inline double criterion_value(const Matrix& x, const Matrix& a, const Matrix& b,
                              const FgspcaConfig& cfg) {
  double val = (x - x * b * a.transpose()).squaredNorm();
  for (int j = 0; j < cfg.k; ++j)
    val += column_penalties(b.col(j), cfg.lambda, cfg.lambda1_for(j), cfg.lambda2,
                            cfg.tau, cfg.lambda3);
  return val;
}

}  // namespace detail

// Alternating FGSPCA driver. Step 1 initializes A with the ordinary SVD
// loadings; Step 2 solves k independent FGS problems (concurrently, warm
// started from the previous B); Step 3 is the Procrustes update of A from
// (X^T X) B; Step 4 repeats until the max-abs change of B is below
// alternation_tol; Step 5 normalizes columns.
inline FgspcaResult fit(const DatasetInput& data, const FgspcaConfig& config,
                        const SolverControls& controls = {}) {
  controls.validate();
  FgspcaResult out;
  Matrix x = detail::design_from(data, &out.covariance_clamped);
  const Eigen::Index p = x.cols();
  config.validate(std::min<Eigen::Index>(x.rows(), p));
  const int k = config.k;

  SvdFactors init = svd(x);
  Matrix a = init.v.leftCols(k);
  const Matrix gram = x.transpose() * x;

  Matrix b_prev = a;
  Matrix b(p, k);
  const unsigned hw = std::thread::hardware_concurrency();
  const bool parallel = k > 1 && hw > 1;

  for (int t = 1; t <= config.max_alternations; ++t) {
    out.alternations = t;
    auto solve_column = [&](int j) {
      FgsProblem pj;
      pj.x = x;
      pj.y = x * a.col(j);
      pj.lambda = config.lambda;
      pj.lambda1 = config.lambda1_for(j);
      pj.lambda2 = config.lambda2;
      pj.tau = config.tau;
      pj.lambda3 = config.lambda3;
      return solve(pj, controls, b_prev.col(j)).beta;
    };
    if (parallel) {
      std::vector<std::future<Vector>> futures;
      futures.reserve(k);
      for (int j = 0; j < k; ++j)
        futures.push_back(std::async(std::launch::async, solve_column, j));
      for (int j = 0; j < k; ++j) b.col(j) = futures[static_cast<size_t>(j)].get();
    } else {
      for (int j = 0; j < k; ++j) b.col(j) = solve_column(j);
    }

    a = procrustes_rotation(gram * b).rotation;
    out.objective_trace.push_back(detail::criterion_value(x, a, b, config));

    if ((b - b_prev).cwiseAbs().maxCoeff() < config.alternation_tol) {
      out.converged = true;
      break;
    }
    b_prev = b;
  }

  out.a = a;
  out.b = b;
  out.v = Matrix::Zero(p, k);
  out.zero_loading_columns.assign(static_cast<size_t>(k), 0);
  for (int j = 0; j < k; ++j) {
    const double nrm = b.col(j).norm();
    if (nrm > 0.0) {
      out.v.col(j) = b.col(j) / nrm;
    } else {
      out.zero_loading_columns[static_cast<size_t>(j)] = 1;
    }
  }
  sign_normalize_columns(out.v);
  out.design = std::move(x);
  return out;
}

// SPCA special case: lambda2 = 0 and tau chosen so large that no coefficient
// ever reaches the truncation knee, reducing the selection penalty to a lasso
// with weight lambda1 / tau. Caller-facing weights follow the lasso
// convention, so they are pre-multiplied by tau. Verified at runtime; re-run
// with a larger tau if any |b| reaches it.
inline FgspcaResult fit_spca(const DatasetInput& data, int k, double lambda,
                             const std::vector<double>& lambda1_per_component,
                             const SolverControls& controls = {}) {
  bool clamped = false;
  const Matrix x = detail::design_from(data, &clamped);
  double colnorm_max = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    colnorm_max = std::max(colnorm_max, x.col(j).norm());
  double tau = 1e6 * std::max(colnorm_max, 1.0);

  for (int attempt = 0; attempt < 3; ++attempt) {
    FgspcaConfig cfg;
    cfg.k = k;
    cfg.lambda = lambda;
    cfg.lambda2 = 0.0;
    cfg.tau = tau;
    cfg.lambda1 = lambda1_per_component;
    for (double& w : cfg.lambda1) w *= tau;
    FgspcaResult res = fit(data, cfg, controls);
    if (res.b.cwiseAbs().maxCoeff() < tau) return res;
    tau *= 10.0;
  }
  throw InvalidInputError("fit_spca: coefficients kept reaching tau");
}

// Non-negative variant: same alternation, nn-enabled FGS solver.
inline FgspcaResult fit_nn(const DatasetInput& data, const FgspcaConfig& config,
                           const SolverControls& controls = {}) {
  if (!(config.lambda3 > 0.0))
    throw InvalidInputError("fit_nn: lambda3 must be > 0");
  return fit(data, config, controls);
}

// Simple-thresholding baseline: keep the top-c_j magnitude entries of each
// ordinary loading column, zero the rest, renormalize. Magnitude ties (within
// 1e-9 relative) break toward the larger variable index.
inline Matrix simple_threshold_loadings(const Matrix& pca_loadings,
                                        const std::vector<int>& cardinalities) {
  const Eigen::Index p = pca_loadings.rows();
  const Eigen::Index k = pca_loadings.cols();
  if (cardinalities.size() != static_cast<size_t>(k))
    throw InvalidInputError("simple_threshold_loadings: need one cardinality per component");
  Matrix out = Matrix::Zero(p, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const int c = cardinalities[static_cast<size_t>(j)];
    if (c < 1 || c > p)
      throw InvalidInputError("simple_threshold_loadings: cardinality " +
                              std::to_string(c) + " out of range");
    std::vector<Eigen::Index> idx(p);
    for (Eigen::Index i = 0; i < p; ++i) idx[static_cast<size_t>(i)] = i;
    const double scale = pca_loadings.col(j).cwiseAbs().maxCoeff();
    const double tie = 1e-9 * std::max(scale, 1e-300);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double ma = std::abs(pca_loadings(a, j));
      const double mb = std::abs(pca_loadings(b, j));
      if (std::abs(ma - mb) > tie) return ma > mb;
      return a > b;
    });
    for (int r = 0; r < c; ++r) {
      const Eigen::Index i = idx[static_cast<size_t>(r)];
      out(i, j) = pca_loadings(i, j);
    }
    const double nrm = out.col(j).norm();
    if (nrm > 0.0) out.col(j) /= nrm;
  }
  sign_normalize_columns(out);
  return out;
}

}  // namespace fgspca
