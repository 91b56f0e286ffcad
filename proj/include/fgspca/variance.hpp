#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fgspca/errors.hpp"
#include "fgspca/linalg.hpp"

namespace fgspca {

enum class Method { fgspca, spca, pca, threshold };

inline Method method_from_string(const std::string& tag) {
  if (tag == "fgspca") return Method::fgspca;
  if (tag == "spca") return Method::spca;
  if (tag == "pca") return Method::pca;
  if (tag == "threshold") return Method::threshold;
  throw InvalidInputError("unknown method tag: " + tag);
}

inline std::string method_to_string(Method m) {
  switch (m) {
    case Method::fgspca: return "fgspca";
    case Method::spca: return "spca";
    case Method::pca: return "pca";
    case Method::threshold: return "threshold";
  }
  return "?";
}

struct AdjustedVariance {
  std::vector<double> per_pc_pct;
  std::vector<double> cumulative_pct;
  bool zero_column{false};
};

// QR-adjusted explained variance: Zhat = X v, Zhat = QR, per-component share
// is 100 * R_jj^2 / tr(X^T X). Correlation between modified PCs is projected
// out by the triangular structure.
inline AdjustedVariance adjusted_variance(const Matrix& x, const Matrix& v) {
  require_finite(v, "adjusted_variance: v");
  const double total = x.squaredNorm();  // tr(X^T X)
  if (total <= 0.0) throw InvalidInputError("adjusted_variance: zero design");
  const Matrix zhat = x * v;
  QrFactors f = qr(zhat);
  AdjustedVariance out;
  out.per_pc_pct.resize(static_cast<size_t>(v.cols()));
  out.cumulative_pct.resize(static_cast<size_t>(v.cols()));
  double cum = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    if (zhat.col(j).norm() == 0.0) out.zero_column = true;
    const double rjj = f.r(j, j);
    const double pct = 100.0 * rjj * rjj / total;
    out.per_pc_pct[static_cast<size_t>(j)] = pct;
    cum += pct;
    out.cumulative_pct[static_cast<size_t>(j)] = cum;
  }
  return out;
}

// Unadjusted share: 100 * v_j^T (X^T X) v_j / tr(X^T X).
inline std::vector<double> raw_variance(const Matrix& x, const Matrix& v) {
  require_finite(v, "raw_variance: v");
  const double total = x.squaredNorm();
  if (total <= 0.0) throw InvalidInputError("raw_variance: zero design");
  std::vector<double> out(static_cast<size_t>(v.cols()));
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    out[static_cast<size_t>(j)] = 100.0 * (x * v.col(j)).squaredNorm() / total;
  return out;
}

// Number of single-linkage equivalence classes of the nonzero entries under
// |v_l - v_l'| <= group_tol. Signed values, so opposite-sign loadings of equal
// magnitude count as distinct groups; zero entries form no group.
inline int count_groups(const Vector& v_col, double group_tol = 1e-4) {
  if (!(group_tol > 0.0))
    throw InvalidInputError("count_groups: group_tol must be > 0");
  std::vector<double> nz;
  for (Eigen::Index l = 0; l < v_col.size(); ++l)
    if (std::abs(v_col(l)) > group_tol) nz.push_back(v_col(l));
  if (nz.empty()) return 0;
  std::sort(nz.begin(), nz.end());
  int groups = 1;
  for (size_t i = 1; i < nz.size(); ++i)
    if (nz[i] - nz[i - 1] > group_tol) ++groups;
  return groups;
}

inline int count_nonzeros(const Vector& v_col, double zero_tol = 1e-4) {
  if (!(zero_tol > 0.0))
    throw InvalidInputError("count_nonzeros: zero_tol must be > 0");
  int n = 0;
  for (Eigen::Index l = 0; l < v_col.size(); ++l)
    if (std::abs(v_col(l)) > zero_tol) ++n;
  return n;
}

// Estimated-parameter count: group total for fgspca, nonzero total otherwise.
inline long model_complexity(const std::vector<int>& group_counts,
                             const std::vector<int>& nonzero_counts,
                             Method method) {
  const auto& counts = method == Method::fgspca ? group_counts : nonzero_counts;
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

inline long model_complexity(const std::vector<int>& group_counts,
                             const std::vector<int>& nonzero_counts,
                             const std::string& method_tag) {
  return model_complexity(group_counts, nonzero_counts,
                          method_from_string(method_tag));
}

struct VarianceReport {
  std::vector<double> per_pc_variance_pct;
  std::vector<double> per_pc_adjusted_pct;
  std::vector<double> cumulative_adjusted_pct;
  double total_variance{0.0};  // tr(X^T X)
  std::vector<int> group_counts;
  std::vector<int> nonzero_counts;
  long model_complexity{0};
  std::string method;
  bool zero_column{false};
};

inline VarianceReport make_variance_report(const Matrix& x, const Matrix& v,
                                           Method method,
                                           double group_tol = 1e-4,
                                           double zero_tol = 1e-4) {
  VarianceReport rep;
  rep.method = method_to_string(method);
  rep.total_variance = x.squaredNorm();
  rep.per_pc_variance_pct = raw_variance(x, v);
  AdjustedVariance adj = adjusted_variance(x, v);
  rep.per_pc_adjusted_pct = std::move(adj.per_pc_pct);
  rep.cumulative_adjusted_pct = std::move(adj.cumulative_pct);
  rep.zero_column = adj.zero_column;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    rep.group_counts.push_back(count_groups(v.col(j), group_tol));
    rep.nonzero_counts.push_back(count_nonzeros(v.col(j), zero_tol));
  }
  rep.model_complexity =
      model_complexity(rep.group_counts, rep.nonzero_counts, method);
  return rep;
}

}  // namespace fgspca
