#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "fgspca/csv.hpp"
#include "fgspca/data.hpp"
#include "fgspca/errors.hpp"
#include "fgspca/linalg.hpp"

namespace fgspca {

// ---------------------------------------------------------------------------
// Pitprops correlation matrix (Jeffers 1967), 13 physical properties of props
// of Corsican pine, as published and reused throughout the sparse-PCA
// literature. Embedded verbatim, lower triangle.
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& pitprops_names() {
  static const std::vector<std::string> names = {
      "topdiam", "length", "moist",   "testsg", "ovensg", "ringtop", "ringbut",
      "bowmax",  "bowdist", "whorls", "clear",  "knots",  "diaknot"};
  return names;
}

inline DatasetInput pitprops() {
  constexpr int p = 13;
  static const double lower[p][p] = {
      {1.000},
      {0.954, 1.000},
      {0.364, 0.297, 1.000},
      {0.342, 0.284, 0.882, 1.000},
      {-0.129, -0.118, -0.148, 0.220, 1.000},
      {0.313, 0.291, 0.153, 0.381, 0.364, 1.000},
      {0.496, 0.503, -0.029, 0.174, 0.296, 0.813, 1.000},
      {0.424, 0.419, -0.054, -0.059, 0.004, 0.090, 0.372, 1.000},
      {0.592, 0.648, 0.125, 0.137, -0.039, 0.211, 0.465, 0.482, 1.000},
      {0.545, 0.569, -0.081, -0.014, 0.037, 0.274, 0.679, 0.557, 0.526, 1.000},
      {0.084, 0.076, 0.162, 0.097, 0.091, -0.036, -0.113, 0.061, 0.085,
       -0.319, 1.000},
      {-0.019, -0.036, 0.220, 0.169, -0.145, 0.024, -0.232, -0.357, -0.127,
       -0.368, 0.029, 1.000},
      {0.134, 0.144, 0.126, 0.015, -0.208, -0.329, -0.424, -0.202, -0.076,
       -0.291, 0.007, 0.184, 1.000}};
  Matrix sigma(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      sigma(i, j) = lower[i][j];
      sigma(j, i) = lower[i][j];
    }
  return make_covariance(std::move(sigma), pitprops_names());
}

// ---------------------------------------------------------------------------
// Synthetic covariances. Three hidden factors:
//   V1 ~ N(0,290), V2 ~ N(0,300), V3 = -0.3 V1 + 0.925 V2 + eps, eps ~ N(0,1)
//   X1..X4 = V1 + noise, X5..X8 = V2 + noise, X9..X10 = V3 + noise.
// The covariance is computed exactly from the generating equations; unit
// observation noise adds +1 on the diagonal.
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix hidden_factor_block() {
  Matrix f(3, 3);
  const double var_v1 = 290.0, var_v2 = 300.0;
  const double c1 = -0.3, c2 = 0.925;
  f << var_v1, 0.0, c1 * var_v1,
       0.0, var_v2, c2 * var_v2,
       c1 * var_v1, c2 * var_v2, c1 * c1 * var_v1 + c2 * c2 * var_v2 + 1.0;
  return f;
}

// factor index of variable o in 0..9 within one block of ten
inline int factor_of(int o) { return o < 4 ? 0 : (o < 8 ? 1 : 2); }

}  // namespace detail

inline std::vector<std::string> numbered_names(int p, const std::string& stem = "X") {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(p));
  for (int i = 1; i <= p; ++i) names.push_back(stem + std::to_string(i));
  return names;
}

inline DatasetInput hidden_factors_covariance() {
  const Matrix f = detail::hidden_factor_block();
  Matrix sigma(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      sigma(i, j) = f(detail::factor_of(i), detail::factor_of(j));
  sigma.diagonal().array() += 1.0;
  return make_covariance(std::move(sigma), numbered_names(10));
}

// Ten hidden factors in three independent groups plus a tenth factor V10 with
// stated covariances Cov(V10,V1)=290, Cov(V10,V2)=300, Cov(V10,V3)=282.7875,
// Var(V10)=295 against each group. Variables 1..90 cycle through the groups in
// decades of (4,4,2); variables 91..100 load on the sum of all nine group
// factors plus V10. Exact symbolic expansion; unit noise on the diagonal.
// The stated V10 covariances make the matrix indefinite; it is returned
// exactly as defined and clamped only at the matrix-root stage.
inline DatasetInput hidden_groups_covariance() {
  Matrix factor_cov = Matrix::Zero(10, 10);
  const Matrix blk = detail::hidden_factor_block();
  for (int g = 0; g < 3; ++g)
    factor_cov.block(3 * g, 3 * g, 3, 3) = blk;
  const std::array<double, 3> v10_cross = {290.0, 300.0, 282.7875};
  for (int g = 0; g < 3; ++g)
    for (int k = 0; k < 3; ++k) {
      factor_cov(9, 3 * g + k) = v10_cross[static_cast<size_t>(k)];
      factor_cov(3 * g + k, 9) = v10_cross[static_cast<size_t>(k)];
    }
  factor_cov(9, 9) = 295.0;

  Matrix loadings = Matrix::Zero(100, 10);
  for (int i = 0; i < 90; ++i) {
    const int g = (i / 10) % 3;
    const int k = detail::factor_of(i % 10);
    loadings(i, 3 * g + k) = 1.0;
  }
  for (int i = 90; i < 100; ++i) loadings.row(i).setOnes();

  Matrix sigma = loadings * factor_cov * loadings.transpose();
  sigma.diagonal().array() += 1.0;
  return make_covariance(std::move(sigma), numbered_names(100));
}

// Finite-sample draw from the three-hidden-factor model; columns centered.
// Deterministic for a given seed.
inline DatasetInput sample_hidden_factors(int n, unsigned long seed) {
  if (n < 2) throw InvalidInputError("sample_hidden_factors: n must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  Matrix x(n, 10);
  for (int i = 0; i < n; ++i) {
    const double v1 = std::sqrt(290.0) * unit(rng);
    const double v2 = std::sqrt(300.0) * unit(rng);
    const double v3 = -0.3 * v1 + 0.925 * v2 + unit(rng);
    for (int j = 0; j < 10; ++j) {
      const int k = detail::factor_of(j);
      const double f = k == 0 ? v1 : (k == 1 ? v2 : v3);
      x(i, j) = f + unit(rng);
    }
  }
  return make_data_matrix(std::move(x), numbered_names(10));
}

// CSV ingestion; data_matrix mode centers columns, covariance mode validates
// squareness and symmetry.
inline DatasetInput load_csv(const std::string& path, bool has_header,
                             DataKind mode) {
  CsvTable table = read_csv(path, has_header);
  if (mode == DataKind::data_matrix)
    return make_data_matrix(std::move(table.values), std::move(table.header));
  return make_covariance(std::move(table.values), std::move(table.header));
}

}  // namespace fgspca
