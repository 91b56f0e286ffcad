#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fgspca/errors.hpp"
#include "fgspca/linalg.hpp"

namespace fgspca {

enum class DataKind { data_matrix, covariance };

// Single source of X / Sigma for the fitting pipeline. A data matrix is
// stored column-centered; a covariance matrix is stored as given (indefinite
// inputs are clamped later, at the matrix-root stage, with a flag).
struct DatasetInput {
  DataKind kind{DataKind::data_matrix};
  Matrix matrix;
  std::vector<std::string> variable_names;

  Eigen::Index n_variables() const { return matrix.cols(); }
};

inline void center_columns(Matrix& x) {
  x.rowwise() -= x.colwise().mean();
}

inline DatasetInput make_data_matrix(Matrix x,
                                     std::vector<std::string> names = {}) {
  require_finite(x, "data matrix");
  if (x.rows() < 1 || x.cols() < 1)
    throw InvalidShapeError("data matrix: empty");
  center_columns(x);
  return DatasetInput{DataKind::data_matrix, std::move(x), std::move(names)};
}

inline DatasetInput make_covariance(Matrix sigma,
                                    std::vector<std::string> names = {}) {
  require_finite(sigma, "covariance");
  if (sigma.rows() != sigma.cols())
    throw InvalidShapeError("covariance: not square (" +
                            std::to_string(sigma.rows()) + "x" +
                            std::to_string(sigma.cols()) + ")");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  Eigen::Index wi = 0, wj = 0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i)
    for (Eigen::Index j = i + 1; j < sigma.cols(); ++j) {
      const double d = std::abs(sigma(i, j) - sigma(j, i));
      if (d > worst) {
        worst = d;
        wi = i;
        wj = j;
      }
    }
  if (worst > 1e-10 * scale)
    throw InvalidInputError(
        "covariance: asymmetric, worst entry (" + std::to_string(wi + 1) +
        "," + std::to_string(wj + 1) + ") differs by " + std::to_string(worst));
  return DatasetInput{DataKind::covariance, std::move(sigma), std::move(names)};
}

}  // namespace fgspca
