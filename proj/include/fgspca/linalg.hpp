#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "fgspca/errors.hpp"

namespace fgspca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw InvalidInputError(what + ": non-finite entries");
}

// Largest-magnitude entry of each v column made positive; u columns flipped
// jointly so u*diag(s)*v^T is unchanged.
inline void sign_normalize_columns(Matrix& v, Matrix* u = nullptr) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    if (v(imax, j) < 0.0) {
      v.col(j) = -v.col(j);
      if (u) u->col(j) = -u->col(j);
    }
  }
}

struct SvdFactors {
  Matrix u;                // n x r
  Vector singular_values;  // descending, non-negative
  Matrix v;                // p x r
};

// Thin SVD, r = min(rows, cols). Singular values descend (LAPACK-style);
// v columns are sign-normalized.
inline SvdFactors svd(const Matrix& m) {
  require_finite(m, "svd");
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  sign_normalize_columns(out.v, &out.u);
  return out;
}

struct QrFactors {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular
};

inline QrFactors qr(const Matrix& m) {
  require_finite(m, "qr");
  if (m.rows() < m.cols())
    throw InvalidShapeError("qr: rows (" + std::to_string(m.rows()) +
                            ") < cols (" + std::to_string(m.cols()) + ")");
  Eigen::HouseholderQR<Matrix> dec(m);
  const Eigen::Index c = m.cols();
  QrFactors out;
  out.q = dec.householderQ() * Matrix::Identity(m.rows(), c);
  out.r = dec.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  return out;
}

struct EigFactors {
  Vector values;   // descending
  Matrix vectors;  // columns paired with values
};

inline EigFactors sym_eig(const Matrix& m) {
  require_finite(m, "sym_eig");
  if (m.rows() != m.cols())
    throw InvalidShapeError("sym_eig: matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw InvalidInputError("sym_eig: matrix not symmetric (max |m - m^T| = " +
                            std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> dec(m);
  const Eigen::Index p = m.rows();
  EigFactors out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {  // ascending -> descending
    out.values(j) = dec.eigenvalues()(p - 1 - j);
    out.vectors.col(j) = dec.eigenvectors().col(p - 1 - j);
  }
  sign_normalize_columns(out.vectors);
  return out;
}

// Symmetric PSD square root. Eigenvalues in [-1e-8, 0) are treated as
// round-off and clamped to 0; anything lower is an error.
inline Matrix sym_sqrt(const Matrix& sigma) {
  EigFactors eig = sym_eig(sigma);
  Vector w = eig.values;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < -1e-8)
      throw NotPsdError("sym_sqrt: eigenvalue " + std::to_string(w(i)) +
                        " below -1e-8");
    w(i) = std::sqrt(std::max(w(i), 0.0));
  }
  return eig.vectors * w.asDiagonal() * eig.vectors.transpose();
}

struct PsdRoot {
  Matrix root;
  bool clamped{false};   // true when eigenvalues below -1e-8 were dropped
  double min_eigenvalue{0.0};
};

// Root of the PSD projection: all negative eigenvalues are clamped to zero.
// Indefinite inputs are flagged rather than rejected.
inline PsdRoot psd_root(const Matrix& sigma) {
  EigFactors eig = sym_eig(sigma);
  PsdRoot out;
  out.min_eigenvalue = eig.values(eig.values.size() - 1);
  out.clamped = out.min_eigenvalue < -1e-8;
  Vector w = eig.values.cwiseMax(0.0).cwiseSqrt();
  out.root = eig.vectors * w.asDiagonal() * eig.vectors.transpose();
  return out;
}

// ST(x, delta) = sign(x) * (|x| - delta)_+
inline double soft_threshold(double x, double delta) {
  const double a = std::abs(x) - delta;
  return a > 0.0 ? (x >= 0.0 ? a : -a) : 0.0;
}

}  // namespace fgspca
