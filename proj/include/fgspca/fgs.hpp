#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fgspca/errors.hpp"
#include "fgspca/linalg.hpp"

namespace fgspca {

// One feature-grouping-and-sparsity constrained regression:
//   min_beta  ||y - X beta||^2 + lambda ||beta||^2
//             + lambda1 * sum_l min(|beta_l| / tau, 1)
//             + lambda2 * sum_{l<l'} min(|beta_l - beta_l'| / tau, 1)
//             + lambda3 * sum_l min(beta_l, 0)^2
// The pair sum runs over the complete graph. lambda3 = 0 disables the
// non-negative extension.
struct FgsProblem {
  Matrix x;
  Vector y;
  double lambda{0.0};
  double lambda1{0.0};
  double lambda2{0.0};
  double tau{0.05};
  double lambda3{0.0};

  Eigen::Index n_features() const { return x.cols(); }

  void validate() const {
    require_finite(x, "FgsProblem.x");
    if (!y.allFinite()) throw InvalidInputError("FgsProblem.y: non-finite");
    if (y.size() != x.rows())
      throw InvalidInputError("FgsProblem: y length " +
                              std::to_string(y.size()) + " != rows " +
                              std::to_string(x.rows()));
    if (!(tau > 0.0)) throw InvalidInputError("FgsProblem: tau must be > 0");
    if (lambda < 0 || lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
      throw InvalidInputError("FgsProblem: negative penalty weight");
  }
};

struct SolverControls {
  double rho{1.05};         // multiplier weight growth factor, > 1
  double nu0{1.0};          // initial penalty weight
  double delta_star{1e-5};  // inner sweep tolerance (max-abs beta change)
  int max_inner{10000};
  int max_outer{100};
  double outer_tol{1e-8};   // relative objective-decrease floor

  void validate() const {
    if (!(rho > 1.0)) throw InvalidInputError("SolverControls: rho must be > 1");
    if (!(nu0 > 0.0)) throw InvalidInputError("SolverControls: nu0 must be > 0");
    if (!(delta_star > 0.0))
      throw InvalidInputError("SolverControls: delta_star must be > 0");
    if (max_inner < 1 || max_outer < 1)
      throw InvalidInputError("SolverControls: iteration caps must be >= 1");
  }
};

// Growth of nu stops here; beyond this the multiplier step would overflow
// long after the beta sweep has frozen anyway.
inline constexpr double kNuCap = 1e12;

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Active sets of one DC outer iteration, from the previous outer iterate.
struct ActiveSets {
  std::vector<uint8_t> f;   // {l : |beta_l| < tau}
  BoolGrid e_active;        // symmetric, {(l,l') : |beta_l - beta_l'| < tau}
  std::vector<uint8_t> n;   // {l : beta_l < 0}, empty unless nn enabled
};

inline ActiveSets update_sets(const Vector& beta_prev, double tau, bool nn) {
  if (!(tau > 0.0)) throw InvalidInputError("update_sets: tau must be > 0");
  const Eigen::Index p = beta_prev.size();
  ActiveSets s;
  s.f.resize(p);
  s.n.assign(p, 0);
  s.e_active = BoolGrid::Constant(p, p, false);
  for (Eigen::Index l = 0; l < p; ++l) {
    s.f[l] = std::abs(beta_prev(l)) < tau ? 1 : 0;
    if (nn) s.n[l] = beta_prev(l) < 0.0 ? 1 : 0;
  }
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a + 1; b < p; ++b)
      if (std::abs(beta_prev(a) - beta_prev(b)) < tau) {
        s.e_active(a, b) = true;
        s.e_active(b, a) = true;
      }
  return s;
}

// Augmented coordinate state xi = (beta, {beta_ll'}) plus multipliers and
// active sets. Pair quantities are stored densely as antisymmetric p x p
// matrices; the upper triangle (l < l') is the authoritative orientation.
struct FgsState {
  Vector beta;
  Matrix slack;        // slack(a,b) = beta_ab, slack(b,a) = -beta_ab
  Matrix multipliers;  // same antisymmetric layout
  double nu{1.0};
  ActiveSets sets;

  static FgsState initial(const Vector& beta0, double tau, bool nn,
                          double nu0) {
    FgsState st;
    st.beta = beta0;
    const Eigen::Index p = beta0.size();
    st.slack = beta0.replicate(1, p) - beta0.transpose().replicate(p, 1);
    st.multipliers = Matrix::Zero(p, p);
    st.nu = nu0;
    st.sets = update_sets(beta0, tau, nn);
    return st;
  }
};

// Objective of the FGS problem (the quantity the outer loop traces).
inline double objective(const FgsProblem& problem, const Vector& beta) {
  if (beta.size() != problem.x.cols())
    throw InvalidInputError("objective: beta length " +
                            std::to_string(beta.size()) + " != features " +
                            std::to_string(problem.x.cols()));
  const Vector r = problem.y - problem.x * beta;
  double obj = r.squaredNorm() + problem.lambda * beta.squaredNorm();
  const Eigen::Index p = beta.size();
  if (problem.lambda1 != 0.0) {
    double sel = 0.0;
    for (Eigen::Index l = 0; l < p; ++l)
      sel += std::min(std::abs(beta(l)) / problem.tau, 1.0);
    obj += problem.lambda1 * sel;
  }
  if (problem.lambda2 != 0.0) {
    double grp = 0.0;
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = a + 1; b < p; ++b)
        grp += std::min(std::abs(beta(a) - beta(b)) / problem.tau, 1.0);
    obj += problem.lambda2 * grp;
  }
  if (problem.lambda3 != 0.0) {
    double neg = 0.0;
    for (Eigen::Index l = 0; l < p; ++l)
      neg += std::min(beta(l), 0.0) * std::min(beta(l), 0.0);
    obj += problem.lambda3 * neg;
  }
  return obj;
}

// Augmented Lagrangian of the current subproblem at the given state.
// Used by tests to verify single-coordinate descent.
inline double augmented_lagrangian(const FgsState& st,
                                   const FgsProblem& problem) {
  const Eigen::Index p = st.beta.size();
  const Vector r = problem.y - problem.x * st.beta;
  double val = r.squaredNorm() + problem.lambda * st.beta.squaredNorm();
  const double thr1 = problem.lambda1 / problem.tau;
  const double thr2 = problem.lambda2 / problem.tau;
  for (Eigen::Index l = 0; l < p; ++l) {
    if (st.sets.f[l]) val += thr1 * std::abs(st.beta(l));
    if (!st.sets.n.empty() && st.sets.n[l])
      val += problem.lambda3 * st.beta(l) * st.beta(l);
  }
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a + 1; b < p; ++b)
      if (st.sets.e_active(a, b)) {
        const double resid = st.beta(a) - st.beta(b) - st.slack(a, b);
        val += thr2 * std::abs(st.slack(a, b));
        val += st.multipliers(a, b) * resid + 0.5 * st.nu * resid * resid;
      }
  return val;
}

namespace detail {

// Pair contribution to gamma* for coordinate l and active neighbor j, in the
// antisymmetric layout: -M(l,j) + nu * (beta_j + S(l,j)). For l < j this is
// -tau_lj + nu (beta_j + beta_lj); for j < l it is +tau_jl + nu (beta_j - beta_jl).
inline double pair_gamma_term(const FgsState& st, Eigen::Index l,
                              Eigen::Index j) {
  return -st.multipliers(l, j) + st.nu * (st.beta(j) + st.slack(l, j));
}

}  // namespace detail

// New value of beta_l minimizing the augmented Lagrangian in that coordinate,
// everything else fixed. Pure; does not mutate the state.
inline double coordinate_update_beta(const FgsState& st,
                                     const FgsProblem& problem,
                                     Eigen::Index l) {
  const Eigen::Index p = st.beta.size();
  if (l < 0 || l >= p) throw InvalidInputError("coordinate_update_beta: bad index");
  const Vector& coll = problem.x.col(l);
  // b_(i,-l) residual with coordinate l removed
  const Vector r = problem.y - problem.x * st.beta + coll * st.beta(l);
  const double colsq = coll.squaredNorm();
  double gamma = 2.0 * coll.dot(r);
  double alpha = 2.0 * problem.lambda + 2.0 * colsq;
  if (!st.sets.n.empty() && st.sets.n[l]) alpha += 2.0 * problem.lambda3;
  for (Eigen::Index j = 0; j < p; ++j)
    if (st.sets.e_active(l, j)) {
      alpha += st.nu;
      gamma += detail::pair_gamma_term(st, l, j);
    }
  if (st.sets.f[l]) gamma = soft_threshold(gamma, problem.lambda1 / problem.tau);
  return alpha > 0.0 ? gamma / alpha : 0.0;
}

// New slack value for the ordered pair (a, b), a < b. Inactive pairs carry
// their previous value unchanged.
inline double coordinate_update_slack(const FgsState& st,
                                      const FgsProblem& problem,
                                      Eigen::Index a, Eigen::Index b) {
  if (!(a < b)) throw InvalidInputError("coordinate_update_slack: need a < b");
  if (!st.sets.e_active(a, b)) return st.slack(a, b);
  const double z = st.multipliers(a, b) + st.nu * (st.beta(a) - st.beta(b));
  return soft_threshold(z, problem.lambda2 / problem.tau) / st.nu;
}

// Multiplier step of the augmented Lagrangian, active pairs only, followed by
// the nu growth step.
inline void update_multipliers(FgsState& st, const SolverControls& controls) {
  const Eigen::Index p = st.beta.size();
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a + 1; b < p; ++b)
      if (st.sets.e_active(a, b)) {
        const double resid = st.beta(a) - st.beta(b) - st.slack(a, b);
        st.multipliers(a, b) += st.nu * resid;
        st.multipliers(b, a) = -st.multipliers(a, b);
      }
  st.nu = std::min(st.nu * controls.rho, kNuCap);
}

struct FgsSolution {
  Vector beta;
  std::vector<double> objective_trace;  // objective at init, then per outer iteration
  int outer_iterations{0};
  long inner_iterations{0};
  bool hit_outer_cap{false};
  bool degenerate_coordinate{false};
};

// Default standalone initializer: the ridge solution (least squares when
// lambda == 0).
inline Vector ridge_initial_beta(const FgsProblem& problem) {
  if (problem.lambda > 0.0) {
    Matrix g = problem.x.transpose() * problem.x;
    g.diagonal().array() += problem.lambda;
    return Eigen::LLT<Matrix>(g).solve(problem.x.transpose() * problem.y);
  }
  return problem.x.completeOrthogonalDecomposition().solve(problem.y);
}

// Integrated DC / augmented-Lagrangian / coordinate-descent solver.
// Outer loop: refresh (F, E-active, N) from the accepted iterate, re-solve the
// convex subproblem by the inner AL-CD loop, stop when the objective no longer
// improves by more than outer_tol * (1 + |S|). A candidate that increases the
// objective is discarded, so the trace is non-increasing by construction.
inline FgsSolution solve(const FgsProblem& problem,
                         const SolverControls& controls,
                         const Vector& beta_init) {
  problem.validate();
  controls.validate();
  if (beta_init.size() != problem.x.cols())
    throw InvalidInputError("solve: beta_init length mismatch");
  if (!beta_init.allFinite())
    throw InvalidInputError("solve: beta_init non-finite");

  const Eigen::Index n = problem.x.rows();
  const Eigen::Index p = problem.x.cols();
  const bool use_pairs = problem.lambda2 != 0.0;
  const bool nn = problem.lambda3 != 0.0;
  const double thr1 = problem.lambda1 / problem.tau;
  const double thr2 = problem.lambda2 / problem.tau;

  Vector colsq(p);
  for (Eigen::Index l = 0; l < p; ++l) colsq(l) = problem.x.col(l).squaredNorm();

  FgsSolution out;
  Vector beta = beta_init;
  // Feasible slack start: beta_ab^(0) = beta_a^(0) - beta_b^(0).
  Matrix slack = beta.replicate(1, p) - beta.transpose().replicate(p, 1);
  Matrix mult = Matrix::Zero(p, p);

  double s_prev = objective(problem, beta);
  out.objective_trace.push_back(s_prev);

  std::vector<std::vector<Eigen::Index>> incident(p);
  std::vector<int> degree(p);
  Vector b = beta, b_sweep_prev = beta;
  Vector r(n);

  for (int m = 1; m <= controls.max_outer; ++m) {
    ActiveSets sets = update_sets(beta, problem.tau, nn);
    for (Eigen::Index l = 0; l < p; ++l) {
      incident[l].clear();
      if (use_pairs)
        for (Eigen::Index j = 0; j < p; ++j)
          if (sets.e_active(l, j)) incident[l].push_back(j);
      degree[l] = static_cast<int>(incident[l].size());
    }

    // Inner AL-CD loop: xi^(m,0) = xi^(m-1), multipliers reset, nu reset.
    b = beta;
    mult.setZero();
    double nu = controls.nu0;
    r = problem.y - problem.x * b;

    for (int k = 1; k <= controls.max_inner; ++k) {
      ++out.inner_iterations;
      if (use_pairs) {
        // Multiplier step from iterate k-1, then nu growth.
        for (Eigen::Index a = 0; a < p; ++a)
          for (Eigen::Index bb = a + 1; bb < p; ++bb)
            if (sets.e_active(a, bb)) {
              const double resid = b(a) - b(bb) - slack(a, bb);
              mult(a, bb) += nu * resid;
              mult(bb, a) = -mult(a, bb);
            }
        nu = std::min(nu * controls.rho, kNuCap);
      }

      // Full beta sweep in index order, latest values.
      b_sweep_prev = b;
      for (Eigen::Index l = 0; l < p; ++l) {
        double gamma = 2.0 * problem.x.col(l).dot(r) + 2.0 * colsq(l) * b(l);
        double alpha = 2.0 * problem.lambda + 2.0 * colsq(l);
        if (nn && sets.n[l]) alpha += 2.0 * problem.lambda3;
        for (Eigen::Index j : incident[l]) {
          gamma += -mult(l, j) + nu * (b(j) + slack(l, j));
        }
        alpha += nu * degree[l];
        if (sets.f[l]) gamma = soft_threshold(gamma, thr1);
        double value;
        if (alpha > 0.0) {
          value = gamma / alpha;
        } else {
          value = 0.0;
          out.degenerate_coordinate = true;
        }
        if (!std::isfinite(value))
          throw DivergenceError("solve: non-finite beta[" + std::to_string(l) +
                                    "] at outer " + std::to_string(m) +
                                    ", inner " + std::to_string(k),
                                m, k);
        if (value != b(l)) {
          r += problem.x.col(l) * (b(l) - value);
          b(l) = value;
        }
      }

      // Slack sweep over active pairs with the fresh beta.
      if (use_pairs) {
        for (Eigen::Index a = 0; a < p; ++a)
          for (Eigen::Index bb = a + 1; bb < p; ++bb)
            if (sets.e_active(a, bb)) {
              const double z = mult(a, bb) + nu * (b(a) - b(bb));
              const double s = soft_threshold(z, thr2) / nu;
              slack(a, bb) = s;
              slack(bb, a) = -s;
            }
      }

      if ((b - b_sweep_prev).cwiseAbs().maxCoeff() < controls.delta_star) break;
    }

    const double s_new = objective(problem, b);
    if (!std::isfinite(s_new))
      throw DivergenceError("solve: non-finite objective at outer " +
                                std::to_string(m),
                            m, 0);
    out.outer_iterations = m;
    const bool improved = s_new < s_prev;
    if (improved) {
      beta = b;
      out.objective_trace.push_back(s_new);
    }
    if (!improved || (s_prev - s_new) <= controls.outer_tol * (1.0 + std::abs(s_prev)))
      break;
    s_prev = s_new;
    if (m == controls.max_outer) out.hit_outer_cap = true;
  }

  out.beta = std::move(beta);
  return out;
}

inline FgsSolution solve(const FgsProblem& problem,
                         const SolverControls& controls) {
  return solve(problem, controls, ridge_initial_beta(problem));
}

}  // namespace fgspca
