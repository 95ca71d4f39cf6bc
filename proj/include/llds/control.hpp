#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "llds/errors.hpp"
#include "llds/matrix.hpp"
#include "llds/model.hpp"
#include "llds/numerics.hpp"
#include "llds/simulate.hpp"

namespace llds {

// Element-wise box on every log-input uhat_t (the same box at each step).
struct ControlBounds {
  Vector lower;
  Vector upper;
};

namespace detail {

inline void check_weight_matrix(const Matrix& W, std::size_t dim, const char* name,
                                bool require_pd) {
  if (W.rows() != dim || W.cols() != dim) {
    fail(Errc::dimension_mismatch, std::string(name) + " weight must be " +
                                       std::to_string(dim) + "x" + std::to_string(dim));
  }
  const double sym_tol = 1e-12 * std::max(1.0, max_abs(W));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      if (std::abs(W(i, j) - W(j, i)) > sym_tol) {
        fail(Errc::invalid_weight, std::string(name) + " weight is not symmetric");
      }
    }
  }
  // Definiteness is probed, not proven: unit basis vectors plus a fixed set
  // of seeded random unit directions.
  const double floor = require_pd ? 1e-10 : -1e-10;
  auto check_form = [&](const Vector& v) {
    const double form = dot(v, W * v);
    if (form < floor) {
      fail(Errc::invalid_weight,
           std::string(name) + " weight fails a definiteness probe (v'Wv = " +
               std::to_string(form) + ")");
    }
  };
  for (std::size_t i = 0; i < dim; ++i) {
    Vector e(dim);
    e[i] = 1.0;
    check_form(e);
  }
  std::mt19937_64 gen(0xC0FFEEULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t k = 0; k < 8 * dim; ++k) {
    Vector v(dim);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = unif(gen);
      norm += v[i] * v[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    v *= 1.0 / norm;
    check_form(v);
  }
}

}  // namespace detail

// Finite-horizon quadratic tracking over the log-space linear dynamics:
//
//   minimize    sum_{t=1..T} (xhat_{t+1} - ref_{t+1})' Q (xhat_{t+1} - ref_{t+1})
//                          + uhat_t' R uhat_t
//   subject to  xhat_{t+1} = A xhat_t + B uhat_t + chat
//
// with optional element-wise bounds on each uhat_t. Q must be symmetric
// positive semidefinite, R symmetric positive definite; both checks are
// probe-based and run at construction.
class ControlProblem {
 public:
  ControlProblem(LogLinearModel model, Vector initial_log_state,
                 std::vector<Vector> log_refs, Matrix state_weight, Matrix input_weight,
                 std::optional<ControlBounds> bounds = std::nullopt)
      : model_(std::move(model)),
        x1_(std::move(initial_log_state)),
        refs_(std::move(log_refs)),
        Q_(std::move(state_weight)),
        R_(std::move(input_weight)),
        bounds_(std::move(bounds)) {
    const std::size_t n = model_.state_dim();
    if (!model_.controlled()) {
      fail(Errc::dimension_mismatch, "ControlProblem: model must have m >= 1");
    }
    if (x1_.dim() != n) {
      fail(Errc::dimension_mismatch, "ControlProblem: initial state dim mismatch");
    }
    if (refs_.empty()) fail(Errc::too_short, "ControlProblem: horizon must be >= 1");
    for (const Vector& r : refs_) {
      if (r.dim() != n) fail(Errc::dimension_mismatch, "ControlProblem: reference dim mismatch");
    }
    detail::check_weight_matrix(Q_, n, "state", /*require_pd=*/false);
    detail::check_weight_matrix(R_, model_.control_dim(), "input", /*require_pd=*/true);
    if (bounds_) {
      const std::size_t m = model_.control_dim();
      if (bounds_->lower.dim() != m || bounds_->upper.dim() != m) {
        fail(Errc::dimension_mismatch, "ControlProblem: bound dim mismatch");
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (!(bounds_->lower[i] < bounds_->upper[i])) {
          fail(Errc::infeasible_bounds,
               "ControlProblem: lower bound >= upper bound at component " +
                   std::to_string(i));
        }
      }
    }
  }

  const LogLinearModel& model() const { return model_; }
  const Vector& initial_log_state() const { return x1_; }
  std::size_t horizon() const { return refs_.size(); }
  const std::vector<Vector>& log_refs() const { return refs_; }  // targets for xhat_2..xhat_{T+1}
  const Matrix& state_weight() const { return Q_; }
  const Matrix& input_weight() const { return R_; }
  const std::optional<ControlBounds>& bounds() const { return bounds_; }

 private:
  LogLinearModel model_;
  Vector x1_;
  std::vector<Vector> refs_;
  Matrix Q_;
  Matrix R_;
  std::optional<ControlBounds> bounds_;
};

struct ControlSolution {
  std::vector<Vector> log_inputs;     // uhat_1..uhat_T
  std::vector<Vector> log_states;     // xhat_2..xhat_{T+1}
  std::vector<Vector> primal_inputs;  // exp(uhat_t)
  double objective = 0.0;
  double kkt_residual = 0.0;
};

// The problem after eliminating states through the dynamics: each xhat_{t+1}
// is affine in the stacked input vector, and the objective becomes the
// strictly convex quadratic
//
//   J(u) = 0.5 u' H u + g0' u + constant,   H = 2 (G' Qbar G + Rbar) > 0.
//
// This is the object the solver minimizes; it is exposed so tests can check
// the analytic gradient independently.
struct ReducedQuadratic {
  Matrix hessian;   // H, (m T) x (m T)
  Vector linear;    // g0 = gradient at u = 0
  double constant;  // objective at u = 0

  double value(const Vector& u) const {
    return 0.5 * dot(u, hessian * u) + dot(linear, u) + constant;
  }

  Vector gradient(const Vector& u) const { return hessian * u + linear; }
};

inline ReducedQuadratic reduce(const ControlProblem& p) {
  const std::size_t n = p.model().state_dim();
  const std::size_t m = p.model().control_dim();
  const std::size_t T = p.horizon();
  const Matrix& A = p.model().dynamics();
  const Matrix& B = p.model().input_matrix();
  const Vector chat = p.model().log_offset();

  // Input-to-state map: xhat_{t+1} = d_t + sum_{s<=t} A^{t-s} B uhat_s.
  std::vector<Matrix> powerB(T);  // powerB[j] = A^j B
  powerB[0] = B;
  for (std::size_t j = 1; j < T; ++j) powerB[j] = A * powerB[j - 1];

  std::vector<Vector> d(T);  // free response, d[t-1] = xhat_{t+1} under u = 0
  d[0] = A * p.initial_log_state() + chat;
  for (std::size_t t = 1; t < T; ++t) d[t] = A * d[t - 1] + chat;

  Matrix G(n * T, m * T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s <= t; ++s) {
      const Matrix& blk = powerB[t - s];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) G(t * n + i, s * m + k) = blk(i, k);
    }
  }

  Vector offset(n * T);  // d - ref, stacked
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < n; ++i) offset[t * n + i] = d[t][i] - p.log_refs()[t][i];

  // Qbar G and Qbar offset, block by block.
  Matrix QG(n * T, m * T);
  Vector Qoff(n * T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double qij = p.state_weight()(i, j);
        if (qij == 0.0) continue;
        Qoff[t * n + i] += qij * offset[t * n + j];
        for (std::size_t col = 0; col < m * T; ++col)
          QG(t * n + i, col) += qij * G(t * n + j, col);
      }
    }
  }

  Matrix H = G.transposed() * QG;
  H += H.transposed();  // 2 G' Qbar G, symmetrized
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        H(t * m + i, t * m + j) += 2.0 * p.input_weight()(i, j);

  Vector g0(m * T);
  for (std::size_t col = 0; col < m * T; ++col) {
    double s = 0.0;
    for (std::size_t row = 0; row < n * T; ++row) s += G(row, col) * Qoff[row];
    g0[col] = 2.0 * s;
  }

  double constant = 0.0;
  for (std::size_t row = 0; row < n * T; ++row) constant += offset[row] * Qoff[row];

  return ReducedQuadratic{std::move(H), std::move(g0), constant};
}

// Stage-cost sum attained by a given log-input sequence, with states rolled
// forward from the problem's initial log-state.
inline double objective_value(const ControlProblem& p, const std::vector<Vector>& log_inputs) {
  const std::size_t T = p.horizon();
  const std::size_t m = p.model().control_dim();
  if (log_inputs.size() != T) {
    fail(Errc::dimension_mismatch, "objective_value: expected " + std::to_string(T) +
                                       " inputs, got " + std::to_string(log_inputs.size()));
  }
  double total = 0.0;
  Vector xhat = p.initial_log_state();
  for (std::size_t t = 0; t < T; ++t) {
    if (log_inputs[t].dim() != m) {
      fail(Errc::dimension_mismatch, "objective_value: input dim mismatch at step " +
                                         std::to_string(t));
    }
    log_inputs[t].validate();
    xhat = p.model().dynamics() * xhat + p.model().input_matrix() * log_inputs[t] +
           p.model().log_offset();
    const Vector dev = xhat - p.log_refs()[t];
    total += dot(dev, p.state_weight() * dev);
    total += dot(log_inputs[t], p.input_weight() * log_inputs[t]);
  }
  return total;
}

namespace detail {

inline Vector clamp_to_bounds(const Vector& u, const ControlBounds& b, std::size_t m) {
  Vector out = u;
  for (std::size_t idx = 0; idx < u.dim(); ++idx) {
    const std::size_t comp = idx % m;
    out[idx] = std::min(std::max(out[idx], b.lower[comp]), b.upper[comp]);
  }
  return out;
}

// Projected gradient with Armijo backtracking on the reduced quadratic.
// Terminates at ||u - clamp(u - grad)||_inf <= tol or raises IterationLimit.
inline std::pair<Vector, double> projected_gradient(const ReducedQuadratic& rq,
                                                    const ControlBounds& b, std::size_t m,
                                                    Vector u, double tol,
                                                    std::size_t max_iters) {
  u = clamp_to_bounds(u, b, m);
  double alpha = 1.0;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const Vector grad = rq.gradient(u);
    const double stationarity = inf_norm(u - clamp_to_bounds(u - grad, b, m));
    if (stationarity <= tol) return {std::move(u), stationarity};

    const double f0 = rq.value(u);
    alpha = std::min(alpha * 2.0, 1.0);
    bool moved = false;
    for (int halvings = 0; halvings < 200; ++halvings) {
      Vector cand = clamp_to_bounds(u - alpha * grad, b, m);
      const Vector delta = cand - u;
      if (rq.value(cand) <= f0 + 1e-4 * dot(grad, delta)) {
        u = std::move(cand);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      fail(Errc::iteration_limit, "solve_control: projected-gradient line search stalled");
    }
  }
  fail(Errc::iteration_limit, "solve_control: projected gradient exceeded iteration limit");
}

}  // namespace detail

// Solves the control problem. Without bounds the exact minimizer of the
// reduced quadratic is returned (one dense solve; kkt_residual is the
// infinity norm of the reduced gradient at the solution). With bounds,
// projected gradient refines the clamped unconstrained solution until the
// projected-gradient stationarity measure drops to 1e-6. Unboundedness
// cannot occur: R > 0 makes the reduced quadratic strictly convex.
inline ControlSolution solve_control(const ControlProblem& p) {
  const std::size_t m = p.model().control_dim();
  const std::size_t T = p.horizon();
  const ReducedQuadratic rq = reduce(p);

  Vector g_at_zero = rq.linear;
  Vector u = solve_linear(rq.hessian, -1.0 * g_at_zero);

  double kkt = 0.0;
  if (!p.bounds()) {
    const double tol = 1e-8 * (1.0 + inf_norm(g_at_zero));
    for (int pass = 0; pass < 4; ++pass) {
      Vector grad = rq.gradient(u);
      kkt = inf_norm(grad);
      if (kkt <= tol) break;
      u += solve_linear(rq.hessian, -1.0 * grad);  // iterative refinement
    }
    if (kkt > tol) {
      fail(Errc::iteration_limit, "solve_control: KKT residual did not converge");
    }
  } else {
    auto [u_pg, stationarity] =
        detail::projected_gradient(rq, *p.bounds(), m, std::move(u), 1e-6, 100000);
    u = std::move(u_pg);
    kkt = stationarity;
  }

  ControlSolution sol;
  sol.kkt_residual = kkt;
  sol.log_inputs.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    Vector ut(m);
    for (std::size_t k = 0; k < m; ++k) ut[k] = u[t * m + k];
    sol.log_inputs.push_back(std::move(ut));
  }

  Vector xhat = p.initial_log_state();
  sol.log_states.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    xhat = step_log(p.model(), xhat, &sol.log_inputs[t]);
    sol.log_states.push_back(xhat);
  }
  sol.primal_inputs.reserve(T);
  for (const Vector& ut : sol.log_inputs) sol.primal_inputs.push_back(exp_entries(ut));
  sol.objective = objective_value(p, sol.log_inputs);
  return sol;
}

// Applies a solved input sequence to the model from a primal initial state:
// the result is x1 followed by exp of the solution's predicted log-states.
inline Trajectory rollout_controlled(const LogLinearModel& model, const Vector& x1,
                                     const ControlSolution& solution) {
  if (model.control_dim() == 0 ||
      solution.log_inputs.empty() ||
      solution.log_inputs[0].dim() != model.control_dim() ||
      solution.log_states.size() != solution.log_inputs.size() ||
      solution.log_states[0].dim() != model.state_dim() ||
      x1.dim() != model.state_dim()) {
    fail(Errc::dimension_mismatch, "rollout_controlled: solution does not match model");
  }
  detail::require_positive(x1, "rollout_controlled x1");
  std::vector<Vector> states;
  states.reserve(solution.log_states.size() + 1);
  states.push_back(x1);
  for (const Vector& s : solution.log_states) states.push_back(exp_entries(s));
  return Trajectory(std::move(states));
}

}  // namespace llds
