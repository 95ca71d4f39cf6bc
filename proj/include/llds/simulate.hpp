#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "llds/errors.hpp"
#include "llds/matrix.hpp"
#include "llds/model.hpp"
#include "llds/numerics.hpp"

namespace llds {

// Isotropic Gaussian log-noise: zhat_t ~ N(0, sigma^2 I), so the primal
// factor z_t = exp(zhat_t) is log-normal. sigma = 0 means deterministic
// dynamics. The seed fully determines every draw.
struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  NoiseSpec(double sigma_, std::uint64_t seed_) : sigma(sigma_), seed(seed_) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      fail(Errc::non_finite_entry, "NoiseSpec: sigma must be finite and >= 0");
    }
  }
};

// Reproducible N(0,1) stream: mt19937_64 feeding the Box-Muller transform.
// Both halves of each Box-Muller pair are consumed before new uniforms are
// drawn, so the stream depends only on the seed.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : gen_(seed) {}

  double standard() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]; keeps log(u1) finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform01() {  // [0, 1), 53-bit resolution
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Draws zhat_1..zhat_steps, each with n i.i.d. N(0, sigma^2) entries.
// Entries are filled component-first within each step.
inline std::vector<Vector> sample_noise(const NoiseSpec& spec, std::size_t n,
                                        std::size_t steps) {
  if (n == 0) fail(Errc::dimension_mismatch, "sample_noise: n must be >= 1");
  GaussianSampler sampler(spec.seed);
  std::vector<Vector> out;
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = spec.sigma * sampler.standard();
    out.push_back(std::move(z));
  }
  return out;
}

// One update in log coordinates: xhat+ = A xhat + B uhat + chat + zhat.
// uhat/zhat may be null. Raises Overflow when any output log-entry leaves
// the safe exponent range.
inline Vector step_log(const LogLinearModel& model, const Vector& xhat,
                       const Vector* uhat = nullptr, const Vector* zhat = nullptr) {
  const std::size_t n = model.state_dim();
  if (xhat.dim() != n) {
    fail(Errc::dimension_mismatch, "step: state dim " + std::to_string(xhat.dim()) +
                                       ", model expects " + std::to_string(n));
  }
  if (model.controlled() && uhat == nullptr) {
    fail(Errc::missing_control, "step: model has a control matrix but no input was given");
  }
  if (!model.controlled() && uhat != nullptr) {
    fail(Errc::dimension_mismatch, "step: control input given for an uncontrolled model");
  }
  Vector next = model.dynamics() * xhat + model.log_offset();
  if (uhat != nullptr) {
    if (uhat->dim() != model.control_dim()) {
      fail(Errc::dimension_mismatch, "step: control dim " + std::to_string(uhat->dim()) +
                                         ", model expects " +
                                         std::to_string(model.control_dim()));
    }
    next += model.input_matrix() * *uhat;
  }
  if (zhat != nullptr) {
    if (zhat->dim() != n) fail(Errc::dimension_mismatch, "step: noise dim mismatch");
    zhat->validate();
    next += *zhat;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(next[i]) > kLogRangeLimit) {
      fail(Errc::overflow, "step: log-state entry " + std::to_string(i) +
                               " reached magnitude " + std::to_string(next[i]));
    }
  }
  return next;
}

// One update in primal coordinates. The monomial product is always evaluated
// through log space and exponentiated once, never as a direct product of
// powers.
inline Vector step(const LogLinearModel& model, const Vector& x,
                   const std::optional<Vector>& u = std::nullopt,
                   const std::optional<Vector>& zhat = std::nullopt) {
  std::optional<Vector> uhat;
  if (u) uhat = log_entries(*u);
  const Vector next_log = step_log(model, log_entries(x), uhat ? &*uhat : nullptr,
                                   zhat ? &*zhat : nullptr);
  return exp_entries(next_log);
}

// Rolls the dynamics forward for a trajectory of total length T (including
// the initial state). Controls, when given, must have length T - 1. With a
// NoiseSpec, the zhat draws come from sample_noise, so identical seeds give
// identical trajectories.
inline Trajectory simulate(const LogLinearModel& model, const Vector& x1, std::size_t T,
                           const std::optional<ControlSequence>& controls = std::nullopt,
                           const std::optional<NoiseSpec>& noise = std::nullopt) {
  if (T < 1) fail(Errc::too_short, "simulate: trajectory length must be >= 1");
  if (controls && controls->length() != T - 1) {
    fail(Errc::dimension_mismatch,
         "simulate: got " + std::to_string(controls->length()) + " control inputs, need " +
             std::to_string(T - 1));
  }
  std::vector<Vector> zs;
  if (noise && T > 1) zs = sample_noise(*noise, model.state_dim(), T - 1);

  // The initial state is copied verbatim; only the stepped states go
  // through the log-space update and back.
  std::vector<Vector> states;
  states.reserve(T);
  states.push_back(x1);
  Vector xhat = log_entries(x1);
  std::optional<Vector> uhat;
  for (std::size_t t = 1; t < T; ++t) {
    const Vector* up = nullptr;
    if (controls) {
      uhat = log_entries(controls->input(t - 1));
      up = &*uhat;
    } else if (model.controlled()) {
      fail(Errc::missing_control, "simulate: model has a control matrix but no inputs");
    }
    const Vector* zp = zs.empty() ? nullptr : &zs[t - 1];
    xhat = step_log(model, xhat, up, zp);
    states.push_back(exp_entries(xhat));
  }
  return Trajectory(std::move(states));
}

// Fixed point of an uncontrolled model: x* = exp((I - A)^{-1} chat).
// Raises SingularMatrix when I - A is not invertible.
inline Vector fixed_point(const LogLinearModel& model) {
  if (model.controlled()) {
    fail(Errc::dimension_mismatch, "fixed_point: model must be uncontrolled (m = 0)");
  }
  const std::size_t n = model.state_dim();
  Matrix im_a = Matrix::identity(n) - model.dynamics();
  const Vector xhat_star = solve_linear(im_a, model.log_offset());
  return exp_entries(xhat_star);
}

}  // namespace llds
