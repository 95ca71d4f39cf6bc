#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "llds/errors.hpp"
#include "llds/matrix.hpp"
#include "llds/model.hpp"
#include "llds/numerics.hpp"

namespace llds {

// Output of identification: the fitted model, the per-step log-space
// residuals rhat_t = xhat_{t+1} - A xhat_t - B uhat_t - chat, the attained
// sum of squared residuals, and the degrees-of-freedom-corrected noise
// scale estimate.
struct SysIdResult {
  LogLinearModel model;
  std::vector<Vector> residuals;
  double sigma_hat = 0.0;
  double sse = 0.0;
};

// Per-component noise scale from residuals under the isotropic model:
//
//   sigma_hat = sqrt( sum_t ||rhat_t||^2 / (n * (N - params_per_row)) )
//
// where N is the residual count and params_per_row the number of fitted
// coefficients per state row (n+1 uncontrolled, n+m+1 controlled).
inline double estimate_sigma(const std::vector<Vector>& residuals, std::size_t n,
                             std::size_t params_per_row) {
  const std::size_t N = residuals.size();
  if (N == 0) fail(Errc::insufficient_data, "estimate_sigma: no residuals");
  if (n == 0) fail(Errc::dimension_mismatch, "estimate_sigma: n must be >= 1");
  if (N <= params_per_row) {
    fail(Errc::insufficient_data,
         "estimate_sigma: " + std::to_string(N) + " residuals leave no degrees of "
             "freedom for " + std::to_string(params_per_row) + " parameters per row");
  }
  double sum = 0.0;
  for (const Vector& r : residuals) {
    if (r.dim() != n) fail(Errc::dimension_mismatch, "estimate_sigma: residual dim mismatch");
    sum += sq_norm(r);
  }
  return std::sqrt(sum / (static_cast<double>(n) * static_cast<double>(N - params_per_row)));
}

namespace detail {

// Shared least-squares core for the controlled and uncontrolled fits.
// Regressor rows are [xhat_t (uhat_t) 1], targets are xhat_{t+1}.
inline SysIdResult identify_impl(const Trajectory& x, const ControlSequence* u) {
  const std::size_t n = x.dim();
  const std::size_t T = x.length();
  const std::size_t m = (u != nullptr) ? u->dim() : 0;
  const std::size_t params = n + m + 1;

  if (u != nullptr && u->length() != T - 1) {
    fail(Errc::dimension_mismatch,
         "identify: got " + std::to_string(u->length()) + " control inputs, need " +
             std::to_string(T - 1));
  }
  if (T < params + 1) {
    fail(Errc::too_short, "identify: trajectory length " + std::to_string(T) +
                              " is too short, need at least " + std::to_string(params + 1));
  }

  const LogTrajectory xhat = log_transform(x);
  std::vector<Vector> uhat;
  if (u != nullptr) {
    for (std::size_t t = 0; t + 1 < T; ++t) uhat.push_back(log_entries(u->input(t)));
  }

  const std::size_t rows = T - 1;
  Matrix D(rows, params);
  Matrix Y(rows, n);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t j = 0; j < n; ++j) D(t, j) = xhat.state(t)[j];
    for (std::size_t k = 0; k < m; ++k) D(t, n + k) = uhat[t][k];
    D(t, params - 1) = 1.0;
    for (std::size_t j = 0; j < n; ++j) Y(t, j) = xhat.state(t + 1)[j];
  }

  const Matrix W = least_squares(D, Y);  // params x n

  Matrix A(n, n);
  Vector chat(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) A(i, j) = W(j, i);
    chat[i] = W(params - 1, i);
  }
  std::optional<Matrix> B;
  if (m > 0) {
    Matrix b(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k) b(i, k) = W(n + k, i);
    B = std::move(b);
  }

  std::vector<Vector> residuals;
  residuals.reserve(rows);
  double sse = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    Vector pred = A * xhat.state(t) + chat;
    if (B) pred += *B * uhat[t];
    Vector r = xhat.state(t + 1) - pred;
    sse += sq_norm(r);
    residuals.push_back(std::move(r));
  }

  // With exactly params rows the fit interpolates and leaves no degrees of
  // freedom; report sigma_hat = 0 in that case.
  double sigma_hat = 0.0;
  if (rows > params) sigma_hat = estimate_sigma(residuals, n, params);

  LogLinearModel model = B ? LogLinearModel(A, exp_entries(chat), *B)
                           : LogLinearModel(A, exp_entries(chat));
  return SysIdResult{std::move(model), std::move(residuals), sigma_hat, sse};
}

}  // namespace detail

// Fits A and chat to an observed trajectory by minimizing
// sum_t ||xhat_{t+1} - A xhat_t - chat||^2. Needs T >= n + 2 and a
// full-column-rank regressor (RankDeficient otherwise, e.g. for a constant
// trajectory).
inline SysIdResult identify(const Trajectory& x) {
  return detail::identify_impl(x, nullptr);
}

// Controlled variant with regressor rows [xhat_t uhat_t 1]; fits A, B and
// chat. Inputs must cover every transition (length T - 1). With m = 0 this
// reduces exactly to identify().
inline SysIdResult identify_controlled(const Trajectory& x, const ControlSequence& u) {
  return detail::identify_impl(x, u.dim() > 0 ? &u : nullptr);
}

}  // namespace llds
