#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llds/errors.hpp"
#include "llds/matrix.hpp"

namespace llds {

// Log-state entries with magnitude above this limit raise Overflow instead
// of silently exponentiating to Inf (or underflowing a positive value to 0).
inline constexpr double kLogRangeLimit = 700.0;

namespace detail {

inline void require_positive(const Vector& v, const char* where) {
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (!(v[i] > 0.0)) {
      fail(Errc::non_positive_entry,
           std::string(where) + ": entry " + std::to_string(i) + " is " +
               std::to_string(v[i]) + ", must be > 0");
    }
  }
}

}  // namespace detail

// Elementwise natural log; rejects non-positive entries at the boundary.
inline Vector log_entries(const Vector& x) {
  detail::require_positive(x, "log");
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = std::log(x[i]);
  return out;
}

// Elementwise exp; rejects entries outside the safe exponent range.
inline Vector exp_entries(const Vector& xhat) {
  Vector out(xhat.dim());
  for (std::size_t i = 0; i < xhat.dim(); ++i) {
    if (std::abs(xhat[i]) > kLogRangeLimit) {
      fail(Errc::overflow, "exp: log-entry " + std::to_string(i) + " has magnitude " +
                               std::to_string(xhat[i]) + " > 700");
    }
    out[i] = std::exp(xhat[i]);
  }
  return out;
}

// Positive dynamical system whose next state is a monomial in the current
// state (and, when controlled, the current input):
//
//   x+_i = c_i * prod_j x_j^{A_ij} * prod_k u_k^{B_ik}
//
// Equivalently, affine in log coordinates: xhat+ = A xhat + B uhat + chat.
class LogLinearModel {
 public:
  LogLinearModel(Matrix A, Vector c) : A_(std::move(A)), c_(std::move(c)) {
    validate_state_part();
  }

  LogLinearModel(Matrix A, Vector c, Matrix B)
      : A_(std::move(A)), c_(std::move(c)), B_(std::move(B)) {
    validate_state_part();
    if (B_->cols() == 0) {
      fail(Errc::dimension_mismatch, "LogLinearModel: control matrix must have m >= 1 "
                                     "columns (use the uncontrolled constructor)");
    }
    if (B_->rows() != state_dim()) {
      fail(Errc::dimension_mismatch,
           "LogLinearModel: control matrix has " + std::to_string(B_->rows()) +
               " rows, expected " + std::to_string(state_dim()));
    }
  }

  std::size_t state_dim() const { return c_.dim(); }
  std::size_t control_dim() const { return B_ ? B_->cols() : 0; }
  bool controlled() const { return B_.has_value(); }

  const Matrix& dynamics() const { return A_; }     // A, n x n
  const Vector& offset() const { return c_; }       // c, strictly positive
  const Matrix& input_matrix() const { return *B_; }  // B, n x m; controlled() only

  // chat with chat_i = log(c_i).
  Vector log_offset() const { return log_entries(c_); }

  friend bool operator==(const LogLinearModel& a, const LogLinearModel& b) {
    return a.A_ == b.A_ && a.c_ == b.c_ && a.B_ == b.B_;
  }

 private:
  void validate_state_part() const {
    const std::size_t n = c_.dim();
    if (n == 0) fail(Errc::dimension_mismatch, "LogLinearModel: state dimension must be >= 1");
    if (A_.rows() != n || A_.cols() != n) {
      fail(Errc::dimension_mismatch,
           "LogLinearModel: dynamics matrix is " + std::to_string(A_.rows()) + "x" +
               std::to_string(A_.cols()) + ", expected " + std::to_string(n) + "x" +
               std::to_string(n));
    }
    detail::require_positive(c_, "LogLinearModel offset c");
  }

  Matrix A_;
  Vector c_;
  std::optional<Matrix> B_;
};

namespace detail {

inline void require_consistent_dims(const std::vector<Vector>& seq, const char* what) {
  for (std::size_t t = 1; t < seq.size(); ++t) {
    if (seq[t].dim() != seq[0].dim()) {
      fail(Errc::dimension_mismatch, std::string(what) + ": state " + std::to_string(t) +
                                         " has a different dimension");
    }
  }
}

}  // namespace detail

// Ordered sequence of strictly positive state vectors x_1..x_T.
class Trajectory {
 public:
  explicit Trajectory(std::vector<Vector> states) : states_(std::move(states)) {
    if (states_.empty()) fail(Errc::too_short, "Trajectory: needs at least one state");
    detail::require_consistent_dims(states_, "Trajectory");
    for (std::size_t t = 0; t < states_.size(); ++t) {
      detail::require_positive(states_[t], "Trajectory state");
    }
  }

  std::size_t dim() const { return states_[0].dim(); }
  std::size_t length() const { return states_.size(); }
  const Vector& state(std::size_t t) const { return states_[t]; }  // 0-based
  const std::vector<Vector>& states() const { return states_; }

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.states_ == b.states_;
  }

 private:
  std::vector<Vector> states_;
};

// Log-space twin of Trajectory; entries carry no sign restriction.
class LogTrajectory {
 public:
  explicit LogTrajectory(std::vector<Vector> states) : states_(std::move(states)) {
    if (states_.empty()) fail(Errc::too_short, "LogTrajectory: needs at least one state");
    detail::require_consistent_dims(states_, "LogTrajectory");
  }

  std::size_t dim() const { return states_[0].dim(); }
  std::size_t length() const { return states_.size(); }
  const Vector& state(std::size_t t) const { return states_[t]; }
  const std::vector<Vector>& states() const { return states_; }

 private:
  std::vector<Vector> states_;
};

// Strictly positive control inputs u_1..u_L (primal scale).
class ControlSequence {
 public:
  explicit ControlSequence(std::vector<Vector> inputs) : inputs_(std::move(inputs)) {
    if (inputs_.empty()) fail(Errc::too_short, "ControlSequence: needs at least one input");
    detail::require_consistent_dims(inputs_, "ControlSequence");
    for (const Vector& u : inputs_) detail::require_positive(u, "ControlSequence input");
  }

  std::size_t dim() const { return inputs_[0].dim(); }
  std::size_t length() const { return inputs_.size(); }
  const Vector& input(std::size_t t) const { return inputs_[t]; }
  const std::vector<Vector>& inputs() const { return inputs_; }

 private:
  std::vector<Vector> inputs_;
};

// Log-space twin of ControlSequence.
class LogControlSequence {
 public:
  explicit LogControlSequence(std::vector<Vector> inputs) : inputs_(std::move(inputs)) {
    if (inputs_.empty()) fail(Errc::too_short, "LogControlSequence: needs at least one input");
    detail::require_consistent_dims(inputs_, "LogControlSequence");
  }

  std::size_t dim() const { return inputs_[0].dim(); }
  std::size_t length() const { return inputs_.size(); }
  const Vector& input(std::size_t t) const { return inputs_[t]; }
  const std::vector<Vector>& inputs() const { return inputs_; }

 private:
  std::vector<Vector> inputs_;
};

inline LogTrajectory log_transform(const Trajectory& x) {
  std::vector<Vector> out;
  out.reserve(x.length());
  for (const Vector& s : x.states()) out.push_back(log_entries(s));
  return LogTrajectory(std::move(out));
}

inline Trajectory exp_transform(const LogTrajectory& xhat) {
  std::vector<Vector> out;
  out.reserve(xhat.length());
  for (const Vector& s : xhat.states()) out.push_back(exp_entries(s));
  return Trajectory(std::move(out));
}

inline LogControlSequence log_transform(const ControlSequence& u) {
  std::vector<Vector> out;
  out.reserve(u.length());
  for (const Vector& v : u.inputs()) out.push_back(log_entries(v));
  return LogControlSequence(std::move(out));
}

inline ControlSequence exp_transform(const LogControlSequence& uhat) {
  std::vector<Vector> out;
  out.reserve(uhat.length());
  for (const Vector& v : uhat.inputs()) out.push_back(exp_entries(v));
  return ControlSequence(std::move(out));
}

}  // namespace llds
