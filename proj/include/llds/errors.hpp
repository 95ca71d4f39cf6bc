#pragma once

#include <stdexcept>
#include <string>

namespace llds {

// Failure categories raised by the library. The CLI maps each one to a
// distinct diagnostic string (see errc_name).
enum class Errc {
  singular_matrix,
  rank_deficient,
  non_positive_entry,
  non_finite_entry,
  dimension_mismatch,
  missing_control,
  overflow,
  too_short,
  insufficient_data,
  infeasible_bounds,
  iteration_limit,
  invalid_weight,
  parse_error,
  gap_in_time,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::singular_matrix:    return "SingularMatrix";
    case Errc::rank_deficient:     return "RankDeficient";
    case Errc::non_positive_entry: return "NonPositiveEntry";
    case Errc::non_finite_entry:   return "NonFiniteEntry";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::missing_control:    return "MissingControl";
    case Errc::overflow:           return "Overflow";
    case Errc::too_short:          return "TooShort";
    case Errc::insufficient_data:  return "InsufficientData";
    case Errc::infeasible_bounds:  return "InfeasibleBounds";
    case Errc::iteration_limit:    return "IterationLimit";
    case Errc::invalid_weight:     return "InvalidWeight";
    case Errc::parse_error:        return "ParseError";
    case Errc::gap_in_time:        return "GapInTime";
    case Errc::io_error:           return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace llds
