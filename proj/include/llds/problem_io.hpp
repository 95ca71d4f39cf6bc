#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "llds/control.hpp"
#include "llds/errors.hpp"
#include "llds/io.hpp"
#include "llds/matrix.hpp"
#include "llds/model.hpp"

namespace llds::io {

// Control problem config. Flat key-value text; all state and input values
// are given in primal (positive) scale, logs are taken when the problem is
// built. Layout:
//
//   llds-control v1
//   T <horizon>
//   x1 <n positive entries>
//   Q scalar <w> | Q matrix <n*n entries>
//   R scalar <w> | R matrix <m*m entries>
//   refs <csv path, relative to this file>
//   lower <m positive entries>     (optional, requires upper)
//   upper <m positive entries>
//
// The refs CSV must hold exactly T rows: the desired states for steps
// 2..T+1.
struct ControlConfig {
  std::size_t horizon = 0;
  Vector x1_primal;
  Matrix state_weight;
  Matrix input_weight;
  std::string refs_path;
  std::optional<std::pair<Vector, Vector>> primal_bounds;
};

namespace detail {

inline std::vector<std::string> keyed_tokens(const std::vector<std::string>& lines,
                                             std::size_t idx, const std::string& key,
                                             const std::string& path) {
  if (idx >= lines.size()) {
    fail(Errc::parse_error, "'" + path + "': missing '" + key + "' line");
  }
  std::vector<std::string> toks;
  std::istringstream ss(lines[idx]);
  std::string tok;
  while (ss >> tok) toks.push_back(tok);
  if (toks.empty() || toks[0] != key) {
    fail(Errc::parse_error, "'" + path + "': expected '" + key + "' on line " +
                                std::to_string(idx + 1));
  }
  return {toks.begin() + 1, toks.end()};
}

inline Vector parse_vector_tokens(const std::vector<std::string>& toks, std::size_t dim,
                                  const std::string& key, std::size_t line,
                                  const std::string& path) {
  if (toks.size() != dim) {
    fail(Errc::parse_error, "'" + path + "': '" + key + "' expects " + std::to_string(dim) +
                                " values, got " + std::to_string(toks.size()));
  }
  std::vector<double> vals;
  vals.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) vals.push_back(parse_double(toks[i], line, i + 1));
  return Vector(std::move(vals));
}

inline Matrix parse_weight(const std::vector<std::string>& toks, std::size_t dim,
                           const std::string& key, std::size_t line, const std::string& path) {
  if (toks.size() >= 2 && toks[0] == "scalar") {
    if (toks.size() != 2) {
      fail(Errc::parse_error, "'" + path + "': '" + key + " scalar' takes one value");
    }
    const double w = parse_double(toks[1], line, 2);
    Matrix out(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) out(i, i) = w;
    return out;
  }
  if (!toks.empty() && toks[0] == "matrix") {
    if (toks.size() != 1 + dim * dim) {
      fail(Errc::parse_error, "'" + path + "': '" + key + " matrix' expects " +
                                  std::to_string(dim * dim) + " values");
    }
    std::vector<double> vals;
    vals.reserve(dim * dim);
    for (std::size_t i = 1; i < toks.size(); ++i) {
      vals.push_back(parse_double(toks[i], line, i + 1));
    }
    return Matrix(dim, dim, std::move(vals));
  }
  fail(Errc::parse_error, "'" + path + "': '" + key + "' must be 'scalar <w>' or "
                          "'matrix <entries>'");
}

}  // namespace detail

inline ControlConfig read_control_config(const std::string& path, std::size_t n,
                                         std::size_t m) {
  const std::string text = detail::read_file(path);
  const std::vector<std::string> lines = detail::non_empty_lines(text);
  if (lines.empty() || detail::trim(lines[0]) != "llds-control v1") {
    fail(Errc::parse_error, "'" + path + "': missing 'llds-control v1' header");
  }

  ControlConfig cfg;
  const auto t_toks = detail::keyed_tokens(lines, 1, "T", path);
  if (t_toks.size() != 1) fail(Errc::parse_error, "'" + path + "': 'T' takes one value");
  const double t_val = detail::parse_double(t_toks[0], 2, 2);
  if (!(t_val >= 1.0) || t_val != std::floor(t_val) || t_val > 1e6) {
    fail(Errc::parse_error, "'" + path + "': horizon T must be a positive integer");
  }
  cfg.horizon = static_cast<std::size_t>(t_val);

  cfg.x1_primal =
      detail::parse_vector_tokens(detail::keyed_tokens(lines, 2, "x1", path), n, "x1", 3, path);
  cfg.state_weight =
      detail::parse_weight(detail::keyed_tokens(lines, 3, "Q", path), n, "Q", 4, path);
  cfg.input_weight =
      detail::parse_weight(detail::keyed_tokens(lines, 4, "R", path), m, "R", 5, path);

  const auto refs_toks = detail::keyed_tokens(lines, 5, "refs", path);
  if (refs_toks.size() != 1) {
    fail(Errc::parse_error, "'" + path + "': 'refs' takes one path");
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  cfg.refs_path = (base / refs_toks[0]).string();

  std::size_t next = 6;
  if (next < lines.size()) {
    const auto lower =
        detail::parse_vector_tokens(detail::keyed_tokens(lines, next, "lower", path), m,
                                    "lower", next + 1, path);
    const auto upper =
        detail::parse_vector_tokens(detail::keyed_tokens(lines, next + 1, "upper", path), m,
                                    "upper", next + 2, path);
    cfg.primal_bounds = {lower, upper};
    next += 2;
  }
  if (next != lines.size()) {
    fail(Errc::parse_error, "'" + path + "': unexpected trailing content on line " +
                                std::to_string(next + 1));
  }
  return cfg;
}

// Builds the log-space ControlProblem from a primal-scale config: reads the
// reference CSV, logs everything, and validates through the ControlProblem
// constructor.
inline ControlProblem build_control_problem(const LogLinearModel& model,
                                            const ControlConfig& cfg) {
  const Trajectory refs = read_series(cfg.refs_path);
  if (refs.dim() != model.state_dim()) {
    fail(Errc::dimension_mismatch, "control refs: dimension " + std::to_string(refs.dim()) +
                                       ", model expects " +
                                       std::to_string(model.state_dim()));
  }
  if (refs.length() != cfg.horizon) {
    fail(Errc::dimension_mismatch, "control refs: got " + std::to_string(refs.length()) +
                                       " rows, horizon T = " + std::to_string(cfg.horizon));
  }
  std::vector<Vector> log_refs;
  log_refs.reserve(refs.length());
  for (const Vector& r : refs.states()) log_refs.push_back(log_entries(r));

  std::optional<ControlBounds> bounds;
  if (cfg.primal_bounds) {
    bounds = ControlBounds{log_entries(cfg.primal_bounds->first),
                           log_entries(cfg.primal_bounds->second)};
  }
  return ControlProblem(model, log_entries(cfg.x1_primal), std::move(log_refs),
                        cfg.state_weight, cfg.input_weight, std::move(bounds));
}

}  // namespace llds::io
