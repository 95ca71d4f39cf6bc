#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "llds/errors.hpp"
#include "llds/matrix.hpp"
#include "llds/model.hpp"
#include "llds/simulate.hpp"

namespace llds::io {

// All numeric output uses 17 significant digits, enough to round-trip an
// IEEE double exactly through decimal text.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string t = trim(cell);
  if (t.empty()) {
    fail(Errc::parse_error, "row " + std::to_string(row) + ", column " +
                                std::to_string(col) + ": empty cell");
  }
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    fail(Errc::parse_error, "row " + std::to_string(row) + ", column " +
                                std::to_string(col) + ": cannot parse '" + t + "'");
  }
  return v;
}

inline long long parse_step(const std::string& cell, std::size_t row) {
  const std::string t = trim(cell);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    fail(Errc::parse_error,
         "row " + std::to_string(row) + ", column 1: step '" + t + "' is not an integer");
  }
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary sibling and renames into place, so a failed
// write never leaves a partial file at the target path.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(Errc::io_error, "write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(Errc::io_error, "cannot move temporary file into '" + path + "'");
  }
}

inline std::vector<std::string> non_empty_lines(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

}  // namespace detail

// Parsed CSV series: a step column `t` increasing by one, then one column
// per component. Cells are validated numeric here; sign constraints are
// applied by the callers that need them.
struct SeriesTable {
  std::vector<std::string> names;          // column names, excluding t
  long long t0 = 1;                        // first step value
  std::vector<std::vector<double>> rows;   // one entry per data row
};

inline SeriesTable read_series_table(const std::string& path) {
  const std::string text = detail::read_file(path);
  const std::vector<std::string> lines = detail::non_empty_lines(text);
  if (lines.size() < 2) {
    fail(Errc::parse_error, "'" + path + "': need a header row and at least one data row");
  }

  SeriesTable table;
  const std::vector<std::string> header = detail::split(lines[0], ',');
  if (header.size() < 2) {
    fail(Errc::parse_error, "'" + path + "': header must have a t column and at least one "
                            "value column");
  }
  if (detail::trim(header[0]) != "t") {
    fail(Errc::parse_error, "'" + path + "': first column must be named 't', got '" +
                                detail::trim(header[0]) + "'");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    const std::string name = detail::trim(header[j]);
    if (name.empty()) {
      fail(Errc::parse_error, "'" + path + "': empty column name at position " +
                                  std::to_string(j + 1));
    }
    table.names.push_back(name);
  }

  long long prev_t = 0;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> cells = detail::split(lines[r], ',');
    if (cells.size() != header.size()) {
      fail(Errc::parse_error, "row " + std::to_string(r) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    }
    const long long t = detail::parse_step(cells[0], r);
    if (r == 1) {
      table.t0 = t;
    } else if (t != prev_t + 1) {
      fail(Errc::gap_in_time, "row " + std::to_string(r) + ": step jumps from " +
                                  std::to_string(prev_t) + " to " + std::to_string(t));
    }
    prev_t = t;
    std::vector<double> row;
    row.reserve(table.names.size());
    for (std::size_t j = 1; j < cells.size(); ++j) {
      row.push_back(detail::parse_double(cells[j], r, j + 1));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace detail {

inline void require_positive_cells(const SeriesTable& table, const std::string& path) {
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < table.rows[r].size(); ++j) {
      if (!(table.rows[r][j] > 0.0)) {
        fail(Errc::non_positive_entry,
             "'" + path + "' row " + std::to_string(r + 1) + ", column '" +
                 table.names[j] + "': value " + format_double(table.rows[r][j]) +
                 " must be > 0");
      }
    }
  }
}

}  // namespace detail

inline Trajectory read_series(const std::string& path) {
  const SeriesTable table = read_series_table(path);
  detail::require_positive_cells(table, path);
  std::vector<Vector> states;
  states.reserve(table.rows.size());
  for (const auto& row : table.rows) states.emplace_back(row);
  return Trajectory(std::move(states));
}

inline ControlSequence read_controls(const std::string& path) {
  const SeriesTable table = read_series_table(path);
  detail::require_positive_cells(table, path);
  std::vector<Vector> inputs;
  inputs.reserve(table.rows.size());
  for (const auto& row : table.rows) inputs.emplace_back(row);
  return ControlSequence(std::move(inputs));
}

namespace detail {

inline std::vector<std::string> default_names(const char* prefix, std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

inline std::string render_rows(const std::vector<std::string>& names,
                               const std::vector<const Vector*>& rows, long long t0) {
  std::ostringstream out;
  out << "t";
  for (const std::string& name : names) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << (t0 + static_cast<long long>(r));
    for (std::size_t j = 0; j < rows[r]->dim(); ++j) {
      out << ',' << format_double((*rows[r])[j]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace detail

inline void write_series(const std::string& path, const Trajectory& x,
                         std::vector<std::string> names = {}, long long t0 = 1) {
  if (names.empty()) names = detail::default_names("x", x.dim());
  if (names.size() != x.dim()) {
    fail(Errc::dimension_mismatch, "write_series: " + std::to_string(names.size()) +
                                       " names for dimension " + std::to_string(x.dim()));
  }
  std::vector<const Vector*> rows;
  rows.reserve(x.length());
  for (const Vector& s : x.states()) rows.push_back(&s);
  detail::write_file_atomic(path, detail::render_rows(names, rows, t0));
}

inline void write_controls(const std::string& path, const ControlSequence& u,
                           std::vector<std::string> names = {}, long long t0 = 1) {
  if (names.empty()) names = detail::default_names("u", u.dim());
  std::vector<const Vector*> rows;
  rows.reserve(u.length());
  for (const Vector& v : u.inputs()) rows.push_back(&v);
  detail::write_file_atomic(path, detail::render_rows(names, rows, t0));
}

// Arbitrary-sign rows (log states, residuals). Same CSV shape as a series
// file minus the positivity guarantee, so read_series will reject it.
inline void write_log_series(const std::string& path, const std::vector<Vector>& rows,
                             std::vector<std::string> names, long long t0 = 1) {
  if (rows.empty()) fail(Errc::too_short, "write_log_series: no rows");
  if (names.size() != rows[0].dim()) {
    fail(Errc::dimension_mismatch, "write_log_series: name count mismatch");
  }
  std::vector<const Vector*> ptrs;
  ptrs.reserve(rows.size());
  for (const Vector& v : rows) ptrs.push_back(&v);
  detail::write_file_atomic(path, detail::render_rows(names, ptrs, t0));
}

// Measured and predicted series side by side, with paired columns
// name, name_pred for each component.
inline void write_overlay(const std::string& path, const Trajectory& real,
                          const Trajectory& predicted, std::vector<std::string> names = {},
                          long long t0 = 1) {
  if (real.length() != predicted.length() || real.dim() != predicted.dim()) {
    fail(Errc::dimension_mismatch, "write_overlay: series shapes differ");
  }
  if (names.empty()) names = detail::default_names("x", real.dim());
  if (names.size() != real.dim()) {
    fail(Errc::dimension_mismatch, "write_overlay: name count mismatch");
  }
  std::ostringstream out;
  out << "t";
  for (const std::string& name : names) out << ',' << name << ',' << name << "_pred";
  out << '\n';
  for (std::size_t r = 0; r < real.length(); ++r) {
    out << (t0 + static_cast<long long>(r));
    for (std::size_t j = 0; j < real.dim(); ++j) {
      out << ',' << format_double(real.state(r)[j]) << ','
          << format_double(predicted.state(r)[j]);
    }
    out << '\n';
  }
  detail::write_file_atomic(path, out.str());
}

// Flat key-value model file. Layout (fixed order, space-separated values,
// matrices row-major):
//
//   llds-model v1
//   n <state dim>
//   m <control dim>
//   A <n*n entries>
//   c <n entries>
//   B <n*m entries>          (only when m > 0)
//   sigma_hat <value>        (optional)
struct ModelFile {
  LogLinearModel model;
  std::optional<double> sigma_hat;
};

inline void write_model(const std::string& path, const LogLinearModel& model,
                        std::optional<double> sigma_hat = std::nullopt) {
  std::ostringstream out;
  out << "llds-model v1\n";
  out << "n " << model.state_dim() << '\n';
  out << "m " << model.control_dim() << '\n';
  out << "A";
  for (double v : model.dynamics().entries()) out << ' ' << format_double(v);
  out << "\nc";
  for (double v : model.offset().entries()) out << ' ' << format_double(v);
  out << '\n';
  if (model.controlled()) {
    out << "B";
    for (double v : model.input_matrix().entries()) out << ' ' << format_double(v);
    out << '\n';
  }
  if (sigma_hat) out << "sigma_hat " << format_double(*sigma_hat) << '\n';
  detail::write_file_atomic(path, out.str());
}

inline ModelFile read_model(const std::string& path) {
  const std::string text = detail::read_file(path);
  const std::vector<std::string> lines = detail::non_empty_lines(text);
  if (lines.empty() || detail::trim(lines[0]) != "llds-model v1") {
    fail(Errc::parse_error, "'" + path + "': missing 'llds-model v1' header");
  }

  auto tokens_of = [&](std::size_t idx, const std::string& key) {
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
    return std::vector<std::string>(toks.begin() + 1, toks.end());
  };
  auto values_of = [&](std::size_t idx, const std::string& key, std::size_t count) {
    const std::vector<std::string> toks = tokens_of(idx, key);
    if (toks.size() != count) {
      fail(Errc::parse_error, "'" + path + "': '" + key + "' expects " +
                                  std::to_string(count) + " values, got " +
                                  std::to_string(toks.size()));
    }
    std::vector<double> vals;
    vals.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      vals.push_back(detail::parse_double(toks[i], idx + 1, i + 1));
    }
    return vals;
  };

  const std::vector<double> nv = values_of(1, "n", 1);
  const std::vector<double> mv = values_of(2, "m", 1);
  if (!(nv[0] >= 1.0) || !(mv[0] >= 0.0) || nv[0] != std::floor(nv[0]) ||
      mv[0] != std::floor(mv[0]) || nv[0] > 1e6 || mv[0] > 1e6) {
    fail(Errc::parse_error, "'" + path + "': n and m must be non-negative integers, n >= 1");
  }
  const auto n = static_cast<std::size_t>(nv[0]);
  const auto m = static_cast<std::size_t>(mv[0]);

  Matrix A(n, n, values_of(3, "A", n * n));
  Vector c(values_of(4, "c", n));
  std::size_t next = 5;
  std::optional<Matrix> B;
  if (m > 0) {
    B = Matrix(n, m, values_of(next, "B", n * m));
    ++next;
  }
  std::optional<double> sigma_hat;
  if (next < lines.size()) {
    sigma_hat = values_of(next, "sigma_hat", 1)[0];
    ++next;
  }
  if (next != lines.size()) {
    fail(Errc::parse_error, "'" + path + "': unexpected trailing content on line " +
                                std::to_string(next + 1));
  }

  LogLinearModel model = B ? LogLinearModel(std::move(A), std::move(c), std::move(*B))
                           : LogLinearModel(std::move(A), std::move(c));
  return ModelFile{std::move(model), sigma_hat};
}

// One-step-ahead predictions: entry 1 copies the measurement; every later
// entry applies the model to the *measured* previous state, never to an
// earlier prediction.
inline Trajectory one_step_predict(const LogLinearModel& model, const Trajectory& x) {
  if (model.controlled()) {
    fail(Errc::dimension_mismatch, "one_step_predict: model must be uncontrolled");
  }
  if (model.state_dim() != x.dim()) {
    fail(Errc::dimension_mismatch, "one_step_predict: model dim " +
                                       std::to_string(model.state_dim()) +
                                       ", trajectory dim " + std::to_string(x.dim()));
  }
  std::vector<Vector> pred;
  pred.reserve(x.length());
  pred.push_back(x.state(0));
  for (std::size_t t = 0; t + 1 < x.length(); ++t) {
    pred.push_back(step(model, x.state(t)));
  }
  return Trajectory(std::move(pred));
}

}  // namespace llds::io
