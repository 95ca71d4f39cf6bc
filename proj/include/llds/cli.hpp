#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "llds/control.hpp"
#include "llds/errors.hpp"
#include "llds/io.hpp"
#include "llds/model.hpp"
#include "llds/plot.hpp"
#include "llds/problem_io.hpp"
#include "llds/simulate.hpp"
#include "llds/sysid.hpp"

namespace llds::cli {

namespace detail {

inline bool use_color() {
  if (std::getenv("LLDS_NO_COLOR") != nullptr) return false;
  return isatty(fileno(stderr)) != 0;
}

inline Vector parse_state_list(const std::string& text) {
  std::vector<double> vals;
  std::string cur;
  auto flush = [&] {
    const std::string t = io::detail::trim(cur);
    if (!t.empty()) vals.push_back(io::detail::parse_double(t, 1, vals.size() + 1));
    cur.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ') {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  if (vals.empty()) fail(Errc::parse_error, "--x1: no values given");
  return Vector(std::move(vals));
}

inline void print_matrix_layout(const char* name, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i == 0) {
      std::printf("%s = [", name);
    } else {
      std::printf("%*s[", static_cast<int>(std::string(name).size() + 3), "");
    }
    for (std::size_t j = 0; j < m.cols(); ++j) std::printf(" %9.4g", m(i, j));
    std::printf(" ]\n");
  }
}

inline void print_vector_layout(const char* name, const Vector& v) {
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (i == 0) {
      std::printf("%s = [", name);
    } else {
      std::printf("%*s[", static_cast<int>(std::string(name).size() + 3), "");
    }
    std::printf(" %9.4g ]\n", v[i]);
  }
}

inline std::string derive_states_path(const std::string& out) {
  const std::string suffix = ".csv";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return out.substr(0, out.size() - suffix.size()) + "_states.csv";
  }
  return out + "_states.csv";
}

struct Options {
  std::string model_path;
  std::string series_path;
  std::string inputs_path;
  std::string out_path;
  std::string plot_path;
  std::string problem_path;
  std::string residuals_path;
  std::string states_path;
  std::string x1_text;
  std::size_t steps = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool free_run = false;
};

inline int cmd_simulate(const Options& opt, bool with_noise) {
  const io::ModelFile mf = io::read_model(opt.model_path);
  Vector x1(1);
  if (!opt.x1_text.empty() && !opt.series_path.empty()) {
    fail(Errc::parse_error, "simulate: give either --x1 or --series, not both");
  }
  if (!opt.x1_text.empty()) {
    x1 = parse_state_list(opt.x1_text);
  } else if (!opt.series_path.empty()) {
    const Trajectory seed_series = io::read_series(opt.series_path);
    x1 = seed_series.state(seed_series.length() - 1);
  } else {
    fail(Errc::parse_error, "simulate: an initial state is required (--x1 or --series)");
  }

  std::optional<ControlSequence> controls;
  if (!opt.inputs_path.empty()) controls = io::read_controls(opt.inputs_path);
  std::optional<NoiseSpec> noise;
  if (with_noise) noise = NoiseSpec(opt.sigma, opt.seed);

  const Trajectory traj = simulate(mf.model, x1, opt.steps, controls, noise);
  io::write_series(opt.out_path, traj);
  std::printf("wrote %s (%zu rows, n = %zu)\n", opt.out_path.c_str(), traj.length(),
              traj.dim());
  return 0;
}

inline int cmd_fit(const Options& opt) {
  const Trajectory series = io::read_series(opt.series_path);
  SysIdResult result = opt.inputs_path.empty()
                           ? identify(series)
                           : identify_controlled(series, io::read_controls(opt.inputs_path));

  io::write_model(opt.out_path, result.model, result.sigma_hat);
  if (!opt.residuals_path.empty()) {
    io::write_log_series(opt.residuals_path, result.residuals,
                         io::detail::default_names("r", series.dim()));
  }

  print_matrix_layout("A", result.model.dynamics());
  print_vector_layout("c", result.model.offset());
  if (result.model.controlled()) print_matrix_layout("B", result.model.input_matrix());
  std::printf("sigma_hat = %.6g\n", result.sigma_hat);
  std::printf("sse = %.6g\n", result.sse);
  std::printf("wrote %s\n", opt.out_path.c_str());
  return 0;
}

inline int cmd_predict(const Options& opt) {
  const io::ModelFile mf = io::read_model(opt.model_path);
  const io::SeriesTable table = io::read_series_table(opt.series_path);
  io::detail::require_positive_cells(table, opt.series_path);
  std::vector<Vector> states;
  states.reserve(table.rows.size());
  for (const auto& row : table.rows) states.emplace_back(row);
  const Trajectory series(std::move(states));

  const Trajectory pred = opt.free_run
                              ? simulate(mf.model, series.state(0), series.length())
                              : io::one_step_predict(mf.model, series);
  io::write_overlay(opt.out_path, series, pred, table.names, table.t0);
  if (!opt.plot_path.empty()) {
    io::emit_plot(opt.plot_path, series, pred, table.names, table.t0);
  }

  // Log-scale fit quality over the predicted entries (t >= 2).
  double err_sq = 0.0, ref_sq = 0.0;
  for (std::size_t t = 1; t < series.length(); ++t) {
    for (std::size_t i = 0; i < series.dim(); ++i) {
      const double e = std::log(series.state(t)[i]) - std::log(pred.state(t)[i]);
      const double m = std::log(series.state(t)[i]);
      err_sq += e * e;
      ref_sq += m * m;
    }
  }
  if (series.length() > 1 && ref_sq > 0.0) {
    std::printf("log-scale one-step relative RMSE = %.6g\n", std::sqrt(err_sq / ref_sq));
  }
  std::printf("wrote %s\n", opt.out_path.c_str());
  return 0;
}

inline int cmd_fixed_point(const Options& opt) {
  const io::ModelFile mf = io::read_model(opt.model_path);
  const Vector star = fixed_point(mf.model);
  for (std::size_t i = 0; i < star.dim(); ++i) {
    std::printf("%s%.12g", i ? " " : "", star[i]);
  }
  std::printf("\n");
  return 0;
}

inline int cmd_control(const Options& opt) {
  const io::ModelFile mf = io::read_model(opt.model_path);
  const io::ControlConfig cfg = io::read_control_config(
      opt.problem_path, mf.model.state_dim(), mf.model.control_dim());
  const ControlProblem problem = io::build_control_problem(mf.model, cfg);
  const ControlSolution sol = solve_control(problem);

  io::write_controls(opt.out_path, ControlSequence(sol.primal_inputs));
  const std::string states_path =
      opt.states_path.empty() ? derive_states_path(opt.out_path) : opt.states_path;
  const Trajectory states = rollout_controlled(mf.model, cfg.x1_primal, sol);
  io::write_series(states_path, states);

  std::printf("objective = %.10g\n", sol.objective);
  std::printf("kkt_residual = %.3g\n", sol.kkt_residual);
  std::printf("wrote %s and %s\n", opt.out_path.c_str(), states_path.c_str());
  return 0;
}

}  // namespace detail

// Entry point behind main(). Returns the process exit code: 0 on success,
// 1 with a one-line diagnostic naming the error case otherwise.
inline int run(int argc, const char* const* argv) {
  CLI::App app{"llds — positive dynamical systems with monomial updates: simulate, "
               "identify, and control them in log space"};
  app.require_subcommand(1);

  detail::Options opt;

  CLI::App* sim = app.add_subcommand("simulate", "Roll a model forward, write a series CSV");
  sim->add_option("--model", opt.model_path, "model file")->required();
  sim->add_option("--steps", opt.steps, "trajectory length, including the initial state")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--x1", opt.x1_text, "initial state, comma-separated positive values");
  sim->add_option("--series", opt.series_path, "series CSV; its last row seeds the rollout");
  sim->add_option("--inputs", opt.inputs_path, "control inputs CSV (steps-1 rows)");
  CLI::Option* sigma_opt =
      sim->add_option("--sigma", opt.sigma, "log-noise standard deviation");
  sim->add_option("--seed", opt.seed, "noise seed (default 0)")->needs(sigma_opt);
  sim->add_option("--out", opt.out_path, "output series CSV")->required();

  CLI::App* fit = app.add_subcommand("fit", "Identify a model from a series CSV");
  fit->add_option("--series", opt.series_path, "observed series CSV")->required();
  fit->add_option("--inputs", opt.inputs_path, "observed control inputs CSV (T-1 rows)");
  fit->add_option("--out", opt.out_path, "output model file")->required();
  fit->add_option("--residuals", opt.residuals_path, "output residual CSV");

  CLI::App* predict = app.add_subcommand(
      "predict", "One-step-ahead predictions from measured states (overlay CSV)");
  predict->add_option("--model", opt.model_path, "model file")->required();
  predict->add_option("--series", opt.series_path, "measured series CSV")->required();
  predict->add_option("--out", opt.out_path, "output overlay CSV")->required();
  predict->add_option("--plot", opt.plot_path, "also write an SVG overlay plot");
  predict->add_flag("--free-run", opt.free_run,
                    "roll out from the first state instead of one-step prediction");

  CLI::App* fp = app.add_subcommand("fixed-point", "Print the model's fixed point");
  fp->add_option("--model", opt.model_path, "model file")->required();

  CLI::App* ctl = app.add_subcommand("control", "Solve a finite-horizon tracking problem");
  ctl->add_option("--model", opt.model_path, "model file (m >= 1)")->required();
  ctl->add_option("--problem", opt.problem_path, "control problem config")->required();
  ctl->add_option("--out", opt.out_path, "output inputs CSV")->required();
  ctl->add_option("--states", opt.states_path,
                  "output predicted states CSV (default: <out>_states.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Normalize: --help stays 0, every usage error exits 1.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return detail::cmd_simulate(opt, sigma_opt->count() > 0);
    if (fit->parsed()) return detail::cmd_fit(opt);
    if (predict->parsed()) return detail::cmd_predict(opt);
    if (fp->parsed()) return detail::cmd_fixed_point(opt);
    if (ctl->parsed()) return detail::cmd_control(opt);
  } catch (const Error& e) {
    const bool color = detail::use_color();
    std::fprintf(stderr, "llds: %serror:%s %s: %s\n", color ? "\033[31m" : "",
                 color ? "\033[0m" : "", errc_name(e.code()), e.what());
    return 1;
  }
  return 0;
}

}  // namespace llds::cli
