#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "llds/io.hpp"
#include "llds/plot.hpp"
#include "llds/problem_io.hpp"
#include "llds/simulate.hpp"
#include "llds/sysid.hpp"
#include "test_util.hpp"

using namespace llds;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "llds_io_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

bool throws_code(const std::function<void()>& f, Errc code, std::string* msg = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("series CSV reads a simple file") {
  const fs::path p = temp_dir() / "simple.csv";
  spit(p, "t,x1\n1,4\n2,8\n");
  const Trajectory t = io::read_series(p.string());
  CHECK(t.length() == 2);
  CHECK(t.dim() == 1);
  CHECK(t.state(0)[0] == 4.0);
  CHECK(t.state(1)[0] == 8.0);
}

TEST_CASE("series CSV round-trips exactly") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> mag(-8.0, 8.0);
  std::vector<Vector> states;
  for (int t = 0; t < 12; ++t) {
    Vector s(3);
    for (std::size_t i = 0; i < 3; ++i) s[i] = std::exp(mag(gen));
    states.push_back(s);
  }
  const Trajectory x(states);

  const fs::path p = temp_dir() / "roundtrip.csv";
  io::write_series(p.string(), x, {}, 5);
  const Trajectory back = io::read_series(p.string());
  REQUIRE(back.length() == x.length());
  for (std::size_t t = 0; t < x.length(); ++t) {
    for (std::size_t i = 0; i < 3; ++i) CHECK(back.state(t)[i] == x.state(t)[i]);
  }

  // Re-writing the re-read series reproduces the bytes.
  const fs::path p2 = temp_dir() / "roundtrip2.csv";
  io::write_series(p2.string(), back, {}, 5);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("series CSV parse failures carry row and column") {
  const fs::path bad_cell = temp_dir() / "bad_cell.csv";
  spit(bad_cell, "t,x1,x2\n1,4,pelts\n");
  std::string msg;
  CHECK(throws_code([&] { io::read_series(bad_cell.string()); }, Errc::parse_error, &msg));
  CHECK(msg.find("row 1") != std::string::npos);
  CHECK(msg.find("column 3") != std::string::npos);

  const fs::path zero_cell = temp_dir() / "zero_cell.csv";
  spit(zero_cell, "t,x1,x2\n1,4,2\n2,0,3\n");
  CHECK(throws_code([&] { io::read_series(zero_cell.string()); }, Errc::non_positive_entry,
                    &msg));
  CHECK(msg.find("row 2") != std::string::npos);
  CHECK(msg.find("x1") != std::string::npos);

  const fs::path gap = temp_dir() / "gap.csv";
  spit(gap, "t,x1\n1,4\n3,5\n");
  CHECK(throws_code([&] { io::read_series(gap.string()); }, Errc::gap_in_time));

  const fs::path ragged = temp_dir() / "ragged.csv";
  spit(ragged, "t,x1,x2\n1,4\n");
  CHECK(throws_code([&] { io::read_series(ragged.string()); }, Errc::parse_error));

  const fs::path bad_header = temp_dir() / "bad_header.csv";
  spit(bad_header, "step,x1\n1,4\n");
  CHECK(throws_code([&] { io::read_series(bad_header.string()); }, Errc::parse_error));

  CHECK(throws_code([&] { io::read_series((temp_dir() / "missing.csv").string()); },
                    Errc::io_error));
}

TEST_CASE("model file round-trips bit for bit") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  Matrix a(2, 2);
  for (std::size_t i = 0; i < 4; ++i) a(i / 2, i % 2) = unif(gen);
  Matrix b(2, 1, {unif(gen), unif(gen)});
  const LogLinearModel model(a, Vector{std::exp(unif(gen)), std::exp(unif(gen))}, b);

  const fs::path p = temp_dir() / "model.txt";
  io::write_model(p.string(), model, 0.12345);
  const io::ModelFile mf = io::read_model(p.string());
  CHECK(mf.model == model);
  REQUIRE(mf.sigma_hat.has_value());
  CHECK(*mf.sigma_hat == 0.12345);

  const fs::path p2 = temp_dir() / "model2.txt";
  io::write_model(p2.string(), mf.model, mf.sigma_hat);
  CHECK(slurp(p) == slurp(p2));

  // Without B and sigma_hat.
  const LogLinearModel plain(a, Vector{1.0, 2.0});
  const fs::path p3 = temp_dir() / "model3.txt";
  io::write_model(p3.string(), plain);
  const io::ModelFile mf3 = io::read_model(p3.string());
  CHECK(mf3.model == plain);
  CHECK_FALSE(mf3.sigma_hat.has_value());
}

TEST_CASE("model file rejects malformed content") {
  const fs::path p = temp_dir() / "bad_model.txt";
  spit(p, "not-a-model\n");
  CHECK(throws_code([&] { io::read_model(p.string()); }, Errc::parse_error));

  spit(p, "llds-model v1\nn 2\nm 0\nA 1 0 0 1\nc 1\n");
  CHECK(throws_code([&] { io::read_model(p.string()); }, Errc::parse_error));

  spit(p, "llds-model v1\nn 2\nm 0\nA 1 0 0 1\nc 1 -3\n");
  CHECK(throws_code([&] { io::read_model(p.string()); }, Errc::non_positive_entry));
}

TEST_CASE("one_step_predict uses measured states") {
  // A = I, chat = 0: each prediction equals the previous measurement.
  const LogLinearModel shift(Matrix::identity(1), Vector{1.0});
  const Trajectory data({Vector{2.0}, Vector{5.0}, Vector{11.0}});
  const Trajectory pred = io::one_step_predict(shift, data);
  CHECK(pred.state(0)[0] == 2.0);
  CHECK(pred.state(1)[0] == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(pred.state(2)[0] == Catch::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("one_step_predict reproduces noiseless data from its own fit") {
  const auto rm = test::random_stable_model(3003, 2);
  const Trajectory data = simulate(rm.model, rm.x1, 25);
  const SysIdResult fit = identify(data);
  const Trajectory pred = io::one_step_predict(fit.model, data);
  for (std::size_t t = 0; t < data.length(); ++t) {
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(pred.state(t)[i] - data.state(t)[i]) <= 1e-8 * data.state(t)[i]);
    }
  }
}

TEST_CASE("overlay CSV pairs measured and predicted columns") {
  const Trajectory real({Vector{1.0, 2.0}, Vector{3.0, 4.0}});
  const Trajectory pred({Vector{1.0, 2.0}, Vector{3.5, 4.5}});
  const fs::path p = temp_dir() / "overlay.csv";
  io::write_overlay(p.string(), real, pred, {"hare", "lynx"}, 1900);
  const std::string content = slurp(p);
  CHECK(content.find("t,hare,hare_pred,lynx,lynx_pred") == 0);
  CHECK(content.find("1900,1,1,2,2") != std::string::npos);
  CHECK(content.find("1901,3,3.5,4,4.5") != std::string::npos);
}

TEST_CASE("emit_plot structural contract") {
  const auto rm = test::random_stable_model(777, 2);
  const Trajectory real = simulate(rm.model, rm.x1, 10);
  const Trajectory pred = io::one_step_predict(identify(real).model, real);

  const fs::path p = temp_dir() / "plot.svg";
  io::emit_plot(p.string(), real, pred, {"hare", "lynx"});
  const std::string svg = slurp(p);

  CHECK(svg.find("<?xml version=\"1.0\"") == 0);
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") !=
        std::string::npos);
  CHECK(count_occurrences(svg, "<polyline") == 4);  // 2 components x (real + pred)
  CHECK(count_occurrences(svg, "stroke-dasharray") == 4);  // 2 dashed lines + 2 legend samples
  CHECK(svg.find(">hare</text>") != std::string::npos);
  CHECK(svg.find(">lynx</text>") != std::string::npos);
  CHECK(svg.find(">t</text>") != std::string::npos);
  CHECK(svg.find("measured") != std::string::npos);
  CHECK(svg.find("predicted") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
}

TEST_CASE("emit_plot structure matches the frozen golden summary") {
  // Deterministic input: the bundled pelt data, so the summary does not
  // depend on any random number stream.
  const Trajectory data = io::read_series(std::string(LLDS_DATA_DIR) + "/hare_lynx.csv");
  const SysIdResult fit = identify(data);
  const Trajectory pred = io::one_step_predict(fit.model, data);

  const fs::path p = temp_dir() / "golden_check.svg";
  io::emit_plot(p.string(), data, pred, {"hare", "lynx"}, 1900);
  const std::string svg = slurp(p);

  std::ostringstream summary;
  summary << "svg version=1.1\n"
          << "panes " << count_occurrences(svg, "<g ") << "\n"
          << "polylines " << count_occurrences(svg, "<polyline") << "\n"
          << "rects " << count_occurrences(svg, "<rect") << "\n"
          << "lines " << count_occurrences(svg, "<line") << "\n"
          << "texts " << count_occurrences(svg, "<text") << "\n"
          << "dashed " << count_occurrences(svg, "stroke-dasharray") << "\n"
          << "axis-label t " << (svg.find(">t</text>") != std::string::npos ? "present" : "missing")
          << "\n"
          << "axis-label hare "
          << (svg.find(">hare</text>") != std::string::npos ? "present" : "missing") << "\n"
          << "axis-label lynx "
          << (svg.find(">lynx</text>") != std::string::npos ? "present" : "missing") << "\n"
          << "legend measured "
          << (svg.find(">measured</text>") != std::string::npos ? "present" : "missing") << "\n"
          << "legend predicted "
          << (svg.find(">predicted</text>") != std::string::npos ? "present" : "missing")
          << "\n";
  const std::string golden = slurp(fs::path(LLDS_GOLDEN_DIR) / "plot_structure.txt");
  CHECK(summary.str() == golden);
}

TEST_CASE("emit_plot handles constant series without degenerate axes") {
  const Trajectory flat(std::vector<Vector>(6, Vector{2.5}));
  const fs::path p = temp_dir() / "flat.svg";
  io::emit_plot(p.string(), flat, flat);
  const std::string svg = slurp(p);
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(svg.find("nan") == std::string::npos);
}

TEST_CASE("writers never leave partial files") {
  const Trajectory x({Vector{1.0}});
  const fs::path nowhere = temp_dir() / "no_such_dir" / "out.csv";
  CHECK(throws_code([&] { io::write_series(nowhere.string(), x); }, Errc::io_error));
  CHECK_FALSE(fs::exists(nowhere));
  CHECK_FALSE(fs::exists(nowhere.string() + ".tmp"));

  const fs::path fine = temp_dir() / "fine.csv";
  io::write_series(fine.string(), x);
  CHECK(fs::exists(fine));
  CHECK_FALSE(fs::exists(fine.string() + ".tmp"));
}

TEST_CASE("control config parses and validates") {
  const fs::path refs = temp_dir() / "refs.csv";
  spit(refs, "t,x1\n1,2\n2,2\n3,2\n");
  const fs::path cfg_path = temp_dir() / "problem.txt";
  spit(cfg_path, "llds-control v1\nT 3\nx1 1.5\nQ scalar 1\nR scalar 0.5\nrefs refs.csv\n");

  const io::ControlConfig cfg = io::read_control_config(cfg_path.string(), 1, 1);
  CHECK(cfg.horizon == 3);
  CHECK(cfg.x1_primal[0] == 1.5);
  CHECK(cfg.state_weight(0, 0) == 1.0);
  CHECK(cfg.input_weight(0, 0) == 0.5);
  CHECK_FALSE(cfg.primal_bounds.has_value());

  const LogLinearModel model(Matrix(1, 1, {0.5}), Vector{1.0}, Matrix(1, 1, {1.0}));
  const ControlProblem p = io::build_control_problem(model, cfg);
  CHECK(p.horizon() == 3);
  CHECK(p.initial_log_state()[0] == Catch::Approx(std::log(1.5)).epsilon(1e-15));
  CHECK(p.log_refs()[0][0] == Catch::Approx(std::log(2.0)).epsilon(1e-15));

  // With bounds.
  spit(cfg_path, "llds-control v1\nT 3\nx1 1.5\nQ scalar 1\nR matrix 0.5\nrefs refs.csv\n"
                 "lower 0.5\nupper 2\n");
  const io::ControlConfig cfg2 = io::read_control_config(cfg_path.string(), 1, 1);
  REQUIRE(cfg2.primal_bounds.has_value());
  const ControlProblem p2 = io::build_control_problem(model, cfg2);
  REQUIRE(p2.bounds().has_value());
  CHECK(p2.bounds()->lower[0] == Catch::Approx(std::log(0.5)).epsilon(1e-15));

  // Horizon / refs length mismatch.
  spit(cfg_path, "llds-control v1\nT 4\nx1 1.5\nQ scalar 1\nR scalar 0.5\nrefs refs.csv\n");
  CHECK(throws_code(
      [&] {
        io::build_control_problem(model, io::read_control_config(cfg_path.string(), 1, 1));
      },
      Errc::dimension_mismatch));

  // Unknown trailing key.
  spit(cfg_path, "llds-control v1\nT 3\nx1 1.5\nQ scalar 1\nR scalar 0.5\nrefs refs.csv\n"
                 "extra 1\n");
  CHECK(throws_code([&] { io::read_control_config(cfg_path.string(), 1, 1); },
                    Errc::parse_error));
}
