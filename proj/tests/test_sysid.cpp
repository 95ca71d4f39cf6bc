#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "llds/io.hpp"
#include "llds/simulate.hpp"
#include "llds/sysid.hpp"
#include "test_util.hpp"

using namespace llds;

TEST_CASE("estimate_sigma on zero residuals is zero") {
  const std::vector<Vector> residuals(5, Vector(2));
  CHECK(estimate_sigma(residuals, 2, 3) == 0.0);
}

TEST_CASE("estimate_sigma matches the stated formula") {
  // Three scalar residuals of 2 with one parameter per row:
  // sqrt(12 / (1 * 2)) = sqrt(6), plugged in by hand.
  const std::vector<Vector> residuals(3, Vector{2.0});
  CHECK(estimate_sigma(residuals, 1, 1) == Catch::Approx(2.449489742783178).epsilon(1e-15));
}

TEST_CASE("estimate_sigma needs positive degrees of freedom") {
  const std::vector<Vector> residuals(3, Vector{1.0});
  CHECK_THROWS_MATCHES(estimate_sigma(residuals, 1, 3), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::insufficient_data;
                       }));
  CHECK_THROWS_AS(estimate_sigma({}, 1, 0), Error);
}

TEST_CASE("identify recovers a noiseless model exactly") {
  const auto rm = test::random_stable_model(1001, 2);
  const Trajectory data = simulate(rm.model, rm.x1, 20);
  const SysIdResult fit = identify(data);

  CHECK(test::max_abs_diff(fit.model.dynamics(), rm.model.dynamics()) <= 1e-8);
  CHECK(test::max_abs_diff(fit.model.log_offset(), rm.model.log_offset()) <= 1e-8);
  CHECK(fit.sse <= 1e-16);
  CHECK(fit.residuals.size() == data.length() - 1);

  // sse recomputes from the residuals.
  double sum = 0.0;
  for (const Vector& r : fit.residuals) sum += sq_norm(r);
  CHECK(fit.sse == Catch::Approx(sum).margin(1e-18));
}

TEST_CASE("identify rejects a constant trajectory as rank deficient") {
  const Trajectory flat(std::vector<Vector>(10, Vector{1.0, 1.0}));
  CHECK_THROWS_MATCHES(identify(flat), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::rank_deficient;
                       }));
}

TEST_CASE("identify rejects too-short trajectories") {
  const auto rm = test::random_stable_model(55, 2);
  const Trajectory data = simulate(rm.model, rm.x1, 3);  // need n + 2 = 4
  CHECK_THROWS_MATCHES(identify(data), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::too_short;
                       }));
}

TEST_CASE("identify at minimum length interpolates with sigma_hat zero") {
  const auto rm = test::random_stable_model(56, 2);
  const Trajectory data = simulate(rm.model, rm.x1, 4);  // T = n + 2 exactly
  const SysIdResult fit = identify(data);
  CHECK(fit.sigma_hat == 0.0);
  CHECK(fit.sse <= 1e-16);
}

TEST_CASE("pelt data reproduces the predator-prey sign pattern") {
  const Trajectory data = io::read_series(std::string(LLDS_DATA_DIR) + "/hare_lynx.csv");
  const SysIdResult fit = identify(data);
  const Matrix& a = fit.model.dynamics();

  CHECK(a(0, 0) > 0.0);  // hares breed hares
  CHECK(a(0, 1) < 0.0);  // lynxes eat hares
  CHECK(a(1, 0) > 0.0);  // hares feed lynxes
  CHECK(a(1, 1) > 0.0);  // lynxes breed lynxes

  // Regression pins against an independent fit of the bundled file.
  CHECK(a(0, 0) == Catch::Approx(0.76314095).margin(1e-6));
  CHECK(a(0, 1) == Catch::Approx(-0.47292038).margin(1e-6));
  CHECK(a(1, 0) == Catch::Approx(0.65624317).margin(1e-6));
  CHECK(a(1, 1) == Catch::Approx(0.69461342).margin(1e-6));
  CHECK(fit.model.offset()[0] == Catch::Approx(7.98694494).margin(1e-5));
  CHECK(fit.model.offset()[1] == Catch::Approx(0.26622126).margin(1e-6));
  CHECK(fit.sigma_hat == Catch::Approx(0.23044718544771356).margin(1e-8));
}

TEST_CASE("identify_controlled recovers a noiseless controlled model") {
  std::mt19937_64 gen(2002);
  std::uniform_real_distribution<double> unif(-0.6, 0.6);
  std::uniform_real_distribution<double> pos(0.5, 2.0);

  Matrix a(2, 2, {0.6, -0.2, 0.15, 0.5});
  Matrix b(2, 1, {0.4, -0.3});
  const LogLinearModel model(a, Vector{1.3, 0.8}, b);

  std::vector<Vector> inputs;
  for (int t = 0; t < 29; ++t) inputs.push_back(Vector{std::exp(unif(gen))});
  const ControlSequence u(inputs);
  const Trajectory data = simulate(model, Vector{pos(gen), pos(gen)}, 30, u);

  const SysIdResult fit = identify_controlled(data, u);
  REQUIRE(fit.model.controlled());
  CHECK(test::max_abs_diff(fit.model.dynamics(), a) <= 1e-8);
  CHECK(test::max_abs_diff(fit.model.input_matrix(), b) <= 1e-8);
  CHECK(test::max_abs_diff(fit.model.log_offset(), model.log_offset()) <= 1e-8);
}

TEST_CASE("identify_controlled with constant inputs is rank deficient") {
  const LogLinearModel model(Matrix(2, 2, {0.6, -0.2, 0.15, 0.5}), Vector{1.3, 0.8},
                             Matrix(2, 1, {0.4, -0.3}));
  const ControlSequence u(std::vector<Vector>(19, Vector{1.5}));
  const Trajectory data = simulate(model, Vector{2.0, 1.0}, 20, u);
  CHECK_THROWS_MATCHES(identify_controlled(data, u), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == Errc::rank_deficient;
                       }));
}

TEST_CASE("identify_controlled with zero-dimensional inputs reduces to identify") {
  const auto rm = test::random_stable_model(71, 2);
  const Trajectory data = simulate(rm.model, rm.x1, 25);
  const ControlSequence empty(std::vector<Vector>(24, Vector(0)));

  const SysIdResult plain = identify(data);
  const SysIdResult reduced = identify_controlled(data, empty);
  CHECK(test::max_abs_diff(plain.model.dynamics(), reduced.model.dynamics()) == 0.0);
  CHECK(plain.sse == reduced.sse);
  CHECK_FALSE(reduced.model.controlled());
}

TEST_CASE("residual orthogonality: the fit's normal equations") {
  const auto rm = test::random_oscillatory_model(404);
  const Trajectory data = simulate(rm.model, rm.x1, 120, std::nullopt, NoiseSpec(0.1, 17));
  const SysIdResult fit = identify(data);
  const LogTrajectory xhat = log_transform(data);

  Vector sum(2);
  Matrix cross(2, 2);
  double scale = 1.0;
  for (std::size_t t = 0; t < fit.residuals.size(); ++t) {
    sum += fit.residuals[t];
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) cross(i, j) += fit.residuals[t][i] * xhat.state(t)[j];
    scale += inf_norm(xhat.state(t));
  }
  CHECK(inf_norm(sum) <= 1e-8);
  CHECK(max_abs(cross) <= 1e-8 * scale);
}

TEST_CASE("sigma_hat is consistent under simulated noise") {
  const auto rm = test::random_oscillatory_model(42);
  const Trajectory data = simulate(rm.model, rm.x1, 500, std::nullopt, NoiseSpec(0.1, 4242));
  const SysIdResult fit = identify(data);
  CHECK(fit.sigma_hat >= 0.09);
  CHECK(fit.sigma_hat <= 0.11);
}

TEST_CASE("estimation error shrinks with trajectory length") {
  // Both fits start at the fixed point so the comparison isolates
  // noise-driven excitation.
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rm = test::random_oscillatory_model(500 + seed);
    const Vector x1 = fixed_point(rm.model);
    const Trajectory long_run =
        simulate(rm.model, x1, 1000, std::nullopt, NoiseSpec(0.05, 9000 + seed));
    const Trajectory short_run =
        simulate(rm.model, x1, 50, std::nullopt, NoiseSpec(0.05, 9500 + seed));
    const double err_long =
        test::max_abs_diff(identify(long_run).model.dynamics(), rm.model.dynamics());
    const double err_short =
        test::max_abs_diff(identify(short_run).model.dynamics(), rm.model.dynamics());
    if (err_long < err_short) ++wins;
  }
  CHECK(wins >= 9);
}

TEST_CASE("refitting a model's own noiseless output reproduces it") {
  const auto rm = test::random_stable_model(808, 3);
  const Trajectory data = simulate(rm.model, rm.x1, 30);
  const SysIdResult first = identify(data);
  CHECK(test::max_abs_diff(first.model.dynamics(), rm.model.dynamics()) <= 1e-8);

  const Trajectory regenerated = simulate(first.model, rm.x1, 30);
  const SysIdResult second = identify(regenerated);
  CHECK(test::max_abs_diff(second.model.dynamics(), first.model.dynamics()) <= 1e-8);
  CHECK(test::max_abs_diff(second.model.offset(), first.model.offset()) <= 1e-8);
}
