#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "ncreg/penalty.hpp"
#include "ncreg/prox.hpp"
#include "ncreg/rng.hpp"

using ncreg::PenaltySpec;
using ncreg::prox_objective;
using ncreg::prox_oracle;
using ncreg::prox_scalar;
using ncreg::ProxMethod;
using ncreg::ProxResult;

TEST_CASE("closed-form prox branches") {
  CHECK(prox_scalar(PenaltySpec::l1(2.0), 3.0).global_min == doctest::Approx(2.0));
  CHECK(prox_scalar(PenaltySpec::l1(7.0), 3.0).global_min == 0.0);
  CHECK(prox_scalar(PenaltySpec::l1(2.0), -3.0).global_min == doctest::Approx(-2.0));
  CHECK(prox_scalar(PenaltySpec::l2(3.0), 3.0).global_min == doctest::Approx(0.75));
  CHECK(prox_scalar(PenaltySpec::l1(0.0), -1.7).global_min == doctest::Approx(-1.7));
  CHECK(prox_scalar(PenaltySpec::none(), -1.7).global_min == doctest::Approx(-1.7));

  // hand-solved spline cases: stationary point sits in the linear region
  ProxResult scad = prox_scalar(PenaltySpec::scad(2.0, 3.7), 2.0);
  CHECK(scad.global_min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(scad.objective_at_min == doctest::Approx(-1.0).epsilon(1e-9));
  ProxResult mcp = prox_scalar(PenaltySpec::mcp(2.0, 1.5), 2.0);
  CHECK(mcp.global_min == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(mcp.objective_at_min == doctest::Approx(-1.5).epsilon(1e-9));

  // pen_scale folds into the effective threshold: scale 2 doubles lambda
  CHECK(prox_scalar(PenaltySpec::l1(2.0), 3.0, 2.0).global_min == doctest::Approx(1.0));
}

TEST_CASE("method routing") {
  CHECK(prox_scalar(PenaltySpec::l1(1.0), 2.0).method == ProxMethod::closed_form);
  CHECK(prox_scalar(PenaltySpec::scad(1.0, 3.7), 2.0).method == ProxMethod::closed_form);
  CHECK(prox_scalar(PenaltySpec::laplace(1.0, 0.01), 2.0).method == ProxMethod::fixed_point);
  CHECK(prox_scalar(PenaltySpec::arctan(1.0, 2.0), 2.0).method == ProxMethod::fixed_point);
  CHECK(prox_scalar(PenaltySpec::geman_mcclure(1.0, 1.0), 2.0).method ==
        ProxMethod::grid_refine);
  CHECK(ncreg::prox_method_name(ProxMethod::closed_form) == "closed_form");
  CHECK(ncreg::prox_method_name(ProxMethod::fixed_point) == "fixed_point");
  CHECK(ncreg::prox_method_name(ProxMethod::grid_refine) == "grid_refine");
}

TEST_CASE("laplace prox keeps both basins in view") {
  PenaltySpec spec = PenaltySpec::laplace(8.0, 0.01);

  ProxResult r = prox_scalar(spec, 3.0);
  CHECK(r.global_min == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(r.objective_at_min == doctest::Approx(-1.000008).epsilon(1e-5));
  REQUIRE(r.local_minima.size() >= 2);
  CHECK(r.local_minima.front().w == r.global_min);
  bool has_zero = false;
  for (const auto& m : r.local_minima)
    if (std::fabs(m.w) <= 1e-9 && std::fabs(m.objective) <= 1e-12) has_zero = true;
  CHECK(has_zero);
  for (std::size_t i = 0; i + 1 < r.local_minima.size(); ++i)
    CHECK(r.local_minima[i].objective <= r.local_minima[i + 1].objective + 1e-12);

  // past the selection threshold the origin wins but the far basin survives
  PenaltySpec hard = PenaltySpec::laplace(15.0, 0.01);
  ProxResult r2 = prox_scalar(hard, 3.0);
  CHECK(r2.global_min == 0.0);
  CHECK(r2.objective_at_min == 0.0);
  bool has_far = false;
  for (const auto& m : r2.local_minima)
    if (m.w > 2.5) has_far = true;
  CHECK(has_far);
}

TEST_CASE("fixed-point families agree with the brute-force oracle") {
  CHECK(prox_scalar(PenaltySpec::arctan(8.0, 10.0), 3.0).global_min ==
        doctest::Approx(prox_oracle(PenaltySpec::arctan(8.0, 10.0), 3.0)).epsilon(1e-4));
  CHECK(prox_scalar(PenaltySpec::laplace(3.0, 1e-7), 1.2).global_min ==
        doctest::Approx(prox_oracle(PenaltySpec::laplace(3.0, 1e-7), 1.2)).epsilon(1e-4));
}

TEST_CASE("randomized oracle fuzz, sign preservation, and shrinkage") {
  std::vector<PenaltySpec> specs = {
      PenaltySpec::l1(1.3),
      PenaltySpec::l2(0.7),
      PenaltySpec::scad(1.1, 3.7),
      PenaltySpec::mcp(0.9, 1.5),
      PenaltySpec::laplace(2.0, 0.01),
      PenaltySpec::laplace(1.0, 1e-7),
      PenaltySpec::arctan(2.0, 1.0),
      PenaltySpec::arctan(1.0, 10.0),
      PenaltySpec::bridge(1.0, 0.5),
      PenaltySpec::geman_mcclure(1.5, 0.7),
      PenaltySpec::log_penalty(1.5, 0.7),
      PenaltySpec::capped_l1(1.5, 1.0)};
  auto g = ncreg::rng::stream(2024);
  const int kPoints = 20001;
  for (const PenaltySpec& base : specs) {
    for (int i = 0; i < 60; ++i) {
      PenaltySpec spec = base;
      spec.lambda = base.lambda * ncreg::rng::uniform(g, 0.2, 2.5);
      double w_hat = ncreg::rng::uniform(g, -6.0, 6.0);
      double scale = (i % 3 == 0) ? ncreg::rng::uniform(g, 0.5, 2.0) : 1.0;

      ProxResult r = prox_scalar(spec, w_hat, scale);
      double half_width = std::max(2.0 * std::fabs(w_hat), 10.0);
      double ref = ncreg::prox_oracle(spec, w_hat, -1.0, kPoints);
      double tol = 2.0 * ncreg::oracle_final_step(half_width, kPoints);
      // identical objective values at distinct argmins count as agreement
      double oracle_obj = prox_objective(spec, w_hat, ref, 1.0);
      bool tie = scale == 1.0 &&
                 std::fabs(r.objective_at_min - oracle_obj) <= 1e-10 * (1.0 + std::fabs(oracle_obj));
      if (scale == 1.0) {
        INFO(ncreg::family_name(spec.family), " lambda=", spec.lambda, " w_hat=", w_hat);
        CHECK((std::fabs(r.global_min - ref) <= tol || tie));
      }

      CHECK(std::fabs(r.global_min) <= std::fabs(w_hat) + 1e-12);
      CHECK(r.global_min * w_hat >= -1e-12);
      // reported minimum really is the best of the reported local minima
      for (const auto& m : r.local_minima)
        CHECK(r.objective_at_min <= m.objective + 1e-12);
    }
  }
}

TEST_CASE("tail fidelity: big coefficients survive almost untouched") {
  CHECK(prox_scalar(PenaltySpec::scad(1.0, 3.7), 5.0).global_min == doctest::Approx(5.0));
  CHECK(prox_scalar(PenaltySpec::mcp(1.0, 1.5), 5.0).global_min == doctest::Approx(5.0));
  CHECK(std::fabs(prox_scalar(PenaltySpec::laplace(1.0, 0.01), 6.0).global_min - 6.0) <= 1e-6);
  CHECK(std::fabs(prox_scalar(PenaltySpec::arctan(0.01, 1.0), 5.0).global_min - 5.0) <= 1e-3);
  // l1 never stops shrinking: the bias stays at lambda/2 forever
  CHECK(prox_scalar(PenaltySpec::l1(1.0), 6.0).global_min == doctest::Approx(5.5));
}

TEST_CASE("selection thresholds") {
  CHECK(ncreg::global_min_threshold(PenaltySpec::l1(1.0), 3.0) ==
        doctest::Approx(6.0).epsilon(1e-5));
  CHECK(ncreg::global_min_threshold(PenaltySpec::laplace(1.0, 0.01), 3.0) ==
        doctest::Approx(9.000009).epsilon(1e-6));
  double at = ncreg::global_min_threshold(PenaltySpec::arctan(1.0, 10.0), 3.0);
  CHECK(at > 6.0);
  CHECK(at < 15.0);

  // threshold grows with the input magnitude
  double t1 = ncreg::global_min_threshold(PenaltySpec::laplace(1.0, 0.01), 3.0);
  double t2 = ncreg::global_min_threshold(PenaltySpec::laplace(1.0, 0.01), 3.001);
  CHECK(t2 > t1);

  // ridge shrinks but never selects, so the bracket cannot straddle a switch
  CHECK_THROWS_AS(ncreg::global_min_threshold(PenaltySpec::l2(1.0), 3.0), std::runtime_error);
}

TEST_CASE("objective surfaces over a lambda grid") {
  std::vector<double> w_grid;
  for (int i = 0; i <= 1200; ++i) w_grid.push_back((i - 200) * 0.005);

  SUBCASE("l1 spot value and layout") {
    auto curve = ncreg::objective_curve(PenaltySpec::l1(1.0), 3.0, {0.1, 2.0}, w_grid);
    REQUIRE(curve.objective.size() == 2 * w_grid.size());
    std::size_t i3 = 800;  // (800 - 200) * 0.005 == 3
    CHECK(w_grid[i3] == doctest::Approx(3.0));
    CHECK(curve.objective[0 * w_grid.size() + i3] == doctest::Approx(-8.7).epsilon(1e-12));
    CHECK(curve.objective[1 * w_grid.size() + i3] == doctest::Approx(-3.0).epsilon(1e-12));
  }

  SUBCASE("laplace surface: near-tie at the threshold, origin wins beyond it") {
    auto curve =
        ncreg::objective_curve(PenaltySpec::laplace(1.0, 0.01), 3.0, {9.0, 15.0}, w_grid);
    auto row_begin = curve.objective.begin();
    auto row9 = std::min_element(row_begin, row_begin + w_grid.size());
    double w9 = w_grid[static_cast<std::size_t>(row9 - row_begin)];
    CHECK(*row9 <= 1e-12);
    CHECK(*row9 >= -0.01);
    CHECK(std::fabs(w9 - 3.0) <= 0.05);

    auto row15 = std::min_element(row_begin + w_grid.size(), curve.objective.end());
    CHECK(*row15 == 0.0);
    CHECK(w_grid[static_cast<std::size_t>(row15 - (row_begin + w_grid.size()))] == 0.0);
  }
}

TEST_CASE("oracle bookkeeping") {
  CHECK(ncreg::oracle_final_step(10.0, 100001) == doctest::Approx(2e-10).epsilon(1e-12));
  CHECK(ncreg::oracle_final_step(10.0, 20001) == doctest::Approx(1e-9).epsilon(1e-12));
  CHECK_THROWS_AS(ncreg::prox_oracle(PenaltySpec::l1(1.0), 1.0, -1.0, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(ncreg::prox_scalar(PenaltySpec::l1(1.0), 1.0, -0.5), std::invalid_argument);

  nlohmann::json j = ncreg::to_json(prox_scalar(PenaltySpec::l1(2.0), 3.0));
  CHECK(j["global_min"].get<double>() == doctest::Approx(2.0));
  CHECK(j["method"] == "closed_form");
  REQUIRE(j["local_minima"].is_array());
  CHECK(j["local_minima"][0]["w"].get<double>() == doctest::Approx(2.0));
  CHECK(j["local_minima"][0].contains("objective"));
}
