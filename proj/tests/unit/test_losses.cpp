#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "robreg/error.hpp"
#include "robreg/losses.hpp"
#include "robreg/prng.hpp"

using namespace robreg;

namespace {

std::vector<LossSpec> all_losses() {
  return {LossSpec::ls(),        LossSpec::lad(),    LossSpec::quantile(0.3),
          LossSpec::quantile(0.5), LossSpec::huber(), LossSpec::cauchy(),
          LossSpec::tukey()};
}

double central_diff(const LossSpec& s, double a, double y, double h = 1e-5) {
  return (loss_value(s, a + h, y) - loss_value(s, a - h, y)) / (2 * h);
}

}  // namespace

TEST_SUITE("losses") {
  TEST_CASE("values at hand-computed points") {
    CHECK(loss_value(LossSpec::huber(1.345), 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(loss_value(LossSpec::lad(), 3.0, 5.0) == doctest::Approx(2.0));
    const double t = 4.685;
    CHECK(loss_value(LossSpec::tukey(t), 10.0, 0.0) == doctest::Approx(t * t / 6).epsilon(1e-12));
    CHECK(loss_value(LossSpec::tukey(t), 10.0, 0.0) == doctest::Approx(3.65820).epsilon(1e-5));
    CHECK(loss_value(LossSpec::cauchy(1.0), 2.5, 2.5) == 0.0);
    CHECK(loss_value(LossSpec::ls(), 3.0, 1.0) == 4.0);
    CHECK(loss_value(LossSpec::huber(1.0), 3.0, 0.0) == doctest::Approx(2.5));
    CHECK(loss_value(LossSpec::quantile(0.3), 2.0, 0.0) == doctest::Approx(0.6));
    CHECK(loss_value(LossSpec::quantile(0.3), -2.0, 0.0) == doctest::Approx(1.4));
  }

  TEST_CASE("gradients and subgradient selection") {
    CHECK(loss_grad(LossSpec::huber(2.0), 5.0, 0.0) == 2.0);
    CHECK(loss_grad(LossSpec::huber(2.0), -5.0, 0.0) == -2.0);
    CHECK(loss_grad(LossSpec::huber(2.0), 2.0, 0.0) == 2.0);
    CHECK(loss_grad(LossSpec::lad(), 1.5, 1.5) == 0.0);
    CHECK(loss_grad(LossSpec::quantile(0.3), 1.5, 1.5) == 0.0);
    const LossSpec c = LossSpec::cauchy(1.0);
    CHECK(loss_grad(c, 1.0, 0.0) == doctest::Approx(1.0));
    CHECK(loss_grad(c, 1.0, 0.0) == doctest::Approx(central_diff(c, 1.0, 0.0)).epsilon(1e-8));
    CHECK(loss_grad(LossSpec::tukey(4.685), 7.0, 0.0) == 0.0);
    CHECK(loss_grad(LossSpec::tukey(4.685), -7.0, 0.0) == 0.0);
  }

  TEST_CASE("lipschitz constants") {
    CHECK(lipschitz_constant(LossSpec::lad()) == 1.0);
    CHECK(lipschitz_constant(LossSpec::quantile(0.3)) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(lipschitz_constant(LossSpec::quantile(0.8)) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(lipschitz_constant(LossSpec::huber(1.345)) == 1.345);
    CHECK(lipschitz_constant(LossSpec::cauchy(2.0)) == 2.0);
    const double t = 4.685;
    CHECK(lipschitz_constant(LossSpec::tukey(t)) ==
          doctest::Approx(16 * t / (25 * std::sqrt(5.0))).epsilon(1e-14));
    CHECK(lipschitz_constant(LossSpec::tukey(t)) == doctest::Approx(1.34093).epsilon(1e-5));
    CHECK_THROWS_WITH_AS(lipschitz_constant(LossSpec::ls()),
                         doctest::Contains("not globally Lipschitz"), InvalidArgument);
  }

  TEST_CASE("hyperparameter validation") {
    CHECK_THROWS_AS(LossSpec::quantile(0.0), InvalidArgument);
    CHECK_THROWS_AS(LossSpec::quantile(1.0), InvalidArgument);
    CHECK_THROWS_AS(LossSpec::huber(0.0), InvalidArgument);
    CHECK_THROWS_AS(LossSpec::cauchy(-1.0), InvalidArgument);
    CHECK_THROWS_AS(LossSpec::tukey(std::nan("")), InvalidArgument);
    CHECK_NOTHROW(LossSpec::quantile(0.5));
  }

  TEST_CASE("non-finite inputs are rejected") {
    const double inf = std::numeric_limits<double>::infinity();
    for (const auto& s : all_losses()) {
      CHECK_THROWS_AS(loss_value(s, inf, 0.0), InvalidArgument);
      CHECK_THROWS_AS(loss_grad(s, 0.0, std::nan("")), InvalidArgument);
    }
  }

  TEST_CASE("names and labels") {
    for (auto k : {LossKind::LS, LossKind::LAD, LossKind::Quantile, LossKind::Huber,
                   LossKind::Cauchy, LossKind::Tukey})
      CHECK(parse_loss_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_loss_kind("l2"), InvalidArgument);
    CHECK(LossSpec::huber().label() == "huber(1.345)");
    CHECK(LossSpec::ls().label() == "ls");
    CHECK(LossSpec::with_default_hyper(LossKind::Tukey) == LossSpec::tukey(4.685));
  }

  TEST_CASE("axiom checker") {
    std::vector<std::pair<double, double>> grid;
    for (int a = -5; a <= 5; ++a)
      for (int y = -5; y <= 5; ++y) grid.emplace_back(a, y);
    const auto lad = check_loss_axioms(LossSpec::lad(), grid);
    CHECK(lad.max_ratio <= 1.0 + 1e-12);
    CHECK(lad.lipschitz_ok);
    CHECK(lad.zero_on_diagonal);

    std::vector<std::pair<double, double>> fine;
    for (int i = -100; i <= 100; ++i) fine.emplace_back(i * 0.1, 0.0);
    const auto tukey = check_loss_axioms(LossSpec::tukey(4.685), fine);
    CHECK(tukey.max_ratio <= 1.34093 * 1.001);
    CHECK(tukey.lipschitz_ok);

    const std::vector<std::pair<double, double>> one{{0.0, 0.0}};
    CHECK_THROWS_AS(check_loss_axioms(LossSpec::huber(1.345), one), InvalidArgument);

    const auto ls = check_loss_axioms(LossSpec::ls(), grid);
    CHECK_FALSE(ls.lambda.has_value());
    CHECK_FALSE(ls.lipschitz_ok);
  }

  TEST_CASE("property: nonnegative, zero on the diagonal, symmetric") {
    PrngStream rng(11);
    for (int i = 0; i < 2000; ++i) {
      const double a = rng.uniform(-20, 20), y = rng.uniform(-20, 20);
      for (const auto& s : all_losses()) {
        CHECK(loss_value(s, a, y) >= 0.0);
        CHECK(loss_value(s, y, y) == 0.0);
        if (s.kind() != LossKind::Quantile)
          CHECK(loss_value(s, a, y) == doctest::Approx(loss_value(s, y, a)).epsilon(1e-14));
      }
      CHECK(loss_value(LossSpec::quantile(0.5), a, y) ==
            doctest::Approx(std::abs(a - y) / 2).epsilon(1e-14));
      CHECK(loss_value(LossSpec::tukey(), a, y) <= 4.685 * 4.685 / 6 + 1e-12);
    }
  }

  TEST_CASE("property: gradients match central differences away from kinks") {
    PrngStream rng(12);
    const std::vector<LossSpec> smooth{LossSpec::ls(), LossSpec::huber(), LossSpec::cauchy(),
                                       LossSpec::cauchy(0.3), LossSpec::tukey()};
    for (int i = 0; i < 2000; ++i) {
      const double a = rng.uniform(-8, 8), y = rng.uniform(-8, 8);
      for (const auto& s : smooth) {
        const double x = std::abs(a - y);
        if (s.kind() == LossKind::Huber && std::abs(x - s.hyper()) < 1e-4) continue;
        const double g = loss_grad(s, a, y);
        CHECK(std::abs(g - central_diff(s, a, y)) <= 1e-6 * (1 + std::abs(g)));
      }
    }
  }

  TEST_CASE("property: gradient bounded by the lipschitz constant") {
    PrngStream rng(13);
    for (int i = 0; i < 5000; ++i) {
      const double a = rng.uniform(-50, 50), y = rng.uniform(-50, 50);
      for (const auto& s : all_losses()) {
        if (s.kind() == LossKind::LS) continue;
        CHECK(std::abs(loss_grad(s, a, y)) <= lipschitz_constant(s) + 1e-9);
      }
    }
  }

  TEST_CASE("tails") {
    const LossSpec h = LossSpec::huber(1.5);
    for (double x : {1.6, 3.0, 100.0}) {
      CHECK(loss_grad(h, x, 0) == 1.5);
      CHECK(loss_grad(h, -x, 0) == -1.5);
    }
    CHECK(std::abs(loss_grad(LossSpec::cauchy(), 1e6, 0)) < 1e-5);
    for (double x : {4.7, 10.0, 1e8}) CHECK(loss_grad(LossSpec::tukey(), x, 0) == 0.0);
  }
}
