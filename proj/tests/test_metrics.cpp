#include <doctest.h>

#include <numbers>
#include <random>

#include "dualbench/metrics.hpp"
#include "oracles.hpp"

using namespace dualbench;
using core::Complex;

namespace {

core::DensityMatrix dm(const Eigen::Matrix4cd& r) {
  core::DensityMatrix d;
  d.rho = r;
  return d;
}

Eigen::Matrix4cd werner(double p) {
  const Eigen::Vector4cd psi = metrics::bell_target();
  return p * psi * psi.adjoint() + (1.0 - p) * Eigen::Matrix4cd::Identity() / 4.0;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("Werner states: concurrence and fidelity closed forms") {
    for (double p = 0.0; p <= 1.0 + 1e-12; p += 0.05) {
      const auto d = dm(werner(p));
      CHECK(metrics::concurrence(d) == doctest::Approx(oracle::werner_concurrence(p)).epsilon(1e-9));
      CHECK(metrics::fidelity(d, metrics::bell_target()) == doctest::Approx((1.0 + 3.0 * p) / 4.0));
    }
  }

  TEST_CASE("X states match the closed form") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::Vector4d pop(u(rng), u(rng), u(rng), u(rng));
      pop /= pop.sum();
      Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
      for (int i = 0; i < 4; ++i) r(i, i) = pop(i);
      const double m14 = std::sqrt(pop(0) * pop(3)) * u(rng), m23 = std::sqrt(pop(1) * pop(2)) * u(rng);
      r(0, 3) = std::polar(m14, 2 * std::numbers::pi * u(rng));
      r(3, 0) = std::conj(r(0, 3));
      r(1, 2) = std::polar(m23, 2 * std::numbers::pi * u(rng));
      r(2, 1) = std::conj(r(1, 2));
      CHECK(metrics::concurrence(dm(r)) == doctest::Approx(oracle::x_state_concurrence(r)).epsilon(1e-8));
    }
  }

  TEST_CASE("concurrence is invariant under local unitaries and zero for product states") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto r = oracle::random_density(rng, 3.0);
      auto local = [&]() {
        Eigen::Matrix2cd a;
        a << Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng));
        return Eigen::Matrix2cd(Eigen::HouseholderQR<Eigen::Matrix2cd>(a).householderQ());
      };
      Eigen::Matrix4cd u;
      const Eigen::Matrix2cd u1 = local(), u2 = local();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) u(i, j) = u1(i / 2, j / 2) * u2(i % 2, j % 2);
      CHECK(metrics::concurrence(dm(u * r * u.adjoint())) == doctest::Approx(metrics::concurrence(dm(r))).epsilon(1e-8));
      const double c = metrics::concurrence(dm(r));
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
    const Eigen::Vector4cd prod(0.6, 0.8, 0.0, 0.0);
    CHECK(metrics::concurrence(dm(prod * prod.adjoint())) < 1e-7);
  }

  TEST_CASE("fidelity rejects non-Hermitian input") {
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Identity() / 4.0;
    r(0, 1) = 0.2;
    CHECK_THROWS_AS(metrics::fidelity(dm(r), metrics::bell_target()), ValidationError);
  }

  TEST_CASE("visibility fit recovers a known fringe") {
    std::vector<double> th, y;
    for (double t = 0; t <= 180.0; t += 10.0) {
      th.push_back(t);
      y.push_back(100.0 + 80.0 * std::cos(4.0 * t * std::numbers::pi / 180.0 + 0.3));
    }
    const auto fit = metrics::visibility(th, y);
    CHECK(fit.visibility == doctest::Approx(0.8));
    CHECK(fit.phase == doctest::Approx(0.3));
    CHECK(fit.residual < 1e-9);
    const std::vector<double> flat(th.size(), 5.0);
    CHECK(metrics::visibility(th, flat).visibility == doctest::Approx(0.0));
  }

  TEST_CASE("visibility fit preconditions") {
    const std::vector<double> th{0, 10, 20, 30, 40, 50, 60}, y(7, 1.0);
    CHECK_THROWS_AS(metrics::visibility(th, y), ConfigError);
    const std::vector<double> narrow{0, 5, 10, 15, 20, 25, 30, 35}, y8(8, 1.0);
    CHECK_THROWS_AS(metrics::visibility(narrow, y8), ConfigError);
  }

  TEST_CASE("predicted scans of the Bell state have unit visibility") {
    const auto grid = detection::default_scan_grid();
    const auto d = dm(werner(1.0));
    for (auto b : {detection::ScanBasis::Z, detection::ScanBasis::X}) {
      const auto curve = metrics::predicted_scan(d, b, grid);
      CHECK(metrics::visibility(grid, curve).visibility == doctest::Approx(1.0));
    }
    const auto w = dm(werner(0.5));
    const auto curve = metrics::predicted_scan(w, detection::ScanBasis::X, grid);
    CHECK(metrics::visibility(grid, curve).visibility == doctest::Approx(0.5));
  }

  TEST_CASE("report validation") {
    metrics::MetricsReport r;
    r.fidelity = 1.2;
    CHECK_THROWS_AS(r.validate(), ValidationError);
    r.fidelity = 0.9;
    r.concurrence_error = metrics::ErrorBar{0.9, -0.1, 100, 0};
    CHECK_THROWS_AS(r.validate(), ValidationError);
  }
}
