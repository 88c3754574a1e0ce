#include <doctest.h>

#include <numbers>
#include <random>

#include "dualbench/optics.hpp"

using namespace dualbench;
using core::Complex;
using core::Mode;
using core::Pol;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

optics::Bench single_port(std::vector<optics::Element> elements, std::vector<std::string> ports = {"a"}) {
  optics::Bench b;
  b.name = "test";
  b.ports = std::move(ports);
  b.elements = std::move(elements);
  return b;
}

Complex mode_amp(const core::ModeUnitary& u, const Mode& out, const Mode& in) {
  return u.matrix(static_cast<Eigen::Index>(u.space.index(out)), static_cast<Eigen::Index>(u.space.index(in)));
}

}  // namespace

TEST_SUITE("optics") {
  TEST_CASE("half-wave plate at 45 degrees exchanges H and V") {
    const auto m = optics::hwp_matrix(45.0 * kDeg);
    CHECK(std::abs(m(1, 0) - 1.0) < 1e-15);
    CHECK(std::abs(m(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(m(0, 0)) < 1e-15);
    CHECK((optics::hwp_matrix(0.0) - Eigen::Vector2cd(1, -1).asDiagonal().toDenseMatrix()).norm() < 1e-15);
  }

  TEST_CASE("quarter-wave plate at 45 degrees makes circular light") {
    const Eigen::Vector2cd out = optics::qwp_matrix(45.0 * kDeg) * Eigen::Vector2cd(1, 0);
    const Complex i(0, 1);
    const Eigen::Vector2cd expected = i * Eigen::Vector2cd(1, -i) / std::sqrt(2.0);
    CHECK((out - expected).norm() < 1e-15);
    const Eigen::Matrix2cd q0 = optics::qwp_matrix(0.0);
    CHECK(std::abs(q0(1, 1) / q0(0, 0) - i) < 1e-15);
    CHECK(std::abs(q0(0, 1)) + std::abs(q0(1, 0)) < 1e-15);
    // two quarter-wave plates make a half-wave plate
    const double a = 17.0 * kDeg;
    const Eigen::Matrix2cd q2 = optics::qwp_matrix(a) * optics::qwp_matrix(a);
    const Eigen::Matrix2cd h = optics::hwp_matrix(a);
    const Complex phase = q2(0, 0) / h(0, 0);
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
    CHECK((q2 - phase * h).norm() < 1e-12);
  }

  TEST_CASE("polarizer passes its axis only") {
    const auto p = optics::polarizer_matrix(30.0 * kDeg);
    CHECK((p * p - p).norm() < 1e-15);
    CHECK(std::abs(p.trace() - 1.0) < 1e-15);
  }

  TEST_CASE("PBS transmits H and reflects V with phase i") {
    auto b = single_port({{optics::ElementKind::PBS, "pbs", {"a", "b", "c", "d"}}}, {"a", "b", "c", "d"});
    const auto u = optics::compile(b, 1);
    u.validate();
    CHECK(std::abs(mode_amp(u, {"c", Pol::H, 0}, {"a", Pol::H, 0}) - 1.0) < 1e-15);
    CHECK(std::abs(mode_amp(u, {"d", Pol::V, 0}, {"a", Pol::V, 0}) - Complex(0, 1)) < 1e-15);
    CHECK(std::abs(mode_amp(u, {"c", Pol::V, 0}, {"b", Pol::V, 0}) - Complex(0, 1)) < 1e-15);
    CHECK(std::abs(mode_amp(u, {"d", Pol::H, 0}, {"b", Pol::H, 0}) - 1.0) < 1e-15);
  }

  TEST_CASE("compiled benches are unitary for random plate angles") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    for (const char* name : {"fig2_polarization", "fig2_path"}) {
      auto bench = optics::load_preset(name);
      for (int trial = 0; trial < 20; ++trial) {
        for (auto& e : bench.elements) {
          if (e.kind == optics::ElementKind::HWP || e.kind == optics::ElementKind::QWP) e.angle = ang(rng);
          if (e.kind == optics::ElementKind::PHASE) e.phase = ang(rng);
        }
        const auto u = optics::compile(bench);
        CHECK_NOTHROW(u.validate(1e-10));
        const Eigen::MatrixXcd d = u.matrix.adjoint() * u.matrix - Eigen::MatrixXcd::Identity(u.matrix.rows(), u.matrix.cols());
        CHECK(d.cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }

  TEST_CASE("detector polarizer routes the rejected light to a loss port") {
    auto b = single_port({});
    b.detector_map["a"] = {"a", 0.0};
    const auto u = optics::compile(b, 1);
    CHECK(u.kind == core::UnitaryKind::isometry_with_loss);
    CHECK(u.loss_ports.size() == 1);
    CHECK(std::abs(mode_amp(u, {"a", Pol::V, 0}, {"a", Pol::V, 0})) < 1e-15);
    CHECK(std::abs(mode_amp(u, {"a", Pol::H, 0}, {"a", Pol::H, 0}) - 1.0) < 1e-15);
    u.validate();
  }

  TEST_CASE("mirror exchanges two ports") {
    auto b = single_port({{optics::ElementKind::MIRROR, "m", {"a", "b"}}}, {"a", "b"});
    const auto u = optics::compile(b, 1);
    CHECK(std::abs(mode_amp(u, {"b", Pol::V, 0}, {"a", Pol::V, 0}) - 1.0) < 1e-15);
  }

  TEST_CASE("polarization-selective phase acts on one polarization") {
    optics::Element e{optics::ElementKind::PHASE, "ph", {"a"}, 0.0, 0.5};
    e.phase_pol = Pol::V;
    const auto u = optics::compile(single_port({e}), 1);
    CHECK(std::abs(mode_amp(u, {"a", Pol::H, 0}, {"a", Pol::H, 0}) - 1.0) < 1e-15);
    CHECK(std::abs(mode_amp(u, {"a", Pol::V, 0}, {"a", Pol::V, 0}) - std::polar(1.0, 0.5)) < 1e-15);
  }

  TEST_CASE("bench JSON round trip preserves the compiled matrix") {
    const auto bench = optics::load_preset("fig2_path");
    const auto again = optics::bench_from_json(optics::bench_to_json(bench));
    CHECK((optics::compile(bench).matrix - optics::compile(again).matrix).norm() < 1e-12);
    CHECK(again.arms.size() == 2);
    CHECK(again.labeling == core::Labeling::by_polarization);
  }

  TEST_CASE("bench validation errors") {
    CHECK_THROWS_AS(optics::load_preset("no_such_bench"), ConfigError);
    CHECK_THROWS_AS(optics::load_preset("../etc"), ConfigError);
    auto b = single_port({{optics::ElementKind::HWP, "h", {"zz"}}});
    CHECK_THROWS_AS(b.validate(), ConfigError);
    CHECK_THROWS_AS(optics::bench_from_json("{\"name\": 3"), ConfigError);
  }
}
