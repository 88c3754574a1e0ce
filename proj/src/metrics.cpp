#include "dualbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dualbench::metrics {

using core::Complex;

Eigen::Vector4cd bell_target() {
  const double r = 1.0 / std::sqrt(2.0);
  return Eigen::Vector4cd(0.0, r, r, 0.0);
}

double fidelity(const core::DensityMatrix& rho, const Eigen::Vector4cd& target) {
  if ((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("fidelity needs a Hermitian density matrix");
  if (std::abs(target.norm() - 1.0) > 1e-10) throw ValidationError("fidelity target is not normalized");
  const Complex f = target.dot(rho.rho * target);
  return f.real();
}

namespace {

Eigen::Matrix4cd spin_flip(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix2cd y;
  y << 0.0, Complex(0, -1), Complex(0, 1), 0.0;
  Eigen::Matrix4cd yy;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) yy.block<2, 2>(2 * i, 2 * j) = y(i, j) * y;
  return yy * rho.conjugate() * yy;
}

}  // namespace

double concurrence(const core::DensityMatrix& rho) {
  const Eigen::Matrix4cd& r = rho.rho;
  const Eigen::Matrix4cd flipped = spin_flip(r);
  std::array<double, 4> mu{};
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (r + r.adjoint()));
  if (es.eigenvalues().minCoeff() >= -1e-12) {
    const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Matrix4cd sqrt_rho = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    Eigen::Matrix4cd m = sqrt_rho * flipped * sqrt_rho;
    m = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es2(m, Eigen::EigenvaluesOnly);
    for (int i = 0; i < 4; ++i) mu[static_cast<std::size_t>(i)] = es2.eigenvalues()(i);
  } else {
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> ces(r * flipped, false);
    for (int i = 0; i < 4; ++i) mu[static_cast<std::size_t>(i)] = ces.eigenvalues()(i).real();
  }
  for (double& m : mu) {
    if (m < -1e-9) throw NumericalError("negative eigenvalue in concurrence computation");
    m = std::sqrt(std::max(0.0, m));
  }
  std::stable_sort(mu.begin(), mu.end(), std::greater<>());
  return std::clamp(mu[0] - mu[1] - mu[2] - mu[3], 0.0, 1.0);
}

VisibilityFit visibility(std::span<const double> thetas_deg, std::span<const double> values) {
  if (thetas_deg.size() != values.size()) throw ConfigError("scan angle and value counts differ");
  if (thetas_deg.size() < 8) throw ConfigError("visibility fit needs at least 8 points");
  const auto [lo, hi] = std::minmax_element(thetas_deg.begin(), thetas_deg.end());
  if (*hi - *lo < 90.0 - 1e-9) throw ConfigError("scan must span at least one fringe period (90 degrees)");
  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = 4.0 * thetas_deg[static_cast<std::size_t>(i)] * std::numbers::pi / 180.0;
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(t);
    design(i, 2) = std::sin(t);
    y(i) = values[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = design.colPivHouseholderQr().solve(y);
  VisibilityFit fit;
  fit.offset = c(0);
  fit.amplitude = std::hypot(c(1), c(2));
  fit.phase = std::atan2(-c(2), c(1));
  fit.residual = std::sqrt((design * c - y).squaredNorm() / static_cast<double>(n));
  if (!(fit.offset > 0.0)) throw NumericalError("degenerate fringe fit (non-positive offset)");
  fit.visibility = std::clamp(fit.amplitude / fit.offset, 0.0, 1.0);
  // A constant scan leaves only rounding noise in the cosine terms.
  if (fit.amplitude <= 1e-12 * std::abs(fit.offset)) fit.visibility = 0.0;
  return fit;
}

VisibilityFit visibility(const detection::ScanTable& scan, bool use_expected) {
  std::vector<double> t, v;
  for (const auto& row : scan.rows) {
    t.push_back(row.theta_deg);
    v.push_back(use_expected ? row.expected_prob : static_cast<double>(row.counts));
  }
  return visibility(t, v);
}

std::vector<double> predicted_scan(const core::DensityMatrix& rho, detection::ScanBasis basis,
                                   std::span<const double> thetas_deg) {
  const double r = 1.0 / std::sqrt(2.0);
  const Eigen::Vector2cd fixed =
      basis == detection::ScanBasis::Z ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(-r, r);
  std::vector<double> out;
  for (double deg : thetas_deg) {
    const double t = deg * std::numbers::pi / 180.0;
    const Eigen::Vector2cd a(std::cos(2 * t), std::sin(2 * t));
    Eigen::Vector4cd ket;
    ket << a(0) * fixed(0), a(0) * fixed(1), a(1) * fixed(0), a(1) * fixed(1);
    out.push_back(ket.dot(rho.rho * ket).real());
  }
  return out;
}

void MetricsReport::validate() const {
  auto unit = [](double v) { return v >= -1e-9 && v <= 1.0 + 1e-9; };
  if (!unit(fidelity) || !unit(concurrence) || !unit(visibility_z) || !unit(visibility_x))
    throw ValidationError("metrics outside [0, 1]");
  for (const auto& e : {fidelity_error, concurrence_error})
    if (e && e->std < 0.0) throw ValidationError("negative error bar");
}

}  // namespace dualbench::metrics
