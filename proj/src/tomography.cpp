#include "dualbench/tomography.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dualbench::tomography {

using core::Complex;

namespace {

Eigen::Vector2cd named_ket(char c) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (c) {
    case 'H': return {1.0, 0.0};
    case 'V': return {0.0, 1.0};
    case 'D': return {r, r};
    case 'R': return {r, Complex(0.0, -r)};
    case 'L': return {r, Complex(0.0, r)};
    default: throw ConfigError(std::string("unknown tomography ket ") + c);
  }
}

Eigen::Vector4cd joint_ket(const detection::ProjectorSetting& p) {
  Eigen::Vector4cd k;
  k << p.kets[0](0) * p.kets[1](0), p.kets[0](0) * p.kets[1](1), p.kets[0](1) * p.kets[1](0),
      p.kets[0](1) * p.kets[1](1);
  return k;
}

std::array<Eigen::Matrix4cd, 16> pauli_basis() {
  std::array<Eigen::Matrix2cd, 4> s;
  s[0] << 1, 0, 0, 1;
  s[1] << 0, 1, 1, 0;
  s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
  s[3] << 1, 0, 0, -1;
  std::array<Eigen::Matrix4cd, 16> out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Eigen::Matrix4cd m;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = s[static_cast<std::size_t>(a)](i, j) * s[static_cast<std::size_t>(b)];
      out[static_cast<std::size_t>(4 * a + b)] = m;
    }
  return out;
}

const std::array<Eigen::Vector4cd, 16>& catalog_kets() {
  static const auto kets = [] {
    std::array<Eigen::Vector4cd, 16> k;
    for (std::size_t i = 0; i < 16; ++i) k[i] = joint_ket(projector_catalog()[i].projector);
    return k;
  }();
  return kets;
}

}  // namespace

const std::vector<TomographySetting>& projector_catalog() {
  static const std::vector<TomographySetting> catalog = [] {
    const char* labels[16] = {"HH", "HV", "VH", "VV", "RH", "RV", "DV", "DH",
                              "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL"};
    std::vector<TomographySetting> c;
    for (int i = 0; i < 16; ++i) {
      const std::string l = labels[i];
      c.push_back(TomographySetting{i + 1, l, detection::ProjectorSetting{{named_ket(l[0]), named_ket(l[1])}, l}});
    }
    return c;
  }();
  return catalog;
}

const Eigen::Matrix<double, 16, 16>& measurement_matrix() {
  static const Eigen::Matrix<double, 16, 16> b = [] {
    const auto paulis = pauli_basis();
    Eigen::Matrix<double, 16, 16> m;
    for (std::size_t k = 0; k < 16; ++k)
      for (std::size_t j = 0; j < 16; ++j)
        m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
            catalog_kets()[k].dot(paulis[j] * catalog_kets()[k]).real();
    return m;
  }();
  return b;
}

double catalog_condition_number() {
  Eigen::JacobiSVD<Eigen::Matrix<double, 16, 16>> svd(measurement_matrix());
  const auto& s = svd.singularValues();
  return s(0) / s(15);
}

std::vector<Observation> observations(std::span<const detection::CountRecord> records, bool exact) {
  std::vector<Observation> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back(Observation{r.setting_index, exact ? r.expected : static_cast<double>(r.counts),
                              static_cast<double>(r.pairs_emitted)});
  return out;
}

void check_coverage(std::span<const Observation> obs) {
  std::array<int, 17> seen{};
  for (const auto& o : obs) {
    if (o.setting_index < 1 || o.setting_index > 16)
      throw ConfigError("setting index " + std::to_string(o.setting_index) + " outside 1..16");
    if (++seen[static_cast<std::size_t>(o.setting_index)] > 1)
      throw ConfigError("setting " + std::to_string(o.setting_index) + " appears more than once");
    if (!(o.counts >= 0.0) || !std::isfinite(o.counts)) throw ConfigError("counts must be finite and non-negative");
    if (!(o.pairs > 0.0)) throw ConfigError("pairs must be positive");
  }
  for (int k = 1; k <= 16; ++k)
    if (!seen[static_cast<std::size_t>(k)]) throw ConfigError("incomplete setting coverage: missing setting " + std::to_string(k));
}

namespace {

// Counts and pairs ordered by setting index.
struct Data {
  std::array<double, 16> n{};
  std::array<double, 16> pairs{};
  double total = 0.0;
};

Data collect(std::span<const Observation> obs) {
  check_coverage(obs);
  Data d;
  for (const auto& o : obs) {
    d.n[static_cast<std::size_t>(o.setting_index - 1)] = o.counts;
    d.pairs[static_cast<std::size_t>(o.setting_index - 1)] = o.pairs;
  }
  d.total = std::accumulate(d.n.begin(), d.n.end(), 0.0);
  if (!(d.total > 0.0)) throw ConfigError("normalization error: all counts are zero");
  return d;
}

core::DensityMatrix labeled(const Eigen::Matrix4cd& rho, core::Labeling labeling) {
  core::DensityMatrix d;
  d.rho = rho;
  d.basis_labels = core::basis_labels(labeling);
  return d;
}

Eigen::Matrix4cd clip_to_psd(const Eigen::Matrix4cd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (rho + rho.adjoint()));
  const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  Eigen::Matrix4cd out = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  const double tr = out.trace().real();
  if (!(tr > 0.0)) return Eigen::Matrix4cd::Identity() / 4.0;
  return out / tr;
}

}  // namespace

LinearInversion linear_inversion(std::span<const Observation> obs, core::Labeling labeling) {
  const Data d = collect(obs);
  const double norm = d.n[0] + d.n[1] + d.n[2] + d.n[3];
  if (!(norm > 0.0)) throw ConfigError("normalization error: the HH, HV, VH, VV settings recorded no counts");
  static const Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(measurement_matrix());
  if (!lu.isInvertible()) throw NumericalError("tomography catalog is singular");
  Eigen::Matrix<double, 16, 1> p;
  for (int k = 0; k < 16; ++k) p(k) = d.n[static_cast<std::size_t>(k)] / norm;
  const Eigen::Matrix<double, 16, 1> x = lu.solve(p);
  static const auto paulis = pauli_basis();
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (std::size_t j = 0; j < 16; ++j) rho += x(static_cast<Eigen::Index>(j)) * paulis[j];
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  LinearInversion out;
  out.rho = labeled(rho, labeling);
  out.min_eigenvalue = out.rho.min_eigenvalue();
  out.psd = out.min_eigenvalue >= 0.0;
  return out;
}

namespace {

class Likelihood {
 public:
  Likelihood(const Data& data, Normalization norm) : d_(data), norm_(norm) {}

  // Log-likelihood of rho; fills dL/drho when `grad` is given. -inf if a setting
  // with counts has zero probability.
  double operator()(const Eigen::Matrix4cd& rho, Eigen::Matrix4cd* grad = nullptr, double* efficiency = nullptr) const {
    const auto& kets = catalog_kets();
    std::array<double, 16> p{};
    double expected_total = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
      p[k] = kets[k].dot(rho * kets[k]).real();
      expected_total += d_.pairs[k] * p[k];
    }
    double eta = 1.0;
    if (norm_ == Normalization::fitted) {
      if (!(expected_total > 0.0)) return -std::numeric_limits<double>::infinity();
      eta = d_.total / expected_total;
    }
    if (efficiency) *efficiency = eta;
    double ll = -eta * expected_total;
    for (std::size_t k = 0; k < 16; ++k) {
      if (d_.n[k] == 0.0) continue;
      if (!(p[k] > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += d_.n[k] * std::log(eta * d_.pairs[k] * p[k]);
    }
    if (grad) {
      grad->setZero();
      for (std::size_t k = 0; k < 16; ++k) {
        const double w = (d_.n[k] > 0.0 ? d_.n[k] / p[k] : 0.0) - eta * d_.pairs[k];
        *grad += w * (kets[k] * kets[k].adjoint());
      }
    }
    return ll;
  }

 private:
  const Data& d_;
  Normalization norm_;
};

constexpr int kParams = 32;
using Params = Eigen::Matrix<double, kParams, 1>;

// Row-major real parts followed by row-major imaginary parts of a general 4x4 T.
Eigen::Matrix4cd to_t(const Params& th) {
  Eigen::Matrix4cd t;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t(i, j) = Complex(th(i * 4 + j), th(16 + i * 4 + j));
  return t;
}

Params from_t(const Eigen::Matrix4cd& t) {
  Params th;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      th(i * 4 + j) = t(i, j).real();
      th(16 + i * 4 + j) = t(i, j).imag();
    }
  return th;
}

Eigen::Matrix4cd to_rho(const Params& th) {
  const Eigen::Matrix4cd t = to_t(th);
  Eigen::Matrix4cd a = t.adjoint() * t;
  return a / a.trace().real();
}

// Positive square root of rho.
Params initial_params(const Eigen::Matrix4cd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
    throw NumericalError("initial state is not positive definite");
  const Eigen::Matrix4cd root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  Params th = from_t(root);
  return th / th.norm();
}

struct Objective {
  const Likelihood& like;
  double scale;

  // f = -L / scale and its gradient in the T parameters.
  double operator()(const Params& th, Params* grad) const {
    const Eigen::Matrix4cd t = to_t(th);
    const double tr = th.squaredNorm();
    const Eigen::Matrix4cd rho = t.adjoint() * t / tr;
    Eigen::Matrix4cd g;
    const double ll = like(rho, grad ? &g : nullptr);
    if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
    if (grad) {
      const Complex trace_term = (g * rho).trace();
      const Eigen::Matrix4cd gp = g - trace_term.real() * Eigen::Matrix4cd::Identity();
      const Eigen::Matrix4cd k = gp * t.adjoint();
      Params out;
      for (int i = 0; i < 4; ++i)
        for (int jj = 0; jj < 4; ++jj) {
          out(i * 4 + jj) = 2.0 * k(jj, i).real() / tr;
          out(16 + i * 4 + jj) = -2.0 * k(jj, i).imag() / tr;
        }
      *grad = -out / scale;
    }
    return -ll / scale;
  }
};

}  // namespace

double log_likelihood(const core::DensityMatrix& rho, std::span<const Observation> obs, Normalization normalization) {
  const Data d = collect(obs);
  return Likelihood(d, normalization)(rho.rho);
}

constexpr int kQuasiNewtonSteps = 100;
constexpr double kFdStep = 1e-7;

// Central-difference Hessian of the analytic gradient.
Eigen::Matrix<double, kParams, kParams> fd_hessian(const Objective& f, const Params& th) {
  Eigen::Matrix<double, kParams, kParams> h;
  for (int j = 0; j < kParams; ++j) {
    Params up = th, down = th, gu, gd;
    up(j) += kFdStep;
    down(j) -= kFdStep;
    f(up, &gu);
    f(down, &gd);
    h.col(j) = (gu - gd) / (2.0 * kFdStep);
  }
  return 0.5 * (h + h.transpose());
}

MLEResult mle_reconstruct(std::span<const Observation> obs, const MLEOptions& options, core::Labeling labeling) {
  const Data d = collect(obs);
  const Likelihood like(d, options.normalization);
  const Objective f{like, std::max(1.0, d.total)};

  const auto lin = linear_inversion(obs, labeling);
  const Eigen::Matrix4cd start = 0.999 * clip_to_psd(lin.rho.rho) + 0.001 * Eigen::Matrix4cd::Identity() / 4.0;
  Params th = initial_params(start);
  Params g;
  double fx = f(th, &g);
  if (!std::isfinite(fx)) throw NumericalError("likelihood is undefined at the starting point");

  MLEResult result;
  result.initial_log_likelihood = -fx * f.scale;
  auto finish = [&](int iterations) {
    result.rho = labeled(to_rho(th), labeling);
    like(result.rho.rho, nullptr, &result.efficiency);
    result.log_likelihood = -fx * f.scale;
    result.iterations = iterations;
    return result;
  };
  // f is invariant under rescaling of th; keep the normalized point unless rounding makes it worse
  auto accept = [&](const Params& th_new, double f_new) {
    Params g_unit;
    const Params unit = th_new / th_new.norm();
    const double f_unit = f(unit, &g_unit);
    if (f_unit <= f_new) {
      th = unit;
      fx = f_unit;
      g = g_unit;
    } else {
      th = th_new;
      fx = f(th, &g);
    }
    result.likelihood_trace.push_back(-fx * f.scale);
  };
  auto converged = [&](double gain) {
    const double ll = std::abs(fx * f.scale);
    return (gain <= options.tolerance * (1.0 + ll) && g.lpNorm<Eigen::Infinity>() <= 1e-9) ||
           g.lpNorm<Eigen::Infinity>() <= 1e-14;
  };

  // BFGS with a backtracking line search.
  Eigen::Matrix<double, kParams, kParams> h = Eigen::Matrix<double, kParams, kParams>::Identity();
  bool fresh = true;
  int it = 1;
  for (; it <= std::min(options.max_iterations, kQuasiNewtonSteps); ++it) {
    Params dir = -h * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      fresh = true;
      dir = -g;
      slope = -g.squaredNorm();
    }
    if (slope == 0.0) return finish(it);

    double step = 1.0;
    bool found = false;
    Params th_new;
    double f_new = fx;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      th_new = th + step * dir;
      f_new = f(th_new, nullptr);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope && f_new <= fx) {
        found = true;
        break;
      }
    }
    if (!found) {
      // No representable improvement along steepest descent: at the precision floor.
      if (fresh) return finish(it);
      h.setIdentity();
      fresh = true;
      continue;
    }
    const Params th_old = th, g_old = g;
    const double f_old = fx;
    accept(th_new, f_new);
    const Params s = th - th_old;
    const Params y = g - g_old;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) h *= sy / y.squaredNorm();
      const double rho_k = 1.0 / sy;
      const auto eye = Eigen::Matrix<double, kParams, kParams>::Identity();
      h = (eye - rho_k * s * y.transpose()) * h * (eye - rho_k * y * s.transpose()) + rho_k * s * s.transpose();
      fresh = false;
    }
    if (converged((f_old - fx) * f.scale)) return finish(it);
  }

  // Levenberg-damped Newton steps for ill-conditioned (typically rank-deficient) optima.
  double lambda = 1e-6;
  for (; it <= options.max_iterations; ++it) {
    const auto hess = fd_hessian(f, th);
    const double diag = std::max(hess.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    bool moved = false;
    while (lambda <= 1e12) {
      Eigen::Matrix<double, kParams, kParams> damped = hess;
      damped.diagonal().array() += lambda * diag;
      const Params th_new = th + damped.ldlt().solve(-g);
      const double f_new = f(th_new, nullptr);
      if (std::isfinite(f_new) && f_new < fx) {
        const double f_old = fx;
        accept(th_new, f_new);
        lambda = std::max(lambda / 10.0, 1e-12);
        moved = true;
        if (converged((f_old - fx) * f.scale)) return finish(it);
        break;
      }
      lambda *= 10.0;
    }
    // No damping gives a representable improvement: at the precision floor.
    if (!moved) return finish(it);
  }
  finish(options.max_iterations);
  throw ConvergenceError("MLE did not converge within " + std::to_string(options.max_iterations) + " iterations",
                         result);
}

const char* to_string(Derived d) {
  switch (d) {
    case Derived::fidelity: return "fidelity";
    case Derived::concurrence: return "concurrence";
    case Derived::x_visibility: return "x_visibility";
  }
  return "?";
}

std::map<Derived, metrics::ErrorBar> mc_error_bars(std::span<const Observation> obs, int n_resamples,
                                                   std::uint64_t seed, std::span<const Derived> derived,
                                                   const MLEOptions& options, const Eigen::Vector4cd& target) {
  if (n_resamples < 100) throw ConfigError("mc_error_bars needs at least 100 resamples");
  check_coverage(obs);
  const auto grid = detection::default_scan_grid();
  std::map<Derived, std::vector<double>> samples;
  int failures = 0;
  for (int r = 0; r < n_resamples; ++r) {
    boost::random::mt19937_64 gen(detection::substream_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<Observation> resampled(obs.begin(), obs.end());
    std::sort(resampled.begin(), resampled.end(),
              [](const Observation& a, const Observation& b) { return a.setting_index < b.setting_index; });
    for (auto& o : resampled) {
      if (o.counts > 0.0) {
        boost::random::poisson_distribution<std::int64_t, double> dist(o.counts);
        o.counts = static_cast<double>(dist(gen));
      }
    }
    try {
      const auto fit = mle_reconstruct(resampled, options);
      for (Derived q : derived) {
        double v = 0.0;
        switch (q) {
          case Derived::fidelity: v = metrics::fidelity(fit.rho, target); break;
          case Derived::concurrence: v = metrics::concurrence(fit.rho); break;
          case Derived::x_visibility:
            v = metrics::visibility(grid, metrics::predicted_scan(fit.rho, detection::ScanBasis::X, grid)).visibility;
            break;
        }
        samples[q].push_back(v);
      }
    } catch (const std::exception&) {
      ++failures;
    }
  }
  std::map<Derived, metrics::ErrorBar> out;
  for (Derived q : derived) {
    const auto& v = samples[q];
    metrics::ErrorBar e;
    e.used = static_cast<int>(v.size());
    e.failures = failures;
    if (!v.empty()) {
      e.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - e.mean) * (x - e.mean);
      e.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    }
    out[q] = e;
  }
  return out;
}

metrics::ErrorBar mc_error_bars(std::span<const Observation> obs, int n_resamples, std::uint64_t seed,
                                Derived derived, const MLEOptions& options, const Eigen::Vector4cd& target) {
  const Derived one[1] = {derived};
  return mc_error_bars(obs, n_resamples, seed, one, options, target).at(derived);
}

}  // namespace dualbench::tomography
