#include "dualbench/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace dualbench::core {

const char* to_string(Pol p) { return p == Pol::H ? "H" : "V"; }

std::string to_string(const Mode& m) {
  std::ostringstream os;
  os << "(" << m.spatial << "," << to_string(m.pol) << "," << m.internal << ")";
  return os.str();
}

ModeSpace::ModeSpace(std::vector<std::string> ports, int internal_dim)
    : ports_(std::move(ports)), internal_dim_(internal_dim) {
  if (internal_dim_ < 1) throw ConfigError("internal dimension must be >= 1");
  std::vector<std::string> sorted = ports_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("duplicate port in mode space");
  for (const auto& p : sorted)
    for (Pol pol : {Pol::H, Pol::V})
      for (int k = 0; k < internal_dim_; ++k) modes_.push_back(Mode{p, pol, k});
  for (std::size_t i = 0; i < modes_.size(); ++i) index_.emplace(modes_[i], i);
}

bool ModeSpace::has_port(const std::string& port) const {
  return std::find(ports_.begin(), ports_.end(), port) != ports_.end();
}

std::size_t ModeSpace::index(const Mode& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) throw ConfigError("unknown mode " + to_string(m));
  return it->second;
}

TwoPhotonState::Pair TwoPhotonState::canonical(const Mode& a, const Mode& b) {
  return a <= b ? Pair{a, b} : Pair{b, a};
}

void TwoPhotonState::add(const Mode& a, const Mode& b, Complex amp) {
  terms_[canonical(a, b)] += amp;
}

Complex TwoPhotonState::amplitude(const Mode& a, const Mode& b) const {
  auto it = terms_.find(canonical(a, b));
  return it == terms_.end() ? Complex{} : it->second;
}

double TwoPhotonState::norm_squared() const {
  double n = 0.0;
  for (const auto& [pair, amp] : terms_) n += std::norm(amp);
  return n;
}

void TwoPhotonState::normalize() {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw ValidationError("cannot normalize the zero state");
  for (auto& [pair, amp] : terms_) amp /= n;
}

void TwoPhotonState::prune(double threshold) {
  std::erase_if(terms_, [threshold](const auto& kv) { return std::abs(kv.second) < threshold; });
}

void validate(const TwoPhotonState& s, double tol) {
  for (const auto& [pair, amp] : s.terms()) {
    if (pair.first.internal < 0 || pair.second.internal < 0)
      throw ValidationError("negative internal index");
    if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag()))
      throw ValidationError("non-finite amplitude");
  }
  if (std::abs(s.norm_squared() - 1.0) > tol) throw ValidationError("two-photon state is not normalized");
  if (s.weight() < 0.0 || s.weight() > 1.0) throw ValidationError("mixture weight outside [0,1]");
}

void validate(const Ensemble& e, double tol) {
  if (e.empty()) throw ValidationError("empty ensemble");
  double total = 0.0;
  for (const auto& s : e) {
    validate(s, tol);
    total += s.weight();
  }
  if (std::abs(total - 1.0) > tol) throw ValidationError("mixture weights do not sum to one");
}

ModeUnitary ModeUnitary::identity(ModeSpace space) {
  ModeUnitary u;
  const auto n = static_cast<Eigen::Index>(space.size());
  u.space = std::move(space);
  u.matrix = Eigen::MatrixXcd::Identity(n, n);
  return u;
}

ModeUnitary ModeUnitary::adjoint() const {
  ModeUnitary u = *this;
  u.matrix = matrix.adjoint();
  return u;
}

void ModeUnitary::validate(double tol) const {
  const auto n = static_cast<Eigen::Index>(space.size());
  if (matrix.rows() != n || matrix.cols() != n) throw ValidationError("mode matrix has wrong shape");
  const Eigen::MatrixXcd g = matrix.adjoint() * matrix;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool lossy_i = std::find(loss_ports.begin(), loss_ports.end(),
                                   space.mode(static_cast<std::size_t>(i)).spatial) != loss_ports.end();
    if (lossy_i) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool lossy_j = std::find(loss_ports.begin(), loss_ports.end(),
                                     space.mode(static_cast<std::size_t>(j)).spatial) != loss_ports.end();
      if (lossy_j) continue;
      const Complex expected = (i == j) ? Complex{1.0} : Complex{};
      if (std::abs(g(i, j) - expected) > tol)
        throw ValidationError("mode matrix is not unitary (U^dagger U deviates by " +
                              std::to_string(std::abs(g(i, j) - expected)) + ")");
    }
  }
}

TwoPhotonState apply_unitary(const TwoPhotonState& state, const ModeUnitary& u) {
  const auto& space = u.space;
  const auto n = static_cast<Eigen::Index>(space.size());
  // |psi> = sum_{mn} A_mn a†_m a†_n |0> with A symmetric; evolution sends A -> U A U^T.
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (const auto& [pair, amp] : state.terms()) {
    const auto a = static_cast<Eigen::Index>(space.index(pair.first));
    const auto b = static_cast<Eigen::Index>(space.index(pair.second));
    if (a == b) {
      out.noalias() += (amp * inv_sqrt2) * u.matrix.col(a) * u.matrix.col(a).transpose();
    } else {
      // A_ab = A_ba = c/2, both halves collected into one symmetrized outer product.
      const Eigen::VectorXcd ca = u.matrix.col(a);
      const Eigen::VectorXcd cb = u.matrix.col(b);
      out.noalias() += (amp * 0.5) * (ca * cb.transpose() + cb * ca.transpose());
    }
  }
  TwoPhotonState result(state.weight());
  const double sqrt2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex diag = out(i, i) * sqrt2;
    if (std::abs(diag) >= 1e-14)
      result.add(space.mode(static_cast<std::size_t>(i)), space.mode(static_cast<std::size_t>(i)), diag);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Complex c = out(i, j) * 2.0;
      if (std::abs(c) >= 1e-14)
        result.add(space.mode(static_cast<std::size_t>(i)), space.mode(static_cast<std::size_t>(j)), c);
    }
  }
  return result;
}

Ensemble apply_unitary(const Ensemble& state, const ModeUnitary& u) {
  Ensemble out;
  out.reserve(state.size());
  for (const auto& s : state) out.push_back(apply_unitary(s, u));
  return out;
}

Complex coincidence_amplitude(const TwoPhotonState& state, const Mode& out1, const Mode& out2) {
  return state.amplitude(out1, out2);
}

Complex coincidence_amplitude(const TwoPhotonState& state, const ModeSpace& space, const Mode& out1,
                              const Mode& out2) {
  space.index(out1);
  space.index(out2);
  return state.amplitude(out1, out2);
}

const char* to_string(Labeling l) { return l == Labeling::by_path ? "by_path" : "by_polarization"; }

Labeling labeling_from_string(const std::string& s) {
  if (s == "by_path") return Labeling::by_path;
  if (s == "by_polarization") return Labeling::by_polarization;
  throw ConfigError("unknown labeling '" + s + "'");
}

std::array<std::string, 4> basis_labels(Labeling l) {
  if (l == Labeling::by_path) return {"HH", "HV", "VH", "VV"};
  return {"SS", "SI", "IS", "II"};
}

void DensityMatrix::validate(double tol, double eig_tol) const {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex{1.0}) > tol) throw ValidationError("density matrix trace is not one");
  if (min_eigenvalue() < -eig_tol) throw ValidationError("density matrix has a negative eigenvalue");
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

struct LabeledPhoton {
  int qubit;
  int internal;
};

// Returns (first, second) photons in qubit order, or nullopt when the pair cannot be split.
std::optional<std::pair<LabeledPhoton, LabeledPhoton>> split_pair(const Mode& a, const Mode& b,
                                                                  Labeling labeling) {
  if (a == b) return std::nullopt;
  if (labeling == Labeling::by_path) {
    auto label = [](const Mode& m) {
      if (m.spatial == kSignalPort) return 0;
      if (m.spatial == kIdlerPort) return 1;
      return -1;
    };
    const int la = label(a), lb = label(b);
    if (la < 0 || lb < 0 || la == lb) return std::nullopt;
    LabeledPhoton pa{static_cast<int>(a.pol), a.internal};
    LabeledPhoton pb{static_cast<int>(b.pol), b.internal};
    return la == 0 ? std::make_pair(pa, pb) : std::make_pair(pb, pa);
  }
  auto qubit = [](const Mode& m) {
    if (m.spatial == kSignalPort) return 0;
    if (m.spatial == kIdlerPort) return 1;
    return -1;
  };
  const int qa = qubit(a), qb = qubit(b);
  if (qa < 0 || qb < 0 || a.pol == b.pol) return std::nullopt;
  LabeledPhoton pa{qa, a.internal};
  LabeledPhoton pb{qb, b.internal};
  return a.pol == Pol::H ? std::make_pair(pa, pb) : std::make_pair(pb, pa);
}

int internal_extent(const TwoPhotonState& s) {
  int d = 1;
  for (const auto& [pair, amp] : s.terms()) d = std::max({d, pair.first.internal + 1, pair.second.internal + 1});
  return d;
}

// Unnormalized labeled wavefunction: rows are the 4 qubit states, columns the internal pairs.
// Returns the weight of terms that could not be split.
double labeled_wavefunction(const TwoPhotonState& s, Labeling labeling, int d, Eigen::MatrixXcd& psi) {
  psi = Eigen::MatrixXcd::Zero(4, d * d);
  double dropped = 0.0;
  for (const auto& [pair, amp] : s.terms()) {
    auto split = split_pair(pair.first, pair.second, labeling);
    if (!split) {
      dropped += std::norm(amp);
      continue;
    }
    const auto& [p1, p2] = *split;
    psi(p1.qubit * 2 + p2.qubit, p1.internal * d + p2.internal) += amp;
  }
  return dropped;
}

}  // namespace

DensityMatrix reduce_to_qubits(const TwoPhotonState& state, Labeling labeling) {
  const int d = internal_extent(state);
  Eigen::MatrixXcd psi;
  if (labeled_wavefunction(state, labeling, d, psi) > 0.0)
    throw NotReducibleError(std::string("two photons share a label value under ") + to_string(labeling));
  DensityMatrix out;
  out.rho = psi * psi.adjoint();
  const double tr = out.rho.trace().real();
  if (tr <= 0.0) throw NotReducibleError("state has no amplitude to reduce");
  out.rho /= tr;
  out.basis_labels = basis_labels(labeling);
  return out;
}

DensityMatrix reduce_to_qubits(const Ensemble& state, Labeling labeling, bool postselect) {
  int d = 1;
  for (const auto& s : state) d = std::max(d, internal_extent(s));
  DensityMatrix out;
  for (const auto& s : state) {
    Eigen::MatrixXcd psi;
    if (labeled_wavefunction(s, labeling, d, psi) > 0.0 && !postselect)
      throw NotReducibleError(std::string("two photons share a label value under ") + to_string(labeling));
    out.rho += s.weight() * (psi * psi.adjoint());
  }
  const double tr = out.rho.trace().real();
  if (tr <= 0.0) throw NotReducibleError("no ensemble member survives the labeling");
  out.rho /= tr;
  out.basis_labels = basis_labels(labeling);
  return out;
}

}  // namespace dualbench::core
