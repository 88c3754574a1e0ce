#pragma once

#include <Eigen/Dense>

#include <array>
#include <compare>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dualbench/errors.hpp"

namespace dualbench::core {

using Complex = std::complex<double>;

enum class Pol : int { H = 0, V = 1 };

const char* to_string(Pol p);

/// One bosonic mode: spatial port, polarization, internal (spectral/temporal) index.
/// Ordering is lexicographic on (spatial, pol, internal).
struct Mode {
  std::string spatial;
  Pol pol = Pol::H;
  int internal = 0;

  auto operator<=>(const Mode&) const = default;
  bool operator==(const Mode&) const = default;
};

std::string to_string(const Mode& m);

/// Indexed set of modes: every (port, pol, internal) triple over the declared ports.
class ModeSpace {
 public:
  ModeSpace() = default;
  ModeSpace(std::vector<std::string> ports, int internal_dim);

  std::size_t size() const { return modes_.size(); }
  int internal_dim() const { return internal_dim_; }
  const std::vector<std::string>& ports() const { return ports_; }
  const std::vector<Mode>& modes() const { return modes_; }
  const Mode& mode(std::size_t i) const { return modes_[i]; }

  bool contains(const Mode& m) const { return index_.count(m) != 0; }
  bool has_port(const std::string& port) const;
  /// Throws ConfigError for modes outside the space.
  std::size_t index(const Mode& m) const;

 private:
  std::vector<std::string> ports_;
  int internal_dim_ = 1;
  std::vector<Mode> modes_;
  std::map<Mode, std::size_t> index_;
};

/// A pure two-photon state (optionally a weighted member of an ensemble).
///
/// Amplitudes are stored against canonical unordered mode pairs (first <= second).
/// For distinct modes the basis ket is a†_m a†_n |0>, which is normalized. For the
/// double-occupancy key (m, m) the basis ket is the normalized Fock ket |2_m> =
/// (a†_m)^2 |0> / sqrt(2). With this convention the state norm is the plain sum of
/// squared magnitudes and a coincidence or bunching probability is |amplitude|^2.
class TwoPhotonState {
 public:
  using Pair = std::pair<Mode, Mode>;

  TwoPhotonState() = default;
  explicit TwoPhotonState(double weight) : weight_(weight) {}

  /// Adds `amp` to the coefficient of the pair {a, b}.
  void add(const Mode& a, const Mode& b, Complex amp);
  Complex amplitude(const Mode& a, const Mode& b) const;

  const std::map<Pair, Complex>& terms() const { return terms_; }
  double weight() const { return weight_; }
  void set_weight(double w) { weight_ = w; }

  double norm_squared() const;
  void normalize();
  /// Drops amplitudes with magnitude below `threshold`.
  void prune(double threshold = 1e-14);

  static Pair canonical(const Mode& a, const Mode& b);

 private:
  std::map<Pair, Complex> terms_;
  double weight_ = 1.0;
};

/// Weighted ensemble of pure two-photon states. Weights sum to one.
using Ensemble = std::vector<TwoPhotonState>;

void validate(const TwoPhotonState& s, double tol = 1e-12);
void validate(const Ensemble& e, double tol = 1e-12);

enum class UnitaryKind { unitary, isometry_with_loss };

/// Linear-optics transformation a†_m -> sum_n matrix(n, m) a†_n over a ModeSpace.
struct ModeUnitary {
  ModeSpace space;
  Eigen::MatrixXcd matrix;
  UnitaryKind kind = UnitaryKind::unitary;
  /// Ports whose amplitude counts as lost (polarizer rejects).
  std::vector<std::string> loss_ports;

  static ModeUnitary identity(ModeSpace space);
  ModeUnitary adjoint() const;
  /// Throws ValidationError if U†U deviates from identity by more than `tol`
  /// (max-abs entry) on non-loss modes.
  void validate(double tol = 1e-10) const;
};

TwoPhotonState apply_unitary(const TwoPhotonState& state, const ModeUnitary& u);
Ensemble apply_unitary(const Ensemble& state, const ModeUnitary& u);

/// Joint amplitude for detecting one photon in `out1` and one in `out2`
/// (the stored canonical coefficient; for out1 == out2 it is the |2> coefficient).
Complex coincidence_amplitude(const TwoPhotonState& state, const Mode& out1, const Mode& out2);
/// Same, but rejects modes outside `space` with ConfigError.
Complex coincidence_amplitude(const TwoPhotonState& state, const ModeSpace& space, const Mode& out1,
                              const Mode& out2);

/// Which variable separates the photons. by_path: photons are told apart by the
/// source ports S and I, polarization is the qubit. by_polarization: photons are
/// told apart by H and V, the source port is the qubit (S = 0, I = 1).
enum class Labeling { by_path, by_polarization };

const char* to_string(Labeling l);
Labeling labeling_from_string(const std::string& s);

inline constexpr const char* kSignalPort = "S";
inline constexpr const char* kIdlerPort = "I";

/// Two-qubit density matrix with the labels of its computational basis.
struct DensityMatrix {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  std::array<std::string, 4> basis_labels{"00", "01", "10", "11"};

  /// Hermiticity and unit trace within `tol`, eigenvalues >= -eig_tol.
  void validate(double tol = 1e-10, double eig_tol = 1e-9) const;
  double min_eigenvalue() const;
};

std::array<std::string, 4> basis_labels(Labeling l);

/// Partial trace over the internal index after splitting the photons by `labeling`.
/// Throws NotReducibleError if any term does not carry exactly one photon per label value.
DensityMatrix reduce_to_qubits(const TwoPhotonState& state, Labeling labeling);

/// Ensemble version. With `postselect` members that cannot be split are dropped and the
/// remaining weight renormalized (this is what a coincidence measurement sees);
/// otherwise they raise NotReducibleError.
DensityMatrix reduce_to_qubits(const Ensemble& state, Labeling labeling, bool postselect = false);

}  // namespace dualbench::core
