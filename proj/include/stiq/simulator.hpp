#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stiq/rng.hpp"

namespace stiq {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 16;

/// Dense amplitude vector over 2^n computational basis states.
/// Qubit q corresponds to bit q of the basis index (qubit 0 is the least
/// significant bit).
class StateVector {
 public:
  /// |0...0>.
  explicit StateVector(int n_qubits);
  StateVector(int n_qubits, std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::span<Complex> amplitudes() { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm_squared() const;

 private:
  int n_qubits_;
  std::vector<Complex> amplitudes_;
};

enum class GateKind { RX, RY, RZ, H, X, CNOT, CRX, CRY, CRZ };

bool is_rotation(GateKind kind);
bool is_controlled(GateKind kind);
std::string to_string(GateKind kind);

struct FixedAngle {
  double radians;
  friend bool operator==(const FixedAngle&, const FixedAngle&) = default;
};
struct ParamSlot {
  int index;
  friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};
struct FeatureSlot {
  int index;
  friend bool operator==(const FeatureSlot&, const FeatureSlot&) = default;
};
using AngleSource = std::variant<std::monostate, FixedAngle, ParamSlot, FeatureSlot>;

struct GateOp {
  GateKind kind;
  int target;
  std::optional<int> control;
  AngleSource angle;

  static GateOp single(GateKind kind, int target, AngleSource angle = {});
  static GateOp controlled(GateKind kind, int control, int target, AngleSource angle = {});

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

struct CircuitTemplate {
  int n_qubits = 0;
  std::vector<GateOp> ops;
  int n_params = 0;
  int n_features = 0;

  /// Throws std::invalid_argument when an op is malformed, a qubit index is
  /// out of range, or a Param/Feature slot in range is never used.
  void validate() const;
};

/// Applies one gate in place. `angle` must be present (and finite) exactly for
/// rotation kinds.
void apply_gate_inplace(StateVector& state, const GateOp& op, std::optional<double> angle);

/// Value-semantics wrapper around apply_gate_inplace.
StateVector apply_gate(StateVector state, const GateOp& op, std::optional<double> angle);

/// Applies a Pauli X, Y or Z ('X', 'Y', 'Z') to one qubit. 'I' is a no-op.
void apply_pauli(StateVector& state, int qubit, char pauli);

/// Applies an arbitrary 2x2 matrix (row-major) to one qubit.
void apply_matrix(StateVector& state, int qubit, const Complex (&m)[2][2]);

/// Angle of `op` resolved against parameter and feature vectors.
std::optional<double> resolve_angle(const GateOp& op, std::span<const double> params,
                                    std::span<const double> features);

/// Executes every op of `circuit` on |0...0>.
StateVector run_circuit(const CircuitTemplate& circuit, std::span<const double> params,
                        std::span<const double> features);

/// Exact per-qubit <Z>. Throws if the state is not normalized within 1e-8.
std::vector<double> expectation_z_all(const StateVector& state);

/// Per-qubit mean of +/-1 outcomes over `shots` basis-state samples.
std::vector<double> sample_expectation_z(const StateVector& state, int shots, Rng& rng);

/// Cumulative distribution of |amplitude|^2, used for basis-state sampling.
std::vector<double> cumulative_probabilities(const StateVector& state);

/// Draws one basis index from a cumulative distribution.
std::uint64_t sample_basis_state(std::span<const double> cdf, Rng& rng);

}  // namespace stiq
