#include "stiq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stiq {

namespace {

void check_qubit_count(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit count " + std::to_string(n_qubits) +
                                " outside [1, " + std::to_string(kMaxQubits) + "]");
  }
}

void check_qubit(int qubit, int n_qubits, const char* role) {
  if (qubit < 0 || qubit >= n_qubits) {
    throw std::invalid_argument(std::string(role) + " qubit " + std::to_string(qubit) +
                                " out of range for " + std::to_string(n_qubits) + " qubits");
  }
}

// Applies m to the target qubit on every basis pair whose control bits match.
void apply_2x2(std::span<Complex> amps, std::size_t target_mask, std::size_t control_mask,
               const Complex (&m)[2][2]) {
  const std::size_t dim = amps.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & target_mask) != 0 || (i & control_mask) != control_mask) continue;
    const std::size_t j = i | target_mask;
    const Complex a0 = amps[i];
    const Complex a1 = amps[j];
    amps[i] = m[0][0] * a0 + m[0][1] * a1;
    amps[j] = m[1][0] * a0 + m[1][1] * a1;
  }
}

void rotation_matrix(GateKind kind, double theta, Complex (&m)[2][2]) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  switch (kind) {
    case GateKind::RX:
    case GateKind::CRX:
      m[0][0] = {c, 0.0};
      m[0][1] = {0.0, -s};
      m[1][0] = {0.0, -s};
      m[1][1] = {c, 0.0};
      return;
    case GateKind::RY:
    case GateKind::CRY:
      m[0][0] = {c, 0.0};
      m[0][1] = {-s, 0.0};
      m[1][0] = {s, 0.0};
      m[1][1] = {c, 0.0};
      return;
    case GateKind::RZ:
    case GateKind::CRZ:
      m[0][0] = {c, -s};
      m[0][1] = {0.0, 0.0};
      m[1][0] = {0.0, 0.0};
      m[1][1] = {c, s};
      return;
    default:
      throw std::logic_error("rotation_matrix: not a rotation");
  }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  check_qubit_count(n_qubits);
  amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amplitudes_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_qubit_count(n_qubits);
  if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
    throw std::invalid_argument("amplitude count does not equal 2^n_qubits");
  }
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return total;
}

bool is_rotation(GateKind kind) {
  switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CRX:
    case GateKind::CRY:
    case GateKind::CRZ:
      return true;
    default:
      return false;
  }
}

bool is_controlled(GateKind kind) {
  switch (kind) {
    case GateKind::CNOT:
    case GateKind::CRX:
    case GateKind::CRY:
    case GateKind::CRZ:
      return true;
    default:
      return false;
  }
}

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CRX: return "CRX";
    case GateKind::CRY: return "CRY";
    case GateKind::CRZ: return "CRZ";
  }
  return "?";
}

GateOp GateOp::single(GateKind kind, int target, AngleSource angle) {
  return GateOp{kind, target, std::nullopt, angle};
}

GateOp GateOp::controlled(GateKind kind, int control, int target, AngleSource angle) {
  return GateOp{kind, target, control, angle};
}

void CircuitTemplate::validate() const {
  check_qubit_count(n_qubits);
  if (n_params < 0 || n_features < 0) throw std::invalid_argument("negative slot count");
  std::vector<bool> param_used(static_cast<std::size_t>(n_params), false);
  std::vector<bool> feature_used(static_cast<std::size_t>(n_features), false);
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const GateOp& op = ops[k];
    check_qubit(op.target, n_qubits, "target");
    if (is_controlled(op.kind) != op.control.has_value()) {
      throw std::invalid_argument("op " + std::to_string(k) + " (" + to_string(op.kind) +
                                  "): control presence does not match gate kind");
    }
    if (op.control) {
      check_qubit(*op.control, n_qubits, "control");
      if (*op.control == op.target) {
        throw std::invalid_argument("op " + std::to_string(k) + ": control equals target");
      }
    }
    const bool has_angle = !std::holds_alternative<std::monostate>(op.angle);
    if (is_rotation(op.kind) != has_angle) {
      throw std::invalid_argument("op " + std::to_string(k) + " (" + to_string(op.kind) +
                                  "): angle presence does not match gate kind");
    }
    if (const auto* p = std::get_if<ParamSlot>(&op.angle)) {
      if (p->index < 0 || p->index >= n_params) {
        throw std::invalid_argument("op " + std::to_string(k) + ": param slot out of range");
      }
      param_used[static_cast<std::size_t>(p->index)] = true;
    } else if (const auto* f = std::get_if<FeatureSlot>(&op.angle)) {
      if (f->index < 0 || f->index >= n_features) {
        throw std::invalid_argument("op " + std::to_string(k) + ": feature slot out of range");
      }
      feature_used[static_cast<std::size_t>(f->index)] = true;
    }
  }
  if (std::find(param_used.begin(), param_used.end(), false) != param_used.end()) {
    throw std::invalid_argument("circuit leaves a parameter slot unused");
  }
  if (std::find(feature_used.begin(), feature_used.end(), false) != feature_used.end()) {
    throw std::invalid_argument("circuit leaves a feature slot unused");
  }
}

void apply_gate_inplace(StateVector& state, const GateOp& op, std::optional<double> angle) {
  const int n = state.n_qubits();
  check_qubit(op.target, n, "target");
  if (is_controlled(op.kind) != op.control.has_value()) {
    throw std::invalid_argument(to_string(op.kind) + ": control presence does not match kind");
  }
  std::size_t control_mask = 0;
  if (op.control) {
    check_qubit(*op.control, n, "control");
    if (*op.control == op.target) throw std::invalid_argument("control equals target");
    control_mask = std::size_t{1} << *op.control;
  }
  const std::size_t target_mask = std::size_t{1} << op.target;
  auto amps = state.amplitudes();

  if (is_rotation(op.kind)) {
    if (!angle) throw std::invalid_argument(to_string(op.kind) + " requires an angle");
    if (!std::isfinite(*angle)) throw std::invalid_argument("non-finite rotation angle");
    Complex m[2][2];
    rotation_matrix(op.kind, *angle, m);
    apply_2x2(amps, target_mask, control_mask, m);
    return;
  }
  if (angle) throw std::invalid_argument(to_string(op.kind) + " takes no angle");
  switch (op.kind) {
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      const Complex m[2][2] = {{r, r}, {r, -r}};
      apply_2x2(amps, target_mask, 0, m);
      return;
    }
    case GateKind::X:
    case GateKind::CNOT:
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & target_mask) == 0 && (i & control_mask) == control_mask) {
          std::swap(amps[i], amps[i | target_mask]);
        }
      }
      return;
    default:
      throw std::logic_error("apply_gate_inplace: unhandled gate kind");
  }
}

StateVector apply_gate(StateVector state, const GateOp& op, std::optional<double> angle) {
  apply_gate_inplace(state, op, angle);
  return state;
}

void apply_matrix(StateVector& state, int qubit, const Complex (&m)[2][2]) {
  check_qubit(qubit, state.n_qubits(), "target");
  apply_2x2(state.amplitudes(), std::size_t{1} << qubit, 0, m);
}

void apply_pauli(StateVector& state, int qubit, char pauli) {
  check_qubit(qubit, state.n_qubits(), "target");
  const std::size_t mask = std::size_t{1} << qubit;
  auto amps = state.amplitudes();
  switch (pauli) {
    case 'I':
      return;
    case 'X':
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) == 0) std::swap(amps[i], amps[i | mask]);
      }
      return;
    case 'Y': {
      // Y = [[0, -i], [i, 0]]
      const Complex minus_i{0.0, -1.0};
      const Complex plus_i{0.0, 1.0};
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) != 0) continue;
        const Complex a0 = amps[i];
        const Complex a1 = amps[i | mask];
        amps[i] = minus_i * a1;
        amps[i | mask] = plus_i * a0;
      }
      return;
    }
    case 'Z':
      for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) != 0) amps[i] = -amps[i];
      }
      return;
    default:
      throw std::invalid_argument(std::string("unknown Pauli '") + pauli + "'");
  }
}

std::optional<double> resolve_angle(const GateOp& op, std::span<const double> params,
                                    std::span<const double> features) {
  return std::visit(
      [&](const auto& source) -> std::optional<double> {
        using T = std::decay_t<decltype(source)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, FixedAngle>) {
          return source.radians;
        } else if constexpr (std::is_same_v<T, ParamSlot>) {
          return params[static_cast<std::size_t>(source.index)];
        } else {
          return features[static_cast<std::size_t>(source.index)];
        }
      },
      op.angle);
}

StateVector run_circuit(const CircuitTemplate& circuit, std::span<const double> params,
                        std::span<const double> features) {
  if (params.size() != static_cast<std::size_t>(circuit.n_params)) {
    throw std::invalid_argument("run_circuit: expected " + std::to_string(circuit.n_params) +
                                " params, got " + std::to_string(params.size()));
  }
  if (features.size() != static_cast<std::size_t>(circuit.n_features)) {
    throw std::invalid_argument("run_circuit: expected " + std::to_string(circuit.n_features) +
                                " features, got " + std::to_string(features.size()));
  }
  StateVector state(circuit.n_qubits);
  for (const GateOp& op : circuit.ops) {
    apply_gate_inplace(state, op, resolve_angle(op, params, features));
  }
  return state;
}

std::vector<double> expectation_z_all(const StateVector& state) {
  const double norm = state.norm_squared();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-8) {
    throw std::invalid_argument("expectation_z_all: state is not normalized");
  }
  const int n = state.n_qubits();
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    for (int q = 0; q < n; ++q) {
      z[static_cast<std::size_t>(q)] += ((i >> q) & 1U) ? -p : p;
    }
  }
  return z;
}

std::vector<double> cumulative_probabilities(const StateVector& state) {
  std::vector<double> cdf(state.dim());
  double running = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    running += std::norm(state[i]);
    cdf[i] = running;
  }
  return cdf;
}

std::uint64_t sample_basis_state(std::span<const double> cdf, Rng& rng) {
  // Scaling by the total absorbs the last-bit rounding of the running sum.
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto index = static_cast<std::uint64_t>(it - cdf.begin());
  return std::min<std::uint64_t>(index, cdf.size() - 1);
}

std::vector<double> sample_expectation_z(const StateVector& state, int shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("sample_expectation_z: shots must be >= 1");
  const int n = state.n_qubits();
  const auto cdf = cumulative_probabilities(state);
  std::vector<long long> ones(static_cast<std::size_t>(n), 0);
  for (int s = 0; s < shots; ++s) {
    const std::uint64_t basis = sample_basis_state(cdf, rng);
    for (int q = 0; q < n; ++q) ones[static_cast<std::size_t>(q)] += (basis >> q) & 1U;
  }
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    const auto k = static_cast<double>(ones[static_cast<std::size_t>(q)]);
    z[static_cast<std::size_t>(q)] = (static_cast<double>(shots) - 2.0 * k) / shots;
  }
  return z;
}

}  // namespace stiq
