#include "stiq/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace stiq {

namespace {

constexpr char kPaulis[4] = {'I', 'X', 'Y', 'Z'};

bool valid_probability(double p) { return std::isfinite(p) && p >= 0.0 && p < 1.0; }

struct ErrorEvent {
  std::size_t after_op;
  int pauli;  // 1..3 for single-qubit ops, 1..15 (control * 4 + target) for two-qubit ops
};

}  // namespace

void NoiseConfig::validate() const {
  if (!valid_probability(p1) || !valid_probability(p2) || !valid_probability(readout_01) ||
      !valid_probability(readout_10)) {
    throw std::invalid_argument("noise probabilities must lie in [0, 1)");
  }
  if (shots < 1) throw std::invalid_argument("noise config needs shots >= 1");
}

NoiseConfig noise_preset(const std::string& name) {
  NoiseConfig cfg;
  if (name == "low") {
    cfg.p1 = 0.0005;
    cfg.p2 = 0.005;
    cfg.readout_01 = cfg.readout_10 = 0.01;
  } else if (name == "med") {
    cfg.p1 = 0.001;
    cfg.p2 = 0.01;
    cfg.readout_01 = cfg.readout_10 = 0.02;
  } else if (name == "high") {
    cfg.p1 = 0.002;
    cfg.p2 = 0.02;
    cfg.readout_01 = cfg.readout_10 = 0.03;
  } else if (name == "none") {
    // noiseless, finite shots
  } else {
    throw std::invalid_argument("unknown noise preset '" + name + "'");
  }
  return cfg;
}

std::vector<double> noisy_expectation_z(const CircuitTemplate& circuit,
                                        std::span<const double> params,
                                        std::span<const double> features,
                                        const NoiseConfig& cfg, Rng& rng) {
  cfg.validate();
  const int n = circuit.n_qubits;
  const StateVector ideal = run_circuit(circuit, params, features);
  const std::vector<double> ideal_cdf = cumulative_probabilities(ideal);
  const bool gate_noise = cfg.p1 > 0.0 || cfg.p2 > 0.0;
  const bool readout_noise = cfg.readout_01 > 0.0 || cfg.readout_10 > 0.0;

  std::vector<double> angles(circuit.ops.size());
  for (std::size_t k = 0; k < circuit.ops.size(); ++k) {
    angles[k] = resolve_angle(circuit.ops[k], params, features).value_or(0.0);
  }

  std::vector<long long> ones(static_cast<std::size_t>(n), 0);
  std::vector<ErrorEvent> events;
  for (int shot = 0; shot < cfg.shots; ++shot) {
    events.clear();
    if (gate_noise) {
      for (std::size_t k = 0; k < circuit.ops.size(); ++k) {
        const bool two_qubit = circuit.ops[k].control.has_value();
        const double p = two_qubit ? cfg.p2 : cfg.p1;
        if (p > 0.0 && rng.uniform() < p) {
          const int pauli = 1 + static_cast<int>(rng.below(two_qubit ? 15 : 3));
          events.push_back({k, pauli});
        }
      }
    }

    std::uint64_t basis = 0;
    if (events.empty()) {
      basis = sample_basis_state(ideal_cdf, rng);
    } else {
      StateVector state(n);
      std::size_t next = 0;
      for (std::size_t k = 0; k < circuit.ops.size(); ++k) {
        const GateOp& op = circuit.ops[k];
        apply_gate_inplace(state, op,
                           is_rotation(op.kind) ? std::optional<double>(angles[k])
                                                : std::nullopt);
        for (; next < events.size() && events[next].after_op == k; ++next) {
          const int pauli = events[next].pauli;
          if (op.control) {
            apply_pauli(state, *op.control, kPaulis[pauli / 4]);
            apply_pauli(state, op.target, kPaulis[pauli % 4]);
          } else {
            apply_pauli(state, op.target, kPaulis[pauli]);
          }
        }
      }
      basis = sample_basis_state(cumulative_probabilities(state), rng);
    }

    for (int q = 0; q < n; ++q) {
      bool bit = ((basis >> q) & 1U) != 0;
      if (readout_noise) {
        const double flip = bit ? cfg.readout_10 : cfg.readout_01;
        if (rng.uniform() < flip) bit = !bit;
      }
      ones[static_cast<std::size_t>(q)] += bit ? 1 : 0;
    }
  }

  std::vector<double> z(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    const auto k = static_cast<double>(ones[static_cast<std::size_t>(q)]);
    z[static_cast<std::size_t>(q)] = (static_cast<double>(cfg.shots) - 2.0 * k) / cfg.shots;
  }
  return z;
}

PredictionVector noisy_forward(const QnnModel& model, std::span<const double> features,
                               const NoiseConfig& cfg, Rng& rng) {
  if (features.size() != static_cast<std::size_t>(model.n_features)) {
    throw std::invalid_argument("noisy_forward: feature dimension mismatch");
  }
  const auto z = noisy_expectation_z(model.circuit, model.theta, features, cfg, rng);
  return make_prediction(head_logits(model, z));
}

PredictionVector noisy_forward(const QnnModel& model, std::span<const double> features,
                               const NoiseConfig& cfg) {
  Rng rng(cfg.seed);
  return noisy_forward(model, features, cfg, rng);
}

ClassificationScore noisy_evaluate(const QnnModel& model, const LabeledSet& split,
                                   const NoiseConfig& cfg) {
  const Rng root(cfg.seed);
  std::vector<std::vector<double>> logits;
  logits.reserve(split.size());
  for (std::size_t i = 0; i < split.size(); ++i) {
    Rng rng = root.split(i);
    logits.push_back(noisy_forward(model, split.x[i], cfg, rng).logits);
  }
  return score_logits(logits, split.y);
}

PairScores noisy_evaluate(const QnnModel& model_a, const QnnModel& model_b,
                          Aggregator aggregator, const LabeledSet& split,
                          const NoiseConfig& cfg_a, const NoiseConfig& cfg_b) {
  if (model_a.n_classes != model_b.n_classes) {
    throw std::invalid_argument("noisy_evaluate: models disagree on n_classes");
  }
  const Rng root_a(cfg_a.seed);
  // Distinct streams even when both providers share a seed.
  const Rng root_b = Rng(cfg_b.seed).split(0x5eed);
  std::vector<std::vector<double>> y1, y2, combined;
  for (std::size_t i = 0; i < split.size(); ++i) {
    Rng rng_a = root_a.split(i);
    Rng rng_b = root_b.split(i);
    y1.push_back(noisy_forward(model_a, split.x[i], cfg_a, rng_a).logits);
    y2.push_back(noisy_forward(model_b, split.x[i], cfg_b, rng_b).logits);
    combined.push_back(aggregate(y1.back(), y2.back(), aggregator));
  }
  return {score_logits(y1, split.y), score_logits(y2, split.y),
          score_logits(combined, split.y)};
}

}  // namespace stiq
