#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stiq/data.hpp"
#include "stiq/model.hpp"
#include "stiq/rng.hpp"
#include "stiq/training.hpp"

namespace stiq {

/// Parameterized NISQ noise: depolarizing errors after gates, readout
/// bit-flips, finite shots.
struct NoiseConfig {
  double p1 = 0.0;          // single-qubit depolarizing probability
  double p2 = 0.0;          // two-qubit depolarizing probability
  double readout_01 = 0.0;  // P(read 1 | true 0)
  double readout_10 = 0.0;  // P(read 0 | true 1)
  int shots = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// LOW / MED / HIGH stand-ins for three devices of increasing error.
NoiseConfig noise_preset(const std::string& name);

/// Monte-Carlo trajectory estimate of per-qubit <Z>. For each shot a fresh
/// error pattern is drawn (one uniform Pauli after each gate with probability
/// p1 or p2), one basis state is sampled from that trajectory, and each
/// readout bit is flipped with its readout probability.
std::vector<double> noisy_expectation_z(const CircuitTemplate& circuit,
                                        std::span<const double> params,
                                        std::span<const double> features,
                                        const NoiseConfig& cfg, Rng& rng);

PredictionVector noisy_forward(const QnnModel& model, std::span<const double> features,
                               const NoiseConfig& cfg, Rng& rng);

/// Uses a stream seeded from cfg.seed.
PredictionVector noisy_forward(const QnnModel& model, std::span<const double> features,
                               const NoiseConfig& cfg);

ClassificationScore noisy_evaluate(const QnnModel& model, const LabeledSet& split,
                                   const NoiseConfig& cfg);

/// Each model runs under its own configuration ("provider"); the aggregate is
/// formed from the two noisy logit vectors.
PairScores noisy_evaluate(const QnnModel& model_a, const QnnModel& model_b,
                          Aggregator aggregator, const LabeledSet& split,
                          const NoiseConfig& cfg_a, const NoiseConfig& cfg_b);

}  // namespace stiq
