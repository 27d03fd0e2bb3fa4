#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stiq/data.hpp"
#include "stiq/model.hpp"
#include "stiq/noise.hpp"
#include "stiq/rng.hpp"
#include "stiq/simulator.hpp"
#include "stiq/training.hpp"

namespace stiq {

/// One epoch of test-split metrics. Scores that a run does not produce stay
/// empty (a baseline run has no qnn1/qnn2/combined and vice versa).
struct MetricsRow {
  int epoch = 0;
  std::optional<ClassificationScore> baseline;
  std::optional<ClassificationScore> qnn1;
  std::optional<ClassificationScore> qnn2;
  std::optional<ClassificationScore> combined;
  double train_loss = 0.0;      // mean batch loss over the epoch
  double train_accuracy = 0.0;  // running, from pre-update forward passes
  double wall_seconds = 0.0;    // cumulative
  std::uint64_t circuit_evals = 0;  // cumulative circuit executions
};

struct TrainRun {
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 42;
  GradientEngine engine;
  double learning_rate = 0.01;
  int shots = 0;                     // 0: exact expectations during training
  std::optional<NoiseConfig> noise;  // noisy execution during training

  void validate() const;
};

/// Executes model circuits for training and counts every execution. Exact,
/// shot-sampled, or noisy depending on construction.
class CircuitRunner {
 public:
  static CircuitRunner exact();
  static CircuitRunner for_run(const TrainRun& run, Rng rng);

  std::vector<double> expectations(const QnnModel& model, std::span<const double> theta,
                                   std::span<const double> features);
  std::uint64_t evaluations() const { return evaluations_; }

 private:
  CircuitRunner(int shots, std::optional<NoiseConfig> noise, Rng rng);

  int shots_;
  std::optional<NoiseConfig> noise_;
  Rng rng_;
  std::uint64_t evaluations_ = 0;
};

/// Model parameters flattened as theta ++ head_weights ++ head_bias.
std::vector<double> pack_parameters(const QnnModel& model);
void unpack_parameters(QnnModel& model, std::span<const double> packed);

/// Shift rule for each parameter slot of a circuit.
std::vector<ShiftRule> shift_rules(const CircuitTemplate& circuit);

/// Loss of one sample given this model's logits; the sample index lets the
/// caller close over per-sample constants (labels, the partner's outputs).
using SampleLoss = std::function<double(std::span<const double> logits, std::size_t sample)>;

/// Gradient of mean_i loss(head(z(theta, x_i)), i) with respect to the packed
/// parameters. `z` holds the expectations at the current theta. Quantum
/// parameters follow `engine`; head parameters and dL/dz use central
/// differences, which need no circuit executions.
std::vector<double> model_gradient(const QnnModel& model,
                                   std::span<const std::vector<double>> features,
                                   std::span<const std::vector<double>> z,
                                   const SampleLoss& loss, const GradientEngine& engine,
                                   CircuitRunner& runner, Rng& spsa_rng);

struct StiqPair {
  QnnModel model_a;
  QnnModel model_b;
  AdamState opt_a;
  AdamState opt_b;
  LossConfig loss;

  void validate() const;
};

/// Deterministic initialization: member 0 is the baseline/QNN-1 stream,
/// member 1 the QNN-2 stream.
QnnModel initial_model(const Architecture& arch, int n_features, int n_classes,
                       std::uint64_t seed, int member);

StiqPair make_pair(const Architecture& arch_a, const Architecture& arch_b, int n_features,
                   int n_classes, const LossConfig& loss, const TrainRun& run);

ClassificationScore evaluate(const QnnModel& model, const LabeledSet& split,
                             const Execution& exec = Exact{}, std::uint64_t* counter = nullptr);

/// qnn1/qnn2 score individual logits, combined scores the aggregated logits.
PairScores evaluate(const StiqPair& pair, const LabeledSet& split,
                    const Execution& exec = Exact{}, std::uint64_t* counter = nullptr);

struct TrainResult {
  QnnModel model;
  std::vector<MetricsRow> metrics;
  std::uint64_t circuit_evals = 0;
};

/// Minimizes mean cross-entropy over shuffled mini-batches with Adam.
TrainResult train_baseline(QnnModel model, const LabeledSet& train, const LabeledSet& test,
                           const TrainRun& run);

/// Per-model gradients of the batch-mean total loss. Each model's gradient
/// holds the partner's outputs fixed at the current parameters.
struct PairGradient {
  std::vector<double> grad_a;  // packed, see pack_parameters
  std::vector<double> grad_b;
  LossTerms loss;              // batch means before any update
  std::size_t correct = 0;     // aggregated predictions matching labels
};

PairGradient stiq_gradients(const StiqPair& pair, const LabeledSet& batch,
                            const GradientEngine& engine, CircuitRunner& runner_a,
                            CircuitRunner& runner_b, Rng& spsa_a, Rng& spsa_b);

/// Gradients, then one Adam update per model with its own optimizer state.
PairGradient train_stiq_step(StiqPair& pair, const LabeledSet& batch, const GradientEngine& engine,
                           CircuitRunner& runner_a, CircuitRunner& runner_b, Rng& spsa_a,
                           Rng& spsa_b);

struct StiqResult {
  StiqPair pair;
  std::vector<MetricsRow> metrics;
  std::uint64_t circuit_evals = 0;
};

StiqResult train_stiq(StiqPair pair, const LabeledSet& train, const LabeledSet& test,
                      const TrainRun& run);

// --- variational (VQA) extension --------------------------------------------

struct PauliTerm {
  double coefficient;
  std::string paulis;  // paulis[q] in {I, X, Y, Z} acts on qubit q
};

struct Hamiltonian {
  int n_qubits = 0;
  std::vector<PauliTerm> terms;

  void validate() const;
};

/// <psi|H|psi> as a sum of basis-rotated Z-product expectations.
double expectation(const Hamiltonian& h, const StateVector& state);

/// Smallest eigenvalue of the dense 2^n x 2^n matrix of H.
double ground_energy(const Hamiltonian& h);

/// A(<H>_a, <H>_b) + lambda * D(<H>_a, <H>_b) on scalars; SignedL2 gives
/// -(E_a - E_b)^2.
double vqa_total_loss(const CircuitTemplate& circ_a, const CircuitTemplate& circ_b,
                      std::span<const double> params_a, std::span<const double> params_b,
                      const Hamiltonian& h, const LossConfig& cfg);

struct VqaRun {
  int steps = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 42;
  LossConfig loss{Aggregator::Mean, Divergence::SignedL2, 0.1, DivergenceSpace::Logits};
};

struct VqaResult {
  std::vector<double> params_a;
  std::vector<double> params_b;
  double energy_a = 0.0;
  double energy_b = 0.0;
  double combined_energy = 0.0;
  double ground_energy = 0.0;
  std::vector<double> combined_trace;  // aggregated energy after each step
};

/// Optimizes two copies of `pqc` (no encoding) under vqa_total_loss with
/// separate Adam states.
VqaResult vqa_train_demo(const Hamiltonian& h, const PqcSpec& pqc, const VqaRun& run);

}  // namespace stiq
