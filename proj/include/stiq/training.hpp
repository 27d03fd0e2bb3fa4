#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stiq/rng.hpp"

namespace stiq {

enum class Aggregator { Mean, Sum, Max, ProductNormalize };
enum class Divergence { CosineSimilarity, SignedL1, SignedL2, None };
/// Which representation the divergence compares.
enum class DivergenceSpace { Logits, Probabilities };

std::string to_string(Aggregator a);
std::string to_string(Divergence d);
std::string to_string(DivergenceSpace s);
Aggregator parse_aggregator(const std::string& name);
Divergence parse_divergence(const std::string& name);
DivergenceSpace parse_divergence_space(const std::string& name);

/// Total loss L_T = L_C + lambda * L_D with L_C = CE(A(y1, y2), label) and
/// L_D = D(y1, y2).
struct LossConfig {
  Aggregator aggregator = Aggregator::Mean;
  Divergence divergence = Divergence::CosineSimilarity;
  double penalty = 0.3;
  DivergenceSpace divergence_on = DivergenceSpace::Logits;

  /// penalty must lie in (0, 1]; 0 is accepted only without a divergence.
  void validate() const;
};

struct LossTerms {
  double total = 0.0;
  double classification = 0.0;
  double divergence = 0.0;
};

/// -log softmax(logits)[label] with max-shifted log-sum-exp.
double cross_entropy(std::span<const double> logits, int label);

std::vector<double> aggregate(std::span<const double> y1, std::span<const double> y2,
                              Aggregator kind);

/// Similarity score, high for identical vectors: cosine similarity,
/// -sum|y1 - y2|, or -||y1 - y2||^2. None yields 0.
double divergence(std::span<const double> y1, std::span<const double> y2, Divergence kind);

LossTerms total_loss(std::span<const double> y1, std::span<const double> y2, int label,
                     const LossConfig& cfg);

struct ClassificationScore {
  double accuracy = 0.0;
  double loss = 0.0;
};

/// Individual and aggregated scores of a two-model ensemble.
struct PairScores {
  ClassificationScore qnn1;
  ClassificationScore qnn2;
  ClassificationScore combined;
};

/// Argmax accuracy and mean cross-entropy over a set of logit vectors.
ClassificationScore score_logits(std::span<const std::vector<double>> logits,
                                 std::span<const int> labels);

// --- gradients -------------------------------------------------------------

struct ExactNumeric {
  double step = 1e-5;
};
struct ParameterShift {};
struct Spsa {
  double perturbation = 0.1;
  int reps = 4;
};

struct GradientEngine {
  std::variant<ExactNumeric, ParameterShift, Spsa> kind = ParameterShift{};
  std::uint64_t seed = 0;

  void validate() const;
};

std::string to_string(const GradientEngine& engine);

/// How the derivative of one parameter is obtained under ParameterShift.
enum class ShiftRule {
  TwoTerm,   // gate generated by P/2 with P^2 = I (RX, RY, RZ)
  FourTerm,  // controlled rotation, generator eigenvalues {0, +-1/2}
  Numeric,   // not a single rotation angle: central difference
};

using ScalarFunction = std::function<double(std::span<const double>)>;
using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Gradient of `loss` at `params`. Under ParameterShift every parameter uses
/// `rules[i]` (TwoTerm when `rules` is empty); SPSA draws its directions from
/// `rng`. Throws NumericError on a non-finite loss value.
std::vector<double> gradient(const ScalarFunction& loss, std::span<const double> params,
                             const GradientEngine& engine, Rng& rng,
                             std::span<const ShiftRule> rules = {});

/// Convenience overload seeding the SPSA stream from engine.seed.
std::vector<double> gradient(const ScalarFunction& loss, std::span<const double> params,
                             const GradientEngine& engine,
                             std::span<const ShiftRule> rules = {});

/// d f / d params[index] for a vector-valued f by the given rule.
std::vector<double> shift_derivative(const VectorFunction& f, std::span<const double> params,
                                     std::size_t index, ShiftRule rule,
                                     double numeric_step = 1e-5);

// --- Adam --------------------------------------------------------------------

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long long step = 0;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_size(std::size_t n, double learning_rate = 0.01);
};

/// One bias-corrected Adam update. Returns the new parameter vector; `state`
/// is advanced in place.
std::vector<double> adam_step(AdamState& state, std::span<const double> params,
                              std::span<const double> grads);

}  // namespace stiq
