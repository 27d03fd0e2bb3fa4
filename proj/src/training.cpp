#include "stiq/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stiq/errors.hpp"

namespace stiq {

namespace {

void check_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                ")");
  }
}

double log_sum_exp(std::span<const double> x) {
  const double peak = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (double v : x) total += std::exp(v - peak);
  return peak + std::log(total);
}

std::vector<double> softmax_of(std::span<const double> x) {
  const double lse = log_sum_exp(x);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::exp(x[k] - lse);
  return out;
}

double checked(double value) {
  if (!std::isfinite(value)) throw NumericError("loss function returned a non-finite value");
  return value;
}

}  // namespace

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::Mean: return "mean";
    case Aggregator::Sum: return "sum";
    case Aggregator::Max: return "max";
    case Aggregator::ProductNormalize: return "product";
  }
  return "?";
}

std::string to_string(Divergence d) {
  switch (d) {
    case Divergence::CosineSimilarity: return "cosine";
    case Divergence::SignedL1: return "l1";
    case Divergence::SignedL2: return "l2";
    case Divergence::None: return "none";
  }
  return "?";
}

std::string to_string(DivergenceSpace s) {
  return s == DivergenceSpace::Logits ? "logits" : "probabilities";
}

Aggregator parse_aggregator(const std::string& name) {
  for (Aggregator a : {Aggregator::Mean, Aggregator::Sum, Aggregator::Max,
                       Aggregator::ProductNormalize}) {
    if (name == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown aggregator '" + name + "'");
}

Divergence parse_divergence(const std::string& name) {
  for (Divergence d : {Divergence::CosineSimilarity, Divergence::SignedL1, Divergence::SignedL2,
                       Divergence::None}) {
    if (name == to_string(d)) return d;
  }
  throw std::invalid_argument("unknown divergence '" + name + "'");
}

DivergenceSpace parse_divergence_space(const std::string& name) {
  if (name == "logits") return DivergenceSpace::Logits;
  if (name == "probabilities") return DivergenceSpace::Probabilities;
  throw std::invalid_argument("unknown divergence space '" + name + "'");
}

void LossConfig::validate() const {
  if (!std::isfinite(penalty) || penalty < 0.0 || penalty > 1.0) {
    throw std::invalid_argument("penalty lambda must lie in (0, 1]");
  }
  if (penalty == 0.0 && divergence != Divergence::None) {
    throw std::invalid_argument("penalty lambda = 0 requires divergence = none");
  }
}

double cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                " out of range");
  }
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("cross_entropy: non-finite logit");
  }
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label)];
}

std::vector<double> aggregate(std::span<const double> y1, std::span<const double> y2,
                              Aggregator kind) {
  check_same_length(y1, y2, "aggregate");
  const std::size_t n = y1.size();
  std::vector<double> out(n);
  switch (kind) {
    case Aggregator::Mean:
      for (std::size_t k = 0; k < n; ++k) out[k] = 0.5 * (y1[k] + y2[k]);
      break;
    case Aggregator::Sum:
      for (std::size_t k = 0; k < n; ++k) out[k] = y1[k] + y2[k];
      break;
    case Aggregator::Max:
      for (std::size_t k = 0; k < n; ++k) out[k] = std::max(y1[k], y2[k]);
      break;
    case Aggregator::ProductNormalize: {
      if (n == 0) break;
      // log(softmax(y1) * softmax(y2) / Z), evaluated in log space.
      const double lse1 = log_sum_exp(y1);
      const double lse2 = log_sum_exp(y2);
      for (std::size_t k = 0; k < n; ++k) out[k] = (y1[k] - lse1) + (y2[k] - lse2);
      const double lse = log_sum_exp(out);
      for (auto& v : out) v -= lse;
      break;
    }
  }
  return out;
}

double divergence(std::span<const double> y1, std::span<const double> y2, Divergence kind) {
  check_same_length(y1, y2, "divergence");
  switch (kind) {
    case Divergence::CosineSimilarity: {
      double dot = 0.0, n1 = 0.0, n2 = 0.0;
      for (std::size_t k = 0; k < y1.size(); ++k) {
        dot += y1[k] * y2[k];
        n1 += y1[k] * y1[k];
        n2 += y2[k] * y2[k];
      }
      if (n1 == 0.0 || n2 == 0.0) {
        throw NumericError("cosine similarity of a zero vector");
      }
      return std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), -1.0, 1.0);
    }
    case Divergence::SignedL1: {
      double total = 0.0;
      for (std::size_t k = 0; k < y1.size(); ++k) total += std::abs(y1[k] - y2[k]);
      return -total;
    }
    case Divergence::SignedL2: {
      double total = 0.0;
      for (std::size_t k = 0; k < y1.size(); ++k) {
        const double d = y1[k] - y2[k];
        total += d * d;
      }
      return -total;
    }
    case Divergence::None:
      return 0.0;
  }
  throw std::invalid_argument("unknown divergence kind");
}

LossTerms total_loss(std::span<const double> y1, std::span<const double> y2, int label,
                     const LossConfig& cfg) {
  LossTerms terms;
  terms.classification = cross_entropy(aggregate(y1, y2, cfg.aggregator), label);
  if (cfg.divergence != Divergence::None) {
    if (cfg.divergence_on == DivergenceSpace::Probabilities) {
      terms.divergence = divergence(softmax_of(y1), softmax_of(y2), cfg.divergence);
    } else {
      terms.divergence = divergence(y1, y2, cfg.divergence);
    }
  }
  terms.total = terms.classification + cfg.penalty * terms.divergence;
  return terms;
}

ClassificationScore score_logits(std::span<const std::vector<double>> logits,
                                 std::span<const int> labels) {
  if (logits.size() != labels.size()) throw std::invalid_argument("score_logits: size mismatch");
  if (logits.empty()) throw std::invalid_argument("score_logits: empty split");
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto& y = logits[i];
    const auto best = std::max_element(y.begin(), y.end()) - y.begin();
    if (best == labels[i]) ++correct;
    loss += cross_entropy(y, labels[i]);
  }
  const auto n = static_cast<double>(logits.size());
  return {static_cast<double>(correct) / n, loss / n};
}

// --- gradients -------------------------------------------------------------

void GradientEngine::validate() const {
  if (const auto* e = std::get_if<ExactNumeric>(&kind)) {
    if (!(e->step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  } else if (const auto* s = std::get_if<Spsa>(&kind)) {
    if (!(s->perturbation > 0.0)) throw std::invalid_argument("SPSA perturbation must be > 0");
    if (s->reps < 1) throw std::invalid_argument("SPSA reps must be >= 1");
  }
}

std::string to_string(const GradientEngine& engine) {
  if (const auto* e = std::get_if<ExactNumeric>(&engine.kind)) {
    return "exact(h=" + std::to_string(e->step) + ")";
  }
  if (const auto* s = std::get_if<Spsa>(&engine.kind)) {
    return "spsa(c=" + std::to_string(s->perturbation) + ",reps=" + std::to_string(s->reps) +
           ")";
  }
  return "shift";
}

std::vector<double> shift_derivative(const VectorFunction& f, std::span<const double> params,
                                     std::size_t index, ShiftRule rule, double numeric_step) {
  std::vector<double> shifted(params.begin(), params.end());
  auto eval_at = [&](double delta) {
    shifted[index] = params[index] + delta;
    auto out = f(shifted);
    shifted[index] = params[index];
    return out;
  };
  auto combine = [](std::vector<double>& acc, const std::vector<double>& plus,
                    const std::vector<double>& minus, double weight) {
    if (acc.empty()) acc.assign(plus.size(), 0.0);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += weight * (plus[k] - minus[k]);
  };

  std::vector<double> result;
  constexpr double half_pi = std::numbers::pi / 2.0;
  switch (rule) {
    case ShiftRule::TwoTerm:
      combine(result, eval_at(half_pi), eval_at(-half_pi), 0.5);
      break;
    case ShiftRule::FourTerm: {
      const double root2 = std::numbers::sqrt2;
      const double near = (root2 + 1.0) / (4.0 * root2);
      const double far = (root2 - 1.0) / (4.0 * root2);
      combine(result, eval_at(half_pi), eval_at(-half_pi), near);
      combine(result, eval_at(3.0 * half_pi), eval_at(-3.0 * half_pi), -far);
      break;
    }
    case ShiftRule::Numeric:
      combine(result, eval_at(numeric_step), eval_at(-numeric_step), 0.5 / numeric_step);
      break;
  }
  return result;
}

std::vector<double> gradient(const ScalarFunction& loss, std::span<const double> params,
                             const GradientEngine& engine, Rng& rng,
                             std::span<const ShiftRule> rules) {
  engine.validate();
  const std::size_t n = params.size();
  std::vector<double> grad(n, 0.0);
  std::vector<double> probe(params.begin(), params.end());
  auto eval = [&](std::span<const double> p) { return checked(loss(p)); };

  if (const auto* exact = std::get_if<ExactNumeric>(&engine.kind)) {
    for (std::size_t i = 0; i < n; ++i) {
      probe[i] = params[i] + exact->step;
      const double up = eval(probe);
      probe[i] = params[i] - exact->step;
      const double down = eval(probe);
      probe[i] = params[i];
      grad[i] = (up - down) / (2.0 * exact->step);
    }
    return grad;
  }

  if (const auto* spsa = std::get_if<Spsa>(&engine.kind)) {
    std::vector<int> direction(n);
    for (int r = 0; r < spsa->reps; ++r) {
      for (auto& d : direction) d = rng.rademacher();
      for (std::size_t i = 0; i < n; ++i) probe[i] = params[i] + spsa->perturbation * direction[i];
      const double up = eval(probe);
      for (std::size_t i = 0; i < n; ++i) probe[i] = params[i] - spsa->perturbation * direction[i];
      const double down = eval(probe);
      const double slope = (up - down) / (2.0 * spsa->perturbation);
      // 1 / direction[i] == direction[i] for Rademacher entries
      for (std::size_t i = 0; i < n; ++i) grad[i] += slope * direction[i];
    }
    for (auto& g : grad) g /= spsa->reps;
    return grad;
  }

  if (!rules.empty() && rules.size() != n) {
    throw std::invalid_argument("gradient: one shift rule per parameter required");
  }
  const VectorFunction as_vector = [&](std::span<const double> p) {
    return std::vector<double>{eval(p)};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const ShiftRule rule = rules.empty() ? ShiftRule::TwoTerm : rules[i];
    grad[i] = shift_derivative(as_vector, params, i, rule).front();
  }
  return grad;
}

std::vector<double> gradient(const ScalarFunction& loss, std::span<const double> params,
                             const GradientEngine& engine, std::span<const ShiftRule> rules) {
  Rng rng(engine.seed);
  return gradient(loss, params, engine, rng, rules);
}

// --- Adam --------------------------------------------------------------------

AdamState AdamState::for_size(std::size_t n, double learning_rate) {
  AdamState state;
  state.first_moment.assign(n, 0.0);
  state.second_moment.assign(n, 0.0);
  state.learning_rate = learning_rate;
  return state;
}

std::vector<double> adam_step(AdamState& state, std::span<const double> params,
                              std::span<const double> grads) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw std::invalid_argument("adam_step: length mismatch");
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  std::vector<double> out(params.begin(), params.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grads[i])) throw NumericError("adam_step: non-finite gradient");
    state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * grads[i];
    state.second_moment[i] =
        state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.first_moment[i] / correction1;
    const double v_hat = state.second_moment[i] / correction2;
    out[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
  return out;
}

}  // namespace stiq
