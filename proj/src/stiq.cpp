#include "stiq/stiq.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stiq/errors.hpp"

namespace stiq {

namespace {

// Stream ids split off the run seed. Baseline and QNN-1 share the member-0
// initialization and both runs see the same batch order.
constexpr std::uint64_t kShuffleStream = 101;
constexpr std::uint64_t kRunnerStream = 202;
constexpr std::uint64_t kSpsaStream = 303;
constexpr std::uint64_t kInitStream = 404;

constexpr double kHeadStep = 1e-5;

double checked_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

/// Central-difference gradient of f at x.
template <class F>
std::vector<double> central_difference(F&& f, std::span<const double> x, double h) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f(std::span<const double>(probe));
    probe[k] = x[k] - h;
    const double down = f(std::span<const double>(probe));
    probe[k] = x[k];
    grad[k] = checked_finite((up - down) / (2.0 * h), "gradient");
  }
  return grad;
}

LabeledSet gather(const LabeledSet& set, std::span<const std::size_t> indices) {
  LabeledSet out;
  out.x.reserve(indices.size());
  out.y.reserve(indices.size());
  for (std::size_t i : indices) {
    out.x.push_back(set.x[i]);
    out.y.push_back(set.y[i]);
  }
  return out;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Shuffled mini-batch schedule shared by the baseline and STIQ loops.
template <class StepFn, class EvalFn>
std::vector<MetricsRow> run_epochs(const LabeledSet& train, const TrainRun& run, StepFn&& step,
                                   EvalFn&& eval) {
  Rng shuffle_rng = Rng(run.seed).split(kShuffleStream);
  std::vector<std::size_t> order(train.size());
  std::vector<MetricsRow> rows;
  Stopwatch clock;
  for (int epoch = 1; epoch <= run.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(run.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(run.batch_size));
      const LabeledSet batch =
          gather(train, std::span<const std::size_t>(order).subspan(start, stop - start));
      const auto [batch_loss, batch_correct] = step(batch);
      loss_sum += batch_loss * static_cast<double>(batch.size());
      correct += batch_correct;
    }
    MetricsRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(train.size());
    row.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    eval(row);
    row.wall_seconds = clock.seconds();
    rows.push_back(row);
  }
  return rows;
}

double scalar_loss(double ea, double eb, const LossConfig& cfg) {
  if (cfg.aggregator == Aggregator::ProductNormalize) {
    throw std::invalid_argument("product aggregation is undefined for scalar energies");
  }
  const double a[1] = {ea};
  const double b[1] = {eb};
  const double combined = aggregate(a, b, cfg.aggregator).front();
  const double d = cfg.divergence == Divergence::None ? 0.0 : divergence(a, b, cfg.divergence);
  return combined + cfg.penalty * d;
}

}  // namespace

void TrainRun::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (shots < 0) throw std::invalid_argument("shots must be >= 0");
  engine.validate();
  if (noise) noise->validate();
}

// --- CircuitRunner -----------------------------------------------------------

CircuitRunner::CircuitRunner(int shots, std::optional<NoiseConfig> noise, Rng rng)
    : shots_(shots), noise_(std::move(noise)), rng_(rng) {}

CircuitRunner CircuitRunner::exact() { return CircuitRunner(0, std::nullopt, Rng(0)); }

CircuitRunner CircuitRunner::for_run(const TrainRun& run, Rng rng) {
  return CircuitRunner(run.shots, run.noise, rng);
}

std::vector<double> CircuitRunner::expectations(const QnnModel& model,
                                                std::span<const double> theta,
                                                std::span<const double> features) {
  ++evaluations_;
  if (noise_) return noisy_expectation_z(model.circuit, theta, features, *noise_, rng_);
  const StateVector state = run_circuit(model.circuit, theta, features);
  if (shots_ > 0) return sample_expectation_z(state, shots_, rng_);
  return expectation_z_all(state);
}

// --- parameters and gradients ------------------------------------------------

std::vector<double> pack_parameters(const QnnModel& model) {
  std::vector<double> packed;
  packed.reserve(model.theta.size() + model.head_weights.size() + model.head_bias.size());
  packed.insert(packed.end(), model.theta.begin(), model.theta.end());
  packed.insert(packed.end(), model.head_weights.begin(), model.head_weights.end());
  packed.insert(packed.end(), model.head_bias.begin(), model.head_bias.end());
  return packed;
}

void unpack_parameters(QnnModel& model, std::span<const double> packed) {
  const std::size_t nt = model.theta.size();
  const std::size_t nw = model.head_weights.size();
  const std::size_t nb = model.head_bias.size();
  if (packed.size() != nt + nw + nb) throw std::invalid_argument("packed parameter size");
  std::copy_n(packed.begin(), nt, model.theta.begin());
  std::copy_n(packed.begin() + static_cast<std::ptrdiff_t>(nt), nw, model.head_weights.begin());
  std::copy_n(packed.begin() + static_cast<std::ptrdiff_t>(nt + nw), nb,
              model.head_bias.begin());
}

std::vector<ShiftRule> shift_rules(const CircuitTemplate& circuit) {
  std::vector<int> uses(static_cast<std::size_t>(circuit.n_params), 0);
  std::vector<ShiftRule> rules(static_cast<std::size_t>(circuit.n_params), ShiftRule::TwoTerm);
  for (const GateOp& op : circuit.ops) {
    const auto* slot = std::get_if<ParamSlot>(&op.angle);
    if (!slot) continue;
    const auto j = static_cast<std::size_t>(slot->index);
    ++uses[j];
    rules[j] = op.control ? ShiftRule::FourTerm : ShiftRule::TwoTerm;
  }
  for (std::size_t j = 0; j < rules.size(); ++j) {
    if (uses[j] != 1) rules[j] = ShiftRule::Numeric;
  }
  return rules;
}

std::vector<double> model_gradient(const QnnModel& model,
                                   std::span<const std::vector<double>> features,
                                   std::span<const std::vector<double>> z,
                                   const SampleLoss& loss, const GradientEngine& engine,
                                   CircuitRunner& runner, Rng& spsa_rng) {
  const std::size_t batch = features.size();
  if (batch == 0 || z.size() != batch) throw std::invalid_argument("model_gradient: bad batch");
  const std::size_t n_theta = model.theta.size();
  const std::size_t n_weights = model.head_weights.size();
  const auto inv_batch = 1.0 / static_cast<double>(batch);
  std::vector<double> grad(n_theta + n_weights + model.head_bias.size(), 0.0);

  double head_step = kHeadStep;
  if (const auto* exact = std::get_if<ExactNumeric>(&engine.kind)) head_step = exact->step;

  // Classical head: z is fixed, so no circuit runs.
  std::vector<double> head(model.head_weights);
  head.insert(head.end(), model.head_bias.begin(), model.head_bias.end());
  auto head_loss = [&](std::span<const double> hp) {
    const auto weights = hp.first(n_weights);
    const auto bias = hp.subspan(n_weights);
    double total = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      total += loss(head_logits(model.n_classes, weights, bias, z[i]), i);
    }
    return total * inv_batch;
  };
  const auto head_grad = central_difference(head_loss, head, head_step);
  std::copy(head_grad.begin(), head_grad.end(), grad.begin() + static_cast<std::ptrdiff_t>(n_theta));

  if (std::holds_alternative<ParameterShift>(engine.kind)) {
    // Shift rules act on the expectations; the chain rule through the head
    // and loss uses dL/dz from central differences.
    const auto rules = shift_rules(model.circuit);
    for (std::size_t i = 0; i < batch; ++i) {
      const auto dloss_dz = central_difference(
          [&](std::span<const double> zz) { return loss(head_logits(model, zz), i); }, z[i],
          kHeadStep);
      const VectorFunction expectations = [&](std::span<const double> theta) {
        return runner.expectations(model, theta, features[i]);
      };
      for (std::size_t j = 0; j < n_theta; ++j) {
        const auto dz = shift_derivative(expectations, model.theta, j, rules[j], kHeadStep);
        grad[j] += dot(dloss_dz, dz) * inv_batch;
      }
    }
  } else {
    const ScalarFunction batch_loss = [&](std::span<const double> theta) {
      double total = 0.0;
      for (std::size_t i = 0; i < batch; ++i) {
        const auto zz = runner.expectations(model, theta, features[i]);
        total += loss(head_logits(model, zz), i);
      }
      return total * inv_batch;
    };
    const auto g = gradient(batch_loss, model.theta, engine, spsa_rng);
    std::copy(g.begin(), g.end(), grad.begin());
  }
  for (double g : grad) checked_finite(g, "gradient");
  return grad;
}

// --- pairs and evaluation ----------------------------------------------------

void StiqPair::validate() const {
  model_a.validate();
  model_b.validate();
  if (model_a.n_classes != model_b.n_classes) {
    throw std::invalid_argument("pair members disagree on n_classes");
  }
  if (model_a.n_features != model_b.n_features) {
    throw std::invalid_argument("pair members disagree on feature dimension");
  }
  if (opt_a.first_moment.size() != pack_parameters(model_a).size() ||
      opt_b.first_moment.size() != pack_parameters(model_b).size()) {
    throw std::invalid_argument("optimizer state does not match model size");
  }
  loss.validate();
}

QnnModel initial_model(const Architecture& arch, int n_features, int n_classes,
                       std::uint64_t seed, int member) {
  Rng rng = Rng(seed).split(kInitStream + static_cast<std::uint64_t>(member));
  return init_model(arch, n_features, n_classes, rng);
}

StiqPair make_pair(const Architecture& arch_a, const Architecture& arch_b, int n_features,
                   int n_classes, const LossConfig& loss, const TrainRun& run) {
  StiqPair pair;
  pair.model_a = initial_model(arch_a, n_features, n_classes, run.seed, 0);
  pair.model_b = initial_model(arch_b, n_features, n_classes, run.seed, 1);
  pair.opt_a = AdamState::for_size(pack_parameters(pair.model_a).size(), run.learning_rate);
  pair.opt_b = AdamState::for_size(pack_parameters(pair.model_b).size(), run.learning_rate);
  pair.loss = loss;
  pair.validate();
  return pair;
}

ClassificationScore evaluate(const QnnModel& model, const LabeledSet& split,
                             const Execution& exec, std::uint64_t* counter) {
  std::vector<std::vector<double>> logits;
  logits.reserve(split.size());
  for (const auto& x : split.x) logits.push_back(forward(model, x, exec).logits);
  if (counter) *counter += split.size();
  return score_logits(logits, split.y);
}

PairScores evaluate(const StiqPair& pair, const LabeledSet& split, const Execution& exec,
                    std::uint64_t* counter) {
  std::vector<std::vector<double>> y1, y2, combined;
  for (const auto& x : split.x) {
    y1.push_back(forward(pair.model_a, x, exec).logits);
    y2.push_back(forward(pair.model_b, x, exec).logits);
    combined.push_back(aggregate(y1.back(), y2.back(), pair.loss.aggregator));
  }
  if (counter) *counter += 2 * split.size();
  return {score_logits(y1, split.y), score_logits(y2, split.y),
          score_logits(combined, split.y)};
}

// --- training loops ------------------------------------------------------------

TrainResult train_baseline(QnnModel model, const LabeledSet& train, const LabeledSet& test,
                           const TrainRun& run) {
  run.validate();
  if (train.size() == 0 || test.size() == 0) throw std::invalid_argument("empty dataset split");
  model.validate();
  const Rng root(run.seed);
  CircuitRunner runner = CircuitRunner::for_run(run, root.split(kRunnerStream));
  Rng spsa = root.split(kSpsaStream ^ run.engine.seed);
  AdamState opt = AdamState::for_size(pack_parameters(model).size(), run.learning_rate);
  std::uint64_t eval_count = 0;

  auto step = [&](const LabeledSet& batch) {
    std::vector<std::vector<double>> z;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& x : batch.x) {
      z.push_back(runner.expectations(model, model.theta, x));
      const auto logits = head_logits(model, z.back());
      const std::size_t i = z.size() - 1;
      loss_sum += cross_entropy(logits, batch.y[i]);
      if (argmax(logits) == batch.y[i]) ++correct;
    }
    const SampleLoss ce = [&](std::span<const double> logits, std::size_t i) {
      return cross_entropy(logits, batch.y[i]);
    };
    const auto g = model_gradient(model, batch.x, z, ce, run.engine, runner, spsa);
    const auto updated = adam_step(opt, pack_parameters(model), g);
    unpack_parameters(model, updated);
    return std::pair{loss_sum / static_cast<double>(batch.size()), correct};
  };
  auto eval = [&](MetricsRow& row) {
    row.baseline = evaluate(model, test, Exact{}, &eval_count);
    row.circuit_evals = runner.evaluations() + eval_count;
  };
  auto metrics = run_epochs(train, run, step, eval);
  return {std::move(model), std::move(metrics), runner.evaluations() + eval_count};
}

PairGradient stiq_gradients(const StiqPair& pair, const LabeledSet& batch,
                            const GradientEngine& engine, CircuitRunner& runner_a,
                            CircuitRunner& runner_b, Rng& spsa_a, Rng& spsa_b) {
  if (batch.size() == 0) throw std::invalid_argument("train_stiq_step: empty batch");
  pair.loss.validate();
  const std::size_t n = batch.size();
  std::vector<std::vector<double>> za, zb, ya, yb;
  PairGradient out;
  for (std::size_t i = 0; i < n; ++i) {
    za.push_back(runner_a.expectations(pair.model_a, pair.model_a.theta, batch.x[i]));
    zb.push_back(runner_b.expectations(pair.model_b, pair.model_b.theta, batch.x[i]));
    ya.push_back(head_logits(pair.model_a, za.back()));
    yb.push_back(head_logits(pair.model_b, zb.back()));
    const LossTerms terms = total_loss(ya.back(), yb.back(), batch.y[i], pair.loss);
    out.loss.total += terms.total;
    out.loss.classification += terms.classification;
    out.loss.divergence += terms.divergence;
    if (argmax(aggregate(ya.back(), yb.back(), pair.loss.aggregator)) == batch.y[i]) {
      ++out.correct;
    }
  }
  const auto inv = 1.0 / static_cast<double>(n);
  out.loss.total *= inv;
  out.loss.classification *= inv;
  out.loss.divergence *= inv;

  const SampleLoss loss_a = [&](std::span<const double> y, std::size_t i) {
    return total_loss(y, yb[i], batch.y[i], pair.loss).total;
  };
  const SampleLoss loss_b = [&](std::span<const double> y, std::size_t i) {
    return total_loss(ya[i], y, batch.y[i], pair.loss).total;
  };
  out.grad_a = model_gradient(pair.model_a, batch.x, za, loss_a, engine, runner_a, spsa_a);
  out.grad_b = model_gradient(pair.model_b, batch.x, zb, loss_b, engine, runner_b, spsa_b);
  return out;
}

PairGradient train_stiq_step(StiqPair& pair, const LabeledSet& batch, const GradientEngine& engine,
                             CircuitRunner& runner_a, CircuitRunner& runner_b, Rng& spsa_a,
                             Rng& spsa_b) {
  PairGradient report =
      stiq_gradients(pair, batch, engine, runner_a, runner_b, spsa_a, spsa_b);
  unpack_parameters(pair.model_a,
                    adam_step(pair.opt_a, pack_parameters(pair.model_a), report.grad_a));
  unpack_parameters(pair.model_b,
                    adam_step(pair.opt_b, pack_parameters(pair.model_b), report.grad_b));
  return report;
}

StiqResult train_stiq(StiqPair pair, const LabeledSet& train, const LabeledSet& test,
                      const TrainRun& run) {
  run.validate();
  pair.validate();
  if (train.size() == 0 || test.size() == 0) throw std::invalid_argument("empty dataset split");
  const Rng root(run.seed);
  CircuitRunner runner_a = CircuitRunner::for_run(run, root.split(kRunnerStream));
  CircuitRunner runner_b = CircuitRunner::for_run(run, root.split(kRunnerStream + 1));
  Rng spsa_a = root.split(kSpsaStream ^ run.engine.seed);
  Rng spsa_b = root.split((kSpsaStream + 1) ^ run.engine.seed);
  std::uint64_t eval_count = 0;

  auto step = [&](const LabeledSet& batch) {
    const PairGradient report =
        train_stiq_step(pair, batch, run.engine, runner_a, runner_b, spsa_a, spsa_b);
    return std::pair{report.loss.total, report.correct};
  };
  auto eval = [&](MetricsRow& row) {
    const PairScores scores = evaluate(pair, test, Exact{}, &eval_count);
    row.qnn1 = scores.qnn1;
    row.qnn2 = scores.qnn2;
    row.combined = scores.combined;
    row.circuit_evals = runner_a.evaluations() + runner_b.evaluations() + eval_count;
  };
  auto metrics = run_epochs(train, run, step, eval);
  const std::uint64_t total = runner_a.evaluations() + runner_b.evaluations() + eval_count;
  return {std::move(pair), std::move(metrics), total};
}

// --- VQA -----------------------------------------------------------------------

void Hamiltonian::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw std::invalid_argument("Hamiltonian qubit count");
  if (terms.empty()) throw std::invalid_argument("Hamiltonian has no terms");
  for (const auto& term : terms) {
    if (!std::isfinite(term.coefficient)) {
      throw std::invalid_argument("Hamiltonian coefficient is not finite");
    }
    if (term.paulis.size() != static_cast<std::size_t>(n_qubits)) {
      throw std::invalid_argument("Pauli string '" + term.paulis + "' does not cover " +
                                  std::to_string(n_qubits) + " qubits");
    }
    for (char c : term.paulis) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw std::invalid_argument("Pauli string '" + term.paulis + "' has invalid letter");
      }
    }
  }
}

double expectation(const Hamiltonian& h, const StateVector& state) {
  h.validate();
  if (state.n_qubits() != h.n_qubits) {
    throw std::invalid_argument("Hamiltonian and state disagree on qubit count");
  }
  const double r = 1.0 / std::sqrt(2.0);
  const Complex to_x[2][2] = {{r, r}, {r, -r}};  // H
  const Complex to_y[2][2] = {{Complex{r, 0}, Complex{0, -r}},
                              {Complex{r, 0}, Complex{0, r}}};  // H S^dagger
  double energy = 0.0;
  for (const auto& term : h.terms) {
    StateVector rotated = state;
    std::size_t mask = 0;
    for (int q = 0; q < h.n_qubits; ++q) {
      const char p = term.paulis[static_cast<std::size_t>(q)];
      if (p == 'I') continue;
      mask |= std::size_t{1} << q;
      if (p == 'X') apply_matrix(rotated, q, to_x);
      if (p == 'Y') apply_matrix(rotated, q, to_y);
    }
    double value = 0.0;
    for (std::size_t i = 0; i < rotated.dim(); ++i) {
      const double prob = std::norm(rotated[i]);
      value += (std::popcount(i & mask) % 2 == 0) ? prob : -prob;
    }
    energy += term.coefficient * value;
  }
  return energy;
}

double ground_energy(const Hamiltonian& h) {
  h.validate();
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << h.n_qubits);
  Eigen::MatrixXcd matrix = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& term : h.terms) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      auto row = static_cast<std::size_t>(col);
      Complex phase{1.0, 0.0};
      for (int q = 0; q < h.n_qubits; ++q) {
        const bool bit = ((static_cast<std::size_t>(col) >> q) & 1U) != 0;
        switch (term.paulis[static_cast<std::size_t>(q)]) {
          case 'X':
            row ^= std::size_t{1} << q;
            break;
          case 'Y':
            row ^= std::size_t{1} << q;
            phase *= bit ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
            break;
          case 'Z':
            if (bit) phase = -phase;
            break;
          default:
            break;
        }
      }
      matrix(static_cast<Eigen::Index>(row), col) += term.coefficient * phase;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double vqa_total_loss(const CircuitTemplate& circ_a, const CircuitTemplate& circ_b,
                      std::span<const double> params_a, std::span<const double> params_b,
                      const Hamiltonian& h, const LossConfig& cfg) {
  if (circ_a.n_qubits != h.n_qubits || circ_b.n_qubits != h.n_qubits) {
    throw std::invalid_argument("circuit and Hamiltonian disagree on qubit count");
  }
  const double ea = expectation(h, run_circuit(circ_a, params_a, {}));
  const double eb = expectation(h, run_circuit(circ_b, params_b, {}));
  return scalar_loss(ea, eb, cfg);
}

VqaResult vqa_train_demo(const Hamiltonian& h, const PqcSpec& pqc, const VqaRun& run) {
  h.validate();
  if (run.steps < 0) throw std::invalid_argument("vqa steps must be >= 0");
  EncoderSpec no_encoding;
  no_encoding.h_prefix = false;
  const CircuitTemplate circuit = expand_template(h.n_qubits, 0, no_encoding, pqc);
  const auto rules = shift_rules(circuit);

  const Rng root(run.seed);
  auto random_params = [&](std::uint64_t stream) {
    Rng rng = root.split(stream);
    std::vector<double> p(static_cast<std::size_t>(circuit.n_params));
    for (auto& v : p) v = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
  };
  VqaResult result;
  result.params_a = random_params(1);
  result.params_b = random_params(2);
  AdamState opt_a = AdamState::for_size(result.params_a.size(), run.learning_rate);
  AdamState opt_b = AdamState::for_size(result.params_b.size(), run.learning_rate);

  auto energy = [&](std::span<const double> p) {
    return expectation(h, run_circuit(circuit, p, {}));
  };
  auto energy_gradient = [&](std::span<const double> p) {
    const VectorFunction f = [&](std::span<const double> q) {
      return std::vector<double>{energy(q)};
    };
    std::vector<double> g(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      g[j] = shift_derivative(f, p, j, rules[j], kHeadStep).front();
    }
    return g;
  };

  for (int step = 0; step < run.steps; ++step) {
    const double ea = energy(result.params_a);
    const double eb = energy(result.params_b);
    const double h_step = kHeadStep;
    const double dl_dea = (scalar_loss(ea + h_step, eb, run.loss) -
                           scalar_loss(ea - h_step, eb, run.loss)) / (2.0 * h_step);
    const double dl_deb = (scalar_loss(ea, eb + h_step, run.loss) -
                           scalar_loss(ea, eb - h_step, run.loss)) / (2.0 * h_step);
    auto ga = energy_gradient(result.params_a);
    auto gb = energy_gradient(result.params_b);
    for (auto& g : ga) g *= dl_dea;
    for (auto& g : gb) g *= dl_deb;
    result.params_a = adam_step(opt_a, result.params_a, ga);
    result.params_b = adam_step(opt_b, result.params_b, gb);
    const double a[1] = {energy(result.params_a)};
    const double b[1] = {energy(result.params_b)};
    result.combined_trace.push_back(aggregate(a, b, run.loss.aggregator).front());
  }
  result.energy_a = energy(result.params_a);
  result.energy_b = energy(result.params_b);
  const double a[1] = {result.energy_a};
  const double b[1] = {result.energy_b};
  result.combined_energy = aggregate(a, b, run.loss.aggregator).front();
  result.ground_energy = ground_energy(h);
  return result;
}

}  // namespace stiq
