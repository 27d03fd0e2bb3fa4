// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "stiq/harness.hpp"

using namespace stiq;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d  %-34s %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string format(const char* spec, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, spec, args...);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// --- 1 ---------------------------------------------------------------------------

void simulator_equivalence() {
  Timer t;
  double worst = 0.0;
  int circuits = 0;
  for (TemplateId id : {TemplateId::Circuit1, TemplateId::Circuit4, TemplateId::Circuit6,
                        TemplateId::Circuit8, TemplateId::Circuit19}) {
    for (int n : {2, 3, 4}) {
      const CircuitTemplate c = expand_template(n, 2 * n, EncoderSpec{}, PqcSpec{id, 2});
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<double> p(static_cast<std::size_t>(c.n_params)), f(2 * static_cast<std::size_t>(n));
        for (auto& v : p) v = rng.uniform(0, 2 * std::numbers::pi);
        for (auto& v : f) v = rng.uniform(0, 2 * std::numbers::pi);
        const StateVector s = run_circuit(c, p, f);
        const oracle::Vec v = oracle::circuit_state(c, p, f);
        for (std::size_t i = 0; i < s.dim(); ++i) {
          worst = std::max(worst, std::abs(s[i] - v(static_cast<Eigen::Index>(i))));
        }
        ++circuits;
      }
    }
  }
  const double secs = t.seconds();
  report(1, "simulator vs dense oracle", worst <= 1e-10 && secs < 30.0,
         format("%d circuits, max |diff| %.2e (<= 1e-10), %.1f s (< 30 s)", circuits, worst, secs));
}

// --- 2 ---------------------------------------------------------------------------

void gradient_correctness() {
  double worst = 0.0;
  const LossConfig loss{Aggregator::Mean, Divergence::CosineSimilarity, 0.3, DivergenceSpace::Logits};
  Architecture arch;
  arch.n_qubits = 2;
  arch.pqc = {TemplateId::Circuit19, 2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TrainRun run;
    run.seed = seed;
    const StiqPair pair = make_pair(arch, arch, 4, 3, loss, run);
    Rng rng(seed + 1000);
    LabeledSet batch;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> x(4);
      for (auto& v : x) v = rng.uniform(0, 2 * std::numbers::pi);
      batch.x.push_back(x);
      batch.y.push_back(static_cast<int>(rng.below(3)));
    }
    CircuitRunner ra = CircuitRunner::exact(), rb = CircuitRunner::exact();
    Rng sa(0), sb(0);
    const PairGradient g =
        stiq_gradients(pair, batch, GradientEngine{ParameterShift{}, 0}, ra, rb, sa, sb);
    // central differences on the total loss with the partner's outputs fixed
    std::vector<double> packed = pack_parameters(pair.model_a);
    for (std::size_t k = 0; k < packed.size(); ++k) {
      auto eval = [&](double delta) {
        std::vector<double> p = packed;
        p[k] += delta;
        QnnModel a = pair.model_a;
        unpack_parameters(a, p);
        double total = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
          total += total_loss(forward(a, batch.x[i]).logits, forward(pair.model_b, batch.x[i]).logits,
                              batch.y[i], loss)
                       .total;
        }
        return total / static_cast<double>(batch.size());
      };
      const double numeric = (eval(1e-5) - eval(-1e-5)) / 2e-5;
      worst = std::max(worst, std::abs(numeric - g.grad_a[k]));
    }
  }

  int hits = 0;
  const CircuitTemplate ry{1, {GateOp::single(GateKind::RY, 0, ParamSlot{0})}, 1, 0};
  const ScalarFunction z = [&](std::span<const double> p) {
    return expectation_z_all(run_circuit(ry, p, {}))[0];
  };
  const std::vector<double> theta = {0.7};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = gradient(z, theta, GradientEngine{Spsa{0.1, 200}, seed});
    hits += std::abs(d[0] + std::sin(0.7)) <= 0.05;
  }
  report(2, "gradient correctness", worst < 1e-4 && hits >= 95,
         format("shift vs central max dev %.2e (< 1e-4); SPSA within 0.05 for %d/100 (>= 95)",
                worst, hits));
}

// --- 3 ---------------------------------------------------------------------------

void loss_algebra() {
  Rng rng(17);
  double worst = 0.0;
  bool none_exact = true;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y1(4), y2(4);
    for (auto& v : y1) v = rng.uniform(-3, 3);
    for (auto& v : y2) v = rng.uniform(-3, 3);
    const int label = static_cast<int>(rng.below(4));
    for (Divergence d : {Divergence::CosineSimilarity, Divergence::SignedL1, Divergence::SignedL2}) {
      LossConfig a{Aggregator::Mean, d, 0.2, DivergenceSpace::Logits};
      LossConfig b = a;
      b.penalty = 0.9;
      const LossTerms ta = total_loss(y1, y2, label, a), tb = total_loss(y1, y2, label, b);
      // L(0.9) - L(0.2) = 0.7 * D and L(lambda) - lambda * D = L_C
      worst = std::max(worst, std::abs((tb.total - ta.total) - 0.7 * ta.divergence));
      worst = std::max(worst, std::abs(ta.total - 0.2 * ta.divergence - ta.classification));
    }
    const LossConfig none{Aggregator::Mean, Divergence::None, 0.0, DivergenceSpace::Logits};
    none_exact &= total_loss(y1, y2, label, none).total ==
                  cross_entropy(aggregate(y1, y2, Aggregator::Mean), label);
  }
  report(3, "total loss algebra", worst <= 1e-12 && none_exact,
         format("linearity residual %.1e (<= 1e-12); divergence=none equals CE exactly: %s", worst,
                none_exact ? "yes" : "no"));
}

// --- 4..7, 9 share the fixture runs ------------------------------------------------

struct FixtureRuns {
  PreparedData data;
  Architecture arch;
  TrainRun run;
  TrainResult baseline;
  StiqResult stiq;
  double seconds = 0.0;
};

FixtureRuns fixture_runs() {
  FixtureRuns f{prepare("fixture4", 0.7, 42), Architecture{}, TrainRun{}, {}, {}, 0.0};
  f.arch.pqc = {TemplateId::Circuit19, 2};
  f.run.epochs = 30;
  f.run.seed = 42;
  const LossConfig loss{Aggregator::Mean, Divergence::CosineSimilarity, 0.3, DivergenceSpace::Logits};
  const int nf = static_cast<int>(f.data.dataset.n_features);
  const int nc = f.data.dataset.n_classes;
  Timer t;
  f.baseline = train_baseline(initial_model(f.arch, nf, nc, f.run.seed, 0), f.data.train,
                              f.data.test, f.run);
  Timer stiq_timer;
  f.stiq = train_stiq(make_pair(f.arch, f.arch, nf, nc, loss, f.run), f.data.train, f.data.test, f.run);
  f.seconds = stiq_timer.seconds();
  return f;
}

void headline(const FixtureRuns& f) {
  const FinalScores s = final_scores(f.baseline, f.stiq);
  const double base = s.baseline.accuracy;
  const bool fixture_ok = base >= 0.85;
  const bool combined_ok = s.combined.accuracy >= base - 0.05;
  const bool individual_ok = s.qnn1.accuracy <= 0.6 * base && s.qnn2.accuracy <= 0.6 * base;
  const bool time_ok = f.seconds < 300.0;
  report(4, "obfuscation with combined accuracy", fixture_ok && combined_ok && individual_ok && time_ok,
         format("baseline %.3f (>= 0.85), combined %.3f (>= %.3f), qnn1 %.3f qnn2 %.3f (<= %.3f), %.0f s",
                base, s.combined.accuracy, base - 0.05, s.qnn1.accuracy, s.qnn2.accuracy, 0.6 * base,
                f.seconds));
}

void penalty_trend(const FixtureRuns& f) {
  const std::vector<double> grid = {0.1, 0.5, 0.9};
  const LossConfig base{Aggregator::Mean, Divergence::CosineSimilarity, 0.3, DivergenceSpace::Logits};
  const auto rows = sweep_penalty(f.data, f.arch, grid, base, f.run);
  std::vector<double> mean_individual;
  for (const auto& r : rows) mean_individual.push_back(0.5 * (r.scores.qnn1.accuracy + r.scores.qnn2.accuracy));
  const bool combined_ok = rows[2].scores.combined.accuracy <= rows[0].scores.combined.accuracy;
  const bool trend_ok = mean_individual[1] <= mean_individual[0] + 0.03 &&
                        mean_individual[2] <= mean_individual[1] + 0.03;
  report(5, "penalty trend", combined_ok && trend_ok,
         format("combined %.3f/%.3f/%.3f, mean individual %.3f/%.3f/%.3f at lambda 0.1/0.5/0.9",
                rows[0].scores.combined.accuracy, rows[1].scores.combined.accuracy,
                rows[2].scores.combined.accuracy, mean_individual[0], mean_individual[1],
                mean_individual[2]));
}

void noise_robustness(const FixtureRuns& f) {
  const StiqPair& pair = f.stiq.pair;
  const double clean = evaluate(pair, f.data.test).combined.accuracy;
  NoiseConfig med = noise_preset("med");
  med.shots = 1000;
  med.seed = 42;
  NoiseConfig low = noise_preset("low"), high = noise_preset("high");
  low.shots = high.shots = 1000;
  low.seed = 43;
  high.seed = 44;
  const double noisy_med =
      noisy_evaluate(pair.model_a, pair.model_b, pair.loss.aggregator, f.data.test, med, med).combined.accuracy;
  const double noisy_mixed =
      noisy_evaluate(pair.model_a, pair.model_b, pair.loss.aggregator, f.data.test, low, high).combined.accuracy;
  report(6, "noise robustness",
         std::abs(noisy_med - clean) <= 0.05 && std::abs(noisy_mixed - clean) <= 0.08,
         format("noiseless %.3f, MED %.3f (within 0.05), LOW/HIGH %.3f (within 0.08)", clean,
                noisy_med, noisy_mixed));
}

void overhead(const FixtureRuns& f) {
  const double ratio =
      static_cast<double>(f.stiq.circuit_evals) / static_cast<double>(f.baseline.circuit_evals);
  report(7, "overhead bound", ratio <= 2.2,
         format("STIQ %llu vs baseline %llu circuit executions, ratio %.3f (<= 2.2)",
                static_cast<unsigned long long>(f.stiq.circuit_evals),
                static_cast<unsigned long long>(f.baseline.circuit_evals), ratio));
}

// --- 8 ---------------------------------------------------------------------------

void vqa_demo() {
  const Hamiltonian h{1, {{1.0, "Z"}}};
  VqaRun run;
  run.steps = 200;
  run.loss = {Aggregator::Mean, Divergence::SignedL2, 0.1, DivergenceSpace::Logits};
  const VqaResult r = vqa_train_demo(h, PqcSpec{}, run);
  // independent ground truth from the dense Pauli matrix
  const Eigen::SelfAdjointEigenSolver<oracle::Mat> solver(oracle::pauli_string("Z"));
  const double truth = solver.eigenvalues().minCoeff();
  report(8, "VQA two-copy energy", std::abs(r.combined_energy - truth) <= 0.05,
         format("combined energy %.5f, ground %.5f (within 0.05)", r.combined_energy, truth));
}

// --- 9 ---------------------------------------------------------------------------

void determinism(const FixtureRuns& f) {
  const fs::path root = fs::temp_directory_path() / "stiq_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  bool same = true;
  for (const char* cmd : {"train-stiq", "train-baseline"}) {
    std::string first;
    for (const char* dir : {"a", "b"}) {
      const fs::path out = root / (std::string(cmd) + "_" + dir);
      const std::string line = std::string(STIQ_CLI) + " " + cmd +
                               " --dataset fixture4 --epochs 2 --seed 42 --out " + out.string() +
                               " > /dev/null";
      if (std::system(line.c_str()) != 0) same = false;
      const std::string csv = slurp(out / "metrics.csv");
      if (csv.empty()) same = false;
      if (first.empty()) {
        first = csv;
      } else if (csv != first) {
        same = false;
      }
    }
  }

  // persistence: every test query through a reloaded checkpoint
  Checkpoint c;
  c.model = f.stiq.pair.model_a;
  c.scaler = f.data.scaler;
  c.loss = f.stiq.pair.loss;
  const fs::path ckpt = root / "qnn1.json";
  save_checkpoint(c, ckpt);
  const Checkpoint back = load_checkpoint(ckpt);
  bool bit_exact = true;
  for (const auto& x : f.data.test.x) {
    const auto y0 = forward(c.model, x).logits, y1 = forward(back.model, x).logits;
    bit_exact &= y0.size() == y1.size() &&
                 std::memcmp(y0.data(), y1.data(), y0.size() * sizeof(double)) == 0;
  }
  report(9, "determinism and persistence", same && bit_exact,
         format("repeated CLI metrics.csv identical: %s; checkpoint forward bit-exact: %s",
                same ? "yes" : "no", bit_exact ? "yes" : "no"));
}

// --- 10 --------------------------------------------------------------------------

void obfuscation_arithmetic() {
  const auto r = compute_obfuscation({98.3, 0.099}, {22.6, 5.346}, {37.6, 2.915}, {98.3, 0.137});
  report(10, "obfuscation report arithmetic",
         std::abs(r.accuracy_obfuscation - 0.306) <= 0.001 && std::abs(r.loss_delta - 1.38) <= 0.01,
         format("accuracy_obfuscation %.4f (0.306 +- 0.001), loss_delta %.4f (1.38 +- 0.01)",
                r.accuracy_obfuscation, r.loss_delta));
}

}  // namespace

int main() {
  try {
    simulator_equivalence();
    gradient_correctness();
    loss_algebra();
    const FixtureRuns f = fixture_runs();
    headline(f);
    penalty_trend(f);
    noise_robustness(f);
    overhead(f);
    vqa_demo();
    determinism(f);
    obfuscation_arithmetic();
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
