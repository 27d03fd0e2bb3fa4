// Command-line driver for training, evaluation and the experiment sweeps.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stiq/errors.hpp"
#include "stiq/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stiq;

namespace {

struct Options {
  std::string dataset = "fixture4";
  int qubits = 4;
  int layers = 2;
  std::string tmpl = "circuit19";
  std::string encoding = "rz";
  int features_per_qubit = 2;
  bool no_h_prefix = false;
  std::optional<double> lambda;
  std::string divergence = "cosine";
  std::string aggregator = "mean";
  std::string divergence_on = "logits";
  int epochs = 30;
  double lr = 0.01;
  int batch = 32;
  std::uint64_t seed = 42;
  std::string grad = "shift";
  int spsa_reps = 4;
  int shots = 0;
  std::string noise;
  std::string out = ".";
  double train_fraction = 0.7;
  std::uint64_t split_seed = 42;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--dataset", o.dataset, "fixture4, fixture10, synth:k=v,... or a CSV path[@classes]");
  cmd->add_option("--qubits", o.qubits, "qubits per model");
  cmd->add_option("--layers", o.layers, "PQC layers");
  cmd->add_option("--template", o.tmpl, "circuit1, circuit4, circuit6, circuit8 or circuit19");
  cmd->add_option("--encoding", o.encoding, "encoding rotation: rz, ry or rx");
  cmd->add_option("--features-per-qubit", o.features_per_qubit);
  cmd->add_flag("--no-h-prefix", o.no_h_prefix, "skip the Hadamard before each encoding column");
  cmd->add_option("--lambda", o.lambda, "divergence penalty");
  cmd->add_option("--divergence", o.divergence, "cosine, l1, l2 or none");
  cmd->add_option("--aggregator", o.aggregator, "mean, sum, max or product");
  cmd->add_option("--divergence-on", o.divergence_on, "logits or probabilities");
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--batch", o.batch, "mini-batch size");
  cmd->add_option("--seed", o.seed, "seed for initialization, batching and sampling");
  cmd->add_option("--grad", o.grad, "exact, shift or spsa");
  cmd->add_option("--spsa-reps", o.spsa_reps, "SPSA estimates averaged per step");
  cmd->add_option("--shots", o.shots, "measurement shots (0 = exact expectations)");
  cmd->add_option("--noise", o.noise, "none, low, med, high or p1=..,p2=..,ro=..,shots=..");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--train-fraction", o.train_fraction);
  cmd->add_option("--split-seed", o.split_seed);
}

Architecture architecture(const Options& o) {
  Architecture a;
  a.n_qubits = o.qubits;
  a.encoder.gate = parse_encoding_gate(o.encoding);
  a.encoder.features_per_qubit = o.features_per_qubit;
  a.encoder.h_prefix = !o.no_h_prefix;
  a.pqc.id = parse_template_id(o.tmpl);
  a.pqc.n_layers = o.layers;
  return a;
}

LossConfig loss_config(const Options& o) {
  LossConfig l;
  l.aggregator = parse_aggregator(o.aggregator);
  l.divergence = parse_divergence(o.divergence);
  l.divergence_on = parse_divergence_space(o.divergence_on);
  l.penalty = o.lambda.value_or(default_penalty(l.divergence));
  l.validate();
  return l;
}

/// Preset name or comma-separated key=value overrides on a zero config.
std::optional<NoiseConfig> noise_config(const std::string& spec, int shots, std::uint64_t seed) {
  if (spec.empty()) return std::nullopt;
  NoiseConfig cfg;
  if (spec.find('=') == std::string::npos) {
    cfg = noise_preset(spec);
  } else {
    std::stringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("noise item '" + item + "'");
      const std::string key = item.substr(0, eq);
      const double v = std::stod(item.substr(eq + 1));
      if (key == "p1") {
        cfg.p1 = v;
      } else if (key == "p2") {
        cfg.p2 = v;
      } else if (key == "ro") {
        cfg.readout_01 = cfg.readout_10 = v;
      } else if (key == "ro01") {
        cfg.readout_01 = v;
      } else if (key == "ro10") {
        cfg.readout_10 = v;
      } else if (key == "shots") {
        cfg.shots = static_cast<int>(v);
      } else {
        throw std::invalid_argument("unknown noise key '" + key + "'");
      }
    }
  }
  if (shots > 0) cfg.shots = shots;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

TrainRun train_run(const Options& o) {
  TrainRun run;
  run.epochs = o.epochs;
  run.batch_size = o.batch;
  run.seed = o.seed;
  run.learning_rate = o.lr;
  run.shots = o.shots;
  if (o.grad == "shift") {
    run.engine.kind = ParameterShift{};
  } else if (o.grad == "exact") {
    run.engine.kind = ExactNumeric{};
  } else if (o.grad == "spsa") {
    Spsa spsa;
    spsa.reps = o.spsa_reps;
    run.engine.kind = spsa;
  } else {
    throw std::invalid_argument("unknown gradient engine '" + o.grad + "'");
  }
  run.engine.seed = o.seed;
  run.noise = noise_config(o.noise, o.shots, o.seed);
  run.validate();
  return run;
}

json score_json(const ClassificationScore& s) {
  return {{"accuracy", s.accuracy}, {"loss", s.loss}};
}

json config_json(const Options& o) {
  json j = {{"dataset", o.dataset},       {"qubits", o.qubits},
            {"layers", o.layers},         {"template", o.tmpl},
            {"encoding", o.encoding},     {"features_per_qubit", o.features_per_qubit},
            {"h_prefix", !o.no_h_prefix}, {"divergence", o.divergence},
            {"aggregator", o.aggregator}, {"divergence_on", o.divergence_on},
            {"epochs", o.epochs},         {"lr", o.lr},
            {"batch", o.batch},           {"seed", o.seed},
            {"grad", o.grad},             {"shots", o.shots},
            {"noise", o.noise},           {"train_fraction", o.train_fraction},
            {"split_seed", o.split_seed}};
  j["lambda"] = o.lambda ? json(*o.lambda) : json(nullptr);
  return j;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  write_file(path, s.str());
}

Checkpoint make_checkpoint(const QnnModel& model, const PreparedData& data, const Options& o,
                           const LossConfig& loss, const std::string& role, int member,
                           const std::vector<MetricsRow>& metrics,
                           std::optional<ClassificationScore> MetricsRow::*score) {
  Checkpoint c;
  c.model = model;
  c.scaler = data.scaler;
  c.loss = loss;
  c.role = role;
  c.seed = o.seed;
  c.member = member;
  c.dataset = o.dataset;
  c.split_seed = o.split_seed;
  c.train_fraction = o.train_fraction;
  if (!metrics.empty()) c.final_test = metrics.back().*score;
  return c;
}

PreparedData prepared(const Options& o) {
  return prepare(o.dataset, o.train_fraction, o.split_seed);
}

/// Test split the checkpoint was trained against, unless overridden.
PreparedData data_for(const Checkpoint& c, const std::string& override_spec) {
  const std::string spec = override_spec.empty() ? c.dataset : override_spec;
  return prepare(spec, c.train_fraction, c.split_seed);
}

std::vector<double> numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

// --- subcommands -------------------------------------------------------------------

int cmd_train_baseline(const Options& o) {
  const PreparedData data = prepared(o);
  const TrainRun run = train_run(o);
  const LossConfig loss = loss_config(o);
  QnnModel model = initial_model(architecture(o), static_cast<int>(data.dataset.n_features),
                                 data.dataset.n_classes, run.seed, 0);
  const TrainResult result = train_baseline(std::move(model), data.train, data.test, run);
  const fs::path dir = out_dir(o);
  write_with(dir / "metrics.csv", [&](std::ostream& s) { write_metrics_csv(s, result.metrics); });
  write_with(dir / "timing.csv", [&](std::ostream& s) { write_timing_csv(s, result.metrics); });
  save_checkpoint(make_checkpoint(result.model, data, o, loss, "baseline", 0, result.metrics,
                                  &MetricsRow::baseline),
                  dir / "baseline.json");
  json report = {{"config", config_json(o)}, {"circuit_evals", result.circuit_evals}};
  if (!result.metrics.empty()) report["baseline"] = score_json(*result.metrics.back().baseline);
  write_file(dir / "report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_train_stiq(const Options& o, const Options& b_over, bool has_b_template, bool has_b_qubits,
                   bool has_b_layers) {
  const PreparedData data = prepared(o);
  const TrainRun run = train_run(o);
  const LossConfig loss = loss_config(o);
  const Architecture arch_a = architecture(o);
  Architecture arch_b = arch_a;
  if (has_b_template) arch_b.pqc.id = parse_template_id(b_over.tmpl);
  if (has_b_qubits) arch_b.n_qubits = b_over.qubits;
  if (has_b_layers) arch_b.pqc.n_layers = b_over.layers;
  const int nf = static_cast<int>(data.dataset.n_features);
  const int nc = data.dataset.n_classes;

  QnnModel base_model = initial_model(arch_a, nf, nc, run.seed, 0);
  const TrainResult baseline = train_baseline(std::move(base_model), data.train, data.test, run);
  const StiqResult stiq =
      train_stiq(make_pair(arch_a, arch_b, nf, nc, loss, run), data.train, data.test, run);

  const fs::path dir = out_dir(o);
  write_with(dir / "metrics.csv",
             [&](std::ostream& s) { write_metrics_csv(s, stiq.metrics, baseline.metrics); });
  write_with(dir / "timing.csv",
             [&](std::ostream& s) { write_timing_csv(s, stiq.metrics, baseline.metrics); });
  save_checkpoint(make_checkpoint(baseline.model, data, o, loss, "baseline", 0, baseline.metrics,
                                  &MetricsRow::baseline),
                  dir / "baseline.json");
  save_checkpoint(make_checkpoint(stiq.pair.model_a, data, o, loss, "qnn1", 0, stiq.metrics,
                                  &MetricsRow::qnn1),
                  dir / "qnn1.json");
  save_checkpoint(make_checkpoint(stiq.pair.model_b, data, o, loss, "qnn2", 1, stiq.metrics,
                                  &MetricsRow::qnn2),
                  dir / "qnn2.json");

  json report = {{"config", config_json(o)},
                 {"lambda", loss.penalty},
                 {"baseline_evals", baseline.circuit_evals},
                 {"stiq_evals", stiq.circuit_evals}};
  if (!stiq.metrics.empty()) {
    const FinalScores s = final_scores(baseline, stiq);
    const ObfuscationReport r = compute_obfuscation(s.baseline, s.qnn1, s.qnn2, s.combined);
    report["scores"] = {{"baseline", score_json(s.baseline)},
                        {"qnn1", score_json(s.qnn1)},
                        {"qnn2", score_json(s.qnn2)},
                        {"combined", score_json(s.combined)}};
    report["obfuscation"] = {{"accuracy_obfuscation", r.accuracy_obfuscation},
                             {"loss_obfuscation", r.loss_obfuscation},
                             {"accuracy_delta", r.accuracy_delta},
                             {"loss_delta", r.loss_delta}};
  }
  write_file(dir / "report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_sweep_penalty(const Options& o, const std::string& grid_text) {
  const std::vector<double> grid = numbers(grid_text, "--grid");
  const PreparedData data = prepared(o);
  const auto rows = sweep_penalty(data, architecture(o), grid, loss_config(o), train_run(o));
  std::ostringstream s;
  write_penalty_csv(s, rows);
  write_file(out_dir(o) / "penalty.csv", s.str());
  std::cout << s.str();
  return 0;
}

int cmd_compare_divergence(const Options& o, const std::string& kinds_text) {
  std::vector<Divergence> kinds;
  std::stringstream in(kinds_text);
  std::string item;
  while (std::getline(in, item, ',')) kinds.push_back(parse_divergence(item));
  const PreparedData data = prepared(o);
  const auto rows =
      compare_divergences(data, architecture(o), kinds, loss_config(o), train_run(o), o.lambda);
  std::ostringstream s;
  write_divergence_csv(s, rows);
  write_file(out_dir(o) / "divergence.csv", s.str());
  std::cout << s.str();
  return 0;
}

int cmd_eval(const Options& o, const std::string& ckpt_path, bool dataset_given) {
  const Checkpoint c = load_checkpoint(ckpt_path);
  const PreparedData data = data_for(c, dataset_given ? o.dataset : "");
  const ClassificationScore s = evaluate(c.model, data.test);
  json out = {{"checkpoint", ckpt_path}, {"role", c.role}, {"test", score_json(s)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_noisy_eval(const Options& o, const std::string& path_a, const std::string& path_b,
                   const std::string& noise_b, bool dataset_given) {
  const Checkpoint a = load_checkpoint(path_a);
  const PreparedData data = data_for(a, dataset_given ? o.dataset : "");
  const std::string spec_a = o.noise.empty() ? "med" : o.noise;
  const NoiseConfig cfg_a = *noise_config(spec_a, o.shots, o.seed);
  json out = {{"noise_a", spec_a}};
  if (path_b.empty()) {
    out["noiseless"] = score_json(evaluate(a.model, data.test));
    out["noisy"] = score_json(noisy_evaluate(a.model, data.test, cfg_a));
  } else {
    const Checkpoint b = load_checkpoint(path_b);
    if (a.loss.aggregator != b.loss.aggregator) {
      throw std::invalid_argument("checkpoints record different aggregators");
    }
    const std::string spec_b = noise_b.empty() ? spec_a : noise_b;
    NoiseConfig cfg_b = *noise_config(spec_b, o.shots, o.seed);
    StiqPair pair;
    pair.model_a = a.model;
    pair.model_b = b.model;
    pair.loss = a.loss;
    const PairScores clean = evaluate(pair, data.test);
    const PairScores noisy =
        noisy_evaluate(a.model, b.model, a.loss.aggregator, data.test, cfg_a, cfg_b);
    out["noise_b"] = spec_b;
    out["noiseless"] = {{"qnn1", score_json(clean.qnn1)},
                        {"qnn2", score_json(clean.qnn2)},
                        {"combined", score_json(clean.combined)}};
    out["noisy"] = {{"qnn1", score_json(noisy.qnn1)},
                    {"qnn2", score_json(noisy.qnn2)},
                    {"combined", score_json(noisy.combined)}};
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_split_infer(const Options& o, const std::string& path_a, const std::string& path_b,
                    const std::string& query, int index, const std::string& noise_b,
                    bool dataset_given) {
  const Checkpoint a = load_checkpoint(path_a);
  const Checkpoint b = load_checkpoint(path_b);
  if (a.model.n_classes != b.model.n_classes) {
    throw std::invalid_argument("checkpoints disagree on n_classes");
  }
  const auto na = noise_config(o.noise, o.shots, o.seed);
  const auto nb = noise_config(noise_b.empty() ? o.noise : noise_b, o.shots, o.seed + 1);
  const fs::path dir = out_dir(o);
  std::ofstream log(dir / "adversary.log", std::ios::binary);
  if (!log) throw DataError("cannot write adversary log");

  auto vec = [](const PredictionVector& p) { return json{{"logits", p.logits}, {"probabilities", p.probabilities}}; };
  if (!query.empty() || index >= 0) {
    std::vector<double> raw;
    std::optional<int> label;
    if (!query.empty()) {
      raw = numbers(query, "--query");
    } else {
      const PreparedData data = data_for(a, dataset_given ? o.dataset : "");
      const auto i = static_cast<std::size_t>(index);
      if (i >= data.dataset.test.size()) throw std::invalid_argument("--index out of range");
      const auto row = data.dataset.row(data.dataset.test[i]);
      raw.assign(row.begin(), row.end());
      label = data.dataset.labels[data.dataset.test[i]];
    }
    const SplitInference r = split_infer(a, b, raw, na, nb, &log);
    json out = {{"y1", vec(r.y1)}, {"y2", vec(r.y2)}, {"combined", vec(r.combined)},
                {"predicted", predict_class(r.combined)}};
    if (label) out["label"] = *label;
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  // Whole test split: how often the aggregate is right while a provider is wrong.
  const PreparedData data = data_for(a, dataset_given ? o.dataset : "");
  std::size_t combined_right = 0, hidden = 0;
  for (std::size_t i : data.dataset.test) {
    const auto row = data.dataset.row(i);
    const SplitInference r = split_infer(a, b, row, na, nb, &log);
    const int label = data.dataset.labels[i];
    const bool ok = predict_class(r.combined) == label;
    combined_right += ok;
    hidden += ok && (predict_class(r.y1) != label || predict_class(r.y2) != label);
  }
  const auto n = static_cast<double>(data.dataset.test.size());
  json out = {{"queries", data.dataset.test.size()},
              {"combined_accuracy", combined_right / n},
              {"combined_right_individual_wrong", hidden / n}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_scalability(Options o, const std::string& sizes_text, bool grad_given,
                    bool dataset_given, bool timing) {
  if (!grad_given) o.grad = "spsa";
  if (!dataset_given) o.dataset = "fixture10";
  std::vector<int> sizes;
  for (double v : numbers(sizes_text, "--sizes")) sizes.push_back(static_cast<int>(v));
  const PreparedData data = prepared(o);
  const auto rows = scalability_sweep(data, sizes, architecture(o), loss_config(o), train_run(o));
  std::ostringstream s;
  write_scalability_csv(s, rows, timing);
  write_file(out_dir(o) / "scalability.csv", s.str());
  std::cout << s.str();
  return 0;
}

int cmd_vqa(Options o, const std::string& hamiltonian, int steps, bool lr_given,
            bool divergence_given) {
  const Hamiltonian h = parse_hamiltonian(hamiltonian);
  if (!divergence_given) o.divergence = "l2";
  VqaRun run;
  run.steps = steps;
  run.seed = o.seed;
  if (lr_given) run.learning_rate = o.lr;
  run.loss = loss_config(o);
  if (!o.lambda) run.loss.penalty = 0.1;
  PqcSpec pqc;
  pqc.id = parse_template_id(o.tmpl);
  pqc.n_layers = o.layers;
  const VqaResult r = vqa_train_demo(h, pqc, run);
  const fs::path dir = out_dir(o);
  write_with(dir / "vqa.csv", [&](std::ostream& s) {
    s << "step,combined_energy\n";
    for (std::size_t i = 0; i < r.combined_trace.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10f", r.combined_trace[i]);
      s << i + 1 << ',' << buf << '\n';
    }
  });
  json out = {{"hamiltonian", hamiltonian},   {"lambda", run.loss.penalty},
              {"energy_a", r.energy_a},       {"energy_b", r.energy_b},
              {"combined_energy", r.combined_energy}, {"ground_energy", r.ground_energy}};
  write_file(dir / "report.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-trained obfuscated quantum classifiers"};
  app.require_subcommand(1);
  Options o;

  auto* baseline = app.add_subcommand("train-baseline", "train a single QNN");
  add_common(baseline, o);

  Options b_over;
  auto* stiq = app.add_subcommand("train-stiq", "train an obfuscated pair and its baseline");
  add_common(stiq, o);
  auto* opt_tb = stiq->add_option("--template-b", b_over.tmpl, "template for the second model");
  auto* opt_qb = stiq->add_option("--qubits-b", b_over.qubits, "qubits for the second model");
  auto* opt_lb = stiq->add_option("--layers-b", b_over.layers, "layers for the second model");

  std::string grid = "0.1,0.3,0.5,0.7,0.9";
  auto* sweep = app.add_subcommand("sweep-penalty", "final accuracies over a penalty grid");
  add_common(sweep, o);
  sweep->add_option("--grid", grid, "comma-separated penalties");

  std::string kinds = "cosine,l1,l2";
  auto* compare = app.add_subcommand("compare-divergence", "final metrics per divergence kind");
  add_common(compare, o);
  compare->add_option("--kinds", kinds, "comma-separated divergence kinds");

  std::string ckpt, ckpt_a, ckpt_b, noise_b, query;
  int index = -1;
  auto* eval = app.add_subcommand("eval", "score a checkpoint on its test split");
  add_common(eval, o);
  eval->add_option("--checkpoint", ckpt)->required();

  auto* noisy = app.add_subcommand("noisy-eval", "score checkpoints under emulated noise");
  add_common(noisy, o);
  noisy->add_option("--checkpoint-a", ckpt_a)->required();
  noisy->add_option("--checkpoint-b", ckpt_b);
  noisy->add_option("--noise-b", noise_b, "noise for the second provider");

  auto* split = app.add_subcommand("split-infer", "query two providers and aggregate locally");
  add_common(split, o);
  split->add_option("--checkpoint-a", ckpt_a)->required();
  split->add_option("--checkpoint-b", ckpt_b)->required();
  split->add_option("--query", query, "comma-separated raw features");
  split->add_option("--index", index, "test-split row to query");
  split->add_option("--noise-b", noise_b, "noise for the second provider");

  std::string sizes = "4,8,12,16";
  bool timing = false;
  auto* scal = app.add_subcommand("scalability", "baseline vs pair across qubit counts");
  add_common(scal, o);
  scal->add_option("--sizes", sizes, "comma-separated qubit counts");
  scal->add_flag("--timing", timing, "append wall-time columns");

  std::string hamiltonian = "Z";
  int steps = 200;
  auto* vqa = app.add_subcommand("vqa-demo", "two-copy variational energy minimization");
  add_common(vqa, o);
  vqa->add_option("--hamiltonian", hamiltonian, "e.g. 'Z' or '0.5*ZZ + 1*XI'");
  vqa->add_option("--steps", steps);

  int classes = 4, features = 8, samples = 1000;
  double separation = kFixtureSeparation;
  std::string file = "synth.csv";
  auto* synth = app.add_subcommand("synth-data", "write a Gaussian-blob CSV");
  synth->add_option("--classes", classes);
  synth->add_option("--features", features);
  synth->add_option("--samples", samples);
  synth->add_option("--separation", separation);
  synth->add_option("--seed", o.seed);
  synth->add_option("--file", file, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*baseline) return cmd_train_baseline(o);
    if (*stiq) {
      return cmd_train_stiq(o, b_over, opt_tb->count() > 0, opt_qb->count() > 0,
                            opt_lb->count() > 0);
    }
    if (*sweep) return cmd_sweep_penalty(o, grid);
    if (*compare) return cmd_compare_divergence(o, kinds);
    if (*eval) return cmd_eval(o, ckpt, eval->count("--dataset") > 0);
    if (*noisy) return cmd_noisy_eval(o, ckpt_a, ckpt_b, noise_b, noisy->count("--dataset") > 0);
    if (*split) {
      return cmd_split_infer(o, ckpt_a, ckpt_b, query, index, noise_b,
                             split->count("--dataset") > 0);
    }
    if (*scal) {
      return cmd_scalability(o, sizes, scal->count("--grad") > 0, scal->count("--dataset") > 0,
                             timing);
    }
    if (*vqa) {
      return cmd_vqa(o, hamiltonian, steps, vqa->count("--lr") > 0,
                     vqa->count("--divergence") > 0);
    }
    if (*synth) {
      Dataset ds = synth_blobs(classes, features, samples, separation, o.seed);
      save_csv(ds, file);
      std::cout << "wrote " << ds.size() << " rows to " << file << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
