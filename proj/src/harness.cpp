#include "stiq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include "json.hpp"
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stiq/errors.hpp"

namespace stiq {

using nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string percent(double fraction) { return fmt("%.2f", 100.0 * fraction); }
std::string loss_text(double loss) { return fmt("%.6f", loss); }

void write_score(std::ostream& out, const std::optional<ClassificationScore>& s) {
  if (s) {
    out << ',' << percent(s->accuracy) << ',' << loss_text(s->loss);
  } else {
    out << ",,";
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw std::invalid_argument(what + ": '" + text + "' is not a number");
  return v;
}

// --- checkpoint schema helpers --------------------------------------------------

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  const json& field(const json& obj, const std::string& parent, const std::string& key) const {
    const std::string name = parent.empty() ? key : parent + "." + key;
    if (!obj.is_object() || !obj.contains(key)) fail(name, "missing field");
    return obj.at(key);
  }

  template <class T>
  T get(const json& obj, const std::string& parent, const std::string& key) const {
    const json& v = field(obj, parent, key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(parent.empty() ? key : parent + "." + key, "wrong type");
    }
  }

  [[noreturn]] void fail(const std::string& name, const std::string& why) const {
    throw DataError("checkpoint " + origin_ + ": " + why + " '" + name + "'");
  }

 private:
  std::string origin_;
};

json score_json(const ClassificationScore& s) { return {{"accuracy", s.accuracy}, {"loss", s.loss}}; }

ClassificationScore last_or_evaluate(const std::vector<MetricsRow>& rows,
                                     std::optional<ClassificationScore> MetricsRow::*member) {
  if (rows.empty() || !(rows.back().*member)) {
    throw std::invalid_argument("run produced no metrics");
  }
  return *(rows.back().*member);
}

}  // namespace

// --- reporting -----------------------------------------------------------------

ObfuscationReport compute_obfuscation(const ClassificationScore& baseline,
                                      const ClassificationScore& q1,
                                      const ClassificationScore& q2,
                                      const ClassificationScore& combined) {
  if (!(baseline.accuracy > 0.0) || !(baseline.loss > 0.0)) {
    throw std::invalid_argument("baseline accuracy and loss must be positive");
  }
  ObfuscationReport r;
  r.accuracy_obfuscation = 0.5 * (q1.accuracy + q2.accuracy) / baseline.accuracy;
  r.loss_obfuscation = 0.5 * (q1.loss + q2.loss) / baseline.loss;
  r.accuracy_delta = combined.accuracy / baseline.accuracy;
  r.loss_delta = combined.loss / baseline.loss;
  return r;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows,
                       std::span<const MetricsRow> baseline) {
  out << "epoch,baseline_acc,baseline_loss,qnn1_acc,qnn1_loss,qnn2_acc,qnn2_loss,"
         "combined_acc,combined_loss,train_loss,train_acc,circuit_evals,baseline_evals\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MetricsRow& row = rows[i];
    const MetricsRow* base = i < baseline.size() ? &baseline[i] : nullptr;
    out << row.epoch;
    write_score(out, base ? base->baseline : row.baseline);
    write_score(out, row.qnn1);
    write_score(out, row.qnn2);
    write_score(out, row.combined);
    out << ',' << loss_text(row.train_loss) << ',' << percent(row.train_accuracy) << ','
        << row.circuit_evals << ',';
    if (base) out << base->circuit_evals;
    out << '\n';
  }
}

void write_timing_csv(std::ostream& out, std::span<const MetricsRow> rows,
                      std::span<const MetricsRow> baseline) {
  out << "epoch,wall_seconds,baseline_wall_seconds\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].epoch << ',' << fmt("%.4f", rows[i].wall_seconds) << ',';
    if (i < baseline.size()) out << fmt("%.4f", baseline[i].wall_seconds);
    out << '\n';
  }
}

// --- datasets ------------------------------------------------------------------

Dataset fixture4() {
  Dataset ds = synth_blobs(kFixtureClasses, kFixtureFeatures, kFixtureSamples,
                           kFixtureSeparation, kFixtureSeed);
  ds.name = "fixture4";
  return ds;
}

Dataset fixture10() {
  Dataset ds = synth_blobs(10, kFixtureFeatures, kFixture10Samples, kFixtureSeparation * 1.5,
                           kFixtureSeed);
  ds.name = "fixture10";
  return ds;
}

Dataset load_dataset(const std::string& spec) {
  if (spec == "fixture4") return fixture4();
  if (spec == "fixture10") return fixture10();
  if (spec.rfind("synth:", 0) == 0 || spec == "synth") {
    int classes = kFixtureClasses;
    int d = kFixtureFeatures;
    int n = kFixtureSamples;
    double sep = kFixtureSeparation;
    std::uint64_t seed = kFixtureSeed;
    const std::string body = spec.size() > 6 ? spec.substr(6) : std::string{};
    for (const auto& item : split_on(body, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("synth spec item '" + item + "'");
      const std::string key = item.substr(0, eq);
      const double value = parse_number(item.substr(eq + 1), "synth " + key);
      if (key == "classes") {
        classes = static_cast<int>(value);
      } else if (key == "d") {
        d = static_cast<int>(value);
      } else if (key == "n") {
        n = static_cast<int>(value);
      } else if (key == "sep") {
        sep = value;
      } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(value);
      } else {
        throw std::invalid_argument("unknown synth key '" + key + "'");
      }
    }
    Dataset ds = synth_blobs(classes, d, n, sep, seed);
    ds.name = spec;
    return ds;
  }
  std::string path = spec;
  std::vector<int> subset;
  if (const auto at = spec.rfind('@'); at != std::string::npos) {
    path = spec.substr(0, at);
    for (const auto& item : split_on(spec.substr(at + 1), ',')) {
      subset.push_back(static_cast<int>(parse_number(item, "class subset")));
    }
  }
  return load_csv(path, subset);
}

PreparedData prepare(const std::string& spec, double train_fraction, std::uint64_t split_seed) {
  return prepare(load_dataset(spec), spec, train_fraction, split_seed);
}

PreparedData prepare(Dataset ds, std::string spec, double train_fraction,
                     std::uint64_t split_seed) {
  PreparedData out;
  out.spec = std::move(spec);
  out.dataset = stratified_split(std::move(ds), train_fraction, split_seed);
  const auto train_rows = out.dataset.rows(out.dataset.train);
  out.scaler = FeatureScaler::fit(train_rows, 0.0, 2.0 * std::numbers::pi);
  auto scaled = [&](const std::vector<std::size_t>& idx) {
    LabeledSet set = out.dataset.select(idx);
    for (auto& x : set.x) x = out.scaler.transform(x);
    return set;
  };
  out.train = scaled(out.dataset.train);
  out.test = scaled(out.dataset.test);
  return out;
}

// --- checkpoints ---------------------------------------------------------------

std::string checkpoint_to_string(const Checkpoint& c) {
  const QnnModel& m = c.model;
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["role"] = c.role;
  doc["model"] = {
      {"n_qubits", m.n_qubits},
      {"n_features", m.n_features},
      {"n_classes", m.n_classes},
      {"encoder",
       {{"gate", to_string(m.encoder.gate)},
        {"features_per_qubit", m.encoder.features_per_qubit},
        {"h_prefix", m.encoder.h_prefix}}},
      {"pqc", {{"template", to_string(m.pqc.id)}, {"layers", m.pqc.n_layers}}},
      {"theta", m.theta},
      {"head_weights", m.head_weights},
      {"head_bias", m.head_bias},
  };
  if (c.scaler) {
    doc["scaler"] = {{"lo", c.scaler->lo},
                     {"hi", c.scaler->hi},
                     {"min", c.scaler->min},
                     {"max", c.scaler->max}};
  } else {
    doc["scaler"] = nullptr;
  }
  doc["loss"] = {{"aggregator", to_string(c.loss.aggregator)},
                 {"divergence", to_string(c.loss.divergence)},
                 {"penalty", c.loss.penalty},
                 {"divergence_on", to_string(c.loss.divergence_on)}};
  doc["lineage"] = {{"seed", c.seed},
                    {"member", c.member},
                    {"dataset", c.dataset},
                    {"split_seed", c.split_seed},
                    {"train_fraction", c.train_fraction}};
  doc["metrics"] = c.final_test ? score_json(*c.final_test) : json(nullptr);
  return doc.dump(2) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text, const std::string& origin) {
  const Reader r(origin);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint " + origin + ": not valid JSON (" + e.what() + ")");
  }
  if (r.get<std::string>(doc, "", "format") != kCheckpointFormat) r.fail("format", "unknown");
  const int version = r.get<int>(doc, "", "version");
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint " + origin + ": version " + std::to_string(version) +
                    " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  c.role = r.get<std::string>(doc, "", "role");

  const json& m = r.field(doc, "", "model");
  const json& enc = r.field(m, "model", "encoder");
  const json& pqc = r.field(m, "model", "pqc");
  Architecture arch;
  arch.n_qubits = r.get<int>(m, "model", "n_qubits");
  try {
    arch.encoder.gate = parse_encoding_gate(r.get<std::string>(enc, "model.encoder", "gate"));
    arch.pqc.id = parse_template_id(r.get<std::string>(pqc, "model.pqc", "template"));
  } catch (const std::invalid_argument& e) {
    throw DataError("checkpoint " + origin + ": " + e.what());
  }
  arch.encoder.features_per_qubit = r.get<int>(enc, "model.encoder", "features_per_qubit");
  arch.encoder.h_prefix = r.get<bool>(enc, "model.encoder", "h_prefix");
  arch.pqc.n_layers = r.get<int>(pqc, "model.pqc", "layers");
  try {
    c.model = make_model(arch, r.get<int>(m, "model", "n_features"),
                         r.get<int>(m, "model", "n_classes"),
                         r.get<std::vector<double>>(m, "model", "theta"),
                         r.get<std::vector<double>>(m, "model", "head_weights"),
                         r.get<std::vector<double>>(m, "model", "head_bias"));
  } catch (const std::invalid_argument& e) {
    throw DataError("checkpoint " + origin + ": inconsistent model: " + e.what());
  }

  const json& s = r.field(doc, "", "scaler");
  if (!s.is_null()) {
    FeatureScaler scaler;
    scaler.lo = r.get<double>(s, "scaler", "lo");
    scaler.hi = r.get<double>(s, "scaler", "hi");
    scaler.min = r.get<std::vector<double>>(s, "scaler", "min");
    scaler.max = r.get<std::vector<double>>(s, "scaler", "max");
    if (scaler.min.size() != scaler.max.size()) r.fail("scaler.max", "length mismatch in");
    c.scaler = std::move(scaler);
  }

  const json& l = r.field(doc, "", "loss");
  try {
    c.loss.aggregator = parse_aggregator(r.get<std::string>(l, "loss", "aggregator"));
    c.loss.divergence = parse_divergence(r.get<std::string>(l, "loss", "divergence"));
    c.loss.divergence_on = parse_divergence_space(r.get<std::string>(l, "loss", "divergence_on"));
  } catch (const std::invalid_argument& e) {
    throw DataError("checkpoint " + origin + ": " + e.what());
  }
  c.loss.penalty = r.get<double>(l, "loss", "penalty");

  const json& lin = r.field(doc, "", "lineage");
  c.seed = r.get<std::uint64_t>(lin, "lineage", "seed");
  c.member = r.get<int>(lin, "lineage", "member");
  c.dataset = r.get<std::string>(lin, "lineage", "dataset");
  c.split_seed = r.get<std::uint64_t>(lin, "lineage", "split_seed");
  c.train_fraction = r.get<double>(lin, "lineage", "train_fraction");

  const json& met = r.field(doc, "", "metrics");
  if (!met.is_null()) {
    c.final_test = ClassificationScore{r.get<double>(met, "metrics", "accuracy"),
                                       r.get<double>(met, "metrics", "loss")};
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(ckpt);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str(), path.string());
}

// --- split inference -----------------------------------------------------------

SplitInference split_infer(const Checkpoint& a, const Checkpoint& b,
                           std::span<const double> raw_features,
                           const std::optional<NoiseConfig>& noise_a,
                           const std::optional<NoiseConfig>& noise_b, std::ostream* adversary_log) {
  if (a.model.n_classes != b.model.n_classes) {
    throw std::invalid_argument("split_infer: checkpoints disagree on n_classes (" +
                                std::to_string(a.model.n_classes) + " vs " +
                                std::to_string(b.model.n_classes) + ")");
  }
  if (a.loss.aggregator != b.loss.aggregator) {
    throw std::invalid_argument("split_infer: checkpoints record different aggregators");
  }
  auto provider = [&](const Checkpoint& c, const std::optional<NoiseConfig>& noise,
                      const char* name) {
    const std::vector<double> x =
        c.scaler ? c.scaler->transform(raw_features)
                 : std::vector<double>(raw_features.begin(), raw_features.end());
    PredictionVector y = noise ? noisy_forward(c.model, x, *noise) : forward(c.model, x);
    if (adversary_log) {
      *adversary_log << "provider=" << name << " logits=";
      for (std::size_t k = 0; k < y.logits.size(); ++k) {
        *adversary_log << (k ? "," : "") << fmt("%.17g", y.logits[k]);
      }
      *adversary_log << '\n';
    }
    return y;
  };
  SplitInference out;
  out.y1 = provider(a, noise_a, "A");
  out.y2 = provider(b, noise_b, "B");
  out.combined = make_prediction(aggregate(out.y1.logits, out.y2.logits, a.loss.aggregator));
  return out;
}

// --- experiments ---------------------------------------------------------------

FinalScores final_scores(const TrainResult& baseline, const StiqResult& pair) {
  return {last_or_evaluate(baseline.metrics, &MetricsRow::baseline),
          last_or_evaluate(pair.metrics, &MetricsRow::qnn1),
          last_or_evaluate(pair.metrics, &MetricsRow::qnn2),
          last_or_evaluate(pair.metrics, &MetricsRow::combined)};
}

namespace {

TrainResult run_baseline(const PreparedData& data, const Architecture& arch,
                         const TrainRun& run) {
  QnnModel model = initial_model(arch, static_cast<int>(data.dataset.n_features),
                                 data.dataset.n_classes, run.seed, 0);
  return train_baseline(std::move(model), data.train, data.test, run);
}

StiqResult run_stiq(const PreparedData& data, const Architecture& arch, const LossConfig& loss,
                    const TrainRun& run) {
  StiqPair pair = make_pair(arch, arch, static_cast<int>(data.dataset.n_features),
                            data.dataset.n_classes, loss, run);
  return train_stiq(std::move(pair), data.train, data.test, run);
}

template <class T>
std::vector<T> collect(std::vector<std::future<T>>& jobs) {
  std::vector<T> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

}  // namespace

std::vector<PenaltyRow> sweep_penalty(const PreparedData& data, const Architecture& arch,
                                      std::span<const double> grid, const LossConfig& base,
                                      const TrainRun& run) {
  if (grid.empty()) throw std::invalid_argument("penalty grid is empty");
  auto baseline_job = std::async(std::launch::async, [&] { return run_baseline(data, arch, run); });
  std::vector<std::future<StiqResult>> jobs;
  for (double lambda : grid) {
    LossConfig loss = base;
    loss.penalty = lambda;
    loss.validate();
    jobs.push_back(std::async(std::launch::async,
                              [&data, &arch, &run, loss] { return run_stiq(data, arch, loss, run); }));
  }
  const TrainResult baseline = baseline_job.get();
  const auto results = collect(jobs);
  std::vector<PenaltyRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back({grid[i], final_scores(baseline, results[i])});
  }
  return rows;
}

void write_penalty_csv(std::ostream& out, std::span<const PenaltyRow> rows) {
  out << "lambda,baseline,qnn1,qnn2,combined\n";
  for (const auto& r : rows) {
    out << fmt("%g", r.lambda) << ',' << percent(r.scores.baseline.accuracy) << ','
        << percent(r.scores.qnn1.accuracy) << ',' << percent(r.scores.qnn2.accuracy) << ','
        << percent(r.scores.combined.accuracy) << '\n';
  }
}

double default_penalty(Divergence kind) {
  switch (kind) {
    case Divergence::CosineSimilarity:
      return 0.3;
    case Divergence::SignedL1:
      return 0.05;
    case Divergence::SignedL2:
      return 0.002;
    case Divergence::None:
      return 0.0;
  }
  return 0.0;
}

std::vector<DivergenceRow> compare_divergences(const PreparedData& data, const Architecture& arch,
                                               std::span<const Divergence> kinds,
                                               const LossConfig& base, const TrainRun& run,
                                               std::optional<double> lambda_override) {
  if (kinds.empty()) throw std::invalid_argument("no divergence kinds given");
  for (Divergence kind : kinds) {
    if (kind == Divergence::None) {
      throw std::invalid_argument("divergence comparison needs cosine, l1 or l2");
    }
  }
  auto baseline_job = std::async(std::launch::async, [&] { return run_baseline(data, arch, run); });
  std::vector<std::future<StiqResult>> jobs;
  std::vector<double> lambdas;
  for (Divergence kind : kinds) {
    LossConfig loss = base;
    loss.divergence = kind;
    loss.penalty = lambda_override.value_or(default_penalty(kind));
    loss.validate();
    lambdas.push_back(loss.penalty);
    jobs.push_back(std::async(std::launch::async,
                              [&data, &arch, &run, loss] { return run_stiq(data, arch, loss, run); }));
  }
  const TrainResult baseline = baseline_job.get();
  const auto results = collect(jobs);
  std::vector<DivergenceRow> rows;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    rows.push_back({kinds[i], lambdas[i], final_scores(baseline, results[i])});
  }
  return rows;
}

void write_divergence_csv(std::ostream& out, std::span<const DivergenceRow> rows) {
  out << "divergence,lambda,baseline_acc,qnn1_acc,qnn2_acc,combined_acc,"
         "baseline_loss,qnn1_loss,qnn2_loss,combined_loss\n";
  for (const auto& r : rows) {
    const auto& s = r.scores;
    out << to_string(r.kind) << ',' << fmt("%g", r.lambda) << ',' << percent(s.baseline.accuracy)
        << ',' << percent(s.qnn1.accuracy) << ',' << percent(s.qnn2.accuracy) << ','
        << percent(s.combined.accuracy) << ',' << loss_text(s.baseline.loss) << ','
        << loss_text(s.qnn1.loss) << ',' << loss_text(s.qnn2.loss) << ','
        << loss_text(s.combined.loss) << '\n';
  }
}

std::vector<ScalabilityRow> scalability_sweep(const PreparedData& data, std::span<const int> sizes,
                                              const Architecture& arch, const LossConfig& loss,
                                              const TrainRun& run) {
  if (sizes.empty()) throw std::invalid_argument("no qubit sizes given");
  const auto d = static_cast<int>(data.dataset.n_features);
  for (int n : sizes) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("qubit size out of range");
    if (d > n * arch.encoder.features_per_qubit) {
      throw DataError(std::to_string(d) + " features do not fit on " + std::to_string(n) +
                      " qubits with " + std::to_string(arch.encoder.features_per_qubit) +
                      " per qubit");
    }
  }
  struct Cell {
    TrainResult baseline;
    StiqResult pair;
  };
  std::vector<std::future<Cell>> jobs;
  for (int n : sizes) {
    Architecture a = arch;
    a.n_qubits = n;
    jobs.push_back(std::async(std::launch::async, [&data, &loss, &run, a] {
      return Cell{run_baseline(data, a, run), run_stiq(data, a, loss, run)};
    }));
  }
  std::vector<ScalabilityRow> rows;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const Cell cell = jobs[i].get();
    ScalabilityRow row;
    row.qubits = sizes[i];
    row.scores = final_scores(cell.baseline, cell.pair);
    row.baseline_evals = cell.baseline.circuit_evals;
    row.stiq_evals = cell.pair.circuit_evals;
    row.baseline_seconds = cell.baseline.metrics.back().wall_seconds;
    row.stiq_seconds = cell.pair.metrics.back().wall_seconds;
    rows.push_back(row);
  }
  return rows;
}

void write_scalability_csv(std::ostream& out, std::span<const ScalabilityRow> rows,
                           bool with_timing) {
  out << "qubits,baseline,qnn1,qnn2,combined,baseline_evals,stiq_evals,eval_ratio";
  if (with_timing) out << ",baseline_seconds,stiq_seconds";
  out << '\n';
  for (const auto& r : rows) {
    out << r.qubits << ',' << percent(r.scores.baseline.accuracy) << ','
        << percent(r.scores.qnn1.accuracy) << ',' << percent(r.scores.qnn2.accuracy) << ','
        << percent(r.scores.combined.accuracy) << ',' << r.baseline_evals << ',' << r.stiq_evals
        << ','
        << fmt("%.4f", static_cast<double>(r.stiq_evals) / static_cast<double>(r.baseline_evals));
    if (with_timing) {
      out << ',' << fmt("%.4f", r.baseline_seconds) << ',' << fmt("%.4f", r.stiq_seconds);
    }
    out << '\n';
  }
}

// --- VQA helpers -----------------------------------------------------------------

Hamiltonian parse_hamiltonian(const std::string& text) {
  Hamiltonian h;
  for (const auto& raw : split_on(text, '+')) {
    if (raw.empty()) throw std::invalid_argument("empty Hamiltonian term in '" + text + "'");
    PauliTerm term{1.0, raw};
    if (const auto star = raw.find('*'); star != std::string::npos) {
      term.coefficient = parse_number(trim(raw.substr(0, star)), "Hamiltonian coefficient");
      term.paulis = trim(raw.substr(star + 1));
    }
    if (h.n_qubits == 0) h.n_qubits = static_cast<int>(term.paulis.size());
    h.terms.push_back(std::move(term));
  }
  h.validate();
  return h;
}

}  // namespace stiq
