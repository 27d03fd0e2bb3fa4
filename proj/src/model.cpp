#include "stiq/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stiq/errors.hpp"

namespace stiq {

namespace {

class SlotCounter {
 public:
  AngleSource next() { return ParamSlot{count_++}; }
  int count() const { return count_; }

 private:
  int count_ = 0;
};

void rotation_layer(std::vector<GateOp>& ops, GateKind kind, int n, SlotCounter& slots) {
  for (int q = 0; q < n; ++q) ops.push_back(GateOp::single(kind, q, slots.next()));
}

void crx(std::vector<GateOp>& ops, int control, int target, SlotCounter& slots) {
  ops.push_back(GateOp::controlled(GateKind::CRX, control, target, slots.next()));
}

void append_layer(std::vector<GateOp>& ops, TemplateId id, int n, SlotCounter& slots) {
  rotation_layer(ops, GateKind::RX, n, slots);
  rotation_layer(ops, GateKind::RZ, n, slots);
  switch (id) {
    case TemplateId::Circuit1:
      return;
    case TemplateId::Circuit4:
      // cascade from the last qubit up: (n-1 -> n-2), ..., (1 -> 0)
      for (int q = n - 1; q >= 1; --q) crx(ops, q, q - 1, slots);
      return;
    case TemplateId::Circuit6:
      // every qubit controls every other qubit, then a second rotation layer
      for (int c = n - 1; c >= 0; --c) {
        for (int t = n - 1; t >= 0; --t) {
          if (t != c) crx(ops, c, t, slots);
        }
      }
      rotation_layer(ops, GateKind::RX, n, slots);
      rotation_layer(ops, GateKind::RZ, n, slots);
      return;
    case TemplateId::Circuit8:
      // brickwork: pairs (1->0), (3->2), ... then rotations, then (2->1), (4->3), ...
      for (int q = 1; q < n; q += 2) crx(ops, q, q - 1, slots);
      rotation_layer(ops, GateKind::RX, n, slots);
      rotation_layer(ops, GateKind::RZ, n, slots);
      for (int q = 2; q < n; q += 2) crx(ops, q, q - 1, slots);
      return;
    case TemplateId::Circuit19:
      if (n < 2) return;
      // ring q_i -> q_{(i+1) mod n}, starting from the last qubit
      for (int q = n - 1; q >= 0; --q) crx(ops, q, (q + 1) % n, slots);
      return;
  }
}

GateKind encoding_kind(EncodingGate gate) {
  switch (gate) {
    case EncodingGate::RZ: return GateKind::RZ;
    case EncodingGate::RY: return GateKind::RY;
    case EncodingGate::RX: return GateKind::RX;
  }
  throw std::logic_error("encoding_kind");
}

}  // namespace

std::string to_string(EncodingGate gate) {
  switch (gate) {
    case EncodingGate::RZ: return "RZ";
    case EncodingGate::RY: return "RY";
    case EncodingGate::RX: return "RX";
  }
  return "?";
}

std::string to_string(TemplateId id) {
  switch (id) {
    case TemplateId::Circuit1: return "circuit1";
    case TemplateId::Circuit4: return "circuit4";
    case TemplateId::Circuit6: return "circuit6";
    case TemplateId::Circuit8: return "circuit8";
    case TemplateId::Circuit19: return "circuit19";
  }
  return "?";
}

EncodingGate parse_encoding_gate(const std::string& name) {
  if (name == "RZ" || name == "rz") return EncodingGate::RZ;
  if (name == "RY" || name == "ry") return EncodingGate::RY;
  if (name == "RX" || name == "rx") return EncodingGate::RX;
  throw std::invalid_argument("unknown encoding gate '" + name + "'");
}

TemplateId parse_template_id(const std::string& name) {
  for (TemplateId id : {TemplateId::Circuit1, TemplateId::Circuit4, TemplateId::Circuit6,
                        TemplateId::Circuit8, TemplateId::Circuit19}) {
    if (name == to_string(id) || name == to_string(id).substr(7)) return id;
  }
  throw std::invalid_argument("unsupported template id '" + name + "'");
}

int params_per_layer(TemplateId id, int n) {
  switch (id) {
    case TemplateId::Circuit1: return 2 * n;
    case TemplateId::Circuit4: return 3 * n - 1;
    case TemplateId::Circuit6: return 4 * n + n * (n - 1);
    case TemplateId::Circuit8: return 4 * n + (n - 1);
    case TemplateId::Circuit19: return n >= 2 ? 3 * n : 2 * n;
  }
  throw std::invalid_argument("unsupported template id");
}

CircuitTemplate expand_template(int n_qubits, int n_features, const EncoderSpec& encoder,
                                const PqcSpec& pqc) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("n_qubits outside [1, 16]");
  }
  if (pqc.n_layers < 1) throw std::invalid_argument("PQC needs at least one layer");
  if (encoder.features_per_qubit < 1) throw std::invalid_argument("features_per_qubit < 1");
  if (n_features < 0 || n_features > n_qubits * encoder.features_per_qubit) {
    throw std::invalid_argument("feature count " + std::to_string(n_features) +
                                " exceeds encoder capacity " +
                                std::to_string(n_qubits * encoder.features_per_qubit));
  }

  CircuitTemplate circuit;
  circuit.n_qubits = n_qubits;
  circuit.n_features = n_features;
  const GateKind kind = encoding_kind(encoder.gate);
  for (int position = 0; position * n_qubits < n_features; ++position) {
    const int first = position * n_qubits;
    const int width = std::min(n_qubits, n_features - first);
    if (encoder.h_prefix) {
      for (int q = 0; q < width; ++q) circuit.ops.push_back(GateOp::single(GateKind::H, q));
    }
    for (int q = 0; q < width; ++q) {
      circuit.ops.push_back(GateOp::single(kind, q, FeatureSlot{first + q}));
    }
  }
  // Qubits that receive no feature still start in |+> when the prefix is on.
  if (encoder.h_prefix) {
    for (int q = std::max(n_features, 0); q < n_qubits; ++q) {
      circuit.ops.push_back(GateOp::single(GateKind::H, q));
    }
  }

  SlotCounter slots;
  for (int layer = 0; layer < pqc.n_layers; ++layer) {
    append_layer(circuit.ops, pqc.id, n_qubits, slots);
  }
  circuit.n_params = slots.count();
  circuit.validate();
  return circuit;
}

FeatureScaler FeatureScaler::fit(std::span<const std::vector<double>> rows, double lo,
                                 double hi) {
  if (!(hi > lo)) throw std::invalid_argument("scaling target needs hi > lo");
  if (rows.empty()) throw std::invalid_argument("cannot fit scaler on zero rows");
  FeatureScaler scaler;
  scaler.lo = lo;
  scaler.hi = hi;
  scaler.min = rows.front();
  scaler.max = rows.front();
  for (const auto& row : rows) {
    if (row.size() != scaler.min.size()) throw std::invalid_argument("ragged feature rows");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!std::isfinite(row[j])) throw NumericError("non-finite feature value");
      scaler.min[j] = std::min(scaler.min[j], row[j]);
      scaler.max[j] = std::max(scaler.max[j], row[j]);
    }
  }
  return scaler;
}

std::vector<double> FeatureScaler::transform(std::span<const double> raw) const {
  if (raw.size() != min.size()) {
    throw std::invalid_argument("scaler expects " + std::to_string(min.size()) + " features");
  }
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (!std::isfinite(raw[j])) throw NumericError("non-finite feature value");
    const double range = max[j] - min[j];
    out[j] = range > 0.0 ? lo + (raw[j] - min[j]) / range * (hi - lo) : 0.5 * (lo + hi);
    // ranges near the double limit overflow to inf
    if (!std::isfinite(out[j])) {
      throw NumericError("feature " + std::to_string(j) + " overflows while scaling");
    }
  }
  return out;
}

void QnnModel::validate() const {
  if (n_classes < 1) throw std::invalid_argument("model needs at least one class");
  if (theta.size() != static_cast<std::size_t>(circuit.n_params)) {
    throw std::invalid_argument("theta length does not match the PQC expansion");
  }
  if (head_weights.size() != static_cast<std::size_t>(n_classes * n_qubits)) {
    throw std::invalid_argument("head weights are not n_classes x n_qubits");
  }
  if (head_bias.size() != static_cast<std::size_t>(n_classes)) {
    throw std::invalid_argument("head bias length is not n_classes");
  }
  if (circuit.n_qubits != n_qubits || circuit.n_features != n_features) {
    throw std::invalid_argument("cached circuit disagrees with model dimensions");
  }
}

QnnModel make_model(const Architecture& arch, int n_features, int n_classes,
                    std::vector<double> theta, std::vector<double> head_weights,
                    std::vector<double> head_bias) {
  QnnModel model;
  model.n_qubits = arch.n_qubits;
  model.n_features = n_features;
  model.n_classes = n_classes;
  model.encoder = arch.encoder;
  model.pqc = arch.pqc;
  model.circuit = expand_template(arch.n_qubits, n_features, arch.encoder, arch.pqc);
  model.theta = std::move(theta);
  model.head_weights = std::move(head_weights);
  model.head_bias = std::move(head_bias);
  model.validate();
  return model;
}

QnnModel init_model(const Architecture& arch, int n_features, int n_classes, Rng& rng) {
  const CircuitTemplate circuit =
      expand_template(arch.n_qubits, n_features, arch.encoder, arch.pqc);
  std::vector<double> theta(static_cast<std::size_t>(circuit.n_params));
  for (auto& t : theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double bound = 1.0 / std::sqrt(static_cast<double>(arch.n_qubits));
  std::vector<double> weights(static_cast<std::size_t>(n_classes * arch.n_qubits));
  for (auto& w : weights) w = rng.uniform(-bound, bound);
  std::vector<double> bias(static_cast<std::size_t>(n_classes), 0.0);
  return make_model(arch, n_features, n_classes, std::move(theta), std::move(weights),
                    std::move(bias));
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - peak);
    total += out[k];
  }
  for (auto& p : out) p /= total;
  return out;
}

std::vector<double> model_expectations(const QnnModel& model, std::span<const double> theta,
                                       std::span<const double> features, const Execution& exec) {
  const StateVector state = run_circuit(model.circuit, theta, features);
  if (const auto* shots = std::get_if<Shots>(&exec)) {
    return sample_expectation_z(state, shots->count, shots->rng.get());
  }
  return expectation_z_all(state);
}

std::vector<double> head_logits(int n_classes, std::span<const double> weights,
                                std::span<const double> bias, std::span<const double> z) {
  const std::size_t n = z.size();
  std::vector<double> logits(static_cast<std::size_t>(n_classes));
  for (std::size_t k = 0; k < logits.size(); ++k) {
    double acc = bias[k];
    for (std::size_t q = 0; q < n; ++q) acc += weights[k * n + q] * z[q];
    logits[k] = acc;
  }
  return logits;
}

std::vector<double> head_logits(const QnnModel& model, std::span<const double> z) {
  if (z.size() != static_cast<std::size_t>(model.n_qubits)) {
    throw std::invalid_argument("head expects one expectation per qubit");
  }
  return head_logits(model.n_classes, model.head_weights, model.head_bias, z);
}

PredictionVector make_prediction(std::vector<double> logits) {
  PredictionVector pv;
  pv.probabilities = softmax(logits);
  pv.logits = std::move(logits);
  return pv;
}

PredictionVector forward(const QnnModel& model, std::span<const double> features,
                         const Execution& exec) {
  if (features.size() != static_cast<std::size_t>(model.n_features)) {
    throw std::invalid_argument("forward: expected " + std::to_string(model.n_features) +
                                " features, got " + std::to_string(features.size()));
  }
  const auto z = model_expectations(model, model.theta, features, exec);
  return make_prediction(head_logits(model, z));
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  // max_element returns the first maximum, which gives the lowest-index tie-break.
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

int predict_class(const PredictionVector& pv) { return argmax(pv.probabilities); }

}  // namespace stiq
