#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stiq/rng.hpp"
#include "stiq/simulator.hpp"

namespace stiq {

enum class EncodingGate { RZ, RY, RX };

/// Angle encoding of classical features. Feature i is placed on qubit
/// i mod n_qubits at position i / n_qubits (round-robin).
struct EncoderSpec {
  EncodingGate gate = EncodingGate::RZ;
  int features_per_qubit = 2;
  // One fixed H on each qubit ahead of every encoding position. Without it
  // RZ encoding from |0...0> is invisible to Z readout, and consecutive
  // same-axis encodings on one qubit would collapse into the sum of angles.
  bool h_prefix = true;
};

/// Circuit families of the expressibility catalog (Sim, Johnson,
/// Aspuru-Guzik 2019), indexed by their number there.
enum class TemplateId { Circuit1, Circuit4, Circuit6, Circuit8, Circuit19 };

struct PqcSpec {
  TemplateId id = TemplateId::Circuit19;
  int n_layers = 2;
};

std::string to_string(EncodingGate gate);
std::string to_string(TemplateId id);
EncodingGate parse_encoding_gate(const std::string& name);
TemplateId parse_template_id(const std::string& name);

int params_per_layer(TemplateId id, int n_qubits);

/// Encoding block (feature slots in ascending order) followed by n_layers
/// repetitions of the template; parameter slots are numbered in order of
/// appearance, layer-major.
CircuitTemplate expand_template(int n_qubits, int n_features, const EncoderSpec& encoder,
                                const PqcSpec& pqc);

/// Per-feature affine map from the training range onto [lo, hi].
struct FeatureScaler {
  std::vector<double> min;
  std::vector<double> max;
  double lo = 0.0;
  double hi = 0.0;

  /// Fits ranges on the given rows only.
  static FeatureScaler fit(std::span<const std::vector<double>> rows, double lo, double hi);

  std::vector<double> transform(std::span<const double> raw) const;
};

struct Architecture {
  int n_qubits = 4;
  EncoderSpec encoder;
  PqcSpec pqc;
};

/// Hybrid QNN: encoded PQC, per-qubit <Z> readout, linear head.
struct QnnModel {
  int n_qubits = 0;
  int n_features = 0;
  int n_classes = 0;
  EncoderSpec encoder;
  PqcSpec pqc;
  std::vector<double> theta;
  std::vector<double> head_weights;  // row-major, n_classes x n_qubits
  std::vector<double> head_bias;     // n_classes
  CircuitTemplate circuit;           // expansion of (encoder, pqc); kept in sync by make_model

  void validate() const;
};

/// Builds a model with the given parameters; throws if dimensions disagree.
QnnModel make_model(const Architecture& arch, int n_features, int n_classes,
                    std::vector<double> theta, std::vector<double> head_weights,
                    std::vector<double> head_bias);

/// theta ~ U(0, 2pi), head weights ~ U(-1/sqrt(n), 1/sqrt(n)), bias 0.
QnnModel init_model(const Architecture& arch, int n_features, int n_classes, Rng& rng);

struct PredictionVector {
  std::vector<double> logits;
  std::vector<double> probabilities;
};

struct Exact {};
struct Shots {
  int count;
  std::reference_wrapper<Rng> rng;
};
using Execution = std::variant<Exact, Shots>;

std::vector<double> softmax(std::span<const double> logits);

/// Per-qubit <Z> of the model circuit for one input.
std::vector<double> model_expectations(const QnnModel& model, std::span<const double> theta,
                                       std::span<const double> features, const Execution& exec);

/// head_weights * z + head_bias
std::vector<double> head_logits(const QnnModel& model, std::span<const double> z);
std::vector<double> head_logits(int n_classes, std::span<const double> weights,
                                std::span<const double> bias, std::span<const double> z);

PredictionVector make_prediction(std::vector<double> logits);

PredictionVector forward(const QnnModel& model, std::span<const double> features,
                         const Execution& exec = Exact{});

/// Argmax of the probabilities; ties go to the lowest index.
int predict_class(const PredictionVector& pv);
int argmax(std::span<const double> values);

}  // namespace stiq
