#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "stiq/errors.hpp"
#include "stiq/model.hpp"

using namespace stiq;

namespace {

GateOp op_from_json(const nlohmann::json& j) {
  const std::string gate = j.at("gate");
  const std::string slot = j.at("slot");
  AngleSource angle;
  if (slot == "param") angle = ParamSlot{j.at("index").get<int>()};
  if (slot == "feature") angle = FeatureSlot{j.at("index").get<int>()};
  static const std::map<std::string, GateKind> kinds = {
      {"RX", GateKind::RX}, {"RZ", GateKind::RZ}, {"H", GateKind::H}, {"CRX", GateKind::CRX}};
  const GateKind kind = kinds.at(gate);
  if (j.contains("control")) return GateOp::controlled(kind, j.at("control"), j.at("target"), angle);
  return GateOp::single(kind, j.at("target"), angle);
}

}  // namespace

TEST_CASE("template expansions match the frozen catalog fixture") {
  std::ifstream in(STIQ_FIXTURE_DIR "/templates.json");
  REQUIRE(in);
  const auto cases = nlohmann::json::parse(in);
  REQUIRE(cases.size() == 60);
  for (const auto& c : cases) {
    EncoderSpec enc;
    enc.h_prefix = c.at("h_prefix");
    const PqcSpec pqc{parse_template_id(c.at("template")), c.at("layers")};
    const int n = c.at("n_qubits");
    const CircuitTemplate t = expand_template(n, c.at("n_features"), enc, pqc);
    CAPTURE(c.at("template").get<std::string>());
    CAPTURE(n);
    CHECK(t.n_params == c.at("n_params").get<int>());
    CHECK(t.n_params == pqc.n_layers * params_per_layer(pqc.id, n));
    REQUIRE(t.ops.size() == c.at("ops").size());
    for (std::size_t k = 0; k < t.ops.size(); ++k) {
      CHECK(t.ops[k] == op_from_json(c.at("ops")[k]));
    }
  }
}

TEST_CASE("catalog parameter counts") {
  CHECK(params_per_layer(TemplateId::Circuit1, 2) == 4);
  CHECK(params_per_layer(TemplateId::Circuit19, 4) == 12);
  CHECK(params_per_layer(TemplateId::Circuit4, 4) == 11);
  CHECK(params_per_layer(TemplateId::Circuit6, 4) == 28);
  CHECK(params_per_layer(TemplateId::Circuit8, 4) == 19);
}

TEST_CASE("expansion preconditions") {
  CHECK_THROWS_AS(expand_template(4, 8, EncoderSpec{}, PqcSpec{TemplateId::Circuit1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(expand_template(4, 9, EncoderSpec{}, PqcSpec{}), std::invalid_argument);
  CHECK_THROWS_AS(parse_template_id("circuit7"), std::invalid_argument);
  CHECK(parse_template_id("19") == TemplateId::Circuit19);
}

TEST_CASE("scaler maps train ranges affinely with a midpoint for constants") {
  const std::vector<std::vector<double>> rows = {{0.0, 3.0, 5.0}, {1.0, 3.0, -5.0}};
  const auto s = FeatureScaler::fit(rows, 0.0, 2 * std::numbers::pi);
  const auto mid = s.transform(std::vector<double>{0.5, 3.0, 5.0});
  CHECK(mid[0] == doctest::Approx(std::numbers::pi));
  CHECK(mid[1] == doctest::Approx(std::numbers::pi));
  CHECK(mid[2] == 2 * std::numbers::pi);
  CHECK(s.transform(std::vector<double>{0.0, 1.0, -5.0})[0] == 0.0);
  CHECK_THROWS_AS(s.transform(std::vector<double>{NAN, 0, 0}), NumericError);
  CHECK_THROWS_AS(FeatureScaler::fit(rows, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("forward matches a brute-force pipeline oracle") {
  Architecture arch;
  arch.n_qubits = 2;
  arch.pqc = {TemplateId::Circuit19, 2};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const QnnModel m = init_model(arch, 4, 3, rng);
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(0, 2 * std::numbers::pi);
    const auto z = oracle::z_expectations(oracle::circuit_state(m.circuit, m.theta, x), 2);
    const PredictionVector pv = forward(m, x);
    double total = 0;
    for (int k = 0; k < 3; ++k) {
      const double logit = m.head_weights[k * 2] * z[0] + m.head_weights[k * 2 + 1] * z[1] + m.head_bias[k];
      CHECK(std::abs(pv.logits[k] - logit) < 1e-9);
      total += pv.probabilities[k];
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("zero head gives uniform probabilities") {
  Architecture arch;
  const QnnModel m = make_model(arch, 8, 4, std::vector<double>(24, 0.3),
                                std::vector<double>(16, 0.0), std::vector<double>(4, 0.0));
  const auto pv = forward(m, std::vector<double>(8, 1.0));
  for (double p : pv.probabilities) CHECK(p == doctest::Approx(0.25));
  CHECK_THROWS_AS(forward(m, std::vector<double>(7, 1.0)), std::invalid_argument);
}

TEST_CASE("exact and 100000-shot logits agree within 0.02 for most seeds") {
  Architecture arch;
  arch.n_qubits = 3;
  int close = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const QnnModel m = init_model(arch, 5, 3, rng);
    std::vector<double> x(5);
    for (auto& v : x) v = rng.uniform(0, 6);
    Rng shots_rng(seed + 100);
    const auto exact = forward(m, x).logits;
    const auto sampled = forward(m, x, Shots{100000, shots_rng}).logits;
    bool ok = true;
    for (std::size_t k = 0; k < exact.size(); ++k) ok &= std::abs(exact[k] - sampled[k]) < 0.02;
    close += ok;
  }
  CHECK(close >= 38);
}

TEST_CASE("softmax is shift invariant and argmax takes the lowest tie") {
  const std::vector<double> l = {1.0, 2.0, 3.0};
  const std::vector<double> shifted = {1001.0, 1002.0, 1003.0};
  const auto a = softmax(l), b = softmax(shifted);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
  CHECK(argmax(std::vector<double>{0.1, 0.7, 0.2}) == 1);
  CHECK(argmax(std::vector<double>{0.5, 0.5}) == 0);
}

TEST_CASE("initialization ranges and determinism") {
  Architecture arch;
  Rng a(9), b(9);
  const QnnModel m1 = init_model(arch, 8, 4, a);
  const QnnModel m2 = init_model(arch, 8, 4, b);
  CHECK(m1.theta == m2.theta);
  for (double t : m1.theta) CHECK((t >= 0 && t < 2 * std::numbers::pi));
  for (double w : m1.head_weights) CHECK(std::abs(w) <= 0.5);
  for (double bias : m1.head_bias) CHECK(bias == 0.0);
}
