#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stiq/errors.hpp"
#include "stiq/model.hpp"
#include "stiq/training.hpp"

using namespace stiq;

TEST_CASE("cross-entropy matches the naive formula and survives large logits") {
  const std::vector<double> l = {0.3, -1.2, 2.0, 0.0};
  for (int k = 0; k < 4; ++k) {
    CHECK(cross_entropy(l, k) == doctest::Approx(oracle::naive_cross_entropy(l, k)).epsilon(1e-12));
  }
  const std::vector<double> big = {1000.0, 0.0};
  CHECK(cross_entropy(big, 0) == doctest::Approx(0.0));
  CHECK(cross_entropy(big, 1) == doctest::Approx(1000.0));
  CHECK_THROWS_AS(cross_entropy(l, 4), std::invalid_argument);
  CHECK_THROWS_AS(cross_entropy(l, -1), std::invalid_argument);
}

TEST_CASE("aggregators") {
  const std::vector<double> a = {1.0, -2.0, 3.0}, b = {3.0, 0.0, -1.0};
  CHECK(aggregate(a, b, Aggregator::Mean) == std::vector<double>{2.0, -1.0, 1.0});
  CHECK(aggregate(a, b, Aggregator::Sum) == std::vector<double>{4.0, -2.0, 2.0});
  CHECK(aggregate(a, b, Aggregator::Max) == std::vector<double>{3.0, 0.0, 3.0});
  // product of the two distributions, renormalized
  const auto pa = softmax(a), pb = softmax(b);
  const auto prod = softmax(aggregate(a, b, Aggregator::ProductNormalize));
  double z = 0;
  for (int k = 0; k < 3; ++k) z += pa[k] * pb[k];
  for (int k = 0; k < 3; ++k) CHECK(prod[k] == doctest::Approx(pa[k] * pb[k] / z));
  CHECK(aggregate(a, a, Aggregator::Mean) == a);
  CHECK_THROWS_AS(aggregate(a, std::vector<double>{1.0}, Aggregator::Mean), std::invalid_argument);
}

TEST_CASE("divergence scores") {
  const std::vector<double> a = {1.0, 0.0}, b = {0.0, 2.0}, c = {-2.0, 0.0};
  CHECK(divergence(a, a, Divergence::CosineSimilarity) == doctest::Approx(1.0));
  CHECK(divergence(a, b, Divergence::CosineSimilarity) == doctest::Approx(0.0));
  CHECK(divergence(a, c, Divergence::CosineSimilarity) == doctest::Approx(-1.0));
  CHECK(divergence(a, b, Divergence::SignedL1) == doctest::Approx(-3.0));
  CHECK(divergence(a, b, Divergence::SignedL2) == doctest::Approx(-5.0));
  CHECK(divergence(a, b, Divergence::None) == 0.0);
  CHECK_THROWS_AS(divergence(a, std::vector<double>{0.0, 0.0}, Divergence::CosineSimilarity),
                  NumericError);
}

TEST_CASE("total loss is linear in lambda and reduces to cross-entropy without divergence") {
  const std::vector<double> y1 = {0.4, -0.3, 1.1}, y2 = {-0.2, 0.9, 0.5};
  LossConfig cfg;
  cfg.penalty = 0.1;
  const LossTerms t1 = total_loss(y1, y2, 2, cfg);
  cfg.penalty = 0.7;
  const LossTerms t7 = total_loss(y1, y2, 2, cfg);
  CHECK(std::abs(t1.classification - t7.classification) == 0.0);
  CHECK(std::abs((t7.total - t1.total) - 0.6 * t1.divergence) < 1e-12);

  LossConfig none{Aggregator::Mean, Divergence::None, 0.0, DivergenceSpace::Logits};
  const LossTerms tn = total_loss(y1, y2, 2, none);
  CHECK(tn.total == cross_entropy(aggregate(y1, y2, Aggregator::Mean), 2));

  LossConfig on_probs = cfg;
  on_probs.divergence_on = DivergenceSpace::Probabilities;
  const LossTerms tp = total_loss(y1, y2, 2, on_probs);
  CHECK(tp.divergence ==
        doctest::Approx(divergence(softmax(y1), softmax(y2), Divergence::CosineSimilarity)));
}

TEST_CASE("loss config validation") {
  LossConfig cfg;
  cfg.penalty = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.penalty = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.divergence = Divergence::None;
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(parse_divergence("kl"), std::invalid_argument);
}

TEST_CASE("two-term shift is exact for single-qubit rotations") {
  for (GateKind kind : {GateKind::RX, GateKind::RY}) {
    CircuitTemplate c{1, {GateOp::single(GateKind::RY, 0, FixedAngle{0.4}), GateOp::single(kind, 0, ParamSlot{0})}, 1, 0};
    const VectorFunction f = [&](std::span<const double> p) { return expectation_z_all(run_circuit(c, p, {})); };
    for (double t : {-2.0, 0.3, 1.7}) {
      const std::vector<double> p = {t};
      const double shift = shift_derivative(f, p, 0, ShiftRule::TwoTerm)[0];
      const double numeric = shift_derivative(f, p, 0, ShiftRule::Numeric)[0];
      CHECK(std::abs(shift - numeric) < 1e-8);
    }
  }
}

TEST_CASE("four-term shift is exact for controlled rotations") {
  for (GateKind kind : {GateKind::CRX, GateKind::CRY, GateKind::CRZ}) {
    CircuitTemplate c{2,
                      {GateOp::single(GateKind::RY, 0, FixedAngle{1.1}),
                       GateOp::single(GateKind::RY, 1, FixedAngle{0.5}), GateOp::controlled(kind, 0, 1, ParamSlot{0}),
                       GateOp::single(GateKind::RX, 1, FixedAngle{0.6}), GateOp::single(GateKind::H, 0)},
                      1, 0};
    const VectorFunction f = [&](std::span<const double> p) { return expectation_z_all(run_circuit(c, p, {})); };
    for (double t : {-1.3, 0.2, 2.9}) {
      const std::vector<double> p = {t};
      const auto four = shift_derivative(f, p, 0, ShiftRule::FourTerm);
      const auto numeric = shift_derivative(f, p, 0, ShiftRule::Numeric);
      for (int q = 0; q < 2; ++q) CHECK(std::abs(four[q] - numeric[q]) < 1e-8);
      // interference on the control makes the two-term rule biased
      if (kind == GateKind::CRY) {
        const auto two = shift_derivative(f, p, 0, ShiftRule::TwoTerm);
        CHECK(std::abs(two[0] - numeric[0]) > 1e-6);
      }
    }
  }
}

TEST_CASE("gradient engines agree on a smooth loss") {
  const ScalarFunction loss = [](std::span<const double> p) {
    return std::sin(p[0]) * std::cos(p[1]) + 0.5 * std::cos(p[0] + p[1]);
  };
  const std::vector<double> p = {0.7, -0.4};
  const double g0 = std::cos(0.7) * std::cos(-0.4) - 0.5 * std::sin(0.3);
  const double g1 = -std::sin(0.7) * std::sin(-0.4) - 0.5 * std::sin(0.3);
  Rng rng(1);
  GradientEngine exact{ExactNumeric{}, 0};
  const auto ge = gradient(loss, p, exact, rng);
  CHECK(ge[0] == doctest::Approx(g0).epsilon(1e-8));
  CHECK(ge[1] == doctest::Approx(g1).epsilon(1e-8));
  // each coordinate is a sinusoid with unit frequency, so the shift rule is exact
  const auto gs = gradient(loss, p, GradientEngine{ParameterShift{}, 0}, rng);
  CHECK(std::abs(gs[0] - g0) < 1e-12);
  CHECK(std::abs(gs[1] - g1) < 1e-12);
  // SPSA is unbiased to second order: many reps land close
  const auto gp = gradient(loss, p, GradientEngine{Spsa{0.01, 4000}, 3}, rng);
  CHECK(std::abs(gp[0] - g0) < 0.05);
  CHECK(std::abs(gp[1] - g1) < 0.05);
}

TEST_CASE("SPSA is reproducible from the engine seed") {
  const ScalarFunction loss = [](std::span<const double> p) { return p[0] * p[0] + 3 * p[1]; };
  const std::vector<double> p = {1.0, 2.0};
  const GradientEngine e{Spsa{}, 77};
  CHECK(gradient(loss, p, e) == gradient(loss, p, e));
  CHECK_THROWS_AS(GradientEngine(GradientEngine{Spsa{0.0, 4}, 0}).validate(), std::invalid_argument);
}

TEST_CASE("non-finite losses raise a numeric error") {
  const ScalarFunction bad = [](std::span<const double>) { return std::nan(""); };
  Rng rng(0);
  const std::vector<double> p = {1.0};
  CHECK_THROWS_AS(gradient(bad, p, GradientEngine{ExactNumeric{}, 0}, rng), NumericError);
}

TEST_CASE("Adam matches a hand-computed trajectory") {
  AdamState s = AdamState::for_size(2, 0.1);
  std::vector<double> p = {1.0, -1.0};
  const std::vector<double> g1 = {0.5, -2.0};
  p = adam_step(s, p, g1);
  // bias-corrected first step moves each coordinate by lr * sign(g)
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p[1] == doctest::Approx(-0.9).epsilon(1e-7));
  const std::vector<double> g2 = {0.1, 0.0};
  const double before = p[0];
  p = adam_step(s, p, g2);
  const double m = 0.9 * 0.05 + 0.1 * 0.1, v = 0.999 * 0.00025 + 0.001 * 0.01;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  CHECK(p[0] == doctest::Approx(before - 0.1 * mhat / (std::sqrt(vhat) + 1e-8)).epsilon(1e-12));
  CHECK(s.step == 2);
  CHECK_THROWS_AS(adam_step(s, p, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("score_logits") {
  const std::vector<std::vector<double>> logits = {{2, 0}, {0, 2}, {2, 0}};
  const std::vector<int> labels = {0, 1, 1};
  const auto s = score_logits(logits, labels);
  CHECK(s.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(s.loss == doctest::Approx((2 * cross_entropy(logits[0], 0) + cross_entropy(logits[2], 1)) / 3));
}
