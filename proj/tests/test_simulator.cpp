#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stiq/model.hpp"
#include "stiq/simulator.hpp"

using namespace stiq;

namespace {

double max_diff(const StateVector& s, const oracle::Vec& v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    worst = std::max(worst, std::abs(s[i] - v(static_cast<Eigen::Index>(i))));
  }
  return worst;
}

}  // namespace

TEST_CASE("initial state is |0...0>") {
  StateVector s(3);
  CHECK(s.dim() == 8);
  CHECK(s[0] == Complex{1, 0});
  CHECK(s.norm_squared() == doctest::Approx(1.0));
}

TEST_CASE("qubit counts outside 1..16 are rejected") {
  CHECK_THROWS_AS(StateVector(0), std::invalid_argument);
  CHECK_THROWS_AS(StateVector(17), std::invalid_argument);
}

TEST_CASE("RX(pi) on |0> gives -i|1>") {
  StateVector s(1);
  apply_gate_inplace(s, GateOp::single(GateKind::RX, 0), std::numbers::pi);
  CHECK(std::abs(s[0]) < 1e-15);
  CHECK(std::abs(s[1] - Complex{0, -1}) < 1e-15);
}

TEST_CASE("H then Z expectation vanishes; CNOT builds a Bell pair") {
  StateVector s(2);
  apply_gate_inplace(s, GateOp::single(GateKind::H, 0), std::nullopt);
  auto z = expectation_z_all(s);
  CHECK(z[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z[1] == doctest::Approx(1.0));
  apply_gate_inplace(s, GateOp::controlled(GateKind::CNOT, 0, 1), std::nullopt);
  CHECK(std::norm(s[0]) == doctest::Approx(0.5));
  CHECK(std::norm(s[3]) == doctest::Approx(0.5));
  CHECK(std::norm(s[1]) < 1e-15);
}

TEST_CASE("controlled rotation leaves the control-0 subspace alone") {
  StateVector s(2);
  apply_gate_inplace(s, GateOp::controlled(GateKind::CRX, 1, 0), 1.234);
  CHECK(s[0] == Complex{1, 0});
}

TEST_CASE("malformed gate applications throw") {
  StateVector s(2);
  CHECK_THROWS_AS(apply_gate_inplace(s, GateOp::single(GateKind::RX, 0), std::nullopt),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_gate_inplace(s, GateOp::single(GateKind::H, 0), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_gate_inplace(s, GateOp::single(GateKind::RX, 2), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_gate_inplace(s, GateOp::controlled(GateKind::CRX, 1, 1), 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_gate_inplace(s, GateOp::single(GateKind::RX, 0), std::nan("")),
                  std::invalid_argument);
}

TEST_CASE("every gate kind matches its dense matrix") {
  Rng rng(5);
  for (GateKind kind : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::H, GateKind::X}) {
    for (int q = 0; q < 3; ++q) {
      const double t = rng.uniform(-4, 4);
      const GateOp op = GateOp::single(kind, q, FixedAngle{t});
      CircuitTemplate c{3, {GateOp::single(GateKind::H, 0), GateOp::single(GateKind::RY, 1, FixedAngle{0.3}),
                            GateOp::single(GateKind::RX, 2, FixedAngle{1.1}), op},
                        0, 0};
      if (!is_rotation(kind)) c.ops.back().angle = {};
      CHECK(max_diff(run_circuit(c, {}, {}), oracle::circuit_state(c, {}, {})) < 1e-12);
    }
  }
  for (GateKind kind : {GateKind::CRX, GateKind::CRY, GateKind::CRZ, GateKind::CNOT}) {
    for (int ctl = 0; ctl < 3; ++ctl) {
      for (int tgt = 0; tgt < 3; ++tgt) {
        if (ctl == tgt) continue;
        GateOp op = GateOp::controlled(kind, ctl, tgt, FixedAngle{rng.uniform(-4, 4)});
        if (!is_rotation(kind)) op.angle = {};
        CircuitTemplate c{3, {GateOp::single(GateKind::H, 0), GateOp::single(GateKind::RY, 1, FixedAngle{0.7}),
                              GateOp::single(GateKind::RX, 2, FixedAngle{2.1}), op},
                          0, 0};
        CHECK(max_diff(run_circuit(c, {}, {}), oracle::circuit_state(c, {}, {})) < 1e-12);
      }
    }
  }
}

TEST_CASE("run_circuit checks slot vector lengths") {
  const CircuitTemplate c = expand_template(2, 3, EncoderSpec{}, PqcSpec{TemplateId::Circuit1, 1});
  std::vector<double> p(4, 0.1), f(3, 0.2);
  CHECK_NOTHROW(run_circuit(c, p, f));
  CHECK_THROWS_AS(run_circuit(c, std::vector<double>(3), f), std::invalid_argument);
  CHECK_THROWS_AS(run_circuit(c, p, std::vector<double>(2)), std::invalid_argument);
}

TEST_CASE("RZ encoding alone keeps every <Z> at +1") {
  EncoderSpec enc;
  enc.h_prefix = false;
  CircuitTemplate c = expand_template(3, 6, enc, PqcSpec{TemplateId::Circuit1, 1});
  // keep only the encoding block
  c.ops.resize(6);
  c.n_params = 0;
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(6);
    for (auto& v : f) v = rng.uniform(0, 2 * std::numbers::pi);
    for (double z : expectation_z_all(run_circuit(c, {}, f))) CHECK(z == doctest::Approx(1.0));
  }
}

TEST_CASE("Pauli application matches dense Pauli strings") {
  StateVector s(2);
  apply_gate_inplace(s, GateOp::single(GateKind::RY, 0), 0.4);
  apply_gate_inplace(s, GateOp::single(GateKind::RX, 1), 1.3);
  oracle::Vec v(4);
  for (int i = 0; i < 4; ++i) v(i) = s[static_cast<std::size_t>(i)];
  for (char p : std::string("IXYZ")) {
    StateVector t = s;
    apply_pauli(t, 1, p);
    const oracle::Vec expect = oracle::pauli_string(std::string("I") + p) * v;
    CHECK(max_diff(t, expect) < 1e-14);
  }
  CHECK_THROWS_AS(apply_pauli(s, 0, 'Q'), std::invalid_argument);
}

TEST_CASE("shot sampling concentrates on exact expectations") {
  StateVector s(2);
  apply_gate_inplace(s, GateOp::single(GateKind::RY, 0), 1.0);
  apply_gate_inplace(s, GateOp::single(GateKind::RX, 1), 2.0);
  const auto exact = expectation_z_all(s);
  Rng rng(11);
  const auto sampled = sample_expectation_z(s, 200000, rng);
  CHECK(sampled[0] == doctest::Approx(exact[0]).epsilon(0.01));
  CHECK(std::abs(sampled[1] - exact[1]) < 0.01);
  CHECK_THROWS_AS(sample_expectation_z(s, 0, rng), std::invalid_argument);

  Rng a(4), b(4);
  CHECK(sample_expectation_z(s, 100, a) == sample_expectation_z(s, 100, b));
}

TEST_CASE("cumulative probabilities end at the norm") {
  StateVector s(3);
  apply_gate_inplace(s, GateOp::single(GateKind::H, 2), std::nullopt);
  const auto cdf = cumulative_probabilities(s);
  CHECK(cdf.size() == 8);
  CHECK(cdf.back() == doctest::Approx(1.0));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto k = sample_basis_state(cdf, rng);
    CHECK((k == 0 || k == 4));
  }
}

TEST_CASE("unnormalized states are rejected by the exact readout") {
  StateVector s(1, {Complex{1, 0}, Complex{1, 0}});
  CHECK_THROWS(expectation_z_all(s));
}
