#include <doctest.h>

#include <cmath>
#include <random>

#include "ducg/error.h"
#include "ducg/inference.h"
#include "ducg/risk.h"
#include "support/fixtures.h"
#include "support/generators.h"

using namespace ducg;
using doctest::Approx;
using fixtures::id;

TEST_CASE("worked example likelihoods and completeness") {
  auto net = fixtures::network("worked_example.json");
  auto e = fixtures::example_evidence(*net);
  auto d = diagnose(net, e);
  REQUIRE(d.subs.size() == 2);
  // Under B6: X4 = 1 needs B6 through its own link (0.6) with weight 1/3,
  // and X8 = 1 comes from B6 directly or through X6.
  CHECK(d.likelihoods[1] == Approx(0.106).epsilon(1e-12));
  // Under B5: X4 = 1 only through X5 (0.8 * 0.9 / 3 = 0.24); X8 is isolated.
  CHECK(d.likelihoods[0] == Approx(0.24 * 0.01).epsilon(1e-12));
  CHECK(d.report.phi == Approx(0.4));
  CHECK(d.report.flags.empty());

  double total = 0.0;
  for (const auto& entry : d.report.entries) total += entry.suspicion;
  CHECK(total == Approx(0.4));
  REQUIRE(d.report.entries.size() == 2);
  CHECK(d.report.entries[0].hypothesis == DiseaseEvent{id("B6"), 1});
  CHECK(d.report.entries[0].suspicion == Approx(0.4 * 0.106 / (0.106 + 0.0024)));
}

TEST_CASE("isolated findings depend on the default-cause prior") {
  auto model = load_model_file(fixtures::path("worked_example.json"));
  model.defaults.theta_d = 0.05;
  auto net = Network::compile(model);
  auto d = diagnose(net, fixtures::example_evidence(*net));
  CHECK(d.likelihoods[0] == Approx(0.24 * 0.05).epsilon(1e-12));
  CHECK(d.likelihoods[1] == Approx(0.106).epsilon(1e-12));
}

TEST_CASE("report flags") {
  auto net = fixtures::network("worked_example.json");
  SUBCASE("no finding") {
    auto r = suspicion(net, make_evidence(*net, {{id("X4"), 0}}));
    CHECK(r.has_flag(flag::kNoFinding));
    CHECK(r.entries.empty());
  }
  SUBCASE("contradiction zeroes every hypothesis") {
    // X3 = 3 can only come from X2, yet X2 is observed normal.
    auto r = suspicion(net, make_evidence(*net, {{id("X2"), 0}, {id("X3"), 3}, {id("X1"), 0}}));
    CHECK((r.has_flag(flag::kEvidenceInconsistent) || r.has_flag(flag::kNoHypothesis)));
    for (const auto& e : r.entries) CHECK(e.suspicion == 0.0);
  }
}

TEST_CASE("likelihood refuses evidence it was not separated against") {
  auto net = fixtures::network("worked_example.json");
  auto e = fixtures::example_evidence(*net);
  auto d = diagnose(net, e);
  CHECK_THROWS_AS(likelihood(d.subs[0], e.with(id("X7"), 1)), PreconditionError);
  auto missing = make_evidence(*net, {{id("X4"), 1}, {id("X8"), 1}});
  CHECK_THROWS_AS(likelihood(d.subs[0], missing), PreconditionError);
}

TEST_CASE("forward propagation matches the conditional table by hand") {
  auto net = fixtures::network("worked_example.json");
  auto p = forward_state_distribution(net, {{id("B7"), 1}}, id("X1"));
  REQUIRE(p.size() == 3);
  CHECK(p[1] == Approx(0.6));
  CHECK(p[2] == Approx(0.3));
  CHECK(p[0] == Approx(0.1));
  // X3 mixes X1 and X2 with equal weight.
  auto q = forward_state_distribution(net, {{id("B7"), 1}}, id("X3"));
  double x3_1 = 0.5 * (0.6 * 0.5);
  double x3_2 = 0.5 * (0.6 * 0.3 + 0.3 * 0.8);
  double x3_3 = 0.5 * (0.7 * 0.9);
  CHECK(q[1] == Approx(x3_1));
  CHECK(q[2] == Approx(x3_2));
  CHECK(q[3] == Approx(x3_3));
  CHECK(q[0] == Approx(1 - x3_1 - x3_2 - x3_3));
}

TEST_CASE("completeness is attention weighted and defaults when nothing is attended") {
  auto model = load_model_file(fixtures::path("worked_example.json"));
  for (auto& v : model.variables)
    if (v.id == id("X7")) v.attention = 3.0;
  auto net = Network::compile(model);
  auto c = check_completeness(net, fixtures::example_evidence(*net));
  CHECK(c.phi == Approx(2.0 / 7.0));
  CHECK_FALSE(c.defaulted);
  for (auto& v : model.variables)
    if (is_observable_kind(v.id.kind)) v.attention = 0.0;
  auto zero = Network::compile(model);
  auto d = diagnose(zero, fixtures::example_evidence(*zero));
  CHECK(d.report.phi == 1.0);
  CHECK(d.report.has_flag(flag::kCompletenessDefaulted));
}

TEST_CASE("suspicions sum to completeness on random instances") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    auto net = Network::compile(gen::random_model(rng));
    auto r = suspicion(net, gen::random_evidence(rng, *net, 0.5));
    if (r.entries.empty() || r.has_flag(flag::kEvidenceInconsistent)) continue;
    CHECK(r.total_suspicion() == Approx(r.phi).epsilon(1e-12));
    for (std::size_t i = 1; i < r.entries.size(); ++i)
      CHECK(r.entries[i - 1].suspicion >= r.entries[i].suspicion);
  }
}

namespace {

const char* kRiskModel = R"({
  "format_version": "1", "model_id": "risk",
  "variables": [
    {"kind": "BX", "index": 1, "states": ["n", "mild", "severe"]},
    {"kind": "B", "index": 2, "states": ["n", "y"]},
    {"kind": "X", "index": 1, "states": ["n", "y"]},
    {"kind": "X", "index": 9, "name": "smoker", "states": ["no", "yes"]},
    {"kind": "X", "index": 8, "name": "age", "states": ["young", "old"]},
    {"kind": "SG", "index": 1, "states": ["n", "y"]}
  ],
  "links": [
    {"parent": "BX1", "child": "X1", "a": [{"k": 1, "j": 1, "p": 0.5}, {"k": 1, "j": 2, "p": 0.9}]},
    {"parent": "B2", "child": "X1", "a": [{"k": 1, "j": 1, "p": 0.4}]}
  ],
  "gates": [{"id": "SG1", "inputs": ["X9", "X8"], "rows": [{"expr": "X9.1 & X8.1", "state": 1}]}],
  "diseases": [
    {"id": "BX1", "priors": [{"state": 1, "p": 0.2}, {"state": 2, "p": 0.1}]},
    {"id": "B2", "priors": [{"state": 1, "p": 0.1}]}
  ],
  "risk_scalers": [
    {"target": "BX1", "source": "X9", "scale": [{"state": 1, "factor": 2.0}]},
    {"target": "BX1", "source": "SG1", "scale": [{"state": 1, "factor": 3.0}]}
  ]
})";

NetworkPtr risk_net() { return Network::compile(std::get<ChiefComplaintModel>(load_model(std::string(kRiskModel)))); }

}  // namespace

TEST_CASE("risk factors rescale priors") {
  auto net = risk_net();
  SUBCASE("unobserved risk leaves the base priors") {
    auto p = apply_risk_evidence(*net, make_evidence(*net, {}));
    CHECK(p.prior({id("BX1"), 1}) == Approx(0.2));
    CHECK(p.states(id("BX1"))[0] == Approx(0.7));
  }
  SUBCASE("one scaler multiplies") {
    auto p = apply_risk_evidence(*net, make_evidence(*net, {{id("X9"), 1}}));
    CHECK(p.prior({id("BX1"), 1}) == Approx(0.4));
    CHECK(p.prior({id("BX1"), 2}) == Approx(0.2));
    CHECK(p.states(id("BX1"))[0] == Approx(0.4));
    CHECK(p.prior({id("B2"), 1}) == Approx(0.1));
  }
  SUBCASE("the gated source acts once all its inputs are observed, factors multiply, excess mass renormalizes") {
    auto p = apply_risk_evidence(*net, make_evidence(*net, {{id("X9"), 1}, {id("X8"), 1}}));
    // 6 * 0.2 clamps to 1 and 6 * 0.1 = 0.6; the pair exceeds 1 and rescales.
    CHECK(p.prior({id("BX1"), 1}) == Approx(1.0 / 1.6));
    CHECK(p.prior({id("BX1"), 2}) == Approx(0.6 / 1.6));
    CHECK(p.states(id("BX1"))[0] == Approx(0.0));
  }
  SUBCASE("partially observed gate inputs do not activate") {
    auto p = apply_risk_evidence(*net, make_evidence(*net, {{id("X8"), 1}}));
    CHECK(p.prior({id("BX1"), 1}) == Approx(0.2));
  }
}

TEST_CASE("risk observations shift suspicion but are not findings") {
  auto net = risk_net();
  auto plain = suspicion(net, make_evidence(*net, {{id("X1"), 1}}));
  auto smoker = suspicion(net, make_evidence(*net, {{id("X1"), 1}, {id("X9"), 1}}));
  CHECK(smoker.find({id("BX1"), 1})->suspicion > plain.find({id("BX1"), 1})->suspicion);
  CHECK(smoker.phi == Approx(plain.phi));
  auto only_risk = suspicion(net, make_evidence(*net, {{id("X9"), 1}}));
  CHECK(only_risk.has_flag(flag::kNoFinding));
}

TEST_CASE("exact posterior refuses oversized problems") {
  std::mt19937_64 rng(1);
  gen::ModelShape wide;
  wide.min_findings = 26;
  wide.max_findings = 26;
  auto net = Network::compile(gen::random_model(rng, wide));
  auto e = make_evidence(*net, {{VariableId{VariableKind::X, 26}, 1}});
  CHECK_THROWS_AS(exact_posterior(net, e), SizeError);
}

TEST_CASE("report json shape") {
  auto net = fixtures::network("worked_example.json");
  auto j = to_json(suspicion(net, fixtures::example_evidence(*net)));
  CHECK(j["step"] == 1);
  CHECK(j["results"].size() == 2);
  CHECK(j["results"][0]["disease_id"] == "B6");
  CHECK(j["results"][0]["state"] == 1);
  CHECK(j["results"][0].contains("suspicion"));
  CHECK(j["flags"].is_array());
}
