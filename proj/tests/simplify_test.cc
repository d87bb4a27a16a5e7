#include <doctest.h>

#include <random>

#include "ducg/error.h"
#include "ducg/simplify.h"
#include "support/fixtures.h"
#include "support/generators.h"

using namespace ducg;
using fixtures::id;

namespace {

std::vector<VariableId> alive_ids(const GraphView& g) {
  std::vector<VariableId> out;
  for (int n = 0; n < g.net->size(); ++n)
    if (g.alive(n)) out.push_back(g.net->node(n).id);
  return out;
}

NodeStatus status_of(const GraphView& g, const char* v) { return g.status[g.net->index_of(id(v))]; }

}  // namespace

TEST_CASE("worked example reduces to diseases B5 and B6") {
  auto net = fixtures::network("worked_example.json");
  auto s = simplify(net, fixtures::example_evidence(*net));
  REQUIRE(s.hypotheses.size() == 2);
  CHECK(s.hypotheses[0] == DiseaseEvent{id("B5"), 1});
  CHECK(s.hypotheses[1] == DiseaseEvent{id("B6"), 1});
  CHECK_FALSE(s.no_finding);

  // X3 observed normal cuts B7 and everything above it.
  CHECK(status_of(s.view, "B7") != NodeStatus::kAlive);
  CHECK(status_of(s.view, "X1") != NodeStatus::kAlive);
  CHECK(status_of(s.view, "X2") != NodeStatus::kAlive);
  // X7 is unobserved and leads nowhere observed, but stays as a candidate.
  CHECK(status_of(s.view, "X7") == NodeStatus::kAlive);
  CHECK(status_of(s.view, "X4") == NodeStatus::kAlive);
}

TEST_CASE("worked example sub-DUCG of B6 needs no default cause") {
  auto net = fixtures::network("worked_example.json");
  auto e = fixtures::example_evidence(*net);
  auto s = simplify(net, e);
  auto sub = separate(s, e, {id("B6"), 1});
  CHECK(sub.isolated_count() == 0);
  auto t = topology(sub);
  std::set<VariableId> nodes(t.nodes.begin(), t.nodes.end());
  CHECK(nodes.count(id("B6")));
  CHECK(nodes.count(id("X4")));
  CHECK(nodes.count(id("X6")));
  CHECK(nodes.count(id("X8")));
  CHECK_FALSE(nodes.count(id("B5")));
  CHECK_FALSE(nodes.count(id("X5")));
}

TEST_CASE("worked example sub-DUCG of B5 isolates X8 behind a virtual default") {
  auto net = fixtures::network("worked_example.json");
  auto e = fixtures::example_evidence(*net);
  auto sub = separate(simplify(net, e), e, {id("B5"), 1});
  REQUIRE(sub.isolated_count() == 1);
  CHECK(sub.virtual_defaults[0].id == id("D8"));
  CHECK(sub.virtual_defaults[0].target == id("X8"));
  auto t = topology(sub);
  std::set<VariableId> nodes(t.nodes.begin(), t.nodes.end());
  CHECK(nodes.count(id("X5")));
  CHECK(nodes.count(id("X4")));
  CHECK_FALSE(nodes.count(id("B6")));
  CHECK_FALSE(nodes.count(id("X6")));

  auto j = to_json(sub);
  CHECK(j["isolated_count"] == 1);
  bool saw_virtual = false, saw_virtual_edge = false;
  for (const auto& n : j["nodes"])
    if (n["id"] == "D8") saw_virtual = n["color"] == "virtual-d" && n["role"] == "virtual-default";
  for (const auto& e2 : j["edges"])
    if (e2["from"] == "D8") saw_virtual_edge = e2["to"] == "X8" && e2["kind"] == "virtual";
  CHECK(saw_virtual);
  CHECK(saw_virtual_edge);
}

TEST_CASE("all-normal evidence gives no finding") {
  auto net = fixtures::network("worked_example.json");
  auto s = simplify(net, make_evidence(*net, {{id("X4"), 0}, {id("X8"), 0}}));
  CHECK(s.no_finding);
  CHECK(s.hypotheses.empty());
}

TEST_CASE("separate rejects unknown hypotheses and mismatched evidence") {
  auto net = fixtures::network("worked_example.json");
  auto e = fixtures::example_evidence(*net);
  auto s = simplify(net, e);
  CHECK_THROWS_AS(separate(s, e, {id("B7"), 1}), PreconditionError);
  CHECK_THROWS_AS(separate(s, e.with(id("X7"), 1), {id("B5"), 1}), PreconditionError);
}

TEST_CASE("continuation equals reduction restricted to the earlier hypotheses") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto net = Network::compile(gen::random_model(rng));
    auto e = gen::random_evidence(rng, *net, 0.3);
    auto s = simplify(net, e);
    if (e.unknown.empty()) continue;
    // Observe one more unknown variable that is still alive, or normal.
    std::vector<VariableId> pool(e.unknown.begin(), e.unknown.end());
    VariableId v = pool[rng() % pool.size()];
    int n = net->index_of(v);
    int state = s.view.alive(n) ? static_cast<int>(rng() % net->node(n).states) : 0;
    auto next = e.with(v, state);
    next.step = 2;
    auto cont = simplify(s, next);
    auto fresh = simplify(net, next, s.hypotheses);
    CHECK(cont.view.status == fresh.view.status);
    CHECK(cont.view.link_alive == fresh.view.link_alive);
    CHECK(cont.hypotheses == fresh.hypotheses);
    // Frozen set: nothing joins.
    for (const auto& h : cont.hypotheses) CHECK(s.has_hypothesis(h));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("normal observations never enlarge the hypothesis set") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    auto net = Network::compile(gen::random_model(rng));
    auto e = gen::random_evidence(rng, *net, 0.3);
    if (e.unknown.empty()) continue;
    auto before = simplify(net, e);
    auto v = *std::next(e.unknown.begin(), static_cast<long>(rng() % e.unknown.size()));
    auto after = simplify(net, e.with(v, 0));
    for (const auto& h : after.hypotheses) CHECK(before.has_hypothesis(h));
  }
}

TEST_CASE("continuation rejects an abnormal finding on a removed variable") {
  auto net = fixtures::network("worked_example.json");
  auto e = make_evidence(*net, {{id("X3"), 0}, {id("X8"), 1}});
  auto s = simplify(net, e);
  REQUIRE(status_of(s.view, "X1") != NodeStatus::kAlive);
  CHECK_THROWS_AS(simplify(s, e.with(id("X1"), 1)), PreconditionError);
  CHECK_NOTHROW(simplify(s, e.with(id("X1"), 0)));
}

TEST_CASE("observed-normal nodes keep their incoming structure but pass nothing on") {
  auto net = fixtures::network("worked_example.json");
  auto s = simplify(net, make_evidence(*net, {{id("X6"), 0}, {id("X8"), 1}}));
  CHECK(status_of(s.view, "X6") == NodeStatus::kAlive);
  for (int l : net->node(net->index_of(id("X6"))).out_links) CHECK_FALSE(s.view.link_live(l));
  CHECK(alive_ids(s.view).size() > 0);
}

TEST_CASE("gates evaluate once their inputs are known") {
  const char* text = R"({
    "format_version": "1", "model_id": "gate",
    "variables": [
      {"kind": "B", "index": 1, "states": ["n", "y"]},
      {"kind": "B", "index": 2, "states": ["n", "y"]},
      {"kind": "X", "index": 1, "states": ["n", "y"]},
      {"kind": "X", "index": 2, "states": ["n", "y"]},
      {"kind": "G", "index": 1, "states": ["n", "y"]},
      {"kind": "X", "index": 3, "states": ["n", "y"]}
    ],
    "links": [
      {"parent": "B1", "child": "X1", "a": [{"k": 1, "j": 1, "p": 0.8}]},
      {"parent": "B2", "child": "X2", "a": [{"k": 1, "j": 1, "p": 0.7}]},
      {"parent": "G1", "child": "X3", "a": [{"k": 1, "j": 1, "p": 0.9}]},
      {"parent": "B2", "child": "X3", "a": [{"k": 1, "j": 1, "p": 0.2}]}
    ],
    "gates": [{"id": "G1", "inputs": ["X1", "X2"], "rows": [{"expr": "X1.1 & X2.1", "state": 1}]}],
    "diseases": [{"id": "B1", "priors": [{"state": 1, "p": 0.1}]}, {"id": "B2", "priors": [{"state": 1, "p": 0.1}]}]
  })";
  auto net = Network::compile(std::get<ChiefComplaintModel>(load_model(std::string(text))));
  int g1 = net->index_of(id("G1"));

  auto both = simplify(net, make_evidence(*net, {{id("X1"), 1}, {id("X2"), 1}, {id("X3"), 1}}));
  CHECK(both.view.alive(g1));
  CHECK(both.view.fixed[g1] == 1);

  auto one = simplify(net, make_evidence(*net, {{id("X1"), 1}, {id("X2"), 0}, {id("X3"), 1}}));
  CHECK(one.view.status[g1] == NodeStatus::kCertainZero);
  // With the gate closed only B2 explains X3, while X1 still needs B1.
  CHECK(one.has_hypothesis({id("B2"), 1}));
  CHECK(one.has_hypothesis({id("B1"), 1}));

  auto open = simplify(net, make_evidence(*net, {{id("X3"), 1}}));
  CHECK(open.view.alive(g1));
  CHECK(open.view.fixed[g1] == -1);
}

TEST_CASE("adding unrelated diseases leaves the separated sub-DUCG unchanged") {
  auto base_model = load_model_file(fixtures::path("worked_example.json"));
  auto big = base_model;
  for (int i = 20; i < 60; ++i) {
    Variable b{{VariableKind::B, i}, "extra", {"n", "y"}, {}, {}};
    Variable x{{VariableKind::X, i}, "extra", {"n", "y"}, {}, {}};
    big.variables.push_back(b);
    big.variables.push_back(x);
    big.links.push_back({b.id, x.id, 1.0, {{1, 1, 0.5}}});
    big.diseases.push_back({b.id, {{1, 0.01}}, {}, {}, "extra"});
  }
  auto small_net = Network::compile(base_model);
  auto big_net = Network::compile(big);
  auto es = fixtures::example_evidence(*small_net);
  auto eb = fixtures::example_evidence(*big_net);
  auto ss = simplify(small_net, es);
  auto sb = simplify(big_net, eb);
  CHECK(ss.hypotheses == sb.hypotheses);
  for (const auto& h : ss.hypotheses) CHECK(topology(separate(ss, es, h)) == topology(separate(sb, eb, h)));
}
