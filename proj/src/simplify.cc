#include "ducg/simplify.h"

#include <algorithm>

#include "ducg/error.h"

namespace ducg {

bool GraphView::link_live(int l) const {
  const LinkTable& t = net->link(l);
  return link_alive[l] && alive(t.parent) && alive(t.child);
}

int GraphView::known_state(int n) const {
  if (observed[n] >= 0) return observed[n];
  if (fixed[n] >= 0) return fixed[n];
  if (status[n] == NodeStatus::kCertainZero) return 0;
  return -1;
}

bool GraphView::has_live_input(int n) const {
  for (int l : net->node(n).in_links)
    if (link_live(l)) return true;
  return false;
}

bool SimplifiedGraph::has_hypothesis(const DiseaseEvent& h) const {
  return std::find(hypotheses.begin(), hypotheses.end(), h) != hypotheses.end();
}

bool SubDucg::contains(VariableId id) const {
  auto n = view.net->find(id);
  return n && view.alive(*n);
}

namespace {

// The deletion rules, applied until nothing changes:
//   support  a link survives only if its parent can be abnormal in a state
//            with a non-null entry, matching the child's observed state when
//            the child is observed abnormal; a parent observed or pinned at
//            state 0 drives nothing;
//   dead     an X/SX that is unobserved or normal and has no surviving input
//            is certainly in state 0 (an abnormal one stays, unexplained);
//   gates    a gate whose inputs are all known is evaluated (removed inputs
//            read as state 0) and is pinned, or dropped when it yields 0;
//   roots    when enabled, a disease with no path to an abnormal finding is
//            removed;
//   barren   anything with no path to an observed or unknown variable is
//            removed, except the protected hypothesis node.
class Reducer {
 public:
  Reducer(GraphView& g, bool prune_roots, int keep)
      : g_(g), net_(*g.net), prune_roots_(prune_roots), keep_(keep) {}

  void run() {
    bool changed = true;
    while (changed) {
      changed = local_pass();
      if (prune_roots_) changed |= prune_unreachable_roots();
      changed |= prune_barren();
    }
    for (int n = 0; n < net_.size(); ++n)
      if (!g_.alive(n)) kill_links(n);
  }

 private:
  bool supported(int l) const {
    const LinkTable& t = net_.link(l);
    if (!g_.alive(t.parent)) return false;
    int child_obs = g_.observed[t.child];
    auto column_ok = [&](int j) {
      return child_obs >= 1 ? t.at(child_obs, j) > 0.0 : t.column_nonzero(j);
    };
    int ps = g_.known_state(t.parent);
    if (ps >= 0) return ps > 0 && column_ok(ps);
    for (int j = 1; j < t.parent_states; ++j)
      if (column_ok(j)) return true;
    return false;
  }

  void remove(int n, NodeStatus why) {
    g_.status[n] = why;
    kill_links(n);
  }

  void kill_links(int n) {
    for (int l : net_.node(n).in_links) g_.link_alive[l] = 0;
    for (int l : net_.node(n).out_links) g_.link_alive[l] = 0;
  }

  bool local_pass() {
    bool changed = false;
    for (int n : net_.topo_order()) {
      if (!g_.alive(n)) continue;
      const Node& node = net_.node(n);
      for (int l : node.in_links)
        if (g_.link_alive[l] && !supported(l)) {
          g_.link_alive[l] = 0;
          changed = true;
        }
      if (node.gate >= 0) {
        changed |= settle_gate(n, net_.gates()[node.gate]);
      } else if (is_observable_kind(node.id.kind)) {
        if (g_.observed[n] <= 0 && !g_.has_live_input(n)) {
          remove(n, NodeStatus::kCertainZero);
          changed = true;
        }
      }
    }
    return changed;
  }

  bool settle_gate(int n, const GateTable& gate) {
    if (g_.fixed[n] >= 0) return false;
    std::vector<int> states;
    states.reserve(gate.inputs.size());
    for (int in : gate.inputs) {
      int s = g_.known_state(in);
      if (s < 0) {
        if (g_.status[in] == NodeStatus::kAlive) return false;
        s = 0;
      }
      states.push_back(s);
    }
    int s = gate.evaluate(states);
    if (s == 0)
      remove(n, NodeStatus::kCertainZero);
    else
      g_.fixed[n] = s;
    return true;
  }

  // Walks backwards from `seeds` through live links and the inputs of
  // gates whose state is still uncertain.
  std::vector<char> ancestors_of(const std::vector<int>& seeds) const {
    std::vector<char> seen(net_.size(), 0);
    std::vector<int> stack = seeds;
    for (int s : seeds) seen[s] = 1;
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      const Node& node = net_.node(n);
      auto visit = [&](int p) {
        if (!seen[p] && g_.alive(p)) {
          seen[p] = 1;
          stack.push_back(p);
        }
      };
      for (int l : node.in_links)
        if (g_.link_live(l)) visit(net_.link(l).parent);
      if (node.gate >= 0 && g_.fixed[n] < 0)
        for (int in : net_.gates()[node.gate].inputs) visit(in);
    }
    return seen;
  }

  bool prune_unreachable_roots() {
    std::vector<int> seeds;
    for (int n = 0; n < net_.size(); ++n)
      if (g_.alive(n) && is_observable_kind(net_.node(n).id.kind) && g_.observed[n] >= 1)
        seeds.push_back(n);
    auto reach = ancestors_of(seeds);
    bool changed = false;
    for (int d : net_.disease_nodes())
      if (g_.alive(d) && !reach[d] && d != keep_) {
        remove(d, NodeStatus::kCertainZero);
        changed = true;
      }
    return changed;
  }

  bool prune_barren() {
    std::vector<int> seeds;
    for (int n = 0; n < net_.size(); ++n)
      if (g_.alive(n) && (g_.observed[n] >= 0 || g_.unknown[n])) seeds.push_back(n);
    auto reach = ancestors_of(seeds);
    bool changed = false;
    for (int n = 0; n < net_.size(); ++n)
      if (g_.alive(n) && !reach[n] && n != keep_) {
        remove(n, NodeStatus::kBarren);
        changed = true;
      }
    return changed;
  }

  GraphView& g_;
  const Network& net_;
  bool prune_roots_;
  int keep_;
};

GraphView initial_view(const NetworkPtr& net, const EvidenceSet& evidence) {
  check_evidence(*net, evidence);
  GraphView g;
  g.net = net;
  int n = net->size();
  g.status.assign(n, NodeStatus::kAlive);
  g.fixed.assign(n, -1);
  g.observed.assign(n, -1);
  g.unknown.assign(n, 0);
  g.link_alive.assign(net->links().size(), 1);
  for (int i = 0; i < n; ++i) {
    const Node& node = net->node(i);
    if (!node.causal) g.status[i] = NodeStatus::kExcluded;
    if (node.id.kind == VariableKind::D) g.fixed[i] = 1;
  }
  for (const auto& [id, s] : evidence.observed) g.observed[net->index_of(id)] = s;
  for (auto id : evidence.unknown) g.unknown[net->index_of(id)] = 1;
  return g;
}

// True when `later` keeps every observation of `earlier` unchanged.
void require_extension(const EvidenceSet& earlier, const EvidenceSet& later) {
  for (const auto& [id, s] : earlier.observed) {
    auto now = later.state_of(id);
    if (!now || *now != s)
      throw PreconditionError("evidence does not extend the earlier evidence at " + id.str());
  }
}

// Applies the observations `evidence` adds to a view derived from earlier
// evidence.
void extend_view(GraphView& g, const EvidenceSet& evidence) {
  const Network& net = *g.net;
  check_evidence(net, evidence);
  std::fill(g.unknown.begin(), g.unknown.end(), 0);
  for (auto id : evidence.unknown) g.unknown[net.index_of(id)] = 1;
  for (const auto& [id, s] : evidence.observed) {
    int n = net.index_of(id);
    if (g.observed[n] == s) continue;
    if (s > 0 && g.status[n] != NodeStatus::kAlive && g.status[n] != NodeStatus::kExcluded)
      throw PreconditionError("cannot continue a reduction with abnormal " + id.str() +
                              ", which the earlier reduction removed");
    g.observed[n] = s;
  }
}

bool has_causal_finding(const Network& net, const EvidenceSet& evidence) {
  for (const auto& [id, s] : evidence.observed)
    if (s > 0 && net.node(net.index_of(id)).causal) return true;
  return false;
}

void attach_virtual_defaults(SubDucg& sub) {
  const GraphView& g = sub.view;
  const Network& net = *g.net;
  sub.virtual_defaults.clear();
  sub.isolated.assign(net.size(), 0);
  for (int n = 0; n < net.size(); ++n) {
    const Node& node = net.node(n);
    if (g.alive(n) && is_observable_kind(node.id.kind) && g.observed[n] >= 1 && !g.has_live_input(n)) {
      sub.virtual_defaults.push_back({VariableId{VariableKind::D, node.id.index}, node.id, g.observed[n]});
      sub.isolated[n] = 1;
    }
  }
}

}  // namespace

SimplifiedGraph simplify(const NetworkPtr& net, const EvidenceSet& evidence) {
  SimplifiedGraph out;
  out.view = initial_view(net, evidence);
  out.evidence = evidence;
  Reducer(out.view, /*prune_roots=*/true, /*keep=*/-1).run();
  out.no_finding = !has_causal_finding(*net, evidence);
  if (!out.no_finding)
    for (int d : net->disease_nodes())
      if (out.view.alive(d))
        for (int j = 1; j < net->node(d).states; ++j) out.hypotheses.push_back({net->node(d).id, j});
  return out;
}

SimplifiedGraph simplify(const NetworkPtr& net, const EvidenceSet& evidence,
                         const std::vector<DiseaseEvent>& within) {
  SimplifiedGraph out;
  out.view = initial_view(net, evidence);
  out.evidence = evidence;
  for (int d : net->disease_nodes()) {
    VariableId id = net->node(d).id;
    bool listed = std::any_of(within.begin(), within.end(), [&](const DiseaseEvent& h) { return h.disease == id; });
    if (!listed) {
      out.view.status[d] = NodeStatus::kCertainZero;
      out.view.fixed[d] = 0;
    }
  }
  Reducer(out.view, true, -1).run();
  out.no_finding = !has_causal_finding(*net, evidence);
  if (!out.no_finding)
    for (const auto& h : within)
      if (out.view.alive(net->index_of(h.disease))) out.hypotheses.push_back(h);
  return out;
}

SimplifiedGraph simplify(const SimplifiedGraph& previous, const EvidenceSet& evidence) {
  require_extension(previous.evidence, evidence);
  SimplifiedGraph out;
  out.view = previous.view;
  out.evidence = evidence;
  extend_view(out.view, evidence);
  Reducer(out.view, true, -1).run();
  const Network& net = *out.view.net;
  out.no_finding = !has_causal_finding(net, evidence);
  if (!out.no_finding)
    for (const auto& h : previous.hypotheses)
      if (out.view.alive(net.index_of(h.disease))) out.hypotheses.push_back(h);
  return out;
}

SubDucg separate(const SimplifiedGraph& simplified, const DiseaseEvent& hypothesis) {
  if (!simplified.has_hypothesis(hypothesis)) {
    std::string valid;
    for (const auto& h : simplified.hypotheses) valid += (valid.empty() ? "" : ", ") + h.str();
    throw PreconditionError("hypothesis " + hypothesis.str() + " is not among the possible diseases {" +
                            valid + "}");
  }
  const Network& net = *simplified.view.net;
  SubDucg sub;
  sub.hypothesis = hypothesis;
  sub.evidence = simplified.evidence;
  sub.view = simplified.view;
  int keep = net.index_of(hypothesis.disease);
  for (int d : net.disease_nodes()) {
    if (d == keep) {
      sub.view.fixed[d] = hypothesis.state;
    } else if (sub.view.alive(d)) {
      sub.view.status[d] = NodeStatus::kCertainZero;
      sub.view.fixed[d] = 0;
    }
  }
  Reducer(sub.view, /*prune_roots=*/false, keep).run();
  attach_virtual_defaults(sub);
  return sub;
}

SubDucg separate(const SimplifiedGraph& simplified, const EvidenceSet& evidence,
                 const DiseaseEvent& hypothesis) {
  if (!(evidence.observed == simplified.evidence.observed))
    throw PreconditionError("evidence differs from the evidence the graph was simplified against");
  return separate(simplified, hypothesis);
}

SubDucg refine(const SubDucg& sub, const EvidenceSet& evidence) {
  require_extension(sub.evidence, evidence);
  SubDucg out;
  out.hypothesis = sub.hypothesis;
  out.evidence = evidence;
  out.view = sub.view;
  extend_view(out.view, evidence);
  Reducer(out.view, false, out.view.net->index_of(sub.hypothesis.disease)).run();
  attach_virtual_defaults(out);
  return out;
}

Topology topology(const SubDucg& sub) {
  const GraphView& g = sub.view;
  const Network& net = *g.net;
  Topology t;
  for (int n = 0; n < net.size(); ++n)
    if (g.alive(n)) t.nodes.push_back(net.node(n).id);
  for (int l = 0; l < static_cast<int>(net.links().size()); ++l)
    if (g.link_live(l)) t.edges.emplace_back(net.node(net.link(l).parent).id, net.node(net.link(l).child).id);
  for (const auto& gate : net.gates())
    if (g.alive(gate.node))
      for (int in : gate.inputs)
        if (g.alive(in)) t.edges.emplace_back(net.node(in).id, net.node(gate.node).id);
  std::sort(t.edges.begin(), t.edges.end());
  t.virtual_defaults = sub.virtual_defaults;
  return t;
}

nlohmann::json to_json(const SubDucg& sub) {
  using nlohmann::json;
  const GraphView& g = sub.view;
  const Network& net = *g.net;
  int hyp = net.index_of(sub.hypothesis.disease);
  json nodes = json::array();
  for (int n = 0; n < net.size(); ++n) {
    if (!g.alive(n)) continue;
    const Node& node = net.node(n);
    json j = {{"id", node.id.str()}, {"name", node.variable->name}};
    std::string color = "unobserved";
    if (g.observed[n] >= 0) {
      j["observed_state"] = g.observed[n];
      color = g.observed[n] == 0 ? "normal" : "abnormal";
    }
    std::string role = "intermediate";
    if (n == hyp) {
      role = "hypothesis";
      j["state"] = sub.hypothesis.state;
      color = "abnormal";
    } else if (node.id.kind == VariableKind::D) {
      role = "default-cause";
    } else if (node.gate >= 0) {
      role = "gate";
    } else if (g.observed[n] >= 0) {
      role = "evidence";
    }
    j["color"] = color;
    j["role"] = role;
    if (sub.isolated[n]) j["isolated"] = true;
    nodes.push_back(std::move(j));
  }
  for (const auto& v : sub.virtual_defaults)
    nodes.push_back({{"id", v.id.str()},
                     {"name", "virtual default cause of " + v.target.str()},
                     {"color", "virtual-d"},
                     {"role", "virtual-default"},
                     {"target", v.target.str()}});

  json edges = json::array();
  auto topo = topology(sub);
  for (const auto& [from, to] : topo.edges) {
    bool gate_edge = is_gate_kind(to.kind);
    edges.push_back({{"from", from.str()}, {"to", to.str()}, {"kind", gate_edge ? "gate-input" : "causal"}});
  }
  for (const auto& v : sub.virtual_defaults)
    edges.push_back({{"from", v.id.str()}, {"to", v.target.str()}, {"kind", "virtual"}, {"state", v.state}});

  return {{"hypothesis", sub.hypothesis.str()},
          {"isolated_count", sub.isolated_count()},
          {"nodes", nodes},
          {"edges", edges}};
}

}  // namespace ducg
