#include "ducg/inference.h"

#include <algorithm>
#include <cmath>

#include "ducg/error.h"
#include "ducg/factor.h"

namespace ducg {

namespace {

int root_state(const Node& node, const RootAssignment& roots) {
  auto it = roots.find(node.id);
  if (it != roots.end()) return it->second;
  return node.id.kind == VariableKind::D ? 1 : 0;
}

// Child distribution given one distribution per live parent link.
void mix_parents(const Network& net, const Node& node, const std::vector<std::vector<double>>& dist,
                 std::vector<double>& out) {
  out.assign(node.states, 0.0);
  double abnormal = 0.0;
  for (int l : node.in_links) {
    const LinkTable& t = net.link(l);
    double w = t.r / node.total_r;
    const auto& pd = dist[t.parent];
    for (int j = 1; j < t.parent_states; ++j) {
      if (pd[j] == 0.0) continue;
      for (int k = 1; k < node.states; ++k) {
        double p = w * t.at(k, j) * pd[j];
        out[k] += p;
        abnormal += p;
      }
    }
  }
  out[0] = std::max(0.0, 1.0 - abnormal);
}

std::vector<double> forward_by_elimination(const NetworkPtr& net, const RootAssignment& roots, int target) {
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
    if (is_disease_kind(node.id.kind) || node.id.kind == VariableKind::D) g.fixed[i] = root_state(node, roots);
  }
  std::vector<char> none(n, 0);
  return evidence_joint(g, none, net->theta_d(), target);
}

}  // namespace

std::vector<double> forward_state_distribution(const NetworkPtr& net, const RootAssignment& roots,
                                               VariableId target) {
  for (const auto& [id, s] : roots) {
    int r = net->index_of(id);
    if (!is_disease_kind(id.kind) && id.kind != VariableKind::D)
      throw PreconditionError(id.str() + " is not a root event");
    if (s < 0 || s >= net->node(r).states) throw PreconditionError("root state out of range for " + id.str());
  }
  int t = net->index_of(target);
  std::vector<std::vector<double>> dist(net->size());
  for (int n : net->topo_order()) {
    const Node& node = net->node(n);
    auto& d = dist[n];
    if (is_disease_kind(node.id.kind) || node.id.kind == VariableKind::D) {
      d.assign(node.states, 0.0);
      d[root_state(node, roots)] = 1.0;
    } else if (node.gate >= 0) {
      const GateTable& gate = net->gates()[node.gate];
      std::vector<int> states;
      for (int in : gate.inputs) {
        auto hit = std::find(dist[in].begin(), dist[in].end(), 1.0);
        if (hit == dist[in].end()) return forward_by_elimination(net, roots, t);
        states.push_back(static_cast<int>(hit - dist[in].begin()));
      }
      d.assign(node.states, 0.0);
      d[gate.evaluate(states)] = 1.0;
    } else {
      mix_parents(*net, node, dist, d);
    }
    if (n == t) return d;
  }
  return dist[t];
}

double likelihood(const SubDucg& sub, const EvidenceSet& evidence) {
  const GraphView& g = sub.view;
  const Network& net = *g.net;
  for (const auto& [id, s] : sub.evidence.observed) {
    auto given = evidence.state_of(id);
    if (!given || *given != s)
      throw PreconditionError("evidence lacks " + id.str() + "=" + std::to_string(s) +
                              ", which the sub-DUCG was separated against");
  }
  for (const auto& [id, s] : evidence.observed) {
    int n = net.index_of(id);
    bool explained = (g.alive(n) && g.observed[n] == s) ||
                     (g.status[n] == NodeStatus::kCertainZero && s == 0 && g.observed[n] == 0) ||
                     (g.status[n] == NodeStatus::kExcluded && g.observed[n] == s);
    if (!explained)
      throw PreconditionError("evidence " + id.str() + "=" + std::to_string(s) +
                              " is neither in the sub-DUCG nor explained by a virtual default");
  }
  return evidence_joint(g, sub.isolated, net.theta_d())[0];
}

Completeness check_completeness(const SimplifiedGraph& simplified) {
  const GraphView& g = simplified.view;
  const Network& net = *g.net;
  double seen = 0.0, relevant = 0.0;
  for (int n = 0; n < net.size(); ++n) {
    const Node& node = net.node(n);
    if (!g.alive(n) || !is_observable_kind(node.id.kind)) continue;
    if (g.observed[n] >= 0) {
      seen += node.attention;
      relevant += node.attention;
    } else if (g.unknown[n]) {
      relevant += node.attention;
    }
  }
  if (relevant <= 0.0) return {1.0, true};
  return {seen / relevant, false};
}

Completeness check_completeness(const NetworkPtr& net, const EvidenceSet& evidence) {
  return check_completeness(simplify(net, evidence));
}

bool SuspicionReport::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

const SuspicionEntry* SuspicionReport::find(const DiseaseEvent& h) const {
  for (const auto& e : entries)
    if (e.hypothesis == h) return &e;
  return nullptr;
}

double SuspicionReport::total_suspicion() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.suspicion;
  return s;
}

void rank_entries(SuspicionReport& report) {
  double total = 0.0;
  for (const auto& e : report.entries) total += e.prior * e.likelihood;
  for (auto& e : report.entries) e.suspicion = total > 0.0 ? report.phi * e.prior * e.likelihood / total : 0.0;
  if (total <= 0.0 && !report.entries.empty()) report.flags.push_back(flag::kEvidenceInconsistent);
  std::stable_sort(report.entries.begin(), report.entries.end(), [](const auto& a, const auto& b) {
    if (a.suspicion != b.suspicion) return a.suspicion > b.suspicion;
    return a.hypothesis < b.hypothesis;
  });
}

const SubDucg& Diagnosis::sub(const DiseaseEvent& h) const {
  for (const auto& s : subs)
    if (s.hypothesis == h) return s;
  throw NotFoundError("no sub-DUCG for " + h.str());
}

Diagnosis diagnose(const NetworkPtr& net, const EvidenceSet& evidence) {
  Diagnosis d;
  d.priors = apply_risk_evidence(*net, evidence);
  d.simplified = simplify(net, evidence);
  auto completeness = check_completeness(d.simplified);
  d.report.step = evidence.step;
  d.report.phi = completeness.phi;
  if (completeness.defaulted) d.report.flags.push_back(flag::kCompletenessDefaulted);
  if (d.simplified.no_finding) {
    d.report.flags.push_back(flag::kNoFinding);
    return d;
  }
  if (d.simplified.hypotheses.empty()) d.report.flags.push_back(flag::kNoHypothesis);
  for (const auto& h : d.simplified.hypotheses) {
    d.subs.push_back(separate(d.simplified, h));
    double l = likelihood(d.subs.back(), evidence);
    d.likelihoods.push_back(l);
    d.report.entries.push_back({h, l, 0.0, d.priors.prior(h)});
  }
  rank_entries(d.report);
  return d;
}

SuspicionReport suspicion(const NetworkPtr& net, const EvidenceSet& evidence) {
  return diagnose(net, evidence).report;
}

namespace {

// Depth-first enumeration of the unobserved ancestors of the evidence.
class Enumerator {
 public:
  Enumerator(const Network& net, const EvidenceSet& evidence) : net_(net), state_(net.size(), -1) {
    observed_.assign(net.size(), -1);
    for (const auto& [id, s] : evidence.observed) observed_[net.index_of(id)] = s;
    std::vector<char> relevant(net.size(), 0);
    std::vector<int> stack;
    for (int n = 0; n < net.size(); ++n)
      if (observed_[n] >= 0 && net.node(n).causal) {
        relevant[n] = 1;
        stack.push_back(n);
      }
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      auto visit = [&](int p) {
        if (!relevant[p]) {
          relevant[p] = 1;
          stack.push_back(p);
        }
      };
      for (int l : net.node(n).in_links) visit(net.link(l).parent);
      if (net.node(n).gate >= 0)
        for (int in : net.gates()[net.node(n).gate].inputs) visit(in);
    }
    double joint = 1.0;
    int free_vars = 0;
    for (int n : net.topo_order()) {
      if (!relevant[n]) continue;
      const Node& node = net.node(n);
      if (is_disease_kind(node.id.kind) || node.id.kind == VariableKind::D) {
        roots_.push_back(n);
        continue;
      }
      order_.push_back(n);
      if (observed_[n] < 0) {
        ++free_vars;
        joint *= node.states;
      }
    }
    if (free_vars > 20 || joint > double(1 << 22))
      throw SizeError("exhaustive enumeration refused: " + std::to_string(free_vars) +
                      " unobserved ancestors of the evidence");
  }

  double likelihood(const DiseaseEvent& h) {
    for (int r : roots_) {
      const Node& node = net_.node(r);
      state_[r] = node.id.kind == VariableKind::D ? 1 : (node.id == h.disease ? h.state : 0);
    }
    return walk(0);
  }

 private:
  double walk(std::size_t pos) {
    if (pos == order_.size()) return 1.0;
    int n = order_[pos];
    const Node& node = net_.node(n);
    std::vector<double> dist(node.states, 0.0);
    if (node.gate >= 0) {
      const GateTable& gate = net_.gates()[node.gate];
      std::vector<int> in;
      for (int i : gate.inputs) in.push_back(state_[i]);
      dist[gate.evaluate(in)] = 1.0;
    } else {
      double abnormal = 0.0;
      for (int l : node.in_links) {
        const LinkTable& t = net_.link(l);
        int j = state_[t.parent];
        if (j <= 0) continue;
        for (int k = 1; k < node.states; ++k) {
          double p = t.r / node.total_r * t.at(k, j);
          dist[k] += p;
          abnormal += p;
        }
      }
      dist[0] = std::max(0.0, 1.0 - abnormal);
    }
    double total = 0.0;
    if (observed_[n] >= 0) {
      if (dist[observed_[n]] > 0.0) {
        state_[n] = observed_[n];
        total = dist[observed_[n]] * walk(pos + 1);
      }
    } else {
      for (int k = 0; k < node.states; ++k) {
        if (dist[k] == 0.0) continue;
        state_[n] = k;
        total += dist[k] * walk(pos + 1);
      }
    }
    state_[n] = -1;
    return total;
  }

  const Network& net_;
  std::vector<int> state_;
  std::vector<int> observed_;
  std::vector<int> roots_;
  std::vector<int> order_;
};

}  // namespace

std::map<DiseaseEvent, double> exact_posterior(const NetworkPtr& net, const EvidenceSet& evidence) {
  check_evidence(*net, evidence);
  auto priors = apply_risk_evidence(*net, evidence);
  Enumerator enumerate(*net, evidence);
  std::map<DiseaseEvent, double> weight;
  double total = 0.0;
  for (int d : net->disease_nodes())
    for (int j = 1; j < net->node(d).states; ++j) {
      DiseaseEvent h{net->node(d).id, j};
      double w = priors.prior(h);
      if (w > 0.0) w *= enumerate.likelihood(h);
      weight[h] = w;
      total += w;
    }
  for (auto& [h, w] : weight) w = total > 0.0 ? w / total : 0.0;
  return weight;
}

nlohmann::json to_json(const SuspicionReport& report) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& e : report.entries)
    results.push_back({{"disease_id", e.hypothesis.disease.str()},
                       {"state", e.hypothesis.state},
                       {"likelihood", e.likelihood},
                       {"suspicion", e.suspicion},
                       {"prior", e.prior}});
  return {{"step", report.step}, {"phi", report.phi}, {"results", results}, {"flags", report.flags}};
}

}  // namespace ducg
