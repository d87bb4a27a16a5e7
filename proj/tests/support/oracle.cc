#include "support/oracle.h"

#include <functional>
#include <stdexcept>

namespace ducg::oracle {

namespace {

// Flat copy of the model: nodes in topological order with parent links.
struct Raw {
  struct In {
    int parent;
    double r;
    std::map<std::pair<int, int>, double> a;  // (k, j) -> p
  };
  std::vector<VariableId> ids;
  std::vector<int> states;
  std::vector<std::vector<In>> in;
  std::vector<double> total_r;
  std::map<VariableId, int> pos;
  std::vector<std::vector<int>> children;
  double theta = 0.01;

  explicit Raw(const ChiefComplaintModel& m) {
    if (!m.gates.empty()) throw std::logic_error("oracle does not handle gates");
    theta = m.defaults.theta_d;
    std::map<VariableId, int> count;
    std::map<VariableId, std::vector<VariableId>> parents;
    for (const auto& v : m.variables) count[v.id] = v.state_count();
    for (const auto& l : m.links) parents[l.child].push_back(l.parent);
    // Depth-first topological sort.
    std::set<VariableId> done;
    std::function<void(VariableId)> visit = [&](VariableId v) {
      if (done.count(v)) return;
      done.insert(v);
      for (auto p : parents[v]) visit(p);
      pos[v] = static_cast<int>(ids.size());
      ids.push_back(v);
      states.push_back(count[v]);
    };
    for (const auto& v : m.variables) visit(v.id);
    in.resize(ids.size());
    total_r.assign(ids.size(), 0.0);
    children.resize(ids.size());
    for (const auto& l : m.links) {
      In e{pos[l.parent], l.r, {}};
      for (const auto& a : l.a) e.a[{a.k, a.j}] = a.p;
      int c = pos[l.child];
      in[c].push_back(e);
      total_r[c] += l.r;
      children[e.parent].push_back(c);
    }
  }

  bool is_root(int n) const { return in[n].empty(); }

  double cpt(int n, int k, const std::vector<int>& s) const {
    double abnormal = 0.0, at_k = 0.0;
    for (const auto& e : in[n]) {
      for (const auto& [kj, p] : e.a) {
        if (kj.second != s[e.parent]) continue;
        double w = e.r / total_r[n] * p;
        abnormal += w;
        if (kj.first == k) at_k += w;
      }
    }
    return k == 0 ? 1.0 - abnormal : at_k;
  }
};

// Root assignment for hypothesis h: h's disease at its state, other
// diseases at 0, default causes at 1.
std::vector<int> roots_for(const Raw& g, const ChiefComplaintModel& m, const DiseaseEvent& h) {
  std::vector<int> s(g.ids.size(), -1);
  for (std::size_t n = 0; n < g.ids.size(); ++n) {
    if (g.ids[n].kind == VariableKind::D) s[n] = 1;
  }
  for (const auto& d : m.diseases) s[g.pos.at(d.variable)] = 0;
  s[g.pos.at(h.disease)] = h.state;
  return s;
}

enum class Mode { kTables, kMechanisms };

// Sum over joint configurations of the product of conditional tables.
// allowed[n] restricts node n (empty = unrestricted); pinned nodes keep the
// state in `base` and contribute no factor. Only ancestors of restricted
// nodes are enumerated; everything else marginalizes to 1.
double joint(const Raw& g, const std::vector<int>& base, const std::vector<std::vector<char>>& allowed,
             const std::vector<char>& pinned, Mode mode) {
  int n_nodes = static_cast<int>(g.ids.size());
  std::vector<char> needed(n_nodes, 0);
  for (int n = n_nodes - 1; n >= 0; --n) {
    if (!allowed[n].empty()) needed[n] = 1;
    if (!needed[n] || pinned[n]) continue;
    for (const auto& e : g.in[n]) needed[e.parent] = 1;
  }
  std::vector<int> order;
  for (int n = 0; n < n_nodes; ++n)
    if (needed[n]) order.push_back(n);
  std::vector<int> s = base;
  std::function<double(std::size_t)> rec = [&](std::size_t i) -> double {
    if (i == order.size()) return 1.0;
    int n = order[i];
    if (pinned[n] || g.is_root(n)) {
      if (s[n] < 0) throw std::logic_error("unassigned root " + g.ids[n].str());
      if (!allowed[n].empty() && !allowed[n][s[n]]) return 0.0;
      return rec(i + 1);
    }
    double total = 0.0;
    for (int k = 0; k < g.states[n]; ++k) {
      if (!allowed[n].empty() && !allowed[n][k]) continue;
      double p = 0.0;
      if (mode == Mode::kTables) {
        p = g.cpt(n, k, s);
      } else {
        // Choose the driving link, then the state it produces.
        for (const auto& e : g.in[n]) {
          double pick = e.r / g.total_r[n];
          double produce = 0.0;
          if (k == 0) {
            double abnormal = 0.0;
            for (const auto& [kj, a] : e.a)
              if (kj.second == s[e.parent]) abnormal += a;
            produce = 1.0 - abnormal;
          } else if (auto it = e.a.find({k, s[e.parent]}); it != e.a.end()) {
            produce = it->second;
          }
          p += pick * produce;
        }
      }
      if (p == 0.0) continue;
      s[n] = k;
      total += p * rec(i + 1);
    }
    s[n] = -1;
    return total;
  };
  return rec(0);
}

std::vector<std::vector<char>> evidence_masks(const Raw& g, const EvidenceSet& e) {
  std::vector<std::vector<char>> allowed(g.ids.size());
  for (const auto& [id, state] : e.observed) {
    int n = g.pos.at(id);
    allowed[n].assign(g.states[n], 0);
    allowed[n][state] = 1;
  }
  return allowed;
}

std::vector<char> ancestors_of(const Raw& g, int target) {
  std::vector<char> anc(g.ids.size(), 0);
  std::vector<int> stack{target};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    for (const auto& e : g.in[n])
      if (!anc[e.parent]) {
        anc[e.parent] = 1;
        stack.push_back(e.parent);
      }
  }
  return anc;
}

// Whether some link chain from `from` can carry abnormality to an observed
// abnormal node, given only what is observed along the way.
bool reaches_abnormal_finding(const Raw& g, const EvidenceSet& e, int from) {
  auto observed = [&](int n) -> int {
    auto s = e.state_of(g.ids[n]);
    return s ? *s : -1;
  };
  std::vector<char> seen(g.ids.size(), 0);
  std::vector<int> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    int p = stack.back();
    stack.pop_back();
    int ps = observed(p);
    if (ps == 0) continue;
    for (int c : g.children[p]) {
      for (const auto& link : g.in[c]) {
        if (link.parent != p) continue;
        int cs = observed(c);
        bool carries = false;
        for (const auto& [kj, a] : link.a) {
          if (a == 0.0) continue;
          if (ps >= 1 && kj.second != ps) continue;
          if (cs >= 1 && kj.first != cs) continue;
          carries = true;
        }
        if (!carries) continue;
        if (cs >= 1) return true;
        if (!seen[c]) {
          seen[c] = 1;
          stack.push_back(c);
        }
      }
    }
  }
  return false;
}

Result run(const ChiefComplaintModel& m, const EvidenceSet& e, Mode mode) {
  Raw g(m);
  Result out;
  if (!e.has_abnormal()) return out;
  for (const auto& d : m.diseases) {
    int n = g.pos.at(d.variable);
    if (!reaches_abnormal_finding(g, e, n)) continue;
    for (int j = 1; j < g.states[n]; ++j) out.hypotheses.insert({d.variable, j});
  }
  double norm = 0.0;
  std::map<DiseaseEvent, double> weight;
  for (const auto& h : out.hypotheses) {
    std::vector<int> base = roots_for(g, m, h);
    std::vector<char> pinned(g.ids.size(), 0);
    auto masks = evidence_masks(g, e);
    std::set<VariableId> isolated;
    // Walk abnormal findings in topological order; a finding that cannot
    // be abnormal given the evidence above it becomes a pinned root.
    for (int n = 0; n < static_cast<int>(g.ids.size()); ++n) {
      auto s = e.state_of(g.ids[n]);
      if (!s || *s == 0) continue;
      auto anc = ancestors_of(g, n);
      std::vector<std::vector<char>> local(g.ids.size());
      for (std::size_t a = 0; a < g.ids.size(); ++a)
        if (anc[a]) local[a] = masks[a];
      local[n].assign(g.states[n], 1);
      local[n][0] = 0;
      if (joint(g, base, local, pinned, mode) > 0.0) continue;
      pinned[n] = 1;
      base[n] = *s;
      isolated.insert(g.ids[n]);
    }
    double l = joint(g, base, masks, pinned, mode);
    for (std::size_t i = 0; i < isolated.size(); ++i) l *= g.theta;
    out.likelihood[h] = l;
    out.isolated[h] = isolated;
    double prior = 0.0;
    for (const auto& v : m.find_disease(h.disease)->priors)
      if (v.state == h.state) prior = v.value;
    weight[h] = prior * l;
    norm += prior * l;
  }
  for (const auto& [h, w] : weight) out.posterior[h] = norm > 0.0 ? w / norm : 0.0;
  return out;
}

}  // namespace

Result enumerate(const ChiefComplaintModel& model, const EvidenceSet& evidence) {
  return run(model, evidence, Mode::kTables);
}

Result enumerate_mechanisms(const ChiefComplaintModel& model, const EvidenceSet& evidence) {
  return run(model, evidence, Mode::kMechanisms);
}

double plain_likelihood(const ChiefComplaintModel& model, const EvidenceSet& evidence, const DiseaseEvent& h) {
  Raw g(model);
  std::vector<char> pinned(g.ids.size(), 0);
  return joint(g, roots_for(g, model, h), evidence_masks(g, evidence), pinned, Mode::kTables);
}

}  // namespace ducg::oracle
