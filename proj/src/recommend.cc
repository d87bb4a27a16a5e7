#include "ducg/recommend.h"

#include <algorithm>
#include <cmath>

#include "ducg/error.h"
#include "ducg/factor.h"

namespace ducg {

bool RecommendationList::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

const RecommendationEntry* RecommendationList::find(VariableId id) const {
  for (const auto& c : candidates)
    if (c.variable == id) return &c;
  return nullptr;
}

namespace {

// Nodes with a directed path to `target` through live links and the
// inputs of unpinned gates.
std::vector<char> ancestors(const GraphView& g, int target) {
  const Network& net = *g.net;
  std::vector<char> seen(net.size(), 0);
  std::vector<int> stack{target};
  seen[target] = 1;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    auto visit = [&](int p) {
      if (!seen[p] && g.alive(p)) {
        seen[p] = 1;
        stack.push_back(p);
      }
    };
    for (int l : net.node(n).in_links)
      if (g.link_live(l)) visit(net.link(l).parent);
    if (net.node(n).gate >= 0 && g.fixed[n] < 0)
      for (int in : net.gates()[net.node(n).gate].inputs) visit(in);
  }
  return seen;
}

// True when state `g` of node i can influence an observed variable: some
// out-link carries an entry for g and an observed node lies downstream.
bool influences_evidence(const Network& net, const EvidenceSet& evidence, int i, int g) {
  std::vector<char> seen(net.size(), 0);
  std::vector<int> stack;
  for (int l : net.node(i).out_links)
    if (net.link(l).column_nonzero(g) && !seen[net.link(l).child]) {
      seen[net.link(l).child] = 1;
      stack.push_back(net.link(l).child);
    }
  for (int gate : net.node(i).feeds_gates) {
    int n = net.gates()[gate].node;
    if (!seen[n]) {
      seen[n] = 1;
      stack.push_back(n);
    }
  }
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (evidence.observed.count(net.node(n).id)) return true;
    for (int l : net.node(n).out_links) {
      int c = net.link(l).child;
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
    for (int gate : net.node(n).feeds_gates) {
      int c = net.gates()[gate].node;
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return false;
}

// Per-candidate quantities shared by every hypothetical outcome.
struct Candidate {
  int node = -1;
  // joint[h][g] = Pr{target = g, E | H}; empty when the target is not in
  // the sub-DUCG of hypothesis h.
  std::vector<std::vector<double>> joint;
};

class Lookahead {
 public:
  explicit Lookahead(const Diagnosis& d) : d_(d), net_(*d.simplified.view.net) {
    for (const auto& e : d.report.entries) weight_total_ += e.prior * e.likelihood;
  }

  Candidate prepare(int i) const {
    Candidate c;
    c.node = i;
    c.joint.resize(d_.subs.size());
    for (std::size_t h = 0; h < d_.subs.size(); ++h) {
      const SubDucg& sub = d_.subs[h];
      if (sub.view.alive(i)) c.joint[h] = evidence_joint(sub.view, sub.isolated, net_.theta_d(), i);
    }
    return c;
  }

  // Pr{target = g | E}, mixing hypotheses by normalized suspicion.
  std::vector<double> predictive(const Candidate& c) const {
    if (weight_total_ <= 0.0) throw PreconditionError("no hypothesis carries suspicion");
    int states = net_.node(c.node).states;
    std::vector<double> out(states, 0.0);
    for (std::size_t h = 0; h < d_.subs.size(); ++h) {
      double prior = d_.priors.prior(d_.subs[h].hypothesis);
      double l = d_.likelihoods[h];
      if (prior * l <= 0.0) continue;
      if (c.joint[h].empty()) {
        out[0] += prior * l / weight_total_;
      } else {
        for (int g = 0; g < states; ++g) out[g] += prior * c.joint[h][g] / weight_total_;
      }
    }
    return out;
  }

  SuspicionReport outcome(const Candidate& c, int g) const {
    VariableId id = net_.node(c.node).id;
    EvidenceSet next = d_.simplified.evidence.with(id, g);
    next.step = d_.simplified.evidence.step + 1;
    SimplifiedGraph reduced = simplify(d_.simplified, next);
    auto completeness = check_completeness(reduced);
    PriorTable priors = apply_risk_evidence(net_, next);

    SuspicionReport r;
    r.step = next.step;
    r.phi = completeness.phi;
    std::optional<bool> reaches;
    for (std::size_t h = 0; h < d_.subs.size(); ++h) {
      const SubDucg& sub = d_.subs[h];
      SuspicionEntry e{sub.hypothesis, 0.0, 0.0, priors.prior(sub.hypothesis)};
      if (reduced.view.alive(net_.index_of(sub.hypothesis.disease))) {
        if (!c.joint[h].empty()) {
          e.likelihood = c.joint[h][g] > 0.0 ? c.joint[h][g] : likelihood(refine(sub, next), next);
        } else if (g == 0) {
          e.likelihood = d_.likelihoods[h];
        } else {
          if (!reaches) reaches = influences_evidence(net_, d_.simplified.evidence, c.node, g);
          e.likelihood = *reaches ? likelihood(separate(reduced, next, sub.hypothesis), next)
                                  : net_.theta_d() * d_.likelihoods[h];
        }
      }
      r.entries.push_back(e);
    }
    rank_entries(r);
    return r;
  }

 private:
  const Diagnosis& d_;
  const Network& net_;
  double weight_total_ = 0.0;
};

int require_candidate(const Diagnosis& d, VariableId target) {
  const GraphView& g = d.simplified.view;
  int i = g.net->index_of(target);
  if (!is_observable_kind(target.kind) || !g.alive(i) || !g.unknown[i] ||
      lambda_count(d.simplified, target) < 1)
    throw PreconditionError(target.str() + " is not a candidate: it must be an unknown X/SX that some "
                            "possible disease can cause");
  return i;
}

}  // namespace

int lambda_count(const SimplifiedGraph& simplified, VariableId target) {
  const GraphView& g = simplified.view;
  int t = g.net->index_of(target);
  if (!g.alive(t)) return 0;
  auto reach = ancestors(g, t);
  int count = 0;
  for (const auto& h : simplified.hypotheses) count += reach[g.net->index_of(h.disease)];
  return count;
}

std::vector<VariableId> candidate_variables(const Diagnosis& d) {
  std::vector<VariableId> out;
  const GraphView& g = d.simplified.view;
  if (d.simplified.hypotheses.empty()) return out;
  for (int n = 0; n < g.net->size(); ++n) {
    VariableId id = g.net->node(n).id;
    if (g.alive(n) && g.unknown[n] && is_observable_kind(id.kind) && lambda_count(d.simplified, id) >= 1)
      out.push_back(id);
  }
  return out;
}

std::vector<double> predictive_distribution(const Diagnosis& d, VariableId target) {
  int i = require_candidate(d, target);
  Lookahead look(d);
  return look.predictive(look.prepare(i));
}

SuspicionReport hypothetical_report(const Diagnosis& d, VariableId target, int state) {
  int i = require_candidate(d, target);
  if (state < 0 || state >= d.simplified.view.net->node(i).states)
    throw PreconditionError("state out of range for " + target.str());
  Lookahead look(d);
  return look.outcome(look.prepare(i), state);
}

RecommendationList recommend(const Diagnosis& d) {
  RecommendationList list;
  list.step = d.report.step;
  auto ids = candidate_variables(d);
  if (ids.empty()) {
    list.flags.push_back(d.simplified.no_finding ? flag::kNoFinding : flag::kFullyObserved);
    return list;
  }
  const Network& net = *d.simplified.view.net;
  Lookahead look(d);
  bool informative = d.report.total_suspicion() > 0.0;
  if (!informative) list.flags.push_back(flag::kEvidenceInconsistent);

  for (VariableId id : ids) {
    int i = net.index_of(id);
    RecommendationEntry entry;
    entry.variable = id;
    entry.lambda = lambda_count(d.simplified, id);
    entry.cost = net.node(i).cost;
    for (const auto& sub : d.subs) entry.breakdown.emplace_back(sub.hypothesis, 0.0);
    if (informative) {
      Candidate c = look.prepare(i);
      auto pr = look.predictive(c);
      for (int g = 0; g < net.node(i).states; ++g) {
        if (pr[g] <= 0.0) continue;
        SuspicionReport next = look.outcome(c, g);
        for (std::size_t h = 0; h < d.subs.size(); ++h) {
          const DiseaseEvent& hyp = d.subs[h].hypothesis;
          double before = d.report.find(hyp)->suspicion;
          double after = next.find(hyp)->suspicion;
          double omega = net.node(net.index_of(hyp.disease)).disease->danger(hyp.state);
          entry.breakdown[h].second += omega * pr[g] * std::abs(after - before) / entry.lambda;
        }
      }
      for (const auto& [h, v] : entry.breakdown) entry.rho += v;
    }
    list.candidates.push_back(std::move(entry));
  }

  double total = 0.0;
  for (const auto& c : list.candidates) total += c.cost * c.rho;
  if (total > 0.0) {
    for (auto& c : list.candidates) c.I = c.cost * c.rho / total;
  } else {
    list.flags.push_back(flag::kUninformative);
    for (auto& c : list.candidates) c.I = 1.0 / static_cast<double>(list.candidates.size());
  }
  std::stable_sort(list.candidates.begin(), list.candidates.end(), [](const auto& a, const auto& b) {
    if (a.I != b.I) return a.I > b.I;
    return a.variable < b.variable;
  });
  return list;
}

RecommendationList recommend(const NetworkPtr& net, const EvidenceSet& evidence) {
  return recommend(diagnose(net, evidence));
}

nlohmann::json to_json(const RecommendationList& list) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : list.candidates) {
    nlohmann::json breakdown = nlohmann::json::array();
    for (const auto& [h, v] : c.breakdown)
      breakdown.push_back({{"disease_id", h.disease.str()}, {"state", h.state}, {"contribution", v}});
    candidates.push_back({{"variable_id", c.variable.str()},
                          {"I", c.I},
                          {"rho", c.rho},
                          {"lambda", c.lambda},
                          {"cost", c.cost},
                          {"breakdown", breakdown}});
  }
  return {{"step", list.step}, {"candidates", candidates}, {"flags", list.flags}};
}

}  // namespace ducg
