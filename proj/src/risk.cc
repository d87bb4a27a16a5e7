#include "ducg/risk.h"

#include <algorithm>

#include "ducg/error.h"

namespace ducg {

const std::vector<double>& PriorTable::states(VariableId disease) const {
  auto it = table_.find(disease);
  if (it == table_.end()) throw ReferenceError("no prior for " + disease.str());
  return it->second;
}

double PriorTable::prior(const DiseaseEvent& h) const {
  const auto& s = states(h.disease);
  return h.state >= 0 && h.state < static_cast<int>(s.size()) ? s[h.state] : 0.0;
}

namespace {

// State of a scaler source, or -1 when the scaler is inert.
int source_state(const Network& net, const EvidenceSet& evidence, VariableId source) {
  if (auto s = evidence.state_of(source)) return *s;
  const Node& n = net.node(net.index_of(source));
  if (n.gate < 0) return -1;
  const GateTable& g = net.gates()[n.gate];
  std::vector<int> inputs;
  for (int in : g.inputs) {
    auto s = evidence.state_of(net.node(in).id);
    if (!s) return -1;
    inputs.push_back(*s);
  }
  return g.evaluate(inputs);
}

}  // namespace

PriorTable apply_risk_evidence(const Network& net, const EvidenceSet& evidence) {
  std::map<VariableId, double> factor;
  for (const auto& s : net.model().risk_scalers) {
    int state = source_state(net, evidence, s.source);
    if (state < 0) continue;
    auto [it, fresh] = factor.emplace(s.target, 1.0);
    it->second *= s.factor(state);
  }

  PriorTable out;
  for (int n : net.disease_nodes()) {
    const Node& node = net.node(n);
    double f = factor.count(node.id) ? factor[node.id] : 1.0;
    std::vector<double> p(node.states, 0.0);
    double abnormal = 0.0;
    for (int j = 1; j < node.states; ++j) {
      p[j] = std::clamp(f * node.disease->prior(j), 0.0, 1.0);
      abnormal += p[j];
    }
    if (abnormal > 1.0) {
      for (int j = 1; j < node.states; ++j) p[j] /= abnormal;
      abnormal = 1.0;
    }
    p[0] = std::max(0.0, 1.0 - abnormal);
    out.set(node.id, std::move(p));
  }
  return out;
}

}  // namespace ducg
