#include "ducg/evidence.h"

#include "ducg/error.h"

namespace ducg {

std::optional<int> EvidenceSet::state_of(VariableId id) const {
  auto it = observed.find(id);
  if (it == observed.end()) return std::nullopt;
  return it->second;
}

bool EvidenceSet::has_abnormal() const {
  for (const auto& [id, s] : observed)
    if (s > 0) return true;
  return false;
}

EvidenceSet EvidenceSet::with(VariableId id, int state) const {
  EvidenceSet e = *this;
  e.observed[id] = state;
  e.unknown.erase(id);
  return e;
}

void check_evidence(const Network& net, const EvidenceSet& evidence) {
  for (const auto& [id, state] : evidence.observed) {
    int n = net.index_of(id);
    if (!is_observable_kind(id.kind))
      throw RejectedError(id.str() + " is not an observable X/SX variable");
    if (state < 0 || state >= net.node(n).states)
      throw RejectedError("state " + std::to_string(state) + " out of range for " + id.str());
    if (evidence.unknown.count(id))
      throw RejectedError(id.str() + " is both observed and unknown");
  }
  for (auto id : evidence.unknown) {
    net.index_of(id);
    if (!is_observable_kind(id.kind))
      throw RejectedError(id.str() + " is not an observable X/SX variable");
  }
}

EvidenceSet make_evidence(const Network& net, std::map<VariableId, int> observed, int step) {
  EvidenceSet e;
  e.step = step;
  e.observed = std::move(observed);
  for (const auto& n : net.nodes())
    if (n.causal && is_observable_kind(n.id.kind) && !e.observed.count(n.id)) e.unknown.insert(n.id);
  check_evidence(net, e);
  return e;
}

}  // namespace ducg
