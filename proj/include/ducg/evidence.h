#ifndef DUCG_EVIDENCE_H_
#define DUCG_EVIDENCE_H_

#include <map>
#include <optional>
#include <set>

#include "ducg/network.h"

namespace ducg {

// Observed states plus the set of variables not yet checked, at step y.
struct EvidenceSet {
  int step = 1;
  std::map<VariableId, int> observed;
  std::set<VariableId> unknown;

  std::optional<int> state_of(VariableId id) const;
  bool has_abnormal() const;
  /// Copy with one more observation; the variable leaves the unknown set.
  EvidenceSet with(VariableId id, int state) const;

  friend bool operator==(const EvidenceSet&, const EvidenceSet&) = default;
};

/// Builds evidence whose unknown set is every causal X/SX not observed.
/// Throws as check_evidence() does.
EvidenceSet make_evidence(const Network& net, std::map<VariableId, int> observed, int step = 1);

/// Throws ReferenceError for undeclared variables and RejectedError for
/// unobservable kinds, out-of-range states or overlap with the unknown set.
void check_evidence(const Network& net, const EvidenceSet& evidence);

}  // namespace ducg

#endif  // DUCG_EVIDENCE_H_
