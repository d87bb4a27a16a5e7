#ifndef DUCG_INFERENCE_H_
#define DUCG_INFERENCE_H_

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ducg/evidence.h"
#include "ducg/network.h"
#include "ducg/risk.h"
#include "ducg/simplify.h"

namespace ducg {

namespace flag {
inline constexpr const char* kNoFinding = "no-finding";
inline constexpr const char* kNoHypothesis = "no-hypothesis";
inline constexpr const char* kEvidenceInconsistent = "evidence-inconsistent";
inline constexpr const char* kCompletenessDefaulted = "completeness-defaulted";
inline constexpr const char* kUninformative = "uninformative";
inline constexpr const char* kFullyObserved = "fully-observed";
}  // namespace flag

// States of root events. Diseases not listed are in state 0 and default
// causes not listed are in state 1.
using RootAssignment = std::map<VariableId, int>;

/// Marginal distribution of `target` given pinned roots. Propagates state
/// probabilities in topological order, which is exact because every child
/// distribution is linear in its parents' distributions. Falls back to
/// exact elimination when a gate with uncertain inputs is involved.
std::vector<double> forward_state_distribution(const NetworkPtr& net, const RootAssignment& roots,
                                               VariableId target);

/// Pr{E | sub-DUCG}. Throws PreconditionError when `evidence` is not the
/// evidence the sub-DUCG was separated against, or observes a variable the
/// sub-DUCG neither contains nor explains.
double likelihood(const SubDucg& sub, const EvidenceSet& evidence);

struct Completeness {
  double phi = 1.0;
  bool defaulted = false;  // no attended variable, phi fixed at 1
};

/// Attention-weighted share of the simplified graph's X/SX variables that
/// are observed.
Completeness check_completeness(const SimplifiedGraph& simplified);
Completeness check_completeness(const NetworkPtr& net, const EvidenceSet& evidence);

struct SuspicionEntry {
  DiseaseEvent hypothesis;
  double likelihood = 0.0;
  double suspicion = 0.0;
  double prior = 0.0;

  friend bool operator==(const SuspicionEntry&, const SuspicionEntry&) = default;
};

struct SuspicionReport {
  int step = 1;
  double phi = 1.0;
  std::vector<SuspicionEntry> entries;  // ranked
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
  const SuspicionEntry* find(const DiseaseEvent& h) const;
  double total_suspicion() const;

  friend bool operator==(const SuspicionReport&, const SuspicionReport&) = default;
};

/// Fills suspicion = phi * prior * likelihood / sum over entries, flags an
/// all-zero case and sorts by suspicion, ties by hypothesis.
void rank_entries(SuspicionReport& report);

// Everything derived from one evidence set. Later stages (recommendation,
// explanations) reuse the reduction and separations.
struct Diagnosis {
  SimplifiedGraph simplified;
  std::vector<SubDucg> subs;  // parallel to simplified.hypotheses
  std::vector<double> likelihoods;
  PriorTable priors;
  SuspicionReport report;

  const SubDucg& sub(const DiseaseEvent& h) const;
};

Diagnosis diagnose(const NetworkPtr& net, const EvidenceSet& evidence);
SuspicionReport suspicion(const NetworkPtr& net, const EvidenceSet& evidence);

/// h^s by exhaustive enumeration over the full model: exactly one disease
/// event is true, weighted by its risk-adjusted prior, and every unobserved
/// ancestor of the evidence takes every state. Throws SizeError beyond 20
/// unobserved ancestors or 2^22 joint states.
std::map<DiseaseEvent, double> exact_posterior(const NetworkPtr& net, const EvidenceSet& evidence);

nlohmann::json to_json(const SuspicionReport& report);

}  // namespace ducg

#endif  // DUCG_INFERENCE_H_
