#ifndef DUCG_RECOMMEND_H_
#define DUCG_RECOMMEND_H_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ducg/inference.h"

namespace ducg {

struct RecommendationEntry {
  VariableId variable;
  double I = 0.0;
  double rho = 0.0;
  int lambda = 0;
  double cost = 1.0;
  // Per-hypothesis share of rho; the shares sum to rho.
  std::vector<std::pair<DiseaseEvent, double>> breakdown;

  friend bool operator==(const RecommendationEntry&, const RecommendationEntry&) = default;
};

struct RecommendationList {
  int step = 1;
  std::vector<RecommendationEntry> candidates;  // ranked by I, ties by id
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
  const RecommendationEntry* find(VariableId id) const;

  friend bool operator==(const RecommendationList&, const RecommendationList&) = default;
};

/// Number of hypotheses with a directed path to `target` in the simplified
/// graph.
int lambda_count(const SimplifiedGraph& simplified, VariableId target);

/// Unknown X/SX variables still in the simplified graph with lambda >= 1.
std::vector<VariableId> candidate_variables(const Diagnosis& diagnosis);

/// Pr{target = g | E} for every state g, mixing the per-hypothesis
/// conditionals by normalized suspicion. Throws PreconditionError when the
/// target is not a candidate or no hypothesis carries suspicion.
std::vector<double> predictive_distribution(const Diagnosis& diagnosis, VariableId target);

/// Suspicion report for the evidence extended by target = state, keeping
/// the hypothesis set frozen; a hypothesis the extra observation removes
/// gets suspicion 0.
SuspicionReport hypothetical_report(const Diagnosis& diagnosis, VariableId target, int state);

/// Ranks every candidate by recommendation degree I.
RecommendationList recommend(const Diagnosis& diagnosis);
RecommendationList recommend(const NetworkPtr& net, const EvidenceSet& evidence);

nlohmann::json to_json(const RecommendationList& list);

}  // namespace ducg

#endif  // DUCG_RECOMMEND_H_
