#ifndef DUCG_RISK_H_
#define DUCG_RISK_H_

#include <map>
#include <vector>

#include "ducg/evidence.h"
#include "ducg/network.h"

namespace ducg {

// Per-state priors of every disease variable after risk adjustment.
// Entry 0 is the residual normal-state mass.
class PriorTable {
 public:
  const std::vector<double>& states(VariableId disease) const;
  double prior(const DiseaseEvent& h) const;
  void set(VariableId disease, std::vector<double> states) { table_[disease] = std::move(states); }
  const std::map<VariableId, std::vector<double>>& table() const { return table_; }

 private:
  std::map<VariableId, std::vector<double>> table_;
};

/// A scaler acts when its X source is observed, or when every input of its
/// SG source is observed. Factors of several active scalers multiply. Each
/// abnormal prior becomes clamp(factor * b, 0, 1); if the abnormal states
/// then exceed total mass 1 they are rescaled to sum to 1.
PriorTable apply_risk_evidence(const Network& net, const EvidenceSet& evidence);

}  // namespace ducg

#endif  // DUCG_RISK_H_
