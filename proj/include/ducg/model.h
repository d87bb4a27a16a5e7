#ifndef DUCG_MODEL_H_
#define DUCG_MODEL_H_

#include <optional>
#include <string>
#include <vector>

#include "ducg/ids.h"

namespace ducg {

struct Variable {
  VariableId id;
  std::string name;
  // State 0 is the negative/normal state; every k >= 1 is abnormal.
  std::vector<std::string> states;
  // Attention degree (X/SX only). Unset means 1.
  std::optional<double> attention;
  // Checkability cost score (X/SX only). Unset means 1.
  std::optional<double> cost;

  int state_count() const { return static_cast<int>(states.size()); }
  double attention_or_default() const { return attention.value_or(1.0); }
  double cost_or_default() const { return cost.value_or(1.0); }

  friend bool operator==(const Variable&, const Variable&) = default;
};

/// One non-null entry a_{nk;ij} of a sparse a-matrix.
struct AEntry {
  int k = 1;  // child state
  int j = 1;  // parent state
  double p = 0.0;

  friend bool operator==(const AEntry&, const AEntry&) = default;
};

/// Weighted functional event matrix between one parent and one child.
struct FunctionalLink {
  VariableId parent;
  VariableId child;
  double r = 1.0;
  std::vector<AEntry> a;

  friend bool operator==(const FunctionalLink&, const FunctionalLink&) =
      default;
};

struct GateRow {
  std::string expr;
  int state = 1;

  friend bool operator==(const GateRow&, const GateRow&) = default;
};

/// Logic gate specification: rows are tried in order, first match wins.
struct LogicGateSpec {
  VariableId gate;
  std::vector<VariableId> inputs;
  std::vector<GateRow> rows;
  int default_state = 0;

  friend bool operator==(const LogicGateSpec&, const LogicGateSpec&) = default;
};

struct StateValue {
  int state = 1;
  double value = 0.0;

  friend bool operator==(const StateValue&, const StateValue&) = default;
};

struct DiseaseAttributes {
  VariableId variable;
  std::vector<StateValue> priors;   // b_kj per abnormal state
  std::vector<StateValue> dangers;  // omega_kj per abnormal state
  std::vector<std::string> icd_codes;
  std::string display_name;

  /// b_kj; 0 for states without an entry.
  double prior(int state) const;
  /// omega_kj; 1 for states without an entry.
  double danger(int state) const;

  friend bool operator==(const DiseaseAttributes&, const DiseaseAttributes&) =
      default;
};

/// Zooms the prior of a BX disease by a factor chosen by the observed state
/// of a risk-factor variable (X) or risk-factor gate (SG).
struct RiskScaler {
  VariableId target;
  VariableId source;
  std::vector<StateValue> scale;  // factor per source state

  /// Factor for a source state; 1 for states without an entry.
  double factor(int source_state) const;

  friend bool operator==(const RiskScaler&, const RiskScaler&) = default;
};

struct EngineDefaults {
  // Prior given to virtual default causes.
  double theta_d = 0.01;
  // Slack for probability-mass checks in validation.
  double tolerance = 1e-9;

  friend bool operator==(const EngineDefaults&, const EngineDefaults&) =
      default;
};

struct ModuleMetadata {
  std::string author;
  std::string version;

  friend bool operator==(const ModuleMetadata&, const ModuleMetadata&) =
      default;
};

/// The authored subgraph for a single disease.
struct SingleDiseaseModule {
  ModuleMetadata metadata;
  DiseaseAttributes disease;
  std::vector<Variable> variables;
  std::vector<FunctionalLink> links;
  std::vector<LogicGateSpec> gates;
  std::vector<RiskScaler> risk_scalers;

  friend bool operator==(const SingleDiseaseModule&,
                         const SingleDiseaseModule&) = default;
};

/// A fused model covering every disease that can produce a chief complaint.
struct ChiefComplaintModel {
  std::string model_id;
  std::vector<std::string> chief_complaints;
  EngineDefaults defaults;
  std::vector<Variable> variables;
  std::vector<FunctionalLink> links;
  std::vector<LogicGateSpec> gates;
  std::vector<DiseaseAttributes> diseases;
  std::vector<RiskScaler> risk_scalers;

  const Variable* find_variable(VariableId id) const;
  const DiseaseAttributes* find_disease(VariableId id) const;

  friend bool operator==(const ChiefComplaintModel&,
                         const ChiefComplaintModel&) = default;
};

/// Header fields a fused model takes from its module file.
struct ModelHeader {
  std::string model_id = "fused";
  std::vector<std::string> chief_complaints;
  EngineDefaults defaults;
};

}  // namespace ducg

#endif  // DUCG_MODEL_H_
