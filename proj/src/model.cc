#include "ducg/model.h"

namespace ducg {

double DiseaseAttributes::prior(int state) const {
  for (const auto& p : priors)
    if (p.state == state) return p.value;
  return 0.0;
}

double DiseaseAttributes::danger(int state) const {
  for (const auto& d : dangers)
    if (d.state == state) return d.value;
  return 1.0;
}

double RiskScaler::factor(int source_state) const {
  for (const auto& s : scale)
    if (s.state == source_state) return s.value;
  return 1.0;
}

const Variable* ChiefComplaintModel::find_variable(VariableId id) const {
  for (const auto& v : variables)
    if (v.id == id) return &v;
  return nullptr;
}

const DiseaseAttributes* ChiefComplaintModel::find_disease(VariableId id) const {
  for (const auto& d : diseases)
    if (d.variable == id) return &d;
  return nullptr;
}

}  // namespace ducg
