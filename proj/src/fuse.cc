#include "ducg/fuse.h"

#include <algorithm>
#include <map>
#include <string>

#include "ducg/error.h"

namespace ducg {

namespace {

std::string where(std::size_t module) { return "module " + std::to_string(module + 1); }

void merge_variable(std::map<VariableId, std::pair<Variable, std::size_t>>& vars,
                    const Variable& v, std::size_t module) {
  auto [it, inserted] = vars.emplace(v.id, std::make_pair(v, module));
  if (inserted) return;
  const auto& [have, origin] = it->second;
  auto conflict = [&](const std::string& what) {
    throw ConflictError(what + " on shared variable " + v.id.str() + " between " +
                        where(origin) + " and " + where(module));
  };
  if (have.states != v.states) conflict("state-domain conflict");
  if (have.attention_or_default() != v.attention_or_default()) conflict("attention conflict");
  if (have.cost_or_default() != v.cost_or_default()) conflict("cost conflict");
  if (have.name != v.name) conflict("name conflict");
}

template <typename Key, typename T>
void merge_keyed(std::map<Key, T>& into, const Key& key, const T& item,
                 const std::string& label) {
  auto [it, inserted] = into.emplace(key, item);
  if (!inserted && !(it->second == item))
    throw ConflictError("conflicting definitions of " + label + " across modules");
}

template <typename Key, typename T>
std::vector<T> values(const std::map<Key, T>& m) {
  std::vector<T> out;
  out.reserve(m.size());
  for (const auto& [k, v] : m) out.push_back(v);
  return out;
}

}  // namespace

ChiefComplaintModel fuse(const std::vector<SingleDiseaseModule>& modules,
                         const ModelHeader& header) {
  std::map<VariableId, std::pair<Variable, std::size_t>> vars;
  std::map<std::pair<VariableId, VariableId>, FunctionalLink> links;
  std::map<VariableId, LogicGateSpec> gates;
  std::map<VariableId, DiseaseAttributes> diseases;
  std::map<std::pair<VariableId, VariableId>, RiskScaler> scalers;

  for (std::size_t m = 0; m < modules.size(); ++m) {
    const auto& mod = modules[m];
    for (const auto& v : mod.variables) merge_variable(vars, v, m);
    for (const auto& l : mod.links)
      merge_keyed(links, std::make_pair(l.parent, l.child), l,
                  "link " + l.parent.str() + "->" + l.child.str());
    for (const auto& g : mod.gates) merge_keyed(gates, g.gate, g, "gate " + g.gate.str());
    for (const auto& s : mod.risk_scalers)
      merge_keyed(scalers, std::make_pair(s.target, s.source), s,
                  "risk scaler " + s.source.str() + "->" + s.target.str());
    if (!diseases.emplace(mod.disease.variable, mod.disease).second)
      throw ConflictError("duplicate disease " + mod.disease.variable.str() + " in " + where(m));
  }

  ChiefComplaintModel out;
  out.model_id = header.model_id;
  out.chief_complaints = header.chief_complaints;
  out.defaults = header.defaults;
  for (const auto& [id, entry] : vars) out.variables.push_back(entry.first);
  out.links = values(links);
  out.gates = values(gates);
  out.diseases = values(diseases);
  out.risk_scalers = values(scalers);
  return out;
}

}  // namespace ducg
