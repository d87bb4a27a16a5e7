#include "ducg/model_io.h"

#include <fstream>
#include <set>
#include <sstream>

#include "ducg/error.h"
#include "ducg/fuse.h"

namespace ducg {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(join(path, key), "missing required field");
  return *it;
}

const json* optional_member(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

const json& array_member(const json& obj, const char* key,
                         const std::string& path, bool required) {
  static const json kEmpty = json::array();
  if (!required) {
    const json* m = optional_member(obj, key);
    if (!m) return kEmpty;
    return as_array(*m, join(path, key));
  }
  return as_array(require(obj, key, path), join(path, key));
}

std::vector<std::string> string_list(const json& arr, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(as_string(arr[i], at(path, i)));
  return out;
}

Variable parse_variable(const json& j, const std::string& path) {
  Variable v;
  auto kind_text = as_string(require(j, "kind", path), join(path, "kind"));
  auto kind = parse_kind(kind_text);
  if (!kind) throw SchemaError(join(path, "kind"), "unknown kind '" + kind_text + "'");
  int index = as_int(require(j, "index", path), join(path, "index"));
  if (index < 1) throw SchemaError(join(path, "index"), "index must be positive");
  v.id = VariableId{*kind, index};
  if (const json* name = optional_member(j, "name"))
    v.name = as_string(*name, join(path, "name"));
  if (const json* states = optional_member(j, "states")) {
    v.states = string_list(as_array(*states, join(path, "states")), join(path, "states"));
  } else if (*kind == VariableKind::D) {
    v.states = {"absent", "present"};
  } else {
    throw SchemaError(join(path, "states"), "missing required field");
  }
  if (const json* a = optional_member(j, "attention"))
    v.attention = as_number(*a, join(path, "attention"));
  if (const json* c = optional_member(j, "cost"))
    v.cost = as_number(*c, join(path, "cost"));
  return v;
}

std::vector<StateValue> state_values(const json& arr, const char* value_key,
                                     const std::string& path) {
  std::vector<StateValue> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    auto p = at(path, i);
    out.push_back(StateValue{
        as_int(require(arr[i], "state", p), join(p, "state")),
        as_number(require(arr[i], value_key, p), join(p, value_key))});
  }
  return out;
}

json state_values_json(const std::vector<StateValue>& values, const char* key) {
  json out = json::array();
  for (const auto& v : values) out.push_back({{"state", v.state}, {key, v.value}});
  return out;
}

FunctionalLink parse_link(const json& j, const std::string& path) {
  FunctionalLink l;
  l.parent = id_from_json(require(j, "parent", path), join(path, "parent"));
  l.child = id_from_json(require(j, "child", path), join(path, "child"));
  if (const json* r = optional_member(j, "r")) l.r = as_number(*r, join(path, "r"));
  const json& a = array_member(j, "a", path, true);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto p = at(join(path, "a"), i);
    l.a.push_back(AEntry{as_int(require(a[i], "k", p), join(p, "k")),
                         as_int(require(a[i], "j", p), join(p, "j")),
                         as_number(require(a[i], "p", p), join(p, "p"))});
  }
  return l;
}

LogicGateSpec parse_gate(const json& j, const std::string& path) {
  LogicGateSpec g;
  g.gate = id_from_json(require(j, "id", path), join(path, "id"));
  const json& inputs = array_member(j, "inputs", path, true);
  for (std::size_t i = 0; i < inputs.size(); ++i)
    g.inputs.push_back(id_from_json(inputs[i], at(join(path, "inputs"), i)));
  const json& rows = array_member(j, "rows", path, true);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto p = at(join(path, "rows"), i);
    g.rows.push_back(GateRow{as_string(require(rows[i], "expr", p), join(p, "expr")),
                             as_int(require(rows[i], "state", p), join(p, "state"))});
  }
  if (const json* d = optional_member(j, "default_state"))
    g.default_state = as_int(*d, join(path, "default_state"));
  return g;
}

DiseaseAttributes parse_disease(const json& j, const std::string& path) {
  DiseaseAttributes d;
  d.variable = id_from_json(require(j, "id", path), join(path, "id"));
  d.priors = state_values(array_member(j, "priors", path, true), "p", join(path, "priors"));
  d.dangers = state_values(array_member(j, "dangers", path, false), "w", join(path, "dangers"));
  d.icd_codes = string_list(array_member(j, "icd", path, false), join(path, "icd"));
  if (const json* n = optional_member(j, "name")) d.display_name = as_string(*n, join(path, "name"));
  return d;
}

RiskScaler parse_scaler(const json& j, const std::string& path) {
  RiskScaler s;
  s.target = id_from_json(require(j, "target", path), join(path, "target"));
  s.source = id_from_json(require(j, "source", path), join(path, "source"));
  s.scale = state_values(array_member(j, "scale", path, true), "factor", join(path, "scale"));
  return s;
}

EngineDefaults parse_defaults(const json& doc) {
  EngineDefaults d;
  const json* defaults = optional_member(doc, "defaults");
  if (!defaults) return d;
  if (!defaults->is_object()) throw SchemaError("defaults", "expected an object");
  if (const json* t = optional_member(*defaults, "theta_d"))
    d.theta_d = as_number(*t, "defaults.theta_d");
  if (const json* t = optional_member(*defaults, "tolerance"))
    d.tolerance = as_number(*t, "defaults.tolerance");
  return d;
}

void check_version(const json& doc) {
  const json& v = require(doc, "format_version", "");
  std::string got = v.is_string() ? v.get<std::string>() : v.dump();
  if (got != kFormatVersion)
    throw SchemaError("format_version", "version mismatch: expected \"" +
                                            std::string(kFormatVersion) + "\", got " + got);
}

// The graph body shared by models and modules.
struct Body {
  std::vector<Variable> variables;
  std::vector<FunctionalLink> links;
  std::vector<LogicGateSpec> gates;
  std::vector<DiseaseAttributes> diseases;
  std::vector<RiskScaler> risk_scalers;
};

void check_reference(const std::set<VariableId>& declared, VariableId id,
                     const std::string& path) {
  if (!declared.count(id))
    throw ReferenceError("unknown variable " + id.str() + " referenced at " + path);
}

Body parse_body(const json& obj, const std::string& path) {
  Body b;
  const json& vars = array_member(obj, "variables", path, true);
  for (std::size_t i = 0; i < vars.size(); ++i)
    b.variables.push_back(parse_variable(vars[i], at(join(path, "variables"), i)));
  const json& links = array_member(obj, "links", path, false);
  for (std::size_t i = 0; i < links.size(); ++i)
    b.links.push_back(parse_link(links[i], at(join(path, "links"), i)));
  const json& gates = array_member(obj, "gates", path, false);
  for (std::size_t i = 0; i < gates.size(); ++i)
    b.gates.push_back(parse_gate(gates[i], at(join(path, "gates"), i)));
  const json& diseases = array_member(obj, "diseases", path, false);
  for (std::size_t i = 0; i < diseases.size(); ++i)
    b.diseases.push_back(parse_disease(diseases[i], at(join(path, "diseases"), i)));
  const json& scalers = array_member(obj, "risk_scalers", path, false);
  for (std::size_t i = 0; i < scalers.size(); ++i)
    b.risk_scalers.push_back(parse_scaler(scalers[i], at(join(path, "risk_scalers"), i)));

  std::set<VariableId> declared;
  for (const auto& v : b.variables) declared.insert(v.id);
  for (std::size_t i = 0; i < b.links.size(); ++i) {
    auto p = at(join(path, "links"), i);
    check_reference(declared, b.links[i].parent, join(p, "parent"));
    check_reference(declared, b.links[i].child, join(p, "child"));
  }
  for (std::size_t i = 0; i < b.gates.size(); ++i) {
    auto p = at(join(path, "gates"), i);
    check_reference(declared, b.gates[i].gate, join(p, "id"));
    for (std::size_t k = 0; k < b.gates[i].inputs.size(); ++k)
      check_reference(declared, b.gates[i].inputs[k], at(join(p, "inputs"), k));
  }
  for (std::size_t i = 0; i < b.diseases.size(); ++i)
    check_reference(declared, b.diseases[i].variable, join(at(join(path, "diseases"), i), "id"));
  for (std::size_t i = 0; i < b.risk_scalers.size(); ++i) {
    auto p = at(join(path, "risk_scalers"), i);
    check_reference(declared, b.risk_scalers[i].target, join(p, "target"));
    check_reference(declared, b.risk_scalers[i].source, join(p, "source"));
  }
  return b;
}

ModelHeader parse_header(const json& doc) {
  ModelHeader h;
  h.model_id = as_string(require(doc, "model_id", ""), "model_id");
  h.chief_complaints = string_list(array_member(doc, "chief_complaints", "", false),
                                   "chief_complaints");
  h.defaults = parse_defaults(doc);
  return h;
}

json variable_json(const Variable& v) {
  json j = {{"kind", kind_name(v.id.kind)}, {"index", v.id.index},
            {"name", v.name}, {"states", v.states}};
  if (v.attention) j["attention"] = *v.attention;
  if (v.cost) j["cost"] = *v.cost;
  return j;
}

json link_json(const FunctionalLink& l) {
  json a = json::array();
  for (const auto& e : l.a) a.push_back({{"k", e.k}, {"j", e.j}, {"p", e.p}});
  return {{"parent", id_to_json(l.parent)}, {"child", id_to_json(l.child)},
          {"r", l.r}, {"a", a}};
}

json gate_json(const LogicGateSpec& g) {
  json inputs = json::array();
  for (auto id : g.inputs) inputs.push_back(id_to_json(id));
  json rows = json::array();
  for (const auto& r : g.rows) rows.push_back({{"expr", r.expr}, {"state", r.state}});
  return {{"id", id_to_json(g.gate)}, {"inputs", inputs}, {"rows", rows},
          {"default_state", g.default_state}};
}

json disease_json(const DiseaseAttributes& d) {
  return {{"id", id_to_json(d.variable)},
          {"priors", state_values_json(d.priors, "p")},
          {"dangers", state_values_json(d.dangers, "w")},
          {"icd", d.icd_codes},
          {"name", d.display_name}};
}

json scaler_json(const RiskScaler& s) {
  return {{"target", id_to_json(s.target)}, {"source", id_to_json(s.source)},
          {"scale", state_values_json(s.scale, "factor")}};
}

template <typename T, typename F>
json list_json(const std::vector<T>& items, F&& f) {
  json out = json::array();
  for (const auto& item : items) out.push_back(f(item));
  return out;
}

json defaults_json(const EngineDefaults& d) {
  return {{"theta_d", d.theta_d}, {"tolerance", d.tolerance}};
}

}  // namespace

json id_to_json(VariableId id) {
  return {{"kind", kind_name(id.kind)}, {"index", id.index}};
}

VariableId id_from_json(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return VariableId::parse(j.get<std::string>());
    } catch (const SchemaError& e) {
      throw SchemaError(path, e.what());
    }
  }
  auto kind_text = as_string(require(j, "kind", path), join(path, "kind"));
  auto kind = parse_kind(kind_text);
  if (!kind) throw SchemaError(join(path, "kind"), "unknown kind '" + kind_text + "'");
  int index = as_int(require(j, "index", path), join(path, "index"));
  if (index < 1) throw SchemaError(join(path, "index"), "index must be positive");
  return VariableId{*kind, index};
}

ModelSource load_model_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("", "expected a JSON object at top level");
  check_version(doc);
  ModelHeader header = parse_header(doc);

  if (const json* modules = optional_member(doc, "modules")) {
    ModuleFile file;
    file.header = std::move(header);
    as_array(*modules, "modules");
    for (std::size_t i = 0; i < modules->size(); ++i) {
      auto path = at("modules", i);
      const json& m = (*modules)[i];
      Body body = parse_body(m, path);
      if (body.diseases.size() != 1)
        throw SchemaError(join(path, "diseases"),
                          "a single-disease module declares exactly one disease");
      SingleDiseaseModule mod;
      mod.disease = std::move(body.diseases.front());
      mod.variables = std::move(body.variables);
      mod.links = std::move(body.links);
      mod.gates = std::move(body.gates);
      mod.risk_scalers = std::move(body.risk_scalers);
      if (const json* meta = optional_member(m, "metadata")) {
        if (const json* a = optional_member(*meta, "author"))
          mod.metadata.author = as_string(*a, join(path, "metadata.author"));
        if (const json* v = optional_member(*meta, "version"))
          mod.metadata.version = as_string(*v, join(path, "metadata.version"));
      }
      file.modules.push_back(std::move(mod));
    }
    return file;
  }

  Body body = parse_body(doc, "");
  ChiefComplaintModel model;
  model.model_id = std::move(header.model_id);
  model.chief_complaints = std::move(header.chief_complaints);
  model.defaults = header.defaults;
  model.variables = std::move(body.variables);
  model.links = std::move(body.links);
  model.gates = std::move(body.gates);
  model.diseases = std::move(body.diseases);
  model.risk_scalers = std::move(body.risk_scalers);
  return model;
}

ModelSource load_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  return load_model_json(doc);
}

ChiefComplaintModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  ModelSource source = load_model(text);
  if (auto* model = std::get_if<ChiefComplaintModel>(&source)) return std::move(*model);
  auto& file = std::get<ModuleFile>(source);
  return fuse(file.modules, file.header);
}

json to_json(const ChiefComplaintModel& model) {
  return {{"format_version", kFormatVersion},
          {"model_id", model.model_id},
          {"chief_complaints", model.chief_complaints},
          {"defaults", defaults_json(model.defaults)},
          {"variables", list_json(model.variables, variable_json)},
          {"links", list_json(model.links, link_json)},
          {"gates", list_json(model.gates, gate_json)},
          {"diseases", list_json(model.diseases, disease_json)},
          {"risk_scalers", list_json(model.risk_scalers, scaler_json)}};
}

json to_json(const ModuleFile& file) {
  json modules = json::array();
  for (const auto& m : file.modules) {
    modules.push_back({{"metadata", {{"author", m.metadata.author}, {"version", m.metadata.version}}},
                       {"variables", list_json(m.variables, variable_json)},
                       {"links", list_json(m.links, link_json)},
                       {"gates", list_json(m.gates, gate_json)},
                       {"diseases", json::array({disease_json(m.disease)})},
                       {"risk_scalers", list_json(m.risk_scalers, scaler_json)}});
  }
  return {{"format_version", kFormatVersion},
          {"model_id", file.header.model_id},
          {"chief_complaints", file.header.chief_complaints},
          {"defaults", defaults_json(file.header.defaults)},
          {"modules", modules}};
}

std::string save_model(const ChiefComplaintModel& model) {
  return to_json(model).dump(2) + "\n";
}

}  // namespace ducg
