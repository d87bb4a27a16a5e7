#include "ducg/validate.h"

#include <map>
#include <set>
#include <sstream>

#include "ducg/logic_expr.h"

namespace ducg {

namespace {

class Checker {
 public:
  explicit Checker(const ChiefComplaintModel& m) : m_(m) {}

  ValidationReport run() {
    check_variables();
    check_links();
    check_gates();
    check_diseases();
    check_scalers();
    check_defaults();
    check_acyclic();
    return std::move(report_);
  }

 private:
  void error(std::string code, std::string msg, std::string path) {
    report_.findings.push_back({Severity::kError, std::move(code), std::move(msg), std::move(path)});
  }
  void warn(std::string code, std::string msg, std::string path) {
    report_.findings.push_back({Severity::kWarning, std::move(code), std::move(msg), std::move(path)});
  }

  static std::string at(const char* list, std::size_t i) {
    return std::string(list) + "[" + std::to_string(i) + "]";
  }

  int states_of(VariableId id) const {
    auto it = vars_.find(id);
    return it == vars_.end() ? 0 : it->second->state_count();
  }

  void check_variables() {
    for (std::size_t i = 0; i < m_.variables.size(); ++i) {
      const Variable& v = m_.variables[i];
      auto path = at("variables", i);
      if (!vars_.emplace(v.id, &v).second)
        error("duplicate-variable", "variable " + v.id.str() + " declared twice", path);
      auto k = v.id.kind;
      if ((is_disease_kind(k) || is_observable_kind(k)) && v.state_count() < 2)
        error("state-count", v.id.str() + " needs at least 2 states", path + ".states");
      if (v.state_count() < 1)
        error("state-count", v.id.str() + " declares no states", path + ".states");
      if (k == VariableKind::D && v.state_count() != 2)
        warn("d-states", v.id.str() + " is a default cause and is always in state 1", path);
      if ((v.attention || v.cost) && !is_observable_kind(k))
        warn("attribute-ignored", "attention and cost only apply to X/SX, ignored on " + v.id.str(), path);
      if (v.attention && *v.attention < 0)
        error("attention-range", "attention of " + v.id.str() + " must be >= 0", path + ".attention");
      if (v.cost && *v.cost <= 0)
        error("cost-range", "cost of " + v.id.str() + " must be > 0", path + ".cost");
    }
  }

  void check_links() {
    std::set<std::pair<VariableId, VariableId>> seen;
    for (std::size_t i = 0; i < m_.links.size(); ++i) {
      const FunctionalLink& l = m_.links[i];
      auto path = at("links", i);
      auto name = l.parent.str() + "->" + l.child.str();
      if (!seen.emplace(l.parent, l.child).second)
        error("duplicate-link", "link " + name + " declared twice", path);
      auto ck = l.child.kind;
      if (is_disease_kind(ck) || ck == VariableKind::D || is_gate_kind(ck))
        error("link-target", "link " + name + " points into a " +
                                 std::string(kind_name(ck)) + " variable, which cannot have causal inputs",
              path + ".child");
      if (l.parent == l.child) error("self-link", "link " + name + " is a self-loop", path);
      if (!(l.r > 0.0 && l.r <= 1.0))
        error("r-range", "causal intensity of " + name + " must lie in (0, 1]", path + ".r");
      int kc = states_of(l.child), kp = states_of(l.parent);
      std::map<int, double> column_mass;
      std::set<std::pair<int, int>> cells;
      for (std::size_t e = 0; e < l.a.size(); ++e) {
        const AEntry& a = l.a[e];
        auto epath = path + ".a[" + std::to_string(e) + "]";
        if (!(a.p >= 0.0 && a.p <= 1.0))
          error("p-range", "probability in " + name + " must lie in [0, 1]", epath + ".p");
        if (a.k == 0 || a.j == 0) {
          error("null-row", "state-0 rows and columns of " + name + " are null by convention", epath);
          continue;
        }
        if (a.k < 0 || a.k >= kc)
          error("state-range", "child state " + std::to_string(a.k) + " out of range in " + name, epath + ".k");
        if (a.j < 0 || a.j >= kp)
          error("state-range", "parent state " + std::to_string(a.j) + " out of range in " + name, epath + ".j");
        if (!cells.emplace(a.k, a.j).second)
          error("duplicate-entry", "entry (" + std::to_string(a.k) + "," + std::to_string(a.j) +
                                       ") repeated in " + name, epath);
        column_mass[a.j] += a.p;
      }
      for (auto [j, mass] : column_mass)
        if (mass > 1.0 + m_.defaults.tolerance) {
          std::ostringstream msg;
          msg << "column mass exceeds 1 in " << name << " for parent state " << j << " (sum " << mass << ")";
          error("column-mass", msg.str(), path + ".a");
        }
    }
  }

  void check_gates() {
    std::set<VariableId> specified;
    for (std::size_t i = 0; i < m_.gates.size(); ++i) {
      const LogicGateSpec& g = m_.gates[i];
      auto path = at("gates", i);
      if (!is_gate_kind(g.gate.kind)) {
        error("gate-kind", g.gate.str() + " is not a G or SG variable", path + ".id");
        continue;
      }
      if (!specified.insert(g.gate).second)
        error("duplicate-gate", "gate " + g.gate.str() + " specified twice", path);
      if (g.inputs.empty()) error("gate-inputs", "gate " + g.gate.str() + " has no inputs", path + ".inputs");
      int k = states_of(g.gate);
      if (g.default_state < 0 || g.default_state >= k)
        error("state-range", "default state of " + g.gate.str() + " out of range", path + ".default_state");
      auto resolve = [&](VariableId id) -> std::optional<int> {
        for (std::size_t p = 0; p < g.inputs.size(); ++p)
          if (g.inputs[p] == id) return static_cast<int>(p);
        return std::nullopt;
      };
      for (std::size_t r = 0; r < g.rows.size(); ++r) {
        auto rpath = path + ".rows[" + std::to_string(r) + "]";
        if (g.rows[r].state < 0 || g.rows[r].state >= k)
          error("state-range", "row state of " + g.gate.str() + " out of range", rpath + ".state");
        try {
          LogicExpr::compile(g.rows[r].expr, resolve);
        } catch (const Error& e) {
          error("gate-expression", e.what(), rpath + ".expr");
        }
      }
    }
    for (const auto& v : m_.variables)
      if (is_gate_kind(v.id.kind) && !specified.count(v.id))
        error("gate-unspecified", "gate " + v.id.str() + " has no logic gate specification", "variables");
  }

  void check_diseases() {
    std::set<VariableId> seen;
    for (std::size_t i = 0; i < m_.diseases.size(); ++i) {
      const DiseaseAttributes& d = m_.diseases[i];
      auto path = at("diseases", i);
      if (!is_disease_kind(d.variable.kind)) {
        error("disease-kind", d.variable.str() + " is not a B or BX variable", path + ".id");
        continue;
      }
      if (!seen.insert(d.variable).second)
        error("duplicate-disease", "disease " + d.variable.str() + " defined twice", path);
      int k = states_of(d.variable);
      double total = 0.0;
      for (std::size_t p = 0; p < d.priors.size(); ++p) {
        const auto& sv = d.priors[p];
        auto ppath = path + ".priors[" + std::to_string(p) + "]";
        if (sv.state < 1 || sv.state >= k)
          error("state-range", "prior state out of range for " + d.variable.str(), ppath);
        if (!(sv.value >= 0.0 && sv.value <= 1.0))
          error("p-range", "prior of " + d.variable.str() + " must lie in [0, 1]", ppath + ".p");
        total += sv.value;
      }
      if (total > 1.0 + m_.defaults.tolerance)
        error("prior-mass", "abnormal priors of " + d.variable.str() + " sum above 1", path + ".priors");
      for (std::size_t p = 0; p < d.dangers.size(); ++p) {
        const auto& sv = d.dangers[p];
        auto dpath = path + ".dangers[" + std::to_string(p) + "]";
        if (sv.state < 1 || sv.state >= k)
          error("state-range", "danger state out of range for " + d.variable.str(), dpath);
        if (sv.value < 0) error("danger-range", "danger of " + d.variable.str() + " must be >= 0", dpath + ".w");
      }
    }
    for (const auto& v : m_.variables)
      if (is_disease_kind(v.id.kind) && !seen.count(v.id))
        error("disease-missing", v.id.str() + " has no disease attributes", "diseases");
  }

  void check_scalers() {
    for (std::size_t i = 0; i < m_.risk_scalers.size(); ++i) {
      const RiskScaler& s = m_.risk_scalers[i];
      auto path = at("risk_scalers", i);
      if (s.target.kind != VariableKind::BX)
        error("scaler-target", "risk scaler target " + s.target.str() + " is not a BX variable", path + ".target");
      if (s.source.kind != VariableKind::X && s.source.kind != VariableKind::SG)
        error("scaler-source", "risk scaler source " + s.source.str() + " is not an X or SG variable",
              path + ".source");
      int k = states_of(s.source);
      for (std::size_t f = 0; f < s.scale.size(); ++f) {
        auto fpath = path + ".scale[" + std::to_string(f) + "]";
        if (s.scale[f].state < 0 || s.scale[f].state >= k)
          error("state-range", "scale state out of range for source " + s.source.str(), fpath);
        if (!(s.scale[f].value > 0))
          error("scale-range", "scale factors must be > 0", fpath + ".factor");
      }
    }
  }

  void check_defaults() {
    if (!(m_.defaults.theta_d > 0 && m_.defaults.theta_d <= 1))
      error("theta-range", "theta_d must lie in (0, 1]", "defaults.theta_d");
    if (!(m_.defaults.tolerance >= 0))
      error("tolerance-range", "tolerance must be >= 0", "defaults.tolerance");
  }

  // Kahn's algorithm over causal links and gate input edges.
  void check_acyclic() {
    std::map<VariableId, std::vector<VariableId>> out;
    std::map<VariableId, int> indegree;
    for (const auto& v : m_.variables) indegree[v.id];
    auto edge = [&](VariableId from, VariableId to) {
      if (!indegree.count(from) || !indegree.count(to)) return;
      out[from].push_back(to);
      ++indegree[to];
    };
    for (const auto& l : m_.links) edge(l.parent, l.child);
    for (const auto& g : m_.gates)
      for (auto in : g.inputs) edge(in, g.gate);
    std::vector<VariableId> ready;
    for (auto& [id, d] : indegree)
      if (d == 0) ready.push_back(id);
    std::size_t visited = 0;
    while (!ready.empty()) {
      auto id = ready.back();
      ready.pop_back();
      ++visited;
      for (auto child : out[id])
        if (--indegree[child] == 0) ready.push_back(child);
    }
    if (visited == indegree.size()) return;
    std::string members;
    for (auto& [id, d] : indegree)
      if (d > 0) members += (members.empty() ? "" : ", ") + id.str();
    error("cycle", "cycle detected among " + members, "links");
  }

  const ChiefComplaintModel& m_;
  std::map<VariableId, const Variable*> vars_;
  ValidationReport report_;
};

}  // namespace

bool ValidationReport::ok() const { return error_count() == 0; }

int ValidationReport::error_count() const {
  int n = 0;
  for (const auto& f : findings) n += f.severity == Severity::kError;
  return n;
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& f : findings) {
    out += f.severity == Severity::kError ? "error" : "warning";
    out += " [" + f.code + "] ";
    if (!f.path.empty()) out += f.path + ": ";
    out += f.message + "\n";
  }
  return out;
}

ValidationReport validate(const ChiefComplaintModel& model) { return Checker(model).run(); }

InvalidModelError::InvalidModelError(ValidationReport report)
    : Error("invalid model:\n" + report.summary()), report_(std::move(report)) {}

void require_valid(const ChiefComplaintModel& model) {
  auto report = validate(model);
  if (!report.ok()) throw InvalidModelError(std::move(report));
}

}  // namespace ducg
