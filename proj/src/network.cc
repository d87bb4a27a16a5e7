#include "ducg/network.h"

#include <algorithm>
#include <functional>
#include <queue>

#include "ducg/error.h"
#include "ducg/validate.h"

namespace ducg {

double LinkTable::abnormal_mass(int j) const {
  double m = 0.0;
  for (int k = 1; k < child_states; ++k) m += at(k, j);
  return m;
}

int GateTable::evaluate(std::span<const int> input_states) const {
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].evaluate(input_states)) return row_states[r];
  return default_state;
}

std::optional<int> Network::find(VariableId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Network::index_of(VariableId id) const {
  auto n = find(id);
  if (!n) throw ReferenceError("unknown variable " + id.str());
  return *n;
}

std::shared_ptr<const Network> Network::compile(ChiefComplaintModel model) {
  require_valid(model);
  std::shared_ptr<Network> net(new Network());
  net->model_ = std::move(model);
  auto& m = net->model_;
  std::sort(m.variables.begin(), m.variables.end(),
            [](const Variable& a, const Variable& b) { return a.id < b.id; });

  auto& nodes = net->nodes_;
  nodes.resize(m.variables.size());
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    const Variable& v = m.variables[i];
    Node& n = nodes[i];
    n.id = v.id;
    n.variable = &v;
    n.states = v.state_count();
    n.attention = v.attention_or_default();
    n.cost = v.cost_or_default();
    net->index_.emplace(v.id, static_cast<int>(i));
  }
  for (const auto& d : m.diseases) {
    int n = net->index_of(d.variable);
    nodes[n].disease = &d;
    net->disease_nodes_.push_back(n);
  }
  std::sort(net->disease_nodes_.begin(), net->disease_nodes_.end());

  for (const auto& l : m.links) {
    LinkTable t;
    t.parent = net->index_of(l.parent);
    t.child = net->index_of(l.child);
    t.r = l.r;
    t.parent_states = nodes[t.parent].states;
    t.child_states = nodes[t.child].states;
    t.p.assign(static_cast<std::size_t>(t.parent_states) * t.child_states, 0.0);
    for (const auto& a : l.a) t.p[a.k * t.parent_states + a.j] = a.p;
    int id = static_cast<int>(net->links_.size());
    nodes[t.parent].out_links.push_back(id);
    nodes[t.child].in_links.push_back(id);
    nodes[t.child].total_r += t.r;
    net->links_.push_back(std::move(t));
  }

  for (const auto& def : m.gates) {
    GateTable g;
    g.node = net->index_of(def.gate);
    for (auto in : def.inputs) g.inputs.push_back(net->index_of(in));
    auto resolve = [&](VariableId id) -> std::optional<int> {
      for (std::size_t p = 0; p < def.inputs.size(); ++p)
        if (def.inputs[p] == id) return static_cast<int>(p);
      return std::nullopt;
    };
    for (const auto& row : def.rows) {
      g.rows.push_back(LogicExpr::compile(row.expr, resolve));
      g.row_states.push_back(row.state);
    }
    g.default_state = def.default_state;
    int id = static_cast<int>(net->gates_.size());
    nodes[g.node].gate = id;
    for (int in : g.inputs) nodes[in].feeds_gates.push_back(id);
    net->gates_.push_back(std::move(g));
  }

  // Kahn's algorithm with a min-heap so ties resolve by position.
  std::vector<int> indegree(nodes.size(), 0);
  for (const auto& l : net->links_) ++indegree[l.child];
  for (const auto& g : net->gates_) indegree[g.node] += static_cast<int>(g.inputs.size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  while (!ready.empty()) {
    int n = ready.top();
    ready.pop();
    net->topo_.push_back(n);
    for (int l : nodes[n].out_links)
      if (--indegree[net->links_[l].child] == 0) ready.push(net->links_[l].child);
    for (int g : nodes[n].feeds_gates)
      if (--indegree[net->gates_[g].node] == 0) ready.push(net->gates_[g].node);
  }

  for (auto it = net->topo_.rbegin(); it != net->topo_.rend(); ++it) {
    Node& n = nodes[*it];
    bool feeds_causal = std::any_of(n.feeds_gates.begin(), n.feeds_gates.end(),
                                    [&](int g) { return nodes[net->gates_[g].node].causal; });
    n.causal = is_disease_kind(n.id.kind) || !n.in_links.empty() || !n.out_links.empty() ||
               feeds_causal;
  }
  return net;
}

}  // namespace ducg
