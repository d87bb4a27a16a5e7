#include "ducg/factor.h"

#include <algorithm>
#include <functional>
#include <limits>

#include "ducg/error.h"

namespace ducg {

namespace {

std::vector<std::size_t> strides(const Factor& f) {
  std::vector<std::size_t> s(f.vars.size(), 1);
  for (int i = static_cast<int>(f.vars.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * f.card[i + 1];
  return s;
}

// Stride of each of `vars` inside `f`, zero where f does not depend on it.
std::vector<std::size_t> strides_in(const Factor& f, const std::vector<int>& vars) {
  auto own = strides(f);
  std::vector<std::size_t> out(vars.size(), 0);
  for (std::size_t i = 0, k = 0; i < vars.size() && k < f.vars.size(); ++i)
    if (vars[i] == f.vars[k]) out[i] = own[k++];
  return out;
}

std::size_t table_size(const std::vector<int>& card) {
  std::size_t n = 1;
  for (int c : card) n *= static_cast<std::size_t>(c);
  return n;
}

// Calls fn(assignment) for every joint state of `card`, last digit fastest.
void for_each_assignment(const std::vector<int>& card, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> a(card.size(), 0);
  std::size_t total = table_size(card);
  for (std::size_t idx = 0; idx < total; ++idx) {
    fn(a);
    for (int d = static_cast<int>(a.size()) - 1; d >= 0; --d) {
      if (++a[d] < card[d]) break;
      a[d] = 0;
    }
  }
}

}  // namespace

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::size_t i = 0, k = 0;
  while (i < a.vars.size() || k < b.vars.size()) {
    if (k == b.vars.size() || (i < a.vars.size() && a.vars[i] < b.vars[k])) {
      out.vars.push_back(a.vars[i]);
      out.card.push_back(a.card[i++]);
    } else if (i == a.vars.size() || b.vars[k] < a.vars[i]) {
      out.vars.push_back(b.vars[k]);
      out.card.push_back(b.card[k++]);
    } else {
      out.vars.push_back(a.vars[i]);
      out.card.push_back(a.card[i++]);
      ++k;
    }
  }
  auto sa = strides_in(a, out.vars);
  auto sb = strides_in(b, out.vars);
  std::size_t total = table_size(out.card);
  out.values.resize(total);
  std::vector<int> digit(out.vars.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    out.values[idx] = a.values[ia] * b.values[ib];
    for (int d = static_cast<int>(digit.size()) - 1; d >= 0; --d) {
      ia += sa[d];
      ib += sb[d];
      if (++digit[d] < out.card[d]) break;
      ia -= sa[d] * out.card[d];
      ib -= sb[d] * out.card[d];
      digit[d] = 0;
    }
  }
  return out;
}

Factor sum_out(const Factor& f, int var) {
  auto pos = std::find(f.vars.begin(), f.vars.end(), var);
  if (pos == f.vars.end()) return f;
  std::size_t p = pos - f.vars.begin();
  Factor out;
  for (std::size_t i = 0; i < f.vars.size(); ++i)
    if (i != p) {
      out.vars.push_back(f.vars[i]);
      out.card.push_back(f.card[i]);
    }
  std::size_t inner = 1;
  for (std::size_t i = p + 1; i < f.card.size(); ++i) inner *= f.card[i];
  std::size_t c = f.card[p];
  out.values.assign(f.values.size() / c, 0.0);
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    std::size_t outer = idx / (c * inner);
    out.values[outer * inner + idx % inner] += f.values[idx];
  }
  return out;
}

Factor eliminate(std::vector<Factor> factors, int keep) {
  std::vector<int> pending;
  std::vector<int> card_of;
  for (const auto& f : factors)
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
      if (f.vars[i] != keep) pending.push_back(f.vars[i]);
      if (static_cast<int>(card_of.size()) <= f.vars[i]) card_of.resize(f.vars[i] + 1, 0);
      card_of[f.vars[i]] = f.card[i];
    }
  std::sort(pending.begin(), pending.end());
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());

  while (!pending.empty()) {
    // Pick the variable whose elimination builds the smallest table.
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < pending.size(); ++c) {
      std::vector<int> scope;
      for (const auto& f : factors)
        if (std::binary_search(f.vars.begin(), f.vars.end(), pending[c]))
          scope.insert(scope.end(), f.vars.begin(), f.vars.end());
      std::sort(scope.begin(), scope.end());
      scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
      double cost = 1;
      for (int v : scope) cost *= card_of[v];
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    int var = pending[best];
    pending.erase(pending.begin() + best);
    Factor product = Factor::constant(1.0);
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), var))
        product = multiply(product, f);
      else
        rest.push_back(std::move(f));
    }
    rest.push_back(sum_out(product, var));
    factors = std::move(rest);
  }
  Factor result = Factor::constant(1.0);
  for (const auto& f : factors) result = multiply(result, f);
  return result;
}

namespace {

class FactorBuilder {
 public:
  FactorBuilder(const GraphView& g, const std::vector<char>& isolated, double theta)
      : g_(g), net_(*g.net), isolated_(isolated), theta_(theta) {}

  std::vector<Factor> build(int query) {
    std::vector<char> relevant(net_.size(), 0);
    std::vector<int> stack;
    auto mark = [&](int n) {
      if (!relevant[n] && g_.alive(n)) {
        relevant[n] = 1;
        stack.push_back(n);
      }
    };
    for (int n = 0; n < net_.size(); ++n)
      if (g_.observed[n] >= 0) mark(n);
    if (query >= 0) mark(query);
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      if (g_.known_state(n) >= 0 && g_.observed[n] < 0) continue;  // pinned: parents irrelevant
      if (isolated_[n]) continue;
      const Node& node = net_.node(n);
      for (int l : node.in_links)
        if (g_.link_live(l)) mark(net_.link(l).parent);
      if (node.gate >= 0)
        for (int in : net_.gates()[node.gate].inputs) mark(in);
    }

    std::vector<Factor> out;
    for (int n : net_.topo_order()) {
      if (!relevant[n]) continue;
      const Node& node = net_.node(n);
      if (isolated_[n]) {
        out.push_back(Factor::constant(theta_));
      } else if (g_.known_state(n) >= 0 && g_.observed[n] < 0) {
        continue;
      } else if (node.gate >= 0) {
        out.push_back(gate_factor(n, net_.gates()[node.gate]));
      } else if (is_disease_kind(node.id.kind)) {
        throw PreconditionError("disease " + node.id.str() + " is not pinned; separate a hypothesis first");
      } else {
        out.push_back(cpt_factor(n));
      }
    }
    return out;
  }

 private:
  bool uncertain(int n) const { return g_.alive(n) && g_.known_state(n) < 0; }

  // State of an input that is not a factor variable.
  int constant_state(int n) const {
    int s = g_.known_state(n);
    return s < 0 ? 0 : s;
  }

  Factor cpt_factor(int n) {
    const Node& node = net_.node(n);
    std::vector<int> live;
    for (int l : node.in_links)
      if (g_.link_live(l)) live.push_back(l);
    Factor f;
    std::vector<std::pair<int, int>> scope;  // (node, link or -1 for self)
    for (int l : live)
      if (uncertain(net_.link(l).parent)) scope.emplace_back(net_.link(l).parent, l);
    if (g_.observed[n] < 0) scope.emplace_back(n, -1);
    std::sort(scope.begin(), scope.end());
    for (auto [v, l] : scope) {
      f.vars.push_back(v);
      f.card.push_back(net_.node(v).states);
    }
    std::vector<int> parent_slot(live.size(), -1);
    int self_slot = -1;
    for (std::size_t s = 0; s < scope.size(); ++s) {
      if (scope[s].second < 0) {
        self_slot = static_cast<int>(s);
        continue;
      }
      for (std::size_t i = 0; i < live.size(); ++i)
        if (live[i] == scope[s].second) parent_slot[i] = static_cast<int>(s);
    }
    f.values.reserve(table_size(f.card));
    std::vector<double> dist(node.states);
    for_each_assignment(f.card, [&](const std::vector<int>& a) {
      std::fill(dist.begin(), dist.end(), 0.0);
      double abnormal = 0.0;
      for (std::size_t i = 0; i < live.size(); ++i) {
        const LinkTable& t = net_.link(live[i]);
        int j = parent_slot[i] >= 0 ? a[parent_slot[i]] : constant_state(t.parent);
        if (j == 0) continue;
        double w = t.r / node.total_r;
        for (int k = 1; k < node.states; ++k) {
          double p = w * t.at(k, j);
          dist[k] += p;
          abnormal += p;
        }
      }
      dist[0] = std::max(0.0, 1.0 - abnormal);
      int k = self_slot >= 0 ? a[self_slot] : g_.observed[n];
      f.values.push_back(dist[k]);
    });
    return f;
  }

  Factor gate_factor(int n, const GateTable& gate) {
    Factor f;
    std::vector<int> scope;
    for (int in : gate.inputs)
      if (uncertain(in)) scope.push_back(in);
    scope.push_back(n);
    std::sort(scope.begin(), scope.end());
    scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
    for (int v : scope) {
      f.vars.push_back(v);
      f.card.push_back(net_.node(v).states);
    }
    std::vector<int> inputs(gate.inputs.size());
    f.values.reserve(table_size(f.card));
    for_each_assignment(f.card, [&](const std::vector<int>& a) {
      int self = 0;
      for (std::size_t s = 0; s < scope.size(); ++s)
        if (scope[s] == n) self = a[s];
      for (std::size_t i = 0; i < gate.inputs.size(); ++i) {
        int in = gate.inputs[i];
        auto pos = std::lower_bound(scope.begin(), scope.end(), in);
        inputs[i] = (pos != scope.end() && *pos == in && in != n) ? a[pos - scope.begin()] : constant_state(in);
      }
      f.values.push_back(gate.evaluate(inputs) == self ? 1.0 : 0.0);
    });
    return f;
  }

  const GraphView& g_;
  const Network& net_;
  const std::vector<char>& isolated_;
  double theta_;
};

}  // namespace

std::vector<double> evidence_joint(const GraphView& view, const std::vector<char>& isolated,
                                   double theta, int query) {
  const Network& net = *view.net;
  if (query >= 0 && (!view.alive(query) || view.known_state(query) >= 0)) {
    int s = view.known_state(query);
    if (s < 0) throw PreconditionError("query " + net.node(query).id.str() + " was removed as barren");
    std::vector<double> out(net.node(query).states, 0.0);
    out[s] = evidence_joint(view, isolated, theta, -1)[0];
    return out;
  }
  FactorBuilder builder(view, isolated, theta);
  Factor f = eliminate(builder.build(query), query);
  if (query < 0) return {f.values.at(0)};
  if (f.vars.size() != 1 || f.vars[0] != query)
    throw PreconditionError("query elimination left an unexpected scope");
  return f.values;
}

}  // namespace ducg
