#ifndef DUCG_NETWORK_H_
#define DUCG_NETWORK_H_

#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ducg/logic_expr.h"
#include "ducg/model.h"

namespace ducg {

// Dense a-matrix of one functional link, indexed by node positions rather
// than ids. Null entries are stored as zero.
struct LinkTable {
  int parent = 0;
  int child = 0;
  double r = 1.0;
  int parent_states = 0;
  int child_states = 0;
  std::vector<double> p;  // p[k * parent_states + j]

  double at(int k, int j) const { return p[k * parent_states + j]; }
  // Probability that the link drives the child to some abnormal state.
  double abnormal_mass(int j) const;
  bool column_nonzero(int j) const { return abnormal_mass(j) > 0.0; }
};

struct GateTable {
  int node = 0;
  std::vector<int> inputs;
  std::vector<LogicExpr> rows;
  std::vector<int> row_states;
  int default_state = 0;

  int evaluate(std::span<const int> input_states) const;
};

struct Node {
  VariableId id;
  const Variable* variable = nullptr;
  int states = 2;
  std::vector<int> in_links;
  std::vector<int> out_links;
  int gate = -1;                 // index into Network::gates() for G/SG
  std::vector<int> feeds_gates;  // gates reading this node
  double total_r = 0.0;          // sum of r over every link into the node
  // False for structure that never takes part in causation, such as risk
  // factors that only drive prior scalers.
  bool causal = false;
  const DiseaseAttributes* disease = nullptr;
  double attention = 1.0;
  double cost = 1.0;
};

// Immutable compiled form of a validated model. Node positions follow the
// id order of the variables, so every traversal is deterministic.
class Network {
 public:
  /// Validates and compiles; throws InvalidModelError on a bad model.
  static std::shared_ptr<const Network> compile(ChiefComplaintModel model);

  const ChiefComplaintModel& model() const { return model_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int n) const { return nodes_[n]; }
  const std::vector<LinkTable>& links() const { return links_; }
  const LinkTable& link(int l) const { return links_[l]; }
  const std::vector<GateTable>& gates() const { return gates_; }
  const std::vector<int>& topo_order() const { return topo_; }
  const std::vector<int>& disease_nodes() const { return disease_nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double theta_d() const { return model_.defaults.theta_d; }

  std::optional<int> find(VariableId id) const;
  /// Throws ReferenceError for undeclared ids.
  int index_of(VariableId id) const;

 private:
  Network() = default;

  ChiefComplaintModel model_;
  std::vector<Node> nodes_;
  std::vector<LinkTable> links_;
  std::vector<GateTable> gates_;
  std::vector<int> topo_;
  std::vector<int> disease_nodes_;
  std::unordered_map<VariableId, int> index_;
};

using NetworkPtr = std::shared_ptr<const Network>;

}  // namespace ducg

#endif  // DUCG_NETWORK_H_
