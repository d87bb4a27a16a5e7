#ifndef DUCG_SIMPLIFY_H_
#define DUCG_SIMPLIFY_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ducg/evidence.h"
#include "ducg/network.h"

namespace ducg {

enum class NodeStatus : std::uint8_t {
  kAlive,
  kCertainZero,  // in state 0 with probability 1 given the evidence
  kBarren,       // cannot influence any observed or unknown variable
  kExcluded,     // never part of causation (risk-factor-only structure)
};

// Evidence-specific state of every node and link of a network. Reduction
// only ever deletes, which is what makes incremental refinement valid.
struct GraphView {
  NetworkPtr net;
  std::vector<NodeStatus> status;
  std::vector<int> fixed;     // state a root or gate is pinned to, or -1
  std::vector<int> observed;  // observed state, or -1
  std::vector<char> unknown;
  std::vector<char> link_alive;

  bool alive(int n) const { return status[n] == NodeStatus::kAlive; }
  bool link_live(int l) const;
  /// Observed or pinned state; 0 for certain-zero nodes; -1 when uncertain.
  int known_state(int n) const;
  bool has_live_input(int n) const;
};

/// Virtual default cause attached to an unexplained abnormal finding.
struct VirtualDefault {
  VariableId id;      // D with the target's index, e.g. D8 for X8
  VariableId target;
  int state = 1;

  friend bool operator==(const VirtualDefault&, const VirtualDefault&) = default;
};

struct SimplifiedGraph {
  GraphView view;
  EvidenceSet evidence;
  std::vector<DiseaseEvent> hypotheses;
  bool no_finding = false;

  bool has_hypothesis(const DiseaseEvent& h) const;
};

struct SubDucg {
  DiseaseEvent hypothesis;
  GraphView view;
  EvidenceSet evidence;
  std::vector<VirtualDefault> virtual_defaults;
  std::vector<char> isolated;  // per node: target of a virtual default

  int isolated_count() const { return static_cast<int>(virtual_defaults.size()); }
  bool contains(VariableId id) const;
};

/// Reduces the network against the evidence to a fixed point and lists the
/// surviving hypotheses. All-normal evidence yields no_finding and no
/// hypotheses.
SimplifiedGraph simplify(const NetworkPtr& net, const EvidenceSet& evidence);

/// Continues a previous reduction after extra observations, keeping its
/// hypothesis set frozen: hypotheses can drop out, never join. Every new
/// observation must be on a variable still alive in `previous`, or be a
/// normal state.
SimplifiedGraph simplify(const SimplifiedGraph& previous, const EvidenceSet& evidence);

/// Reduces from scratch while treating every disease outside `within` as
/// absent. Produces the same graph as the continuing form above when
/// `within` is the earlier hypothesis set.
SimplifiedGraph simplify(const NetworkPtr& net, const EvidenceSet& evidence,
                         const std::vector<DiseaseEvent>& within);

/// Separates the sub-DUCG of one hypothesis. Throws PreconditionError when
/// the hypothesis is not in `simplified`, or the evidence differs from the
/// evidence it was simplified against.
SubDucg separate(const SimplifiedGraph& simplified, const EvidenceSet& evidence,
                 const DiseaseEvent& hypothesis);
SubDucg separate(const SimplifiedGraph& simplified, const DiseaseEvent& hypothesis);

/// Continues a separation after extra observations, under the same
/// restriction as the continuing simplify().
SubDucg refine(const SubDucg& sub, const EvidenceSet& evidence);

// Node and edge sets of a sub-DUCG, for structural comparison.
struct Topology {
  std::vector<VariableId> nodes;
  std::vector<std::pair<VariableId, VariableId>> edges;
  std::vector<VirtualDefault> virtual_defaults;

  friend bool operator==(const Topology&, const Topology&) = default;
};
Topology topology(const SubDucg& sub);

/// Explanation form: colored nodes and edges, virtual defaults included.
nlohmann::json to_json(const SubDucg& sub);

}  // namespace ducg

#endif  // DUCG_SIMPLIFY_H_
