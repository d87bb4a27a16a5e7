#ifndef DUCG_FACTOR_H_
#define DUCG_FACTOR_H_

#include <vector>

#include "ducg/simplify.h"

namespace ducg {

// A table over discrete variables, identified by node position. Values are
// stored row-major with the last variable varying fastest.
struct Factor {
  std::vector<int> vars;  // strictly ascending
  std::vector<int> card;
  std::vector<double> values;

  static Factor constant(double v) { return Factor{{}, {}, {v}}; }
};

Factor multiply(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, int var);

/// Sums every variable except `keep` out of the product of `factors`,
/// eliminating greedily by smallest intermediate table.
Factor eliminate(std::vector<Factor> factors, int keep = -1);

/// Joint probability of the view's observed states, under the per-node
/// conditional tables of the generative semantics. Nodes flagged in
/// `isolated` contribute the constant `theta` instead of their table. With
/// `query` >= 0 the result holds one joint value per state of that node;
/// otherwise it holds a single value.
std::vector<double> evidence_joint(const GraphView& view, const std::vector<char>& isolated,
                                   double theta, int query = -1);

}  // namespace ducg

#endif  // DUCG_FACTOR_H_
