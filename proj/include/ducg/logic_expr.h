#ifndef DUCG_LOGIC_EXPR_H_
#define DUCG_LOGIC_EXPR_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ducg/ids.h"

namespace ducg {

// A compiled boolean expression over the states of a gate's inputs.
//
// Grammar:
//   expr   := term   (('|' | '+') term)*
//   term   := factor (('&' | '*') factor)*
//   factor := '!' factor | '(' expr ')' | atom | 'true' | 'false'
//   atom   := ID '.' STATE            e.g. X3.2
//           | ID ('=' | '==' | '!=' | '>=' | '<=' | '>' | '<') STATE
//
// ID is a variable identifier such as B5 or X12 and must be one of the
// gate's declared inputs.
class LogicExpr {
 public:
  // Maps an identifier to its position among the gate inputs, or nullopt
  // when it is not an input.
  using Resolver = std::function<std::optional<int>(VariableId)>;

  /// Throws SchemaError on syntax errors and ReferenceError on identifiers
  /// the resolver rejects.
  static LogicExpr compile(std::string_view text, const Resolver& resolve);

  bool evaluate(std::span<const int> input_states) const;

  /// Positions of the inputs the expression reads.
  std::vector<int> referenced_inputs() const;

 private:
  enum class Op : unsigned char { kConst, kCompare, kNot, kAnd, kOr };
  enum class Cmp : unsigned char { kEq, kNe, kGe, kLe, kGt, kLt };
  struct Node {
    Op op = Op::kConst;
    Cmp cmp = Cmp::kEq;
    int input = 0;  // kCompare
    int value = 0;  // kCompare state, kConst truth
    int lhs = -1;
    int rhs = -1;
  };

  bool eval(int node, std::span<const int> states) const;

  std::vector<Node> nodes_;
  int root_ = -1;

  friend class LogicParser;
};

}  // namespace ducg

#endif  // DUCG_LOGIC_EXPR_H_
