#include "ducg/logic_expr.h"

#include <cctype>

#include "ducg/error.h"

namespace ducg {

class LogicParser {
 public:
  LogicParser(std::string_view text, const LogicExpr::Resolver& resolve,
              LogicExpr& out)
      : text_(text), resolve_(resolve), out_(out) {}

  void run() {
    out_.root_ = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
  }

 private:
  using Node = LogicExpr::Node;
  using Op = LogicExpr::Op;
  using Cmp = LogicExpr::Cmp;

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("", "gate expression '" + std::string(text_) +
                              "' at offset " + std::to_string(pos_) + ": " +
                              what);
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int push(Node n) {
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int parse_or() {
    int lhs = parse_and();
    while (accept('|') || accept('+')) {
      accept('|');  // tolerate "||"
      int rhs = parse_and();
      lhs = push(Node{Op::kOr, Cmp::kEq, 0, 0, lhs, rhs});
    }
    return lhs;
  }

  int parse_and() {
    int lhs = parse_not();
    while (accept('&') || accept('*')) {
      accept('&');  // tolerate "&&"
      int rhs = parse_not();
      lhs = push(Node{Op::kAnd, Cmp::kEq, 0, 0, lhs, rhs});
    }
    return lhs;
  }

  int parse_not() {
    if (accept('!')) {
      int inner = parse_not();
      return push(Node{Op::kNot, Cmp::kEq, 0, 0, inner, -1});
    }
    if (accept('(')) {
      int inner = parse_or();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    return parse_atom();
  }

  int parse_int() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (start == pos_) fail("expected a state number");
    return std::stoi(std::string(text_.substr(start, pos_ - start)));
  }

  int parse_atom() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalnum(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    std::string_view word = text_.substr(start, pos_ - start);
    if (word.empty()) fail("expected an identifier");
    if (word == "true" || word == "false")
      return push(Node{Op::kConst, Cmp::kEq, 0, word == "true" ? 1 : 0});

    VariableId id;
    try {
      id = VariableId::parse(word);
    } catch (const SchemaError&) {
      fail("malformed identifier '" + std::string(word) + "'");
    }
    auto input = resolve_(id);
    if (!input)
      throw ReferenceError("gate expression references " + id.str() +
                           ", which is not a declared input");

    Cmp cmp = Cmp::kEq;
    skip_space();
    if (accept('.')) {
      cmp = Cmp::kEq;
    } else if (accept('=')) {
      accept('=');
    } else if (accept('!')) {
      if (!accept('=')) fail("expected '!='");
      cmp = Cmp::kNe;
    } else if (accept('>')) {
      cmp = accept('=') ? Cmp::kGe : Cmp::kGt;
    } else if (accept('<')) {
      cmp = accept('=') ? Cmp::kLe : Cmp::kLt;
    } else {
      fail("expected a state selector after " + id.str());
    }
    int value = parse_int();
    return push(Node{Op::kCompare, cmp, *input, value});
  }

  std::string_view text_;
  const LogicExpr::Resolver& resolve_;
  LogicExpr& out_;
  std::size_t pos_ = 0;
};

LogicExpr LogicExpr::compile(std::string_view text, const Resolver& resolve) {
  LogicExpr expr;
  LogicParser(text, resolve, expr).run();
  return expr;
}

bool LogicExpr::evaluate(std::span<const int> input_states) const {
  return eval(root_, input_states);
}

bool LogicExpr::eval(int index, std::span<const int> states) const {
  const Node& n = nodes_[index];
  switch (n.op) {
    case Op::kConst:
      return n.value != 0;
    case Op::kNot:
      return !eval(n.lhs, states);
    case Op::kAnd:
      return eval(n.lhs, states) && eval(n.rhs, states);
    case Op::kOr:
      return eval(n.lhs, states) || eval(n.rhs, states);
    case Op::kCompare: {
      int s = states[n.input];
      switch (n.cmp) {
        case Cmp::kEq: return s == n.value;
        case Cmp::kNe: return s != n.value;
        case Cmp::kGe: return s >= n.value;
        case Cmp::kLe: return s <= n.value;
        case Cmp::kGt: return s > n.value;
        case Cmp::kLt: return s < n.value;
      }
    }
  }
  return false;
}

std::vector<int> LogicExpr::referenced_inputs() const {
  std::vector<int> out;
  for (const Node& n : nodes_)
    if (n.op == Op::kCompare) out.push_back(n.input);
  return out;
}

}  // namespace ducg
