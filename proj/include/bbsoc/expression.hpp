#pragma once

// Symbolic scalar expressions for problem files. Parsed once into a flat node
// list and evaluated for any scalar type of the AD layer.
//
// Grammar (usual precedence, ^ is right-associative and binds tighter than
// unary minus):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bbsoc/ad.hpp"

namespace bbsoc {

struct ExpressionSymbols {
  /// Names bound to evaluation slots, in slot order.
  std::vector<std::string> variables;
  /// Names bound to fixed values (parameters, pi, inf).
  std::map<std::string, double> constants;
  /// For endpoint expressions: name -> (slot of initial value, slot of final value),
  /// reachable as initial(name) and final(name).
  std::map<std::string, std::pair<int, int>> endpoint_values;
};

class Expression {
 public:
  /// Throws ErrorCode::kParse with the offending column on malformed input
  /// or unknown names.
  static Expression parse(std::string_view text, const ExpressionSymbols& symbols);

  template <class T>
  T evaluate(std::span<const T> slots) const;

  bool is_constant() const { return nodes_.size() == 1 && nodes_.front().op == Op::kConstant; }
  /// Value of a constant expression; throws ErrorCode::kParse otherwise.
  double constant_value() const;
  const std::string& text() const { return text_; }
  /// Slots the expression reads.
  std::vector<int> slots_used() const;

  enum class Op : std::uint8_t {
    kConstant,
    kSlot,
    kNeg,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPowConstExp,
    kPowConstBase,
    kPow,
    kSin,
    kCos,
    kTan,
    kExp,
    kLog,
    kSqrt,
    kAbs,
    kSinh,
    kCosh,
    kTanh,
    kAsin,
    kAcos,
    kAtan,
    kAtan2,
  };

  struct Node {
    Op op = Op::kConstant;
    int a = -1;
    int b = -1;
    double value = 0.0;
    int slot = -1;
  };

 private:
  friend class ExpressionParser;
  std::vector<Node> nodes_;  ///< children precede parents; the root is last
  std::string text_;
};

template <class T>
T Expression::evaluate(std::span<const T> slots) const {
  std::vector<T> v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::kConstant: v[i] = T(n.value); break;
      case Op::kSlot: v[i] = slots[n.slot]; break;
      case Op::kNeg: v[i] = -v[n.a]; break;
      case Op::kAdd: v[i] = v[n.a] + v[n.b]; break;
      case Op::kSub: v[i] = v[n.a] - v[n.b]; break;
      case Op::kMul: v[i] = v[n.a] * v[n.b]; break;
      case Op::kDiv: v[i] = v[n.a] / v[n.b]; break;
      case Op::kPowConstExp:
        if (n.value == 2.0) {
          v[i] = v[n.a] * v[n.a];
        } else {
          v[i] = ad::pow(v[n.a], n.value);
        }
        break;
      case Op::kPowConstBase: v[i] = ad::pow(n.value, v[n.b]); break;
      case Op::kPow: v[i] = ad::pow(v[n.a], v[n.b]); break;
      case Op::kSin: v[i] = ad::sin(v[n.a]); break;
      case Op::kCos: v[i] = ad::cos(v[n.a]); break;
      case Op::kTan: v[i] = ad::tan(v[n.a]); break;
      case Op::kExp: v[i] = ad::exp(v[n.a]); break;
      case Op::kLog: v[i] = ad::log(v[n.a]); break;
      case Op::kSqrt: v[i] = ad::sqrt(v[n.a]); break;
      case Op::kAbs: v[i] = ad::abs(v[n.a]); break;
      case Op::kSinh: v[i] = ad::sinh(v[n.a]); break;
      case Op::kCosh: v[i] = ad::cosh(v[n.a]); break;
      case Op::kTanh: v[i] = ad::tanh(v[n.a]); break;
      case Op::kAsin: v[i] = ad::asin(v[n.a]); break;
      case Op::kAcos: v[i] = ad::acos(v[n.a]); break;
      case Op::kAtan: v[i] = ad::atan(v[n.a]); break;
      case Op::kAtan2: v[i] = ad::atan2(v[n.a], v[n.b]); break;
    }
  }
  return v.back();
}

}  // namespace bbsoc
