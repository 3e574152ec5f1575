#include "bbsoc/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "bbsoc/error.hpp"

namespace bbsoc {

namespace {

using Op = Expression::Op;

struct FunctionInfo {
  Op op;
  int arity;
};

const std::map<std::string, FunctionInfo, std::less<>>& functions() {
  static const std::map<std::string, FunctionInfo, std::less<>> table{
      {"sin", {Op::kSin, 1}},   {"cos", {Op::kCos, 1}},   {"tan", {Op::kTan, 1}},     {"exp", {Op::kExp, 1}},
      {"log", {Op::kLog, 1}},   {"sqrt", {Op::kSqrt, 1}}, {"abs", {Op::kAbs, 1}},     {"sinh", {Op::kSinh, 1}},
      {"cosh", {Op::kCosh, 1}}, {"tanh", {Op::kTanh, 1}}, {"asin", {Op::kAsin, 1}},   {"acos", {Op::kAcos, 1}},
      {"atan", {Op::kAtan, 1}}, {"atan2", {Op::kAtan2, 2}}, {"pow", {Op::kPow, 2}},
  };
  return table;
}

double apply(Op op, double a, double b) {
  switch (op) {
    case Op::kNeg: return -a;
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv: return a / b;
    case Op::kPowConstExp:
    case Op::kPowConstBase:
    case Op::kPow: return std::pow(a, b);
    case Op::kSin: return std::sin(a);
    case Op::kCos: return std::cos(a);
    case Op::kTan: return std::tan(a);
    case Op::kExp: return std::exp(a);
    case Op::kLog: return std::log(a);
    case Op::kSqrt: return std::sqrt(a);
    case Op::kAbs: return std::fabs(a);
    case Op::kSinh: return std::sinh(a);
    case Op::kCosh: return std::cosh(a);
    case Op::kTanh: return std::tanh(a);
    case Op::kAsin: return std::asin(a);
    case Op::kAcos: return std::acos(a);
    case Op::kAtan: return std::atan(a);
    case Op::kAtan2: return std::atan2(a, b);
    case Op::kConstant:
    case Op::kSlot: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, const ExpressionSymbols& symbols) : text_(text), symbols_(symbols) {}

  Expression run() {
    Expression e;
    e.text_ = std::string(text_);
    skip_space();
    if (pos_ >= text_.size()) fail("empty expression");
    const int root = expr();
    skip_space();
    if (pos_ < text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    // Keep only the nodes reachable from the root, children first.
    std::vector<int> order;
    std::vector<int> remap(nodes_.size(), -1);
    collect(root, order, remap);
    for (int i : order) {
      Expression::Node n = nodes_[i];
      if (n.a >= 0) n.a = remap[n.a];
      if (n.b >= 0) n.b = remap[n.b];
      e.nodes_.push_back(n);
    }
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParse,
                what + " at column " + std::to_string(pos_ + 1) + " in '" + std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int constant(double v) { return add({Op::kConstant, -1, -1, v, -1}); }

  int add(Expression::Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  bool is_const(int i) const { return nodes_[i].op == Op::kConstant; }

  int unary_node(Op op, int a) {
    if (is_const(a)) return constant(apply(op, nodes_[a].value, 0.0));
    return add({op, a, -1, 0.0, -1});
  }

  int binary_node(Op op, int a, int b) {
    if (is_const(a) && is_const(b)) return constant(apply(op, nodes_[a].value, nodes_[b].value));
    if (op == Op::kPow) {
      if (is_const(b)) return add({Op::kPowConstExp, a, -1, nodes_[b].value, -1});
      if (is_const(a)) return add({Op::kPowConstBase, -1, b, nodes_[a].value, -1});
    }
    return add({op, a, b, 0.0, -1});
  }

  int expr() {
    int left = term();
    for (;;) {
      if (accept('+')) {
        left = binary_node(Op::kAdd, left, term());
      } else if (accept('-')) {
        left = binary_node(Op::kSub, left, term());
      } else {
        return left;
      }
    }
  }

  int term() {
    int left = unary();
    for (;;) {
      if (accept('*')) {
        left = binary_node(Op::kMul, left, unary());
      } else if (accept('/')) {
        left = binary_node(Op::kDiv, left, unary());
      } else {
        return left;
      }
    }
  }

  int unary() {
    if (accept('-')) return unary_node(Op::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return binary_node(Op::kPow, base, unary());
    return base;
  }

  std::string name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  int number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return constant(v);
  }

  int primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail(std::string("unexpected '") + c + "'");
    const std::size_t start = pos_;
    const std::string id = name();
    if (accept('(')) return call(id, start);
    for (std::size_t k = 0; k < symbols_.variables.size(); ++k) {
      if (symbols_.variables[k] == id) return add({Op::kSlot, -1, -1, 0.0, static_cast<int>(k)});
    }
    if (const auto it = symbols_.constants.find(id); it != symbols_.constants.end()) return constant(it->second);
    if (id == "pi") return constant(std::numbers::pi);
    if (id == "inf") return constant(std::numeric_limits<double>::infinity());
    pos_ = start;
    if (symbols_.endpoint_values.count(id) != 0) fail("'" + id + "' needs initial(" + id + ") or final(" + id + ") here");
    fail("unknown name '" + id + "'");
  }

  int call(const std::string& id, std::size_t start) {
    if (id == "initial" || id == "final") {
      skip_space();
      const std::size_t arg_pos = pos_;
      const std::string arg = name();
      const auto it = symbols_.endpoint_values.find(arg);
      if (it == symbols_.endpoint_values.end()) {
        pos_ = arg_pos;
        fail(symbols_.endpoint_values.empty() ? id + "() is only allowed in endpoint expressions"
                                              : "unknown state '" + arg + "'");
      }
      expect(')');
      return add({Op::kSlot, -1, -1, 0.0, id == "initial" ? it->second.first : it->second.second});
    }
    const auto fit = functions().find(id);
    if (fit == functions().end()) {
      pos_ = start;
      fail("unknown function '" + id + "'");
    }
    std::vector<int> args{expr()};
    while (accept(',')) args.push_back(expr());
    expect(')');
    if (static_cast<int>(args.size()) != fit->second.arity) {
      pos_ = start;
      fail(id + " takes " + std::to_string(fit->second.arity) + " argument(s)");
    }
    if (fit->second.arity == 1) return unary_node(fit->second.op, args[0]);
    return binary_node(fit->second.op, args[0], args[1]);
  }

  void collect(int i, std::vector<int>& order, std::vector<int>& remap) const {
    if (remap[i] >= 0) return;
    const Expression::Node& n = nodes_[i];
    if (n.a >= 0) collect(n.a, order, remap);
    if (n.b >= 0) collect(n.b, order, remap);
    remap[i] = static_cast<int>(order.size());
    order.push_back(i);
  }

  std::string_view text_;
  const ExpressionSymbols& symbols_;
  std::size_t pos_ = 0;
  std::vector<Expression::Node> nodes_;
};

Expression Expression::parse(std::string_view text, const ExpressionSymbols& symbols) {
  return ExpressionParser(text, symbols).run();
}

double Expression::constant_value() const {
  if (!is_constant()) throw Error(ErrorCode::kParse, "'" + text_ + "' is not a constant expression");
  return nodes_.front().value;
}

std::vector<int> Expression::slots_used() const {
  std::set<int> s;
  for (const Node& n : nodes_) {
    if (n.op == Op::kSlot) s.insert(n.slot);
  }
  return {s.begin(), s.end()};
}

}  // namespace bbsoc
