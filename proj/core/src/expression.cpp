#include "minv/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "minv/error.hpp"

namespace minv {

struct Expression::Node {
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Atan2, Pow, Min, Max };

  Op op = Op::Const;
  double value = 0.0;
  std::size_t var = 0;
  Fn fn = Fn::Sin;
  int lhs = -1;
  int rhs = -1;
};

namespace {

using Node = Expression::Node;

struct FnInfo {
  std::string_view name;
  Node::Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"sin", Node::Fn::Sin, 1},     {"cos", Node::Fn::Cos, 1},   {"tan", Node::Fn::Tan, 1},
    {"exp", Node::Fn::Exp, 1},     {"log", Node::Fn::Log, 1},   {"sqrt", Node::Fn::Sqrt, 1},
    {"abs", Node::Fn::Abs, 1},     {"atan2", Node::Fn::Atan2, 2}, {"pow", Node::Fn::Pow, 2},
    {"min", Node::Fn::Min, 2},     {"max", Node::Fn::Max, 2},
};

class Parser {
 public:
  Parser(std::string_view text, std::size_t num_vars) : text_(text), num_vars_(num_vars) {}

  int parse_all(std::vector<Node>& out) {
    nodes_ = &out;
    const int root = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                "expression \"" + std::string(text_) + "\" at offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int push(Node n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  int binary(Node::Op op, int lhs, int rhs) {
    Node n;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    return push(n);
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Node::Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = binary(Node::Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Node::Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = binary(Node::Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (accept('-')) {
      Node n;
      n.op = Node::Op::Neg;
      n.lhs = unary();
      return push(n);
    }
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = atom();
    if (accept('^')) return binary(Node::Op::Pow, base, unary());
    return base;
  }

  int atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  int number() {
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    Node n;
    n.op = Node::Op::Const;
    n.value = v;
    return push(n);
  }

  int identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view id = text_.substr(start, pos_ - start);
    if (id == "pi") return constant(std::numbers::pi);
    if (id == "e") return constant(std::numbers::e);
    if (id.size() >= 2 && id[0] == 'x') {
      std::size_t k = 0;
      auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (ec == std::errc() && ptr == id.data() + id.size()) {
        if (k < 1 || k > num_vars_) fail("variable " + std::string(id) + " out of range");
        Node n;
        n.op = Node::Op::Var;
        n.var = k - 1;
        return push(n);
      }
    }
    for (const auto& f : kFunctions) {
      if (f.name != id) continue;
      expect('(');
      Node n;
      n.op = Node::Op::Call;
      n.fn = f.fn;
      n.lhs = expr();
      if (f.arity == 2) {
        expect(',');
        n.rhs = expr();
      }
      expect(')');
      return push(n);
    }
    fail("unknown identifier '" + std::string(id) + "'");
  }

  int constant(double v) {
    Node n;
    n.op = Node::Op::Const;
    n.value = v;
    return push(n);
  }

  std::string_view text_;
  std::size_t num_vars_;
  std::size_t pos_ = 0;
  std::vector<Node>* nodes_ = nullptr;
};

double evaluate(const std::vector<Node>& nodes, int idx, std::span<const double> vars) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.op) {
    case Node::Op::Const: return n.value;
    case Node::Op::Var: return vars[n.var];
    case Node::Op::Neg: return -evaluate(nodes, n.lhs, vars);
    case Node::Op::Add: return evaluate(nodes, n.lhs, vars) + evaluate(nodes, n.rhs, vars);
    case Node::Op::Sub: return evaluate(nodes, n.lhs, vars) - evaluate(nodes, n.rhs, vars);
    case Node::Op::Mul: return evaluate(nodes, n.lhs, vars) * evaluate(nodes, n.rhs, vars);
    case Node::Op::Div: return evaluate(nodes, n.lhs, vars) / evaluate(nodes, n.rhs, vars);
    case Node::Op::Pow: return std::pow(evaluate(nodes, n.lhs, vars), evaluate(nodes, n.rhs, vars));
    case Node::Op::Call: {
      const double a = evaluate(nodes, n.lhs, vars);
      switch (n.fn) {
        case Node::Fn::Sin: return std::sin(a);
        case Node::Fn::Cos: return std::cos(a);
        case Node::Fn::Tan: return std::tan(a);
        case Node::Fn::Exp: return std::exp(a);
        case Node::Fn::Log: return std::log(a);
        case Node::Fn::Sqrt: return std::sqrt(a);
        case Node::Fn::Abs: return std::abs(a);
        case Node::Fn::Atan2: return std::atan2(a, evaluate(nodes, n.rhs, vars));
        case Node::Fn::Pow: return std::pow(a, evaluate(nodes, n.rhs, vars));
        case Node::Fn::Min: return std::min(a, evaluate(nodes, n.rhs, vars));
        case Node::Fn::Max: return std::max(a, evaluate(nodes, n.rhs, vars));
      }
    }
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view text, std::size_t num_vars) {
  auto nodes = std::make_shared<std::vector<Node>>();
  Parser parser(text, num_vars);
  const int root = parser.parse_all(*nodes);
  return Expression(std::string(text), std::move(nodes), root);
}

double Expression::operator()(std::span<const double> vars) const {
  return evaluate(*nodes_, root_, vars);
}

}  // namespace minv
