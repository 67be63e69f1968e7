#include "prescurv/expr.hpp"

#include "prescurv/types.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace prescurv {

namespace {

struct Node {
  enum class Op { Num, Var, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp } op = Op::Num;
  double value = 0.0;
  std::unique_ptr<Node> lhs, rhs;

  double eval(double t) const {
    switch (op) {
      case Op::Num: return value;
      case Op::Var: return t;
      case Op::Add: return lhs->eval(t) + rhs->eval(t);
      case Op::Sub: return lhs->eval(t) - rhs->eval(t);
      case Op::Mul: return lhs->eval(t) * rhs->eval(t);
      case Op::Div: return lhs->eval(t) / rhs->eval(t);
      case Op::Neg: return -lhs->eval(t);
      case Op::Sin: return std::sin(lhs->eval(t));
      case Op::Cos: return std::cos(lhs->eval(t));
      case Op::Exp: return std::exp(lhs->eval(t));
    }
    return 0.0;
  }
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make(Node::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::ParseError,
                msg + " at column " + std::to_string(pos_ + 1) + " in '" + s_ + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make(Node::Op::Add, std::move(n), term());
      else if (accept('-')) n = make(Node::Op::Sub, std::move(n), term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Node::Op::Mul, std::move(n), unary());
      else if (accept('/')) n = make(Node::Op::Div, std::move(n), unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::Neg, unary());
    if (accept('+')) return unary();
    return primary();
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      auto n = make(Node::Op::Num);
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "t") return make(Node::Op::Var);
      if (name == "pi") {
        auto n = make(Node::Op::Num);
        n->value = std::numbers::pi;
        return n;
      }
      Node::Op op;
      if (name == "sin") op = Node::Op::Sin;
      else if (name == "cos") op = Node::Op::Cos;
      else if (name == "exp") op = Node::Op::Exp;
      else {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after " + name);
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(op, std::move(arg));
    }
    fail("unexpected character");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<double(double)> compile_expression(const std::string& text) {
  std::shared_ptr<Node> root = Parser(text).parse();
  return [root](double t) { return root->eval(t); };
}

}  // namespace prescurv
