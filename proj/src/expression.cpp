#include "plab/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace plab {

struct Expression::Node {
  enum class Kind { Number, Coord, Neg, Add, Sub, Mul, Div, Pow } kind;
  double value = 0.0;
  int coord = 0;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    auto e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw InvalidInput("expression '" + s_ + "': " + why + " at offset " +
                       std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    auto e = product();
    for (;;) {
      if (eat('+')) e = make(Kind::Add, e, product());
      else if (eat('-')) e = make(Kind::Sub, e, product());
      else return e;
    }
  }
  NodePtr product() {
    auto e = unary();
    for (;;) {
      if (eat('*')) e = make(Kind::Mul, e, unary());
      else if (eat('/')) e = make(Kind::Div, e, unary());
      else return e;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Kind::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto base = atom();
    if (eat('^')) return make(Kind::Pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (eat('(')) {
      auto e = sum();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (pos_ < s_.size() && s_[pos_] == 'x') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("coordinate needs an index, e.g. x1");
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Coord;
      n->coord = std::stoi(s_.substr(start, pos_ - start));
      if (n->coord < 1) fail("coordinates are numbered from 1");
      return n;
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number, coordinate or '('");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Number;
    n->value = v;
    return n;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval(const Expression::Node& n, const Point& x) {
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Coord:
      if (n.coord > x.size()) throw InvalidInput("expression references a missing coordinate");
      return x[n.coord - 1];
    case Kind::Neg: return -eval(*n.lhs, x);
    case Kind::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
    case Kind::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
    case Kind::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
    case Kind::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
    case Kind::Pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
  }
  return 0.0;
}

int max_coord(const Expression::Node& n) {
  int m = n.kind == Kind::Coord ? n.coord : 0;
  if (n.lhs) m = std::max(m, max_coord(*n.lhs));
  if (n.rhs) m = std::max(m, max_coord(*n.rhs));
  return m;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

Expression Expression::constant(double c) {
  Expression e;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = c;
  e.root_ = n;
  e.text_ = std::to_string(c);
  return e;
}

double Expression::operator()(const Point& x) const { return eval(*root_, x); }

int Expression::max_coordinate() const { return max_coord(*root_); }

}  // namespace plab
