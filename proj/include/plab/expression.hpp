#pragma once

#include <memory>
#include <string>

#include "plab/geometry.hpp"

namespace plab {

/// Closed-form scalar expression over coordinates x1..xn.
///
/// Grammar: numbers, x1..xn, + - * / ^ (right associative), unary minus and
/// parentheses.
class Expression {
 public:
  static Expression parse(const std::string& text);
  static Expression constant(double c);

  double operator()(const Point& x) const;
  const std::string& text() const { return text_; }
  /// Largest coordinate index referenced (0 if none).
  int max_coordinate() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace plab
