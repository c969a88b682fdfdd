#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace minv {

/// Compiled scalar arithmetic expression over variables x1..xN.
///
/// Grammar (usual precedence, `^` right-associative):
///   expr   := term (('+'|'-') term)*
///   term   := unary (('*'|'/') unary)*
///   unary  := ('+'|'-') unary | power
///   power  := atom ('^' unary)?
///   atom   := number | 'pi' | 'e' | var | func '(' expr (',' expr)* ')' | '(' expr ')'
/// Functions: sin cos tan exp log sqrt abs atan2 pow min max.
class Expression {
 public:
  static Expression parse(std::string_view text, std::size_t num_vars);

  [[nodiscard]] double operator()(std::span<const double> vars) const;
  [[nodiscard]] const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  Expression(std::string text, std::shared_ptr<const std::vector<Node>> nodes, int root)
      : text_(std::move(text)), nodes_(std::move(nodes)), root_(root) {}

  std::string text_;
  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = -1;
};

}  // namespace minv
