#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mfldp {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, Arity };
  ParseError(Kind kind, std::size_t offset, const std::string& what);
  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

struct ParseContext {
  // When set, variables are restricted to x1..x<dim>.
  std::optional<int> dim;
  // Named constants usable inside the expression.
  std::map<std::string, double, std::less<>> params;
};

// Rate expression over x1..xd: literals, + - * /, min, max, exp, log, abs and
// cond(a <op> b, then, else). Immutable; copies share the node pool.
//
// Evaluation never traps: division by zero and log of nonpositive values yield
// the IEEE non-finite results, which callers treat as invalid.
class RateExpr {
 public:
  enum class Op : std::uint8_t { Num, Var, Param, Neg, Add, Sub, Mul, Div, Min, Max, Exp, Log, Abs, Cond };
  enum class Cmp : std::uint8_t { Lt, Le, Gt, Ge, Eq, Ne };

  static RateExpr parse(std::string_view source, const ParseContext& ctx = {});

  double eval(std::span<const double> x) const { return eval_node(root_, x); }

  // Canonical text; parse(to_string()) reproduces the same tree.
  std::string to_string() const;
  // Largest 1-based variable index referenced (0 if none).
  int max_variable() const;

  friend bool operator==(const RateExpr& a, const RateExpr& b) { return a.equal_node(a.root_, b, b.root_); }

 private:
  struct Node {
    Op op;
    Cmp cmp = Cmp::Lt;
    int child[4] = {-1, -1, -1, -1};
    double value = 0.0;
    int index = 0;
  };
  struct Pool {
    std::vector<Node> nodes;
    std::vector<std::string> param_names;
  };
  class Parser;

  RateExpr(std::shared_ptr<const Pool> pool, int root) : pool_(std::move(pool)), root_(root) {}

  double eval_node(int id, std::span<const double> x) const;
  void print_node(int id, std::string& out) const;
  bool equal_node(int id, const RateExpr& other, int oid) const;

  std::shared_ptr<const Pool> pool_;
  int root_ = -1;
};

}  // namespace mfldp
