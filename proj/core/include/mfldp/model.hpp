#pragma once

#include "mfldp/expr.hpp"
#include "mfldp/simplex.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfldp {

// A k-tuple transition (i_1..i_k) -> (j_1..j_k) with limit rate Gamma^k_{ij}(x).
// States are 0-based here; files and the CLI use 1-based labels.
// At population n the rate is n^(1-k) * Gamma^k_{ij}(x).
struct TupleTransition {
  std::vector<int> from;
  std::vector<int> to;
  RateExpr rate;

  int k() const { return static_cast<int>(from.size()); }
  IVec direction(int d) const;
};

struct Finding {
  std::string check;
  std::string subject;
  std::string detail;
  std::optional<Vec> point;
};

using ParamMap = std::map<std::string, double, std::less<>>;

class ModelSpec {
 public:
  // When `symmetrize` is set, each listed transition stands for its whole
  // permutation class; listing two members of one class is an error.
  ModelSpec(int d, std::vector<TupleTransition> transitions, bool symmetrize, ParamMap params = {},
            std::string name = {});

  int d() const { return d_; }
  int K() const { return K_; }
  bool symmetrize() const { return symmetrize_; }
  const std::vector<TupleTransition>& transitions() const { return transitions_; }
  const ParamMap& params() const { return params_; }
  const std::string& name() const { return name_; }

  // "(1,2)->(3,4)" with 1-based labels.
  std::string transition_label(std::size_t t) const;

 private:
  int d_;
  int K_ = 0;
  std::vector<TupleTransition> transitions_;
  bool symmetrize_;
  ParamMap params_;
  std::string name_;
};

// Helper taking 1-based labels and parsing the rate with the given params.
TupleTransition make_transition(int d, std::vector<int> from_labels, std::vector<int> to_labels,
                                std::string_view rate, const ParamMap& params = {});

// Finite and nonnegative (>= -1e-12) rates on the validation grid.
std::vector<Finding> validate_model(const ModelSpec& spec);

// curie-weiss {beta}, arn {gamma, C}, eg3 {c1..c6}.
ModelSpec builtin_model(std::string_view name, const ParamMap& params = {});
std::vector<std::string> builtin_names();

}  // namespace mfldp
