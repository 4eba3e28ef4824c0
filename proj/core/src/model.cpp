#include "mfldp/model.hpp"

#include "mfldp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mfldp {

IVec TupleTransition::direction(int d) const {
  IVec v = IVec::Zero(d);
  for (int l = 0; l < k(); ++l) {
    --v[from[l]];
    ++v[to[l]];
  }
  return v;
}

ModelSpec::ModelSpec(int d, std::vector<TupleTransition> transitions, bool symmetrize, ParamMap params,
                     std::string name)
    : d_(d), transitions_(std::move(transitions)), symmetrize_(symmetrize), params_(std::move(params)),
      name_(std::move(name)) {
  if (d_ < 2) throw DomainError("model needs d >= 2");
  std::set<std::vector<std::pair<int, int>>> classes;
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const auto& tr = transitions_[t];
    if (tr.from.empty() || tr.from.size() != tr.to.size())
      throw DomainError("transition " + std::to_string(t + 1) + ": from/to must be nonempty and of equal length");
    for (int l = 0; l < tr.k(); ++l) {
      if (tr.from[l] < 0 || tr.from[l] >= d_ || tr.to[l] < 0 || tr.to[l] >= d_)
        throw DomainError("transition " + std::to_string(t + 1) + ": state out of range");
      if (tr.from[l] == tr.to[l])
        throw DomainError("transition " + std::to_string(t + 1) + ": particle " + std::to_string(l + 1) +
                          " does not change state");
    }
    if (tr.rate.max_variable() > d_)
      throw DomainError("transition " + std::to_string(t + 1) + ": rate references x" +
                        std::to_string(tr.rate.max_variable()) + " but d = " + std::to_string(d_));
    K_ = std::max(K_, tr.k());
    if (symmetrize_) {
      std::vector<std::pair<int, int>> pairs;
      for (int l = 0; l < tr.k(); ++l) pairs.emplace_back(tr.from[l], tr.to[l]);
      std::sort(pairs.begin(), pairs.end());
      if (!classes.insert(pairs).second)
        throw DomainError("transition " + std::to_string(t + 1) + " is a permutation of an earlier one");
    }
  }
}

std::string ModelSpec::transition_label(std::size_t t) const {
  const auto& tr = transitions_[t];
  std::ostringstream os;
  auto tuple = [&](const std::vector<int>& s) {
    os << "(";
    for (std::size_t l = 0; l < s.size(); ++l) os << (l ? "," : "") << s[l] + 1;
    os << ")";
  };
  tuple(tr.from);
  os << "->";
  tuple(tr.to);
  return os.str();
}

TupleTransition make_transition(int d, std::vector<int> from_labels, std::vector<int> to_labels,
                                std::string_view rate, const ParamMap& params) {
  ParseContext ctx;
  ctx.dim = d;
  ctx.params = params;
  for (auto& s : from_labels) --s;
  for (auto& s : to_labels) --s;
  return TupleTransition{std::move(from_labels), std::move(to_labels), RateExpr::parse(rate, ctx)};
}

std::vector<Finding> validate_model(const ModelSpec& spec) {
  std::vector<Finding> findings;
  const auto grid = validation_grid(spec.d());
  for (std::size_t t = 0; t < spec.transitions().size(); ++t) {
    const auto& rate = spec.transitions()[t].rate;
    bool nonfinite = false, negative = false;
    for (const auto& x : grid) {
      const double g = rate.eval(x.span());
      if (!std::isfinite(g) && !nonfinite) {
        nonfinite = true;
        findings.push_back({"rate-nonfinite", spec.transition_label(t), "rate is not finite", x.coords()});
      } else if (std::isfinite(g) && g < -1e-12 && !negative) {
        negative = true;
        std::ostringstream os;
        os << "rate is negative (" << g << ")";
        findings.push_back({"rate-negative", spec.transition_label(t), os.str(), x.coords()});
      }
    }
  }
  return findings;
}

namespace {

double take(ParamMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  const double v = it->second;
  p.erase(it);
  return v;
}

void reject_unknown(const ParamMap& rest, std::string_view model) {
  if (!rest.empty())
    throw DomainError("unknown parameter '" + rest.begin()->first + "' for model " + std::string(model));
}

ModelSpec curie_weiss(const ParamMap& params) {
  ParamMap rest = params;
  const double beta = take(rest, "beta", 1.0);
  reject_unknown(rest, "curie-weiss");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("curie-weiss needs beta > 0");
  const ParamMap p{{"beta", beta}};
  // Label 1 is spin -1 and label 2 is spin +1, so x1 = x_{-1} and x2 = x_{+1}.
  std::vector<TupleTransition> tr;
  tr.push_back(make_transition(2, {1}, {2}, "cond(x2 < x1, exp(-2*beta*(x1 - x2)), 1)", p));
  tr.push_back(make_transition(2, {2}, {1}, "cond(x2 > x1, exp(-2*beta*(x2 - x1)), 1)", p));
  return ModelSpec(2, std::move(tr), true, p, "curie-weiss");
}

ModelSpec arn(const ParamMap& params) {
  ParamMap rest = params;
  const double gamma = take(rest, "gamma", 1.0);
  const double cap = take(rest, "C", 2.0);
  reject_unknown(rest, "arn");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("arn needs gamma > 0");
  if (!(cap >= 1.0) || cap != std::floor(cap) || cap > 30) throw DomainError("arn needs integer capacity 1 <= C <= 30");
  const int C = static_cast<int>(cap);
  const int d = C + 1;
  const ParamMap p{{"gamma", gamma}, {"C", cap}};
  // Occupancy i in 0..C is label i+1.
  std::vector<TupleTransition> tr;
  const std::string full = "x" + std::to_string(d);
  for (int i = 0; i < C; ++i) tr.push_back(make_transition(d, {i + 1}, {i + 2}, "gamma", p));
  for (int i = 1; i <= C; ++i) tr.push_back(make_transition(d, {i + 1}, {i}, std::to_string(i), p));
  for (int i = 0; i < C; ++i)
    for (int j = i; j < C; ++j) tr.push_back(make_transition(d, {i + 1, j + 1}, {i + 2, j + 2}, "gamma*" + full, p));
  return ModelSpec(d, std::move(tr), true, p, "arn");
}

ModelSpec eg3(const ParamMap& params) {
  ParamMap rest = params;
  ParamMap p;
  for (int i = 1; i <= 6; ++i) {
    const std::string key = "c" + std::to_string(i);
    const double c = take(rest, key, 1.0);
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("eg3 needs " + key + " >= 0");
    p[key] = c;
  }
  reject_unknown(rest, "eg3");
  std::vector<TupleTransition> tr;
  tr.push_back(make_transition(4, {1}, {2}, "c1", p));
  tr.push_back(make_transition(4, {2}, {1}, "c2", p));
  tr.push_back(make_transition(4, {3}, {4}, "c3", p));
  tr.push_back(make_transition(4, {4}, {3}, "c4", p));
  tr.push_back(make_transition(4, {1, 2}, {3, 4}, "c5", p));
  tr.push_back(make_transition(4, {3, 4}, {1, 2}, "c6", p));
  return ModelSpec(4, std::move(tr), true, p, "eg3");
}

}  // namespace

std::vector<std::string> builtin_names() { return {"curie-weiss", "arn", "eg3"}; }

ModelSpec builtin_model(std::string_view name, const ParamMap& params) {
  if (name == "curie-weiss") return curie_weiss(params);
  if (name == "arn") return arn(params);
  if (name == "eg3") return eg3(params);
  throw DomainError("unknown built-in model '" + std::string(name) + "'");
}

}  // namespace mfldp
