#pragma once

#include "mfldp/model.hpp"

#include <optional>
#include <vector>

namespace mfldp::detail {

// One step u_m -> u_{m+1} of an accessibility chain: u_m is a source of the
// transition, u_{m+1} one of its targets, and every source was visited earlier.
struct ChainLink {
  std::size_t transition;
  int from;
  int to;
};

// Shortest accessibility chain from s to w over the positive transitions.
std::optional<std::vector<ChainLink>> find_chain(const ModelSpec& spec, const std::vector<bool>& positive, int s,
                                                 int w);

}  // namespace mfldp::detail
