#pragma once

#include <map>
#include <string>
#include <vector>

#include "loopbound/bound.hpp"

namespace loopbound {

// RB: transitions to bounds; missing entries read as omega.
struct RuntimeBoundTable {
  std::map<int, Bound> entries;

  Bound get(int t) const {
    auto it = entries.find(t);
    return it == entries.end() ? Bound::omega() : it->second;
  }
  void set(int t, Bound b) { entries[t] = std::move(b); }
};

// SB: (transition, program variable) to bounds; missing entries read as omega.
struct SizeBoundTable {
  std::map<std::pair<int, VarId>, Bound> entries;

  Bound get(int t, VarId v) const {
    auto it = entries.find({t, v});
    return it == entries.end() ? Bound::omega() : it->second;
  }
  void set(int t, VarId v, Bound b) { entries[{t, v}] = std::move(b); }

  std::map<VarId, Bound> rowFor(int t, const std::vector<VarId>& pv) const {
    std::map<VarId, Bound> m;
    for (VarId v : pv) m[v] = get(t, v);
    return m;
  }
};

using ProofLog = std::vector<std::string>;

}  // namespace loopbound
