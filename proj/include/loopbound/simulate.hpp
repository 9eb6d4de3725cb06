#pragma once

#include <map>
#include <optional>
#include <vector>

#include "loopbound/program.hpp"

namespace loopbound {

// Program-variable valuation in the order of IntegerProgram::programVars().
using SimState = std::vector<long long>;

struct Configuration {
  LocId loc;
  SimState state;
  bool operator==(const Configuration& o) const { return loc == o.loc && state == o.state; }
  bool operator<(const Configuration& o) const {
    if (loc != o.loc) return loc < o.loc;
    return state < o.state;
  }
};

struct RunSummary {
  long long length = 0;                              // sup over runs
  std::map<int, long long> counts;                   // per-transition sup over runs
  std::map<std::pair<int, VarId>, long long> maxAbs;  // max |v| right after t
  bool truncated = false;

  long long count(int t) const {
    auto it = counts.find(t);
    return it == counts.end() ? 0 : it->second;
  }
};

// Single evaluation step (Def. of program evaluation): Some(c') iff the source
// matches, the guard holds under state+tvChoice, and c' applies the update.
std::optional<Configuration> step(const IntegerProgram& p, const Configuration& c, const Transition& t,
                                  const std::map<VarId, long long>& tvChoice);

// Exhausts all runs from sigma0 with temporary-variable choices restricted to
// [tvLo, tvHi], merging configurations level-wise; per-transition counts are
// exact suprema over the bounded fragment.
RunSummary explore(const IntegerProgram& p, const SimState& sigma0, long long fuelPerRun, long long totalBudget,
                   long long tvLo, long long tvHi);

// Multiset of (length, pv-state) pairs over all bounded runs; transitions are
// identified through originOf (for refined programs) before successor
// deduplication, so refinement-equivalent programs yield equal multisets.
std::map<std::pair<long long, SimState>, unsigned long long> exploreTraces(
    const IntegerProgram& p, const SimState& sigma0, long long maxLen, long long tvLo, long long tvHi,
    const std::map<int, int>* originOf = nullptr);

// Maximum number of applications of transitions from `decreasing` in any run
// that starts at (startLoc, sigma) and uses only transitions from `scope`.
struct SubRunBound {
  long long maxDecreasing = 0;  // valid for run prefixes even when truncated
  bool truncated = false;
};
SubRunBound countSubprogram(const IntegerProgram& p, const std::set<int>& scope, const std::set<int>& decreasing,
                            LocId startLoc, const SimState& sigma, long long fuelPerRun, long long totalBudget,
                            long long tvLo, long long tvHi);

}  // namespace loopbound
