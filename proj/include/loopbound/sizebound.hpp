#pragma once

#include <set>

#include "loopbound/program.hpp"
#include "loopbound/tables.hpp"

namespace loopbound {

// Classification of a single update eta_t(v) under the guard of t.
struct LocalSizeBound {
  enum Kind { Identity, Constant, Additive, Poly, Unbounded } kind;
  Int constant;             // Constant: the bound; Additive: |d| after absorption
  std::vector<VarId> vars;  // Additive: summed variables
  Polynomial poly;          // Poly: the update polynomial (program variables only)
};

LocalSizeBound localSizeBound(const IntegerProgram& p, const Transition& t, VarId v);

// Recomputes SB entries for the result variables of the given transitions
// (in topological order of the result-variable graph, reading dependencies
// from the table). An entry is replaced only if its class strictly improves.
// Returns whether anything improved.
bool computeSizeBounds(const IntegerProgram& p, const RuntimeBoundTable& rb, const std::set<int>& transitions,
                       SizeBoundTable& sb);

}  // namespace loopbound
