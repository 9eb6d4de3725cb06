#pragma once

#include <optional>
#include <set>

#include "loopbound/program.hpp"

namespace loopbound {

struct LabeledLoc {
  LocId base = -1;
  Constraint label;  // conjunction of abstraction-layer atoms, top = true
};

// Per-location abstraction layer: finite atom sets (p <= 0) over PV.
using Layer = std::vector<Polynomial>;
using Layers = std::map<LocId, Layer>;

// Harvests guard atoms of SCC transitions incident to each location, plus
// one-step strongest-postcondition atoms of incoming SCC transitions,
// projected to program variables.
Layers buildAbstractionLayer(const IntegerProgram& p, const std::set<int>& scc);

// Conjunction of exactly those layer atoms entailed by phi (unknown => omit).
Constraint abstractWith(const Layer& atoms, const Constraint& phi);

// Strongest postcondition of phi /\ guard(t) under the update of t, projected
// to program variables by Fourier-Motzkin elimination (capped; any dropped
// atom only weakens the result).
Constraint propagate(const Constraint& phi, const Transition& t, const std::vector<VarId>& pvars);

struct Refinement {
  IntegerProgram program;
  std::map<LocId, LabeledLoc> labels;
  // Transitions dropped during refinement with the reason ("unsat-guard" or
  // "unreachable").
  std::vector<std::pair<Transition, std::string>> removed;
  std::map<int, int> originOf;  // new transition id -> original transition id
  // Original transitions that were unfolded (the SCC, or the union of the
  // refined pieces); copies of other transitions keep their semantics.
  std::set<int> refinedOrigins;
  int pieces = 1;  // sub-SCC mode: number of refined pieces
};

// Whole-SCC partial evaluation. `layers` overrides the harvested
// abstraction layers (used by tests that pin the layers of worked examples).
Refinement partialEvaluateScc(const IntegerProgram& p, const std::set<int>& scc,
                              const Layers* layers = nullptr);

// On-demand partial evaluation of a minimal cyclic region around each
// transition in tCfr. All of tCfr must lie in one non-trivial SCC.
Refinement partialEvaluateSubScc(const IntegerProgram& p, const std::set<int>& tCfr);

}  // namespace loopbound
