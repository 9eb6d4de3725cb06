#pragma once

#include <optional>
#include <set>

#include "loopbound/program.hpp"
#include "loopbound/tables.hpp"

namespace loopbound {

// Nested multiphase-linear ranking function for a sub-program.
struct Mprf {
  int depth = 1;
  std::set<int> scope;       // T'
  std::set<int> decreasing;  // T'_> (contains the synthesis target)
  // funcs.at(l)[i] is f_{i+1}(l); linear, integer coefficients.
  std::map<LocId, std::vector<Polynomial>> funcs;
  // Depth-1 witness additionally satisfies f1 >= 1 at pre-states of
  // decreasing transitions, enabling the classical bound ceil(f1).
  bool strictD1 = false;

  std::string describe() const;
};

// gamma_1 = 1, gamma_i = 2 + gamma_{i-1}/(i-1) + 1/(i-1)!  (exact)
Rat gamma(int i);
// d! * gamma_d, a natural number.
Int factorialGamma(int d);

struct SynthesisTables {
  const RuntimeBoundTable* rb = nullptr;
  const SizeBoundTable* sb = nullptr;
};

struct SynthesisStats {
  bool solverUnknown = false;  // some query hit a resource limit
};

// Searches for an MPhiRF of the given depth that makes `target` decreasing,
// over a maximal subset of `scc` (greedy removal on unsat). When tables are
// provided, template coefficients of variables with omega entry size bounds
// are pinned to zero at entry locations. Witness coefficients are minimized
// (L1, entry locations first) and independently re-verified.
std::optional<Mprf> findMprf(const IntegerProgram& p, int target, const std::set<int>& scc, int depth,
                             SynthesisTables tables = {}, SynthesisStats* stats = nullptr);

// beta_l per entry location: ceil(f1(l)) for strict depth-1 witnesses, else
// 1 + d!*gamma_d * (ceil(f1(l)) + ... + ceil(fd(l))).
std::map<LocId, Bound> localBound(const Mprf& f, const std::vector<LocId>& entryLocs,
                                  const std::vector<VarId>& pv);

// Checks every Def.-12 condition of the witness by refuting its negation over
// the rationals (independent of the synthesis path).
bool verifyMprf(const IntegerProgram& p, const Mprf& f);

struct LiftOutcome {
  bool improvedAny = false;
  std::map<int, Bound> newBounds;  // proposed bound per decreasing transition
};

// Lifts local bounds to global runtime bounds; an RB entry is replaced only
// if the asymptotic class strictly improves.
LiftOutcome liftBound(const IntegerProgram& p, const Mprf& f, RuntimeBoundTable& rb, const SizeBoundTable& sb,
                      ProofLog* log = nullptr);

}  // namespace loopbound
