#pragma once

#include <map>

#include "loopbound/program.hpp"

namespace loopbound {

// Forward interval analysis over program variables with widening after three
// unstable joins per location. Returns, per reachable location, a conjunction
// of interval atoms; unreachable locations are absent.
std::map<LocId, Constraint> intervalInvariants(const IntegerProgram& p);

}  // namespace loopbound
