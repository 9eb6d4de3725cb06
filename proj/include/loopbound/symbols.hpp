#pragma once

#include <string>
#include <vector>

namespace loopbound {

using VarId = int;
using LocId = int;

// Process-wide interning of variable and location names. Interned ids are
// stable for the lifetime of the process; programs produced by refinement
// share the pools with their originals.
namespace symbols {

VarId var(const std::string& name);
const std::string& varName(VarId v);
bool knownVar(const std::string& name);

LocId loc(const std::string& name);
// Returns a location with a name not used so far, derived from `base`.
LocId freshLoc(const std::string& base);
const std::string& locName(LocId l);

}  // namespace symbols

}  // namespace loopbound
