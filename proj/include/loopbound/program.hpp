#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "loopbound/constraint.hpp"

namespace loopbound {

struct Transition {
  int id = -1;
  LocId src = -1;
  LocId tgt = -1;
  Constraint guard;
  // Total on program variables; identity entries are stored explicitly.
  std::map<VarId, Polynomial> update;

  std::string name() const { return "t" + std::to_string(id); }
  // Variables mentioned anywhere in guard or update right-hand sides.
  std::set<VarId> mentionedVars() const;
};

class IntegerProgram {
 public:
  IntegerProgram() = default;
  IntegerProgram(std::vector<VarId> pvars, std::vector<LocId> locations, LocId initial,
                 std::vector<Transition> transitions);

  const std::vector<VarId>& programVars() const { return pvars_; }
  const std::vector<LocId>& locations() const { return locations_; }
  LocId initial() const { return initial_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& transition(int id) const;
  bool hasTransition(int id) const;

  bool isProgramVar(VarId v) const;
  // Temporary variables: mentioned in some transition but not program vars.
  std::set<VarId> temporaries() const;
  std::set<VarId> temporariesOf(const Transition& t) const;

  std::vector<int> outgoing(LocId l) const;
  std::vector<int> incoming(LocId l) const;

  int maxTransitionId() const;

  std::string toString() const;  // ITS dialect text

 private:
  std::vector<VarId> pvars_;
  std::vector<LocId> locations_;
  LocId initial_ = -1;
  std::vector<Transition> transitions_;
  std::map<int, size_t> byId_;
};

struct EntryInfo {
  std::vector<LocId> entryLocations;
  std::vector<int> entryTransitions;
};

// Non-trivial SCCs of the location graph as transition sets (both endpoints in
// the SCC), in topological order of the condensation: an SCC appears after all
// SCCs that can reach it. Initial transitions never appear.
std::vector<std::vector<int>> sccsTopological(const IntegerProgram& p);

// Def. of entry transitions/locations for a nonempty sub-program.
EntryInfo entryTransitions(const IntegerProgram& p, const std::set<int>& sub);

// Ids of transitions lying on some cycle of the location graph.
std::set<int> cyclicTransitions(const IntegerProgram& p);

// Locations reachable from the initial location (edges taken regardless of
// guards).
std::set<LocId> reachableLocations(const IntegerProgram& p);

}  // namespace loopbound
