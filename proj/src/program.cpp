#include "loopbound/program.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace loopbound {

std::set<VarId> Transition::mentionedVars() const {
  std::set<VarId> out = guard.vars();
  for (auto& [v, p] : update) {
    out.insert(v);
    auto vs = p.vars();
    out.insert(vs.begin(), vs.end());
  }
  return out;
}

IntegerProgram::IntegerProgram(std::vector<VarId> pvars, std::vector<LocId> locations, LocId initial,
                               std::vector<Transition> transitions)
    : pvars_(std::move(pvars)),
      locations_(std::move(locations)),
      initial_(initial),
      transitions_(std::move(transitions)) {
  for (size_t i = 0; i < transitions_.size(); ++i) byId_.emplace(transitions_[i].id, i);
}

const Transition& IntegerProgram::transition(int id) const {
  auto it = byId_.find(id);
  if (it == byId_.end()) throw std::out_of_range("no transition with id " + std::to_string(id));
  return transitions_[it->second];
}

bool IntegerProgram::hasTransition(int id) const { return byId_.count(id) > 0; }

bool IntegerProgram::isProgramVar(VarId v) const {
  return std::find(pvars_.begin(), pvars_.end(), v) != pvars_.end();
}

std::set<VarId> IntegerProgram::temporaries() const {
  std::set<VarId> out;
  for (auto& t : transitions_)
    for (VarId v : t.mentionedVars())
      if (!isProgramVar(v)) out.insert(v);
  return out;
}

std::set<VarId> IntegerProgram::temporariesOf(const Transition& t) const {
  std::set<VarId> out;
  for (VarId v : t.mentionedVars())
    if (!isProgramVar(v)) out.insert(v);
  return out;
}

std::vector<int> IntegerProgram::outgoing(LocId l) const {
  std::vector<int> out;
  for (auto& t : transitions_)
    if (t.src == l) out.push_back(t.id);
  return out;
}

std::vector<int> IntegerProgram::incoming(LocId l) const {
  std::vector<int> out;
  for (auto& t : transitions_)
    if (t.tgt == l) out.push_back(t.id);
  return out;
}

int IntegerProgram::maxTransitionId() const {
  int m = -1;
  for (auto& t : transitions_) m = std::max(m, t.id);
  return m;
}

// --- graph queries ---------------------------------------------------------

namespace {

struct Tarjan {
  const IntegerProgram& p;
  std::map<LocId, int> index, low, comp;
  std::vector<LocId> stack;
  std::set<LocId> onStack;
  int counter = 0, comps = 0;

  explicit Tarjan(const IntegerProgram& prog) : p(prog) {}

  void strongconnect(LocId v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    onStack.insert(v);
    for (int tid : p.outgoing(v)) {
      LocId w = p.transition(tid).tgt;
      if (!index.count(w)) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (onStack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      while (true) {
        LocId w = stack.back();
        stack.pop_back();
        onStack.erase(w);
        comp[w] = comps;
        if (w == v) break;
      }
      ++comps;
    }
  }

  void run() {
    for (LocId l : p.locations())
      if (!index.count(l)) strongconnect(l);
  }
};

}  // namespace

std::vector<std::vector<int>> sccsTopological(const IntegerProgram& p) {
  Tarjan t(p);
  t.run();
  // Tarjan emits components in reverse topological order of the condensation
  // (a component is finished only after everything it reaches). Reversing
  // gives: every SCC after all SCCs that can reach it.
  std::vector<std::vector<int>> byComp(static_cast<size_t>(t.comps));
  for (auto& tr : p.transitions())
    if (t.comp[tr.src] == t.comp[tr.tgt]) byComp[static_cast<size_t>(t.comp[tr.src])].push_back(tr.id);
  std::vector<std::vector<int>> out;
  for (auto it = byComp.rbegin(); it != byComp.rend(); ++it) {
    if (it->empty()) continue;  // trivial SCC
    std::sort(it->begin(), it->end());
    out.push_back(std::move(*it));
  }
  return out;
}

EntryInfo entryTransitions(const IntegerProgram& p, const std::set<int>& sub) {
  if (sub.empty()) throw std::invalid_argument("entryTransitions: empty sub-program");
  std::set<LocId> sources;
  for (int id : sub) sources.insert(p.transition(id).src);
  EntryInfo info;
  std::set<int> ets;
  for (LocId l : p.locations()) {
    if (!sources.count(l)) continue;
    std::vector<int> incomingOutside;
    for (int tid : p.incoming(l))
      if (!sub.count(tid)) incomingOutside.push_back(tid);
    if (incomingOutside.empty()) continue;
    info.entryLocations.push_back(l);
    ets.insert(incomingOutside.begin(), incomingOutside.end());
  }
  std::sort(info.entryLocations.begin(), info.entryLocations.end());
  info.entryTransitions.assign(ets.begin(), ets.end());
  return info;
}

std::set<int> cyclicTransitions(const IntegerProgram& p) {
  std::set<int> out;
  for (auto& scc : sccsTopological(p))
    for (int id : scc) out.insert(id);
  return out;
}

std::set<LocId> reachableLocations(const IntegerProgram& p) {
  std::set<LocId> seen{p.initial()};
  std::vector<LocId> work{p.initial()};
  while (!work.empty()) {
    LocId l = work.back();
    work.pop_back();
    for (int tid : p.outgoing(l)) {
      LocId w = p.transition(tid).tgt;
      if (seen.insert(w).second) work.push_back(w);
    }
  }
  return seen;
}

// --- printing --------------------------------------------------------------

namespace {

// Prints one guard atom p <= 0 in relational form "lhs <= rhs" with the
// constant moved to the right-hand side.
std::string atomToIts(const Polynomial& a) {
  Polynomial lhs = a - Polynomial::constant(a.constantTerm());
  Int rhs = -a.constantTerm();
  std::ostringstream os;
  os << (lhs.isZero() ? "0" : lhs.toString()) << " <= " << rhs;
  return os.str();
}

}  // namespace

std::string IntegerProgram::toString() const {
  std::ostringstream os;
  os << "(GOAL COMPLEXITY)\n";
  os << "(STARTTERM (FUNCTIONSYMBOLS " << symbols::locName(initial_) << "))\n";
  os << "(VAR";
  for (VarId v : pvars_) os << " " << symbols::varName(v);
  os << ")\n(RULES\n";
  for (auto& t : transitions_) {
    os << "  " << symbols::locName(t.src) << "(";
    for (size_t i = 0; i < pvars_.size(); ++i) os << (i ? "," : "") << symbols::varName(pvars_[i]);
    os << ") -> " << symbols::locName(t.tgt) << "(";
    for (size_t i = 0; i < pvars_.size(); ++i) {
      if (i) os << ",";
      auto it = t.update.find(pvars_[i]);
      os << (it == t.update.end() ? symbols::varName(pvars_[i]) : it->second.toString());
    }
    os << ")";
    if (!t.guard.isTrue()) {
      os << " :|: ";
      const auto& atoms = t.guard.atoms();
      for (size_t i = 0; i < atoms.size(); ++i) {
        if (i) os << " && ";
        os << atomToIts(atoms[i]);
      }
    }
    os << "\n";
  }
  os << ")\n";
  return os.str();
}

}  // namespace loopbound
