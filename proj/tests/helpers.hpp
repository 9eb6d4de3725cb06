#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "loopbound/parser.hpp"

namespace loopbound::testing {

inline std::string testDir() {
  const char* d = std::getenv("LOOPBOUND_TEST_DIR");
  return d ? d : "tests";
}

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline IntegerProgram loadProgram(const std::string& name) {
  return parseProgram(readFile(testDir() + "/programs/" + name));
}

// Deterministic xorshift generator for property tests.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  // inclusive range
  long long range(long long lo, long long hi) { return lo + (long long)(next() % (uint64_t)(hi - lo + 1)); }
  bool chance(int percent) { return range(0, 99) < percent; }
};

// Small random integer program: 2..3 program variables, 2..4 locations,
// affine guards and updates, occasionally one guard-bounded temporary.
inline IntegerProgram randomProgram(Rng& rng, int idx) {
  int nv = (int)rng.range(2, 3);
  std::vector<VarId> pv;
  const char* names[3] = {"x", "y", "z"};
  for (int i = 0; i < nv; ++i) pv.push_back(symbols::var(names[i]));
  int nloc = (int)rng.range(2, 4);
  std::vector<LocId> locs;
  for (int i = 0; i < nloc; ++i)
    locs.push_back(symbols::loc("rp" + std::to_string(idx) + "_l" + std::to_string(i)));

  std::vector<Transition> ts;
  auto identityUpdate = [&] {
    std::map<VarId, Polynomial> up;
    for (VarId v : pv) up[v] = Polynomial::variable(v);
    return up;
  };

  Transition init;
  init.id = 0;
  init.src = locs[0];
  init.tgt = locs[1];
  init.update = identityUpdate();
  ts.push_back(init);

  int nt = (int)rng.range(2, 5);
  VarId tv = symbols::var("u");
  for (int i = 0; i < nt; ++i) {
    Transition t;
    t.id = (int)ts.size();
    t.src = locs[(size_t)rng.range(1, nloc - 1)];
    t.tgt = locs[(size_t)rng.range(1, nloc - 1)];
    int atoms = (int)rng.range(0, 2);
    for (int a = 0; a < atoms; ++a) {
      Polynomial lhs = Polynomial::variable(pv[(size_t)rng.range(0, nv - 1)]);
      if (rng.chance(30)) lhs = lhs - Polynomial::variable(pv[(size_t)rng.range(0, nv - 1)]);
      Polynomial rhs = Polynomial::constant(rng.range(-3, 3));
      switch (rng.range(0, 3)) {
        case 0: t.guard.addGt(lhs, rhs); break;
        case 1: t.guard.addGeq(lhs, rhs); break;
        case 2: t.guard.addLt(lhs, rhs); break;
        default: t.guard.addLeq(lhs, rhs); break;
      }
    }
    bool useTemp = rng.chance(15);
    if (useTemp) {
      t.guard.addGeq(Polynomial::variable(tv), Polynomial::constant(0));
      t.guard.addLeq(Polynomial::variable(tv), Polynomial::constant(3));
    }
    t.update = identityUpdate();
    for (VarId v : pv) {
      if (rng.chance(55)) continue;  // identity
      switch (rng.range(0, 3)) {
        case 0: t.update[v] = Polynomial::variable(v) + Polynomial::constant(rng.range(-2, 2)); break;
        case 1: t.update[v] = Polynomial::variable(pv[(size_t)rng.range(0, nv - 1)]) + Polynomial::constant(rng.range(-1, 1)); break;
        case 2: t.update[v] = Polynomial::constant(rng.range(-3, 3)); break;
        default:
          t.update[v] = useTemp ? Polynomial::variable(tv)
                                : Polynomial::variable(v) - Polynomial::constant(1);
          break;
      }
    }
    ts.push_back(std::move(t));
  }
  // Isolated locations cannot be expressed in the text format; keep only the
  // mentioned ones.
  std::set<LocId> used{locs[0]};
  for (auto& t : ts) {
    used.insert(t.src);
    used.insert(t.tgt);
  }
  return IntegerProgram(pv, {used.begin(), used.end()}, locs[0], std::move(ts));
}

inline bool sameProgram(const IntegerProgram& a, const IntegerProgram& b) {
  if (a.programVars() != b.programVars() || a.initial() != b.initial()) return false;
  if (a.transitions().size() != b.transitions().size()) return false;
  for (size_t i = 0; i < a.transitions().size(); ++i) {
    const Transition &ta = a.transitions()[i], &tb = b.transitions()[i];
    if (ta.src != tb.src || ta.tgt != tb.tgt) return false;
    if (!(ta.guard == tb.guard)) return false;
    if (ta.update != tb.update) return false;
  }
  std::set<LocId> la(a.locations().begin(), a.locations().end());
  std::set<LocId> lb(b.locations().begin(), b.locations().end());
  return la == lb;
}

}  // namespace loopbound::testing
