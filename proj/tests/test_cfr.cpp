#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>

#include "helpers.hpp"
#include "loopbound/cfr.hpp"
#include "loopbound/simulate.hpp"
#include "loopbound/solver.hpp"

using namespace loopbound;
using namespace loopbound::testing;

namespace {

Polynomial pv(const char* n) { return Polynomial::variable(symbols::var(n)); }

// x < 0 as the atom x+1 <= 0
Polynomial atomXneg() { return pv("x") + Polynomial::constant(1); }
// y >= z as the atom z-y <= 0
Polynomial atomYgeZ() { return pv("z") - pv("y"); }

Layers example24Layers() {
  Layers layers;
  Layer atoms{atomXneg(), atomYgeZ()};
  layers[symbols::loc("l1")] = atoms;
  layers[symbols::loc("l2")] = atoms;
  return layers;
}

Constraint constraintOf(std::initializer_list<Polynomial> atoms) {
  Constraint c;
  for (auto& a : atoms) c.addLeqZero(a);
  return c;
}

// All configurations reachable within `maxLen` steps, with temporaries in
// [lo, hi].
std::map<Configuration, bool> reachableConfigs(const IntegerProgram& p, const SimState& s0, long long maxLen,
                                               long long lo, long long hi) {
  std::map<Configuration, bool> seen;
  std::deque<std::pair<Configuration, long long>> work;
  Configuration init{p.initial(), s0};
  seen[init] = true;
  work.push_back({init, 0});
  while (!work.empty()) {
    auto [conf, depth] = work.front();
    work.pop_front();
    if (depth >= maxLen) continue;
    for (int tid : p.outgoing(conf.loc)) {
      const Transition& t = p.transition(tid);
      std::set<VarId> tvs = p.temporariesOf(t);
      std::vector<VarId> tvList(tvs.begin(), tvs.end());
      std::vector<long long> idx(tvList.size(), 0);
      long long width = hi - lo + 1;
      while (true) {
        std::map<VarId, long long> choice;
        for (size_t i = 0; i < tvList.size(); ++i) choice[tvList[i]] = lo + idx[i];
        auto succ = step(p, conf, t, choice);
        if (succ && !seen.count(*succ)) {
          seen[*succ] = true;
          work.push_back({*succ, depth + 1});
        }
        size_t k = 0;
        while (k < tvList.size() && ++idx[k] >= width) idx[k++] = 0;
        if (k == tvList.size()) break;
      }
    }
  }
  return seen;
}

}  // namespace

TEST_CASE("harvested abstraction layers contain the guard atoms of the worked example") {
  IntegerProgram fig4 = loadProgram("fig4.koat");
  auto layers = buildAbstractionLayer(fig4, {1, 2, 3});
  for (LocId l : {symbols::loc("l1"), symbols::loc("l2")}) {
    CAPTURE(symbols::locName(l));
    REQUIRE(layers.count(l));
    auto& atoms = layers.at(l);
    CHECK(std::find(atoms.begin(), atoms.end(), normalizeAtom(atomXneg())) != atoms.end());
    CHECK(std::find(atoms.begin(), atoms.end(), normalizeAtom(atomYgeZ())) != atoms.end());
  }
}

TEST_CASE("guard-free self-loops get empty layers and true labels") {
  auto p = parseProgram(
      "(GOAL COMPLEXITY)\n(STARTTERM (FUNCTIONSYMBOLS l0))\n(VAR x)\n"
      "(RULES l0(x) -> l1(x)\n l1(x) -> l1(x))\n");
  auto layers = buildAbstractionLayer(p, {1});
  CHECK(layers[symbols::loc("l1")].empty());
  Refinement ref = partialEvaluateScc(p, {1});
  REQUIRE(ref.labels.size() == 1);
  CHECK(ref.labels.begin()->second.label.isTrue());
  // output isomorphic to the input modulo the <l,true> renaming
  CHECK(ref.program.transitions().size() == p.transitions().size());
  CHECK(sccsTopological(ref.program).size() == 1);
}

TEST_CASE("abstraction keeps exactly the entailed layer atoms") {
  Layer alpha{atomXneg(), atomYgeZ()};

  // x<0 && y < z-x abstracts to x<0
  Constraint phi1 = constraintOf({atomXneg(), pv("x") + pv("y") - pv("z") + Polynomial::constant(1)});
  Constraint a1 = abstractWith(alpha, phi1);
  CHECK(a1 == constraintOf({atomXneg()}));

  // nothing is entailed by true
  CHECK(abstractWith(alpha, Constraint::top()).isTrue());

  // x<1 && y>=z abstracts to y>=z
  Constraint phi2 = constraintOf({pv("x"), atomYgeZ()});
  CHECK(abstractWith(alpha, phi2) == constraintOf({atomYgeZ()}));
}

TEST_CASE("strongest postconditions of the worked example") {
  IntegerProgram fig4 = loadProgram("fig4.koat");
  // t3: guard y >= z, update x -> x+1; from x<0 we get x<1 && y>=z
  Constraint phi = constraintOf({atomXneg()});
  Constraint post3 = propagate(phi, fig4.transition(3), fig4.programVars());
  CHECK(post3 == constraintOf({pv("x"), atomYgeZ()}));

  // identity update conjoins guard and precondition
  Constraint post1 = propagate(phi, fig4.transition(1), fig4.programVars());
  CHECK(post1 == constraintOf({atomXneg()}));

  // t2: guard y < z, update y -> y-x; from x<0 we get x<0 && y < z-x
  Constraint post2 = propagate(phi, fig4.transition(2), fig4.programVars());
  CHECK(post2 == constraintOf({atomXneg(), pv("x") + pv("y") - pv("z") + Polynomial::constant(1)}));
}

TEST_CASE("whole-SCC partial evaluation reproduces the refined program shape") {
  IntegerProgram fig4 = loadProgram("fig4.koat");
  Layers layers = example24Layers();
  Refinement ref = partialEvaluateScc(fig4, {1, 2, 3}, &layers);

  CHECK(ref.program.locations().size() == 7);   // l0, l3, and five labeled pairs
  CHECK(ref.program.transitions().size() == 9);
  CHECK(ref.labels.size() == 5);
  for (auto& [t, reason] : ref.removed) CHECK(reason == "unsat-guard");
  CHECK(ref.removed.size() == 2);

  auto sccs = sccsTopological(ref.program);
  REQUIRE(sccs.size() == 2);
  // the first SCC carries the x<0 labels, the second the y>=z labels
  auto labelsOf = [&](const std::vector<int>& scc) {
    std::set<std::string> out;
    for (int tid : scc) {
      for (LocId l : {ref.program.transition(tid).src, ref.program.transition(tid).tgt}) {
        auto it = ref.labels.find(l);
        REQUIRE(it != ref.labels.end());
        out.insert(it->second.label.toString());
      }
    }
    return out;
  };
  Constraint xneg = constraintOf({atomXneg()});
  Constraint ygez = constraintOf({atomYgeZ()});
  Constraint both = constraintOf({atomXneg(), atomYgeZ()});
  auto first = labelsOf(sccs[0]), second = labelsOf(sccs[1]);
  CHECK(first == std::set<std::string>{xneg.toString()});
  CHECK(second == std::set<std::string>{ygez.toString(), both.toString()});

  // termination bound on the blow-up: |L'| <= |L \ sccLocs| + sum_l 2^|alpha_l|
  CHECK(ref.program.locations().size() <= 2 + 4 + 4);
}

TEST_CASE("harvested layers also split the SCC in two ordered parts") {
  IntegerProgram fig4 = loadProgram("fig4.koat");
  Refinement ref = partialEvaluateScc(fig4, {1, 2, 3});
  auto sccs = sccsTopological(ref.program);
  REQUIRE(sccs.size() == 2);
  for (auto& [t, reason] : ref.removed) CHECK(reason == "unsat-guard");
}

TEST_CASE("sub-SCC refinement of the two-component program isolates the self-loop") {
  IntegerProgram fig8 = loadProgram("fig8.koat");
  Refinement ref = partialEvaluateSubScc(fig8, {1});
  CHECK(ref.pieces == 1);

  // there is a labeled location whose self-loop guard entails 2 <= x <= 3
  bool found = false;
  for (auto& t : ref.program.transitions()) {
    if (t.src != t.tgt) continue;
    Polynomial xLow = Polynomial::constant(2) - pv("x");  // 2 <= x
    Polynomial xHigh = pv("x") - Polynomial::constant(3);  // x <= 3
    if (entailsInt(t.guard, xLow) == Entailment::Yes && entailsInt(t.guard, xHigh) == Entailment::Yes)
      found = true;
  }
  CHECK(found);
  // t2 and t3 of the original cycle survive by id (entry side) or as copies
  CHECK(ref.program.hasTransition(3));
}

TEST_CASE("whole-SCC and sub-SCC refinement of the full SCC are trace-equivalent") {
  IntegerProgram fig4 = loadProgram("fig4.koat");
  Refinement whole = partialEvaluateScc(fig4, {1, 2, 3});
  Refinement sub = partialEvaluateSubScc(fig4, {1, 2, 3});
  Rng rng(55);
  for (int trial = 0; trial < 12; ++trial) {
    SimState s0;
    for (size_t i = 0; i < fig4.programVars().size(); ++i) s0.push_back(rng.range(-3, 3));
    auto a = exploreTraces(whole.program, s0, 9, -1, 1, &whole.originOf);
    auto b = exploreTraces(sub.program, s0, 9, -1, 1, &sub.originOf);
    CHECK(a == b);
  }
}

TEST_CASE("two transitions in disjoint cycles refine independently") {
  auto p = parseProgram(
      "(GOAL COMPLEXITY)\n(STARTTERM (FUNCTIONSYMBOLS l0))\n(VAR x)\n"
      "(RULES\n"
      "  l0(x) -> l1(x)\n"
      "  l1(x) -> l2(x-1) :|: x > 0\n"
      "  l2(x) -> l1(x)\n"
      "  l2(x) -> l3(x)\n"
      "  l3(x) -> l4(x-1) :|: x > 0\n"
      "  l4(x) -> l3(x)\n"
      "  l4(x) -> l1(x)\n)");
  // one SCC spanning both cycles; refine the two cycle-opening transitions
  Refinement ref = partialEvaluateSubScc(p, {1, 4});
  CHECK(ref.pieces == 2);
}

TEST_CASE("sub-SCC refinement rejects transition sets outside one SCC") {
  IntegerProgram fig8 = loadProgram("fig8.koat");
  CHECK_THROWS_AS(partialEvaluateSubScc(fig8, {0}), std::invalid_argument);
  CHECK_THROWS_AS(partialEvaluateSubScc(fig8, {}), std::invalid_argument);
}

TEST_CASE("refined programs are trace-equivalent to their originals") {
  struct Case {
    const char* file;
    bool wholeScc;
  };
  for (auto& [file, wholeScc] : {Case{"fig4.koat", true}, Case{"fig4.koat", false}, Case{"fig8.koat", false},
                                 Case{"fig3.koat", true}, Case{"fig1.koat", false}}) {
    CAPTURE(file);
    CAPTURE(wholeScc);
    IntegerProgram p = loadProgram(file);
    auto sccs = sccsTopological(p);
    REQUIRE(!sccs.empty());
    std::set<int> scc(sccs[0].begin(), sccs[0].end());
    Refinement ref = wholeScc ? partialEvaluateScc(p, scc) : partialEvaluateSubScc(p, scc);
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
      SimState s0;
      for (size_t i = 0; i < p.programVars().size(); ++i) s0.push_back(rng.range(-3, 3));
      auto orig = exploreTraces(p, s0, 8, -1, 1);
      auto refd = exploreTraces(ref.program, s0, 8, -1, 1, &ref.originOf);
      CHECK(orig == refd);
    }
  }
}

TEST_CASE("every refined guard entails the guard of its origin") {
  for (const char* file : {"fig4.koat", "fig8.koat", "fig3.koat"}) {
    CAPTURE(file);
    IntegerProgram p = loadProgram(file);
    auto sccs = sccsTopological(p);
    std::set<int> scc(sccs[0].begin(), sccs[0].end());
    Refinement ref = partialEvaluateScc(p, scc);
    for (auto& t : ref.program.transitions()) {
      auto it = ref.originOf.find(t.id);
      if (it == ref.originOf.end()) continue;
      if (!p.hasTransition(it->second)) continue;
      const Transition& orig = p.transition(it->second);
      for (auto& atom : orig.guard.atoms()) {
        CAPTURE(t.id);
        CHECK(entailsInt(t.guard, atom) == Entailment::Yes);
      }
    }
  }
}

TEST_CASE("reached labeled locations satisfy their labels") {
  IntegerProgram fig4 = loadProgram("fig4.koat");
  Refinement ref = partialEvaluateScc(fig4, {1, 2, 3});
  Rng rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    SimState s0;
    for (size_t i = 0; i < fig4.programVars().size(); ++i) s0.push_back(rng.range(-3, 3));
    auto confs = reachableConfigs(ref.program, s0, 8, -1, 1);
    for (auto& [conf, seen] : confs) {
      auto it = ref.labels.find(conf.loc);
      if (it == ref.labels.end()) continue;
      std::map<VarId, Int> st;
      const auto& pvars = ref.program.programVars();
      for (size_t i = 0; i < pvars.size(); ++i) st[pvars[i]] = Int(conf.state[i]);
      CHECK(it->second.label.satisfiedBy(st));
    }
  }
}
