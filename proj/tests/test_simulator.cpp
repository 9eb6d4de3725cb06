#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "loopbound/simulate.hpp"

using namespace loopbound;
using namespace loopbound::testing;

TEST_CASE("single evaluation steps on the running example") {
  IntegerProgram fig3 = loadProgram("fig3.koat");
  // states ordered (x, y, z)
  Configuration c1{symbols::loc("l1"), {0, 0, 2}};
  auto c2 = step(fig3, c1, fig3.transition(1), {});
  REQUIRE(c2.has_value());
  CHECK(c2->loc == symbols::loc("l2"));
  CHECK(c2->state == SimState{1, 1, 2});

  auto c3 = step(fig3, *c2, fig3.transition(2), {});
  REQUIRE(c3.has_value());
  CHECK(c3->loc == symbols::loc("l2"));
  CHECK(c3->state == SimState{2, 0, 2});

  // guard z > 0 with z = 0 blocks
  Configuration z0{symbols::loc("l1"), {0, 0, 0}};
  CHECK(!step(fig3, z0, fig3.transition(1), {}).has_value());
}

TEST_CASE("exhaustive exploration of the running example") {
  IntegerProgram fig3 = loadProgram("fig3.koat");
  RunSummary s = explore(fig3, {0, 0, 2}, 10000, 1000000, -4, 4);
  CHECK(!s.truncated);
  CHECK(s.length >= 4);                   // the worked 4-step evaluation exists
  CHECK(s.length <= 32 * 4 + 11 * 2 + 1);  // within the final bound at z=2
}

TEST_CASE("unsatisfiable initial guards yield empty runs") {
  auto p = parseProgram(
      "(GOAL COMPLEXITY)\n(STARTTERM (FUNCTIONSYMBOLS l0))\n(VAR x)\n"
      "(RULES l0(x) -> l1(x) :|: x > 0 && x < 0)\n");
  RunSummary s = explore(p, {3}, 100, 10000, -2, 2);
  CHECK(s.length == 0);
  CHECK(!s.truncated);
}

TEST_CASE("standalone two-phase loop from x=3, y=0") {
  IntegerProgram fig1 = loadProgram("fig1.koat");
  RunSummary s = explore(fig1, {3, 0}, 10000, 1000000, -4, 4);
  CHECK(!s.truncated);
  // deterministic program: t0 then exactly 3 loop steps
  CHECK(s.length == 4);
  CHECK(s.count(1) == 3);
  // within the local bound 1 + 8*(y+1+x) = 33 started after the entry
  CHECK(s.count(1) <= 33);
}

TEST_CASE("temporary variables enumerate adversarial choices") {
  IntegerProgram fig8 = loadProgram("fig8.koat");
  // x is set to u on entry; worst case 1 + 3 + 2y steps
  RunSummary s = explore(fig8, {0, 2}, 10000, 2000000, -4, 4);
  CHECK(!s.truncated);
  CHECK(s.length == 1 + 3 + 2 * 2);
  CHECK(s.count(1) == 3);   // self-loop runs at most 3 times (x in 1..3)
  CHECK(s.count(3) == 2);   // y decrements
  CHECK(s.maxAbs.at({1, symbols::var("x")}) <= 4);
}

TEST_CASE("larger boxes and more fuel never shrink the summary") {
  Rng rng(31);
  for (int i = 0; i < 12; ++i) {
    IntegerProgram p = randomProgram(rng, 4000 + i);
    SimState s0;
    for (size_t k = 0; k < p.programVars().size(); ++k) s0.push_back(rng.range(-2, 2));
    RunSummary small = explore(p, s0, 12, 30000, -1, 1);
    RunSummary big = explore(p, s0, 24, 120000, -2, 2);
    if (small.truncated || big.truncated) continue;
    CHECK(small.length <= big.length);
    for (auto& [t, c] : small.counts) CHECK(c <= big.count(t));
  }
}

TEST_CASE("deterministic programs follow exactly one run") {
  // no temporaries, disjoint guards
  auto p = parseProgram(
      "(GOAL COMPLEXITY)\n(STARTTERM (FUNCTIONSYMBOLS l0))\n(VAR x)\n"
      "(RULES\n"
      "  l0(x) -> l1(x)\n"
      "  l1(x) -> l1(x-1) :|: x > 0\n"
      "  l1(x) -> l2(x) :|: x <= 0\n)");
  auto traces = exploreTraces(p, {3}, 10, -1, 1);
  // exactly one run of each length 0..5 (t0, 3 decrements, exit)
  for (long long k = 0; k <= 5; ++k) {
    long long found = 0;
    for (auto& [key, count] : traces)
      if (key.first == k) found += (long long)count;
    CHECK(found == 1);
  }
}

TEST_CASE("trace multisets record lengths and final states") {
  IntegerProgram fig3 = loadProgram("fig3.koat");
  auto traces = exploreTraces(fig3, {0, 0, 1}, 20, -2, 2);
  CHECK(traces.count({0, {0, 0, 1}}) == 1);
  // after t0 the state is unchanged
  CHECK(traces.count({1, {0, 0, 1}}) == 1);
}

TEST_CASE("sub-program counting respects the scope") {
  IntegerProgram fig3 = loadProgram("fig3.koat");
  // scope {t2,t3}, decreasing {t2}, starting at l2 with x=5,y=0: only t2/t3 run
  SubRunBound b = countSubprogram(fig3, {2, 3}, {2}, symbols::loc("l2"), {5, 0, 3}, 10000, 1000000, -2, 2);
  CHECK(!b.truncated);
  // Lemma-style bound with f=(y+1,x): 1 + 8*max(0, y+1, x) = 41
  CHECK(b.maxDecreasing <= 41);
  CHECK(b.maxDecreasing >= 1);
}
