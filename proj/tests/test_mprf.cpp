#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "loopbound/analysis.hpp"
#include "loopbound/mprf.hpp"
#include "loopbound/simulate.hpp"

using namespace loopbound;
using namespace loopbound::testing;

namespace {

Polynomial pv(const char* n) { return Polynomial::variable(symbols::var(n)); }

// Entry tables for a program whose entry transitions should substitute
// identically (SB(t,v) = v), with RB(t) = 1.
SynthesisTables identityTables(const IntegerProgram& p, RuntimeBoundTable& rb, SizeBoundTable& sb) {
  for (auto& t : p.transitions()) {
    rb.set(t.id, Bound::constant(1));
    for (VarId v : p.programVars()) sb.set(t.id, v, Bound::variable(v));
  }
  return {&rb, &sb};
}

}  // namespace

TEST_CASE("gamma constants") {
  CHECK(gamma(1) == Rat(1));
  CHECK(gamma(2) == Rat(4));
  CHECK(gamma(3) == Rat(9, 2));
  CHECK(factorialGamma(2) == 8);
  CHECK(factorialGamma(3) == 27);
}

TEST_CASE("d! * gamma_d is a natural number up to depth 10") {
  Int fact = 1;
  for (int d = 1; d <= 10; ++d) {
    fact *= d;
    Rat v = Rat(fact) * gamma(d);
    CAPTURE(d);
    CHECK(isIntegral(v));
    CHECK(factorialGamma(d) == numerator(v));
  }
}

TEST_CASE("sums-of-powers inequalities") {
  // upper: sum_{j=1}^{k-1} j^{i-2} <= k^{i-1}/(i-1)
  // lower: sum_{j=1}^{k-1} j^{i-1} >= k^i/i - k^{i-1}
  for (int i = 2; i <= 6; ++i) {
    for (int k = 1; k <= 50; ++k) {
      Rat upperSum = 0, lowerSum = 0;
      for (int j = 1; j <= k - 1; ++j) {
        Rat jp = 1;
        for (int e = 0; e < i - 2; ++e) jp *= j;
        upperSum += jp;
        lowerSum += jp * j;  // j^{i-1}
      }
      Rat kPow = 1;  // k^{i-1}
      for (int e = 0; e < i - 1; ++e) kPow *= k;
      CAPTURE(i);
      CAPTURE(k);
      CHECK(upperSum <= kPow / Rat(i - 1));
      CHECK(lowerSum >= kPow * Rat(k) / Rat(i) - kPow);
    }
  }
}

TEST_CASE("two-phase loop needs depth 2 and finds the known functions") {
  IntegerProgram fig1 = loadProgram("fig1.koat");
  RuntimeBoundTable rb;
  SizeBoundTable sb;
  auto tables = identityTables(fig1, rb, sb);

  CHECK(!findMprf(fig1, 1, {1}, 1, tables).has_value());

  auto f = findMprf(fig1, 1, {1}, 2, tables);
  REQUIRE(f.has_value());
  CHECK(f->depth == 2);
  CHECK(f->decreasing == std::set<int>{1});
  LocId l1 = symbols::loc("l1");
  REQUIRE(f->funcs.count(l1));
  CHECK(f->funcs.at(l1)[0] == pv("y") + Polynomial::constant(1));
  CHECK(f->funcs.at(l1)[1] == pv("x"));
  CHECK(verifyMprf(fig1, *f));
}

TEST_CASE("running example: the greedy scope drops t1 and keeps {t2,t3}") {
  IntegerProgram fig3 = loadProgram("fig3.koat");
  RuntimeBoundTable rb;
  SizeBoundTable sb;
  auto tables = identityTables(fig3, rb, sb);

  auto f = findMprf(fig3, 2, {1, 2, 3}, 2, tables);
  REQUIRE(f.has_value());
  CHECK(f->scope == std::set<int>{2, 3});
  CHECK(f->decreasing == std::set<int>{2});
  LocId l2 = symbols::loc("l2");
  REQUIRE(f->funcs.count(l2));
  CHECK(f->funcs.at(l2)[0] == pv("y") + Polynomial::constant(1));
  CHECK(f->funcs.at(l2)[1] == pv("x"));
}

TEST_CASE("three-phase loop needs depth 3 and finds (z+1, y+1, x)") {
  IntegerProgram fig7 = loadProgram("fig7.koat");
  RuntimeBoundTable rb;
  SizeBoundTable sb;
  auto tables = identityTables(fig7, rb, sb);

  CHECK(!findMprf(fig7, 1, {1}, 1, tables).has_value());
  CHECK(!findMprf(fig7, 1, {1}, 2, tables).has_value());
  auto f = findMprf(fig7, 1, {1}, 3, tables);
  REQUIRE(f.has_value());
  LocId l1 = symbols::loc("l1");
  CHECK(f->funcs.at(l1)[0] == pv("z") + Polynomial::constant(1));
  CHECK(f->funcs.at(l1)[1] == pv("y") + Polynomial::constant(1));
  CHECK(f->funcs.at(l1)[2] == pv("x"));
  CHECK(verifyMprf(fig7, *f));
}

TEST_CASE("local bounds") {
  LocId l2 = symbols::loc("l2");
  std::vector<VarId> vars{symbols::var("x"), symbols::var("y"), symbols::var("z")};

  // depth 2: beta = 1 + 8 * (ceil(y+1) + ceil(x)) = 8x+8y+9
  Mprf f;
  f.depth = 2;
  f.funcs[l2] = {pv("y") + Polynomial::constant(1), pv("x")};
  auto beta = localBound(f, {l2}, vars);
  CHECK(beta.at(l2).toString() == "8*x+8*y+9");

  // depth 1 without the strict side condition: beta = 1 + ceil(f1)
  Mprf g;
  g.depth = 1;
  g.funcs[l2] = {pv("x")};
  CHECK(localBound(g, {l2}, vars).at(l2).toString() == "x+1");

  Mprf h;
  h.depth = 1;
  h.funcs[l2] = {Polynomial::constant(3) - pv("x")};
  CHECK(localBound(h, {l2}, vars).at(l2).toString() == "x+4");

  // the strict depth-1 variant uses the classical bound ceil(f1)
  Mprf s;
  s.depth = 1;
  s.strictD1 = true;
  s.funcs[l2] = {pv("x")};
  CHECK(localBound(s, {l2}, vars).at(l2).toString() == "x");
}

TEST_CASE("lifting local bounds to global runtime bounds") {
  IntegerProgram fig3 = loadProgram("fig3.koat");
  VarId x = symbols::var("x"), y = symbols::var("y"), z = symbols::var("z");
  LocId l2 = symbols::loc("l2");

  Mprf f;
  f.depth = 2;
  f.scope = {2, 3};
  f.decreasing = {2};
  f.funcs[l2] = {pv("y") + Polynomial::constant(1), pv("x")};
  f.funcs[symbols::loc("l1")] = {pv("y") + Polynomial::constant(1), pv("x")};

  RuntimeBoundTable rb;
  rb.set(0, Bound::constant(1));
  rb.set(1, Bound::variable(z));
  SizeBoundTable sb;
  Bound twoZ = Bound::constant(2) * Bound::variable(z);
  sb.set(1, x, twoZ);
  sb.set(1, y, twoZ);
  sb.set(1, z, Bound::variable(z));

  ProofLog log;
  auto outcome = liftBound(fig3, f, rb, sb, &log);
  CHECK(outcome.improvedAny);
  CHECK(rb.get(2).toString() == "32*z^2+9*z");
  REQUIRE(!log.empty());
  CHECK(log[0].find("beta(l2)=8*x+8*y+9") != std::string::npos);

  // an omega entry bound keeps the lift at omega: no improvement recorded
  RuntimeBoundTable rbOmega;
  SizeBoundTable sbOmega;
  auto out2 = liftBound(fig3, f, rbOmega, sbOmega, nullptr);
  CHECK(!out2.improvedAny);
  CHECK(rbOmega.get(2).isOmega());

  // single entry with RB = 1 and identity sizes lifts beta itself
  Mprf g;
  g.depth = 1;
  g.scope = {2, 3};
  g.decreasing = {2};
  g.funcs[l2] = {pv("x")};
  g.funcs[symbols::loc("l1")] = {pv("x")};
  RuntimeBoundTable rb3;
  rb3.set(1, Bound::constant(1));
  SizeBoundTable sb3;
  for (VarId v : fig3.programVars()) sb3.set(1, v, Bound::variable(v));
  liftBound(fig3, g, rb3, sb3, nullptr);
  CHECK(rb3.get(2).toString() == "x+1");
}

TEST_CASE("corrupted witnesses fail the independent verification") {
  IntegerProgram fig1 = loadProgram("fig1.koat");
  RuntimeBoundTable rb;
  SizeBoundTable sb;
  auto tables = identityTables(fig1, rb, sb);
  auto f = findMprf(fig1, 1, {1}, 2, tables);
  REQUIRE(f.has_value());
  Mprf bad = *f;
  LocId l1 = symbols::loc("l1");
  bad.funcs[l1][0] = pv("x") + pv("y");  // not a valid phase function
  CHECK(!verifyMprf(fig1, bad));
}

TEST_CASE("synthesis is deterministic") {
  IntegerProgram fig3 = loadProgram("fig3.koat");
  RuntimeBoundTable rb;
  SizeBoundTable sb;
  auto tables = identityTables(fig3, rb, sb);
  auto f1 = findMprf(fig3, 2, {1, 2, 3}, 2, tables);
  auto f2 = findMprf(fig3, 2, {1, 2, 3}, 2, tables);
  REQUIRE(f1.has_value());
  REQUIRE(f2.has_value());
  CHECK(f1->scope == f2->scope);
  CHECK(f1->decreasing == f2->decreasing);
  CHECK(f1->funcs == f2->funcs);
}

TEST_CASE("local bounds cap decreasing applications in bounded runs") {
  // Lemma-style check: for verified witnesses and concrete entry states, no
  // run of the sub-program applies decreasing transitions more than
  // 1 + d!*gamma_d * max{0, f_1(l), ..., f_d(l)} times.
  Rng rng(77);
  int checked = 0;
  for (int i = 0; checked < 120 && i < 220; ++i) {
    IntegerProgram p = randomProgram(rng, 5000 + i);
    auto sccs = sccsTopological(p);
    if (sccs.empty()) continue;
    std::set<int> scc(sccs[0].begin(), sccs[0].end());
    int target = *scc.begin();
    std::optional<Mprf> f;
    for (int d = 1; d <= 2 && !f; ++d) f = findMprf(p, target, scc, d);
    if (!f) continue;
    REQUIRE(verifyMprf(p, *f));
    auto entry = entryTransitions(p, f->scope);
    if (entry.entryLocations.empty()) continue;
    for (int trial = 0; trial < 3; ++trial) {
      LocId l = entry.entryLocations[(size_t)rng.range(0, (long long)entry.entryLocations.size() - 1)];
      SimState sigma;
      std::map<VarId, Int> st;
      for (VarId v : p.programVars()) {
        long long val = rng.range(-8, 8);
        sigma.push_back(val);
        st[v] = Int(val);
      }
      Int best = 0;
      if (f->funcs.count(l)) {
        for (auto& fn : f->funcs.at(l)) best = std::max(best, fn.evaluate(st));
      }
      Int beta = 1 + factorialGamma(f->depth) * best;
      SubRunBound run = countSubprogram(p, f->scope, f->decreasing, l, sigma, 400, 60000, -2, 2);
      // prefixes of runs are runs, so the check is valid even when truncated
      CAPTURE(p.toString());
      CHECK(Int(run.maxDecreasing) <= beta);
      ++checked;
    }
  }
  CHECK(checked >= 100);
}
