#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "loopbound/solver.hpp"

using namespace loopbound;
using namespace loopbound::testing;

namespace {

LinearAtom atomOf(std::initializer_list<std::pair<const char*, long long>> coeffs, long long c,
                  bool strict = false) {
  LinearAtom a;
  for (auto& [name, k] : coeffs) a.coeffs[symbols::var(name)] = Rat(k);
  a.constant = Rat(c);
  a.strict = strict;
  return a;
}

}  // namespace

TEST_CASE("one-variable system is satisfiable with the expected model") {
  // lambda >= 0 and lambda = 1
  SolverQuery q;
  VarId lam = symbols::var("lam");
  q.declare(lam, VarSort::Rational);
  q.assertAtom(atomOf({{"lam", -1}}, 0));  // -lam <= 0
  q.assertAtom(atomOf({{"lam", 1}}, -1));  // lam - 1 <= 0
  q.assertAtom(atomOf({{"lam", -1}}, 1));  // 1 - lam <= 0
  InProcessSolver s;
  auto res = s.checkSat(q, 1000);
  REQUIRE(res.kind == SolverResult::Sat);
  CHECK(res.model[lam] == Rat(1));
}

TEST_CASE("empty polytope is unsat") {
  SolverQuery q;
  q.declare(symbols::var("x"), VarSort::Rational);
  q.assertAtom(atomOf({{"x", 1}}, 0));   // x <= 0
  q.assertAtom(atomOf({{"x", -1}}, 1));  // x >= 1
  InProcessSolver s;
  CHECK(s.checkSat(q, 1000).kind == SolverResult::Unsat);
}

TEST_CASE("Farkas witness for x>0 entails x>=0") {
  // multipliers: lam * (x >= 1 row) must reproduce x >= 0: lam = 1 works,
  // encoded directly as the linear system lam*1 = 1, lam >= 0, lam*1 <= 0+1.
  SolverQuery q;
  VarId lam = symbols::var("farkas_lam");
  q.declare(lam, VarSort::Rational);
  q.assertAtom(atomOf({{"farkas_lam", -1}}, 0));  // lam >= 0
  q.assertAtom(atomOf({{"farkas_lam", 1}}, -1));  // lam <= 1
  q.assertAtom(atomOf({{"farkas_lam", -1}}, 1));  // lam >= 1
  InProcessSolver s;
  auto res = s.checkSat(q, 1000);
  REQUIRE(res.kind == SolverResult::Sat);
  CHECK(res.model[lam] == Rat(1));
}

TEST_CASE("strict atoms over the rationals use an interior point") {
  SolverQuery q;
  VarId x = symbols::var("sx");
  q.declare(x, VarSort::Rational);
  LinearAtom lt = atomOf({{"sx", 1}}, 0, true);    // x < 0
  LinearAtom ge = atomOf({{"sx", -1}}, 0, false);  // x >= 0
  q.assertAtom(lt);
  q.assertAtom(ge);
  InProcessSolver s;
  CHECK(s.checkSat(q, 1000).kind == SolverResult::Unsat);

  SolverQuery q2;
  q2.declare(x, VarSort::Rational);
  q2.assertAtom(atomOf({{"sx", 1}}, 0, true));  // x < 0 alone
  auto res = s.checkSat(q2, 1000);
  REQUIRE(res.kind == SolverResult::Sat);
  CHECK(res.model[x] < 0);
}

TEST_CASE("integer branching separates rational-sat integer-unsat systems") {
  // 2x = 1 has a rational solution but no integer one.
  SolverQuery q;
  VarId x = symbols::var("ix");
  q.declare(x, VarSort::Integer);
  q.assertAtom(atomOf({{"ix", 2}}, -1));
  q.assertAtom(atomOf({{"ix", -2}}, 1));
  InProcessSolver s;
  CHECK(s.checkSat(q, 2000).kind == SolverResult::Unsat);
}

TEST_CASE("disjunctive clauses are case-split") {
  SolverQuery q;
  VarId x = symbols::var("dx");
  q.declare(x, VarSort::Integer);
  // (x <= -5 or x >= 5) and 0 <= x <= 3  -- unsat
  q.clauses.push_back({atomOf({{"dx", 1}}, 5), atomOf({{"dx", -1}}, 5)});
  q.assertAtom(atomOf({{"dx", -1}}, 0));
  q.assertAtom(atomOf({{"dx", 1}}, -3));
  InProcessSolver s;
  CHECK(s.checkSat(q, 2000).kind == SolverResult::Unsat);
  // relaxing the box makes it sat
  SolverQuery q2;
  q2.declare(x, VarSort::Integer);
  q2.clauses.push_back({atomOf({{"dx", 1}}, 5), atomOf({{"dx", -1}}, 5)});
  auto res = s.checkSat(q2, 2000);
  REQUIRE(res.kind == SolverResult::Sat);
}

TEST_CASE("objectives minimize lexicographically") {
  SolverQuery q;
  VarId a = symbols::var("oa"), b = symbols::var("ob");
  q.declare(a, VarSort::Rational);
  q.declare(b, VarSort::Rational);
  // a + b >= 2, a >= 0, b >= 0
  q.assertAtom(atomOf({{"oa", -1}, {"ob", -1}}, 2));
  q.assertAtom(atomOf({{"oa", -1}}, 0));
  q.assertAtom(atomOf({{"ob", -1}}, 0));
  q.objectives.push_back({{a, Rat(1)}});  // minimize a first
  q.objectives.push_back({{b, Rat(1)}});
  InProcessSolver s;
  auto res = s.checkSat(q, 2000);
  REQUIRE(res.kind == SolverResult::Sat);
  CHECK(res.model[a] == Rat(0));
  CHECK(res.model[b] == Rat(2));
}

TEST_CASE("entailment examples") {
  VarId x = symbols::var("x"), y = symbols::var("y"), z = symbols::var("z");
  // x<1 && y>=z entails x<1 (conjunct) and does not entail x<0
  Constraint premise;
  premise.addLt(Polynomial::variable(x), Polynomial::constant(1));
  premise.addGeq(Polynomial::variable(y), Polynomial::variable(z));
  // conclusion x < 1 is the atom x <= 0
  CHECK(entailsInt(premise, Polynomial::variable(x)) == Entailment::Yes);
  // conclusion x < 0 is the atom x + 1 <= 0
  CHECK(entailsInt(premise, Polynomial::variable(x) + Polynomial::constant(1)) == Entailment::No);

  Constraint top;
  CHECK(entailsInt(top, -Polynomial::variable(x)) == Entailment::No);  // true does not entail x >= 0

  Constraint box;
  box.addGeq(Polynomial::variable(x), Polynomial::constant(1));
  box.addLeq(Polynomial::variable(x), Polynomial::constant(3));
  CHECK(entailsInt(box, Polynomial::variable(x) - Polynomial::constant(3)) == Entailment::Yes);  // x <= 3
}

TEST_CASE("entailment agrees with brute force on box-bounded premises") {
  VarId x = symbols::var("x"), y = symbols::var("y");
  Rng rng(21);
  for (int iter = 0; iter < 40; ++iter) {
    Constraint premise;
    // include the box so integer entailment and box enumeration coincide
    premise.addGeq(Polynomial::variable(x), Polynomial::constant(-5));
    premise.addLeq(Polynomial::variable(x), Polynomial::constant(5));
    premise.addGeq(Polynomial::variable(y), Polynomial::constant(-5));
    premise.addLeq(Polynomial::variable(y), Polynomial::constant(5));
    for (int a = 0; a < 2; ++a) {
      Polynomial lhs = Polynomial::variable(x) * rng.range(-2, 2) + Polynomial::variable(y) * rng.range(-2, 2);
      premise.addLeq(lhs, Polynomial::constant(rng.range(-2, 4)));
    }
    Polynomial conclusion = Polynomial::variable(x) * rng.range(-2, 2) +
                            Polynomial::variable(y) * rng.range(-2, 2) + Polynomial::constant(rng.range(-3, 3));

    bool brute = true;
    for (long long vx = -5; vx <= 5; ++vx)
      for (long long vy = -5; vy <= 5; ++vy) {
        std::map<VarId, Int> st{{x, Int(vx)}, {y, Int(vy)}};
        if (premise.satisfiedBy(st) && conclusion.evaluate(st) > 0) brute = false;
      }
    auto got = entailsInt(premise, conclusion);
    REQUIRE(got != Entailment::Unknown);
    CHECK((got == Entailment::Yes) == brute);
  }
}

TEST_CASE("models always satisfy the asserted atoms") {
  Rng rng(22);
  InProcessSolver s;
  for (int iter = 0; iter < 30; ++iter) {
    SolverQuery q;
    VarId x = symbols::var("mx"), y = symbols::var("my");
    q.declare(x, rng.chance(50) ? VarSort::Integer : VarSort::Rational);
    q.declare(y, VarSort::Rational);
    for (int a = 0; a < 3; ++a) {
      LinearAtom atom;
      atom.coeffs[x] = Rat(rng.range(-2, 2));
      atom.coeffs[y] = Rat(rng.range(-2, 2));
      atom.constant = Rat(rng.range(-4, 4));
      q.assertAtom(atom);
    }
    auto res = s.checkSat(q, 2000);
    if (res.kind == SolverResult::Sat) {
      for (auto& clause : q.clauses) CHECK(clause[0].satisfiedBy(res.model));
    }
  }
}

// --- SMT-LIB2 external process backend ---------------------------------------

namespace {

std::string writeScript(const std::string& name, const std::string& body) {
  std::string path = "/tmp/loopbound_" + name + ".sh";
  std::ofstream out(path);
  out << "#!/bin/sh\n" << body;
  out.close();
  return "sh " + path;
}

}  // namespace

TEST_CASE("smtlib backend parses sat results with rational and negative models") {
  std::string cmd = writeScript("fake_sat",
                                "cat > /dev/null\n"
                                "echo sat\n"
                                "echo '(model'\n"
                                "echo '  (define-fun |fx| () Real (/ 1 2))'\n"
                                "echo '  (define-fun |fy| () Int (- 3))'\n"
                                "echo ')'\n");
  SmtLibSolver solver(cmd);
  SolverQuery q;
  VarId x = symbols::var("fx"), y = symbols::var("fy");
  q.declare(x, VarSort::Rational);
  q.declare(y, VarSort::Integer);
  // assertion satisfied by the scripted model: 2x + y <= 0
  LinearAtom a;
  a.coeffs[x] = Rat(2);
  a.coeffs[y] = Rat(1);
  q.assertAtom(a);
  auto res = solver.checkSat(q, 3000);
  REQUIRE(res.kind == SolverResult::Sat);
  CHECK(res.model[x] == Rat(1, 2));
  CHECK(res.model[y] == Rat(-3));
}

TEST_CASE("smtlib backend handles unsat and unknown") {
  SmtLibSolver uns(writeScript("fake_unsat", "cat > /dev/null\necho unsat\n"));
  SolverQuery q;
  q.declare(symbols::var("fz"), VarSort::Integer);
  LinearAtom a;
  a.coeffs[symbols::var("fz")] = Rat(1);
  q.assertAtom(a);
  CHECK(uns.checkSat(q, 3000).kind == SolverResult::Unsat);

  SmtLibSolver unk(writeScript("fake_unknown", "cat > /dev/null\necho unknown\n"));
  CHECK(unk.checkSat(q, 3000).kind == SolverResult::Unknown);
}

TEST_CASE("smtlib backend distinguishes process failures from unknown") {
  SmtLibSolver bad(writeScript("fake_garbage", "cat > /dev/null\necho gibberish\n"));
  SolverQuery q;
  q.declare(symbols::var("fz"), VarSort::Integer);
  LinearAtom a;
  a.coeffs[symbols::var("fz")] = Rat(1);
  q.assertAtom(a);
  CHECK_THROWS_AS(bad.checkSat(q, 3000), SolverProcessError);

  SmtLibSolver dead("/nonexistent-solver-binary-xyz");
  CHECK_THROWS_AS(dead.checkSat(q, 3000), SolverProcessError);
}

TEST_CASE("smtlib backend times out on silent solvers") {
  SmtLibSolver slow(writeScript("fake_slow", "cat > /dev/null\nsleep 30\n"));
  SolverQuery q;
  q.declare(symbols::var("fz"), VarSort::Integer);
  LinearAtom a;
  a.coeffs[symbols::var("fz")] = Rat(1);
  q.assertAtom(a);
  auto res = slow.checkSat(q, 300);
  CHECK(res.kind == SolverResult::Unknown);
}

TEST_CASE("smtlib backend rejects lying models") {
  std::string cmd = writeScript("fake_liar",
                                "cat > /dev/null\n"
                                "echo sat\n"
                                "echo '(model (define-fun |fw| () Int 5))'\n");
  SmtLibSolver solver(cmd);
  SolverQuery q;
  VarId w = symbols::var("fw");
  q.declare(w, VarSort::Integer);
  LinearAtom a;  // w <= 0, violated by w = 5
  a.coeffs[w] = Rat(1);
  q.assertAtom(a);
  CHECK_THROWS_AS(solver.checkSat(q, 3000), SolverProcessError);
}
