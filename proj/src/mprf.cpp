#include "loopbound/mprf.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "loopbound/solver.hpp"

namespace loopbound {

Rat gamma(int i) {
  assert(i >= 1);
  Rat g = 1;
  Int fact = 1;  // (i-1)! while iterating
  for (int k = 2; k <= i; ++k) {
    fact *= (k - 1);
    g = Rat(2) + g / Rat(k - 1) + Rat(Int(1), fact);
  }
  return g;
}

Int factorialGamma(int d) {
  Int fact = 1;
  for (int k = 2; k <= d; ++k) fact *= k;
  Rat v = Rat(fact) * gamma(d);
  assert(isIntegral(v));
  return numerator(v);
}

std::string Mprf::describe() const {
  std::ostringstream os;
  os << "depth " << depth << (strictD1 ? " (strict)" : "") << "\n";
  for (auto& [l, fs] : funcs) {
    for (size_t i = 0; i < fs.size(); ++i)
      os << "  f_" << (i + 1) << "(" << symbols::locName(l) << ") = " << fs[i].toString() << "\n";
  }
  return os.str();
}

// --- synthesis ---------------------------------------------------------------

namespace {

// Linear combination of solver unknowns.
struct LinComb {
  std::map<VarId, Rat> coeffs;
  Rat constant;

  void add(VarId v, const Rat& c) {
    if (c == 0) return;
    auto [it, fresh] = coeffs.emplace(v, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) coeffs.erase(it);
    }
  }
  LinComb& operator+=(const LinComb& o) {
    for (auto& [v, c] : o.coeffs) add(v, c);
    constant += o.constant;
    return *this;
  }
  LinComb negated() const {
    LinComb out;
    out.constant = -constant;
    out.coeffs = coeffs;
    for (auto& [v, c] : out.coeffs) c = -c;
    return out;
  }
  LinComb scaled(const Rat& k) const {
    LinComb out;
    if (k == 0) return out;
    out = *this;
    out.constant *= k;
    for (auto& [v, c] : out.coeffs) c *= k;
    return out;
  }
};

// Affine expression over (linearized) program-space variables whose
// coefficients are linear combinations of solver unknowns.
struct AffineExpr {
  std::map<VarId, LinComb> coeffs;
  LinComb constant;

  AffineExpr& operator+=(const AffineExpr& o) {
    for (auto& [v, lc] : o.coeffs) coeffs[v] += lc;
    constant += o.constant;
    return *this;
  }
  void subtract(const AffineExpr& o) {
    for (auto& [v, lc] : o.coeffs) coeffs[v] += lc.negated();
    constant += o.constant.negated();
  }
};

VarId freshUnknown(const char* tag) {
  static int counter = 0;
  return symbols::var(std::string("$") + tag + std::to_string(counter++));
}

struct Synthesizer {
  const IntegerProgram& p;
  int target;
  const std::set<int>& scope;
  int depth;
  bool strict;
  bool withObjectives = true;
  const SynthesisTables& tables;

  Linearizer lz;
  SolverQuery query;
  std::vector<LocId> scopeLocs;
  std::vector<LocId> entryLocs;
  // unknowns: coef[i][loc][pv], cst[i][loc]
  std::map<LocId, std::vector<std::map<VarId, VarId>>> coefVar;
  std::map<LocId, std::vector<VarId>> cstVar;

  Synthesizer(const IntegerProgram& prog, int tgt, const std::set<int>& sc, int d, bool strictVariant,
              const SynthesisTables& tbl, bool objectives = true)
      : p(prog), target(tgt), scope(sc), depth(d), strict(strictVariant), withObjectives(objectives), tables(tbl) {}

  AffineExpr templAt(LocId l, int phase) {  // f_{phase+1}(l); phase == -1 is f_0 = 0
    AffineExpr e;
    if (phase < 0) return e;
    for (VarId v : p.programVars()) e.coeffs[v].add(coefVar[l][(size_t)phase][v], Rat(1));
    e.constant.add(cstVar[l][(size_t)phase], Rat(1));
    return e;
  }

  // f_{phase+1}(l) composed with the update of t.
  AffineExpr templComposed(LocId l, int phase, const Transition& t) {
    AffineExpr e;
    for (VarId v : p.programVars()) {
      VarId a = coefVar[l][(size_t)phase][v];
      auto it = t.update.find(v);
      Polynomial up = it == t.update.end() ? Polynomial::variable(v) : it->second;
      for (auto& [m, c] : up.terms()) {
        if (m.empty()) {
          e.constant.add(a, Rat(c));
        } else if (m.size() == 1 && m[0].second == 1) {
          e.coeffs[m[0].first].add(a, Rat(c));
        } else {
          e.coeffs[lz.varFor(m)].add(a, Rat(c));
        }
      }
    }
    e.constant.add(cstVar[l][(size_t)phase], Rat(1));
    return e;
  }

  // Emits Farkas constraints for: guard |= expr >= offset.
  void implies(const std::vector<LinearAtom>& guard, const AffineExpr& expr, const Rat& offset) {
    std::set<VarId> universe;
    for (auto& g : guard)
      for (auto& [v, c] : g.coeffs) universe.insert(v);
    for (auto& [v, lc] : expr.coeffs) universe.insert(v);

    std::vector<VarId> lambdas;
    for (size_t i = 0; i < guard.size(); ++i) {
      VarId lam = freshUnknown("lam");
      lambdas.push_back(lam);
      query.declareNonneg(lam, VarSort::Rational);
    }
    for (VarId u : universe) {
      // sum_i lam_i * a_iu + e_u == 0
      LinearAtom eq;
      eq.equality = true;
      for (size_t i = 0; i < guard.size(); ++i) {
        auto it = guard[i].coeffs.find(u);
        if (it != guard[i].coeffs.end() && it->second != 0) eq.coeffs[lambdas[i]] += it->second;
      }
      auto it = expr.coeffs.find(u);
      if (it != expr.coeffs.end()) {
        for (auto& [w, c] : it->second.coeffs) eq.coeffs[w] += c;
        eq.constant += it->second.constant;
      }
      query.assertAtom(eq);
    }
    // sum_i lam_i * b_i - e_0 + offset <= 0 where b_i = -constant(guard_i)
    LinearAtom row;
    for (size_t i = 0; i < guard.size(); ++i) row.coeffs[lambdas[i]] += -guard[i].constant;
    for (auto& [w, c] : expr.constant.coeffs) row.coeffs[w] += -c;
    row.constant = -expr.constant.constant + offset;
    query.assertAtom(row);
  }

  std::vector<LinearAtom> guardAtoms(const Transition& t) {
    std::vector<LinearAtom> out;
    for (auto& a : t.guard.atoms()) out.push_back(lz.atom(a));
    return out;
  }

  void emitDecreasing(const Transition& t) {
    auto guard = guardAtoms(t);
    for (int i = 0; i < depth; ++i) {
      AffineExpr e = templAt(t.src, i - 1);
      e += templAt(t.src, i);
      e.subtract(templComposed(t.tgt, i, t));
      implies(guard, e, Rat(1));
    }
    AffineExpr last = templAt(t.src, depth - 1);
    implies(guard, last, strict ? Rat(1) : Rat(0));
  }

  void emitNonIncreasing(const Transition& t) {
    auto guard = guardAtoms(t);
    for (int i = 0; i < depth; ++i) {
      AffineExpr e = templAt(t.src, i);
      e.subtract(templComposed(t.tgt, i, t));
      implies(guard, e, Rat(0));
    }
  }

  std::optional<Mprf> run() {
    // Scope locations and templates.
    std::set<LocId> locs;
    for (int tid : scope) {
      locs.insert(p.transition(tid).src);
      locs.insert(p.transition(tid).tgt);
    }
    scopeLocs.assign(locs.begin(), locs.end());
    for (LocId l : scopeLocs) {
      coefVar[l].resize((size_t)depth);
      cstVar[l].resize((size_t)depth);
      for (int i = 0; i < depth; ++i) {
        for (VarId v : p.programVars()) {
          VarId a = freshUnknown("a");
          coefVar[l][(size_t)i][v] = a;
          query.declare(a, VarSort::Rational);
        }
        VarId b = freshUnknown("b");
        cstVar[l][(size_t)i] = b;
        query.declare(b, VarSort::Rational);
      }
    }

    auto entry = entryTransitions(p, scope);
    entryLocs = entry.entryLocations;

    // Coefficients of variables whose entry size bound is omega are useless
    // for lifting; pin them to zero.
    if (tables.sb) {
      for (LocId l : entryLocs) {
        std::set<VarId> banned;
        for (int tid : p.incoming(l)) {
          if (scope.count(tid)) continue;
          for (VarId v : p.programVars())
            if (tables.sb->get(tid, v).isOmega()) banned.insert(v);
        }
        for (VarId v : banned) {
          for (int i = 0; i < depth; ++i) {
            LinearAtom le, ge;
            le.coeffs[coefVar[l][(size_t)i][v]] = Rat(1);
            ge.coeffs[coefVar[l][(size_t)i][v]] = Rat(-1);
            query.assertAtom(le);
            query.assertAtom(ge);
          }
        }
      }
    }

    for (int tid : scope) {
      const Transition& t = p.transition(tid);
      if (tid == target) {
        emitDecreasing(t);
      } else {
        emitNonIncreasing(t);
      }
    }

    // L1 minimization: aux s >= |u| for each template unknown; first minimize
    // the entry-location sum, then the total sum. Probing solves skip this.
    std::map<VarId, Rat> objEntry, objAll;
    if (withObjectives) {
      for (LocId l : scopeLocs) {
      bool isEntry = std::find(entryLocs.begin(), entryLocs.end(), l) != entryLocs.end();
      for (int i = 0; i < depth; ++i) {
        std::vector<VarId> us;
        for (VarId v : p.programVars()) us.push_back(coefVar[l][(size_t)i][v]);
        us.push_back(cstVar[l][(size_t)i]);
        for (VarId u : us) {
          VarId s = freshUnknown("s");
          query.declareNonneg(s, VarSort::Rational);
          LinearAtom a1, a2;  // u - s <= 0, -u - s <= 0
          a1.coeffs[u] = Rat(1);
          a1.coeffs[s] = Rat(-1);
          a2.coeffs[u] = Rat(-1);
          a2.coeffs[s] = Rat(-1);
          query.assertAtom(a1);
          query.assertAtom(a2);
          if (isEntry) objEntry[s] = Rat(1);
          objAll[s] = Rat(1);
        }
      }
      }
      if (!objEntry.empty()) query.objectives.push_back(objEntry);
      query.objectives.push_back(objAll);
    }

    static InProcessSolver synthesisSolver;
    SolverResult res = synthesisSolver.checkSat(query, defaultSolverTimeoutMs());
    if (res.kind != SolverResult::Sat) {
      lastUnknown = res.kind == SolverResult::Unknown;
      return std::nullopt;
    }

    // Scale all coefficients to integers; scaling an MPhiRF by k >= 1 keeps
    // all conditions valid.
    Int lcm = 1;
    auto denom = [&](VarId u) {
      auto it = res.model.find(u);
      return it == res.model.end() ? Int(1) : denominator(it->second);
    };
    for (LocId l : scopeLocs)
      for (int i = 0; i < depth; ++i) {
        for (VarId v : p.programVars()) {
          Int d = denom(coefVar[l][(size_t)i][v]);
          lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
        }
        Int d = denom(cstVar[l][(size_t)i]);
        lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
      }

    Mprf f;
    f.depth = depth;
    f.scope = scope;
    f.decreasing = {target};
    f.strictD1 = strict && depth == 1;
    auto value = [&](VarId u) -> Rat {
      auto it = res.model.find(u);
      return it == res.model.end() ? Rat(0) : it->second;
    };
    for (LocId l : scopeLocs) {
      std::vector<Polynomial> fs;
      for (int i = 0; i < depth; ++i) {
        Polynomial poly;
        for (VarId v : p.programVars()) {
          Rat c = value(coefVar[l][(size_t)i][v]) * Rat(lcm);
          assert(isIntegral(c));
          poly = poly + Polynomial::variable(v) * numerator(c);
        }
        Rat c0 = value(cstVar[l][(size_t)i]) * Rat(lcm);
        assert(isIntegral(c0));
        poly = poly + Polynomial::constant(numerator(c0));
        fs.push_back(poly);
      }
      f.funcs[l] = std::move(fs);
    }
    return f;
  }

  bool lastUnknown = false;
};

// Checks `guard |= expr >= offset` for a concrete affine expression over the
// rationals by refuting the negation (independent of the Farkas encoding).
bool conditionHolds(const Constraint& guard, const Polynomial& expr, const Int& offset) {
  SolverQuery q;
  Linearizer lz;
  for (auto& a : guard.atoms()) q.assertAtom(lz.atom(a));
  // negation: expr < offset  <=>  expr - offset < 0
  q.assertAtom(lz.atom(expr - Polynomial::constant(offset), /*strict=*/true));
  for (auto& [m, v] : lz.monomialVars()) q.declare(v, VarSort::Rational);
  for (VarId v : guard.vars()) q.declare(v, VarSort::Rational);
  for (VarId v : expr.vars()) q.declare(v, VarSort::Rational);
  static InProcessSolver solver;
  SolverResult res = solver.checkSat(q, defaultSolverTimeoutMs());
  return res.kind == SolverResult::Unsat;
}

Polynomial composed(const IntegerProgram& p, const Polynomial& f, const Transition& t) {
  std::map<VarId, Polynomial> subst;
  for (VarId v : p.programVars()) {
    auto it = t.update.find(v);
    subst[v] = it == t.update.end() ? Polynomial::variable(v) : it->second;
  }
  return f.compose(subst);
}

const Polynomial& funcAt(const Mprf& f, LocId l, int phaseIdx, const Polynomial& zero) {
  auto it = f.funcs.find(l);
  if (it == f.funcs.end()) return zero;
  return it->second[(size_t)phaseIdx];
}

bool decreasingConditionsHold(const IntegerProgram& p, const Mprf& f, const Transition& t) {
  static const Polynomial zero;
  for (int i = 0; i < f.depth; ++i) {
    Polynomial lhs = (i == 0 ? Polynomial() : funcAt(f, t.src, i - 1, zero)) + funcAt(f, t.src, i, zero);
    Polynomial expr = lhs - composed(p, funcAt(f, t.tgt, i, zero), t);
    if (!conditionHolds(t.guard, expr, Int(1))) return false;
  }
  Polynomial last = funcAt(f, t.src, f.depth - 1, zero);
  return conditionHolds(t.guard, last, f.strictD1 ? Int(1) : Int(0));
}

bool nonIncreasingConditionsHold(const IntegerProgram& p, const Mprf& f, const Transition& t) {
  static const Polynomial zero;
  for (int i = 0; i < f.depth; ++i) {
    Polynomial expr = funcAt(f, t.src, i, zero) - composed(p, funcAt(f, t.tgt, i, zero), t);
    if (!conditionHolds(t.guard, expr, Int(0))) return false;
  }
  return true;
}

// Cheap satisfiability probe: relaxed variant, no minimization. The strict
// variant is strictly stronger, so a relaxed-unsat scope is hopeless.
bool probeScope(const IntegerProgram& p, int target, const std::set<int>& scope, int depth,
                const SynthesisTables& tables, bool& unknownFlag) {
  Synthesizer s(p, target, scope, depth, /*strictVariant=*/false, tables, /*objectives=*/false);
  auto f = s.run();
  unknownFlag = unknownFlag || s.lastUnknown;
  return f.has_value();
}

std::optional<Mprf> synthesizeScope(const IntegerProgram& p, int target, const std::set<int>& scope, int depth,
                                    const SynthesisTables& tables, bool& unknownFlag) {
  for (bool strict : depth == 1 ? std::vector<bool>{true, false} : std::vector<bool>{false}) {
    Synthesizer s(p, target, scope, depth, strict, tables);
    auto f = s.run();
    unknownFlag = unknownFlag || s.lastUnknown;
    if (f) return f;
  }
  return std::nullopt;
}

}  // namespace

bool verifyMprf(const IntegerProgram& p, const Mprf& f) {
  for (int tid : f.scope) {
    const Transition& t = p.transition(tid);
    if (f.decreasing.count(tid)) {
      if (!decreasingConditionsHold(p, f, t)) return false;
    } else {
      if (!nonIncreasingConditionsHold(p, f, t)) return false;
    }
  }
  return true;
}

std::optional<Mprf> findMprf(const IntegerProgram& p, int target, const std::set<int>& scc, int depth,
                             SynthesisTables tables, SynthesisStats* stats) {
  if (!scc.count(target)) throw std::invalid_argument("findMprf: target not in the candidate set");
  std::set<int> scope = scc;
  bool unknown = false;
  std::optional<Mprf> witness;

  // Any witness for any scope restricts to a solution of the minimal relaxed
  // system for the target alone (without coefficient pins), so its
  // unsatisfiability rules the depth out entirely.
  {
    std::set<int> minimal{target};
    SynthesisTables none;
    Synthesizer pre(p, target, minimal, depth, /*strictVariant=*/false, none);
    if (!pre.run()) {
      if (stats) stats->solverUnknown = pre.lastUnknown;
      return std::nullopt;
    }
  }

  while (true) {
    if (probeScope(p, target, scope, depth, tables, unknown)) {
      witness = synthesizeScope(p, target, scope, depth, tables, unknown);
      break;
    }
    if (scope.size() <= 1) break;
    // Greedy deletion: first transition (by id) whose removal makes the
    // system satisfiable; if none does, drop the smallest non-target id.
    bool found = false;
    for (int tid : scope) {
      if (tid == target) continue;
      std::set<int> reduced = scope;
      reduced.erase(tid);
      if (probeScope(p, target, reduced, depth, tables, unknown)) {
        witness = synthesizeScope(p, target, reduced, depth, tables, unknown);
        scope = std::move(reduced);
        found = true;
        break;
      }
    }
    if (found) break;
    for (int tid : scope) {
      if (tid != target) {
        scope.erase(tid);
        break;
      }
    }
  }
  if (stats) stats->solverUnknown = unknown;
  if (!witness) return std::nullopt;

  // Maximize the decreasing set on the found witness.
  for (int tid : witness->scope) {
    if (tid == target || witness->decreasing.count(tid)) continue;
    if (decreasingConditionsHold(p, *witness, p.transition(tid))) witness->decreasing.insert(tid);
  }

  // Independent re-verification; the solver model is not trusted blindly.
  if (!verifyMprf(p, *witness)) return std::nullopt;
  return witness;
}

std::map<LocId, Bound> localBound(const Mprf& f, const std::vector<LocId>& entryLocs,
                                  const std::vector<VarId>& pv) {
  std::map<LocId, Bound> out;
  static const Polynomial zero;
  for (LocId l : entryLocs) {
    if (f.strictD1 && f.depth == 1) {
      out[l] = overapproxPoly(funcAt(f, l, 0, zero), pv);
      continue;
    }
    Bound sum;
    for (int i = 0; i < f.depth; ++i) sum = sum + overapproxPoly(funcAt(f, l, i, zero), pv);
    out[l] = Bound::constant(1) + Bound::constant(factorialGamma(f.depth)) * sum;
  }
  return out;
}

LiftOutcome liftBound(const IntegerProgram& p, const Mprf& f, RuntimeBoundTable& rb, const SizeBoundTable& sb,
                      ProofLog* log) {
  auto entry = entryTransitions(p, f.scope);
  auto betas = localBound(f, entry.entryLocations, p.programVars());

  Bound total;  // sum over entries of RB(t) * SB(t,.)(beta_l)
  for (LocId l : entry.entryLocations) {
    const Bound& beta = betas.at(l);
    for (int tid : p.incoming(l)) {
      if (f.scope.count(tid)) continue;
      std::map<VarId, Bound> row = sb.rowFor(tid, p.programVars());
      total = total + rb.get(tid) * beta.substitute(row);
    }
  }

  if (log) {
    std::ostringstream os;
    os << "MPRF d=" << f.depth << " scope={";
    bool first = true;
    for (int tid : f.scope) os << (first ? "" : ",") << "t" << tid, first = false;
    os << "} decreasing={";
    first = true;
    for (int tid : f.decreasing) os << (first ? "" : ",") << "t" << tid, first = false;
    os << "}";
    for (LocId l : entry.entryLocations) os << " beta(" << symbols::locName(l) << ")=" << betas.at(l).toString();
    log->push_back(os.str());
  }

  LiftOutcome out;
  for (int tid : f.decreasing) {
    out.newBounds[tid] = total;
    Bound old = rb.get(tid);
    if (total.classify() < old.classify()) {
      rb.set(tid, total);
      out.improvedAny = true;
      if (log) log->push_back("RB t" + std::to_string(tid) + " := " + total.toString());
    }
  }
  return out;
}

}  // namespace loopbound
