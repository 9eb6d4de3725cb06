#include "loopbound/solver.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdlib>

#include "simplex.hpp"

namespace loopbound {

Rat LinearAtom::evaluate(const std::map<VarId, Rat>& model) const {
  Rat v = constant;
  for (auto& [var, c] : coeffs) {
    auto it = model.find(var);
    if (it != model.end()) v += c * it->second;
  }
  return v;
}

bool LinearAtom::satisfiedBy(const std::map<VarId, Rat>& model) const {
  Rat v = evaluate(model);
  if (equality) return v == 0;
  return strict ? v < 0 : v <= 0;
}

// --- in-process backend -----------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

struct ConjSolver {
  const SolverQuery& q;
  Clock::time_point deadline;
  long bnbNodes = 0;
  static constexpr long kBnbCap = 600;
  static constexpr long kPivotBudget = 200000;

  // Column layout: one column for nonneg vars, two (pos, neg) otherwise;
  // optionally a trailing epsilon column for strict rational atoms.
  std::map<VarId, std::pair<int, int>> cols;  // var -> (posCol, negCol or -1)
  int nCols = 0;
  int epsCol = -1;

  explicit ConjSolver(const SolverQuery& query, Clock::time_point dl) : q(query), deadline(dl) {}

  bool timedOut() const { return Clock::now() > deadline; }

  VarSort sortOf(VarId v) const {
    auto it = q.vars.find(v);
    return it == q.vars.end() ? VarSort::Rational : it->second;
  }

  void layout(const std::vector<LinearAtom>& atoms, bool needEps) {
    std::set<VarId> seen;
    for (auto& [v, s] : q.vars) seen.insert(v);
    for (auto& a : atoms)
      for (auto& [v, c] : a.coeffs) seen.insert(v);
    for (auto& o : q.objectives)
      for (auto& [v, c] : o) seen.insert(v);
    for (VarId v : seen) {
      if (q.nonneg.count(v)) {
        cols[v] = {nCols, -1};  // single nonnegative column
        nCols += 1;
      } else {
        // free unknowns: model values are pos - neg
        cols[v] = {nCols, nCols + 1};
        nCols += 2;
      }
    }
    if (needEps) {
      epsCol = nCols;
      ++nCols;
    }
  }

  std::vector<std::pair<int, Rat>> rowFor(const LinearAtom& a, bool withEps) const {
    std::vector<std::pair<int, Rat>> row;
    for (auto& [v, c] : a.coeffs) {
      if (c == 0) continue;
      auto& pc = cols.at(v);
      row.emplace_back(pc.first, c);
      if (pc.second >= 0) row.emplace_back(pc.second, -c);
    }
    if (withEps) row.emplace_back(epsCol, Rat(1));
    return row;
  }

  // Tries to turn a strict atom over integer-valued variables into a
  // nonstrict one via the integer shift. Returns false when not applicable.
  bool integerShift(LinearAtom& a) const {
    Int lcm = 1;
    for (auto& [v, c] : a.coeffs) {
      if (sortOf(v) != VarSort::Integer) return false;
      lcm = lcm / gcd(lcm, denominator(c)) * denominator(c);
    }
    lcm = lcm / gcd(lcm, denominator(a.constant)) * denominator(a.constant);
    for (auto& [v, c] : a.coeffs) c *= Rat(lcm);
    a.constant = a.constant * Rat(lcm) + 1;
    a.strict = false;
    return true;
  }

  static Int gcd(Int a, Int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      Int t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  SolverResult run(std::vector<LinearAtom> atoms) {
    bool needEps = false;
    for (auto& a : atoms) {
      if (!a.equality && a.strict && !integerShift(a)) needEps = true;
    }
    layout(atoms, needEps);

    LpSolver lp(nCols);
    for (auto& a : atoms) {
      if (a.equality) {
        lp.addEq(rowFor(a, false), -a.constant);
      } else {
        bool useEps = a.strict;  // remaining strict atoms use the epsilon trick
        lp.addLe(rowFor(a, useEps), -a.constant);
      }
    }
    if (epsCol >= 0) lp.addLe({{epsCol, Rat(1)}}, Rat(1));  // eps <= 1

    std::vector<std::vector<std::pair<int, Rat>>> extra;
    SolverResult res = branch(lp, extra);
    if (res.kind != SolverResult::Sat) return res;

    if (!q.objectives.empty()) {
      // Lexicographic minimization; each optimum is pinned as a constraint.
      LpSolver opt = lp;
      for (auto& o : q.objectives) {
        std::vector<Rat> objRow((size_t)nCols, Rat(0));
        std::vector<std::pair<int, Rat>> objLin;
        for (auto& [v, c] : o) {
          auto& pc = cols.at(v);
          objRow[(size_t)pc.first] += c;
          objLin.emplace_back(pc.first, c);
          if (pc.second >= 0) {
            objRow[(size_t)pc.second] -= c;
            objLin.emplace_back(pc.second, -c);
          }
        }
        auto r = opt.solve(objRow, kPivotBudget);
        if (r.status == LpSolver::Status::Limit) return {SolverResult::Unknown, {}, "pivot budget"};
        if (r.status == LpSolver::Status::Unbounded) break;  // leave at feasibility model
        if (r.status != LpSolver::Status::Optimal) break;
        opt.addLe(objLin, r.value);
        res.model = extract(r.model);
      }
      // Integer-sorted unknowns plus objectives are not combined in-process;
      // synthesis queries are all-rational.
    }

    for (auto& a : atoms) {
      if (!a.satisfiedBy(res.model)) throw std::logic_error("in-process solver produced a bad model");
    }
    return res;
  }

  std::map<VarId, Rat> extract(const std::vector<Rat>& lpModel) const {
    std::map<VarId, Rat> m;
    for (auto& [v, pc] : cols)
      m[v] = pc.second >= 0 ? lpModel[(size_t)pc.first] - lpModel[(size_t)pc.second]
                            : lpModel[(size_t)pc.first];
    return m;
  }

  SolverResult branch(const LpSolver& lp, std::vector<std::vector<std::pair<int, Rat>>>& extra) {
    if (timedOut()) return {SolverResult::Unknown, {}, "timeout"};
    LpSolver node = lp;
    for (auto& row : extra) node.addLe(row, extraRhs_[&row - extra.data()]);

    LpSolver::Result r;
    if (epsCol >= 0) {
      std::vector<Rat> obj((size_t)nCols, Rat(0));
      obj[(size_t)epsCol] = -1;  // maximize eps
      r = node.solve(obj, kPivotBudget);
    } else {
      r = node.feasible(kPivotBudget);
    }
    if (r.status == LpSolver::Status::Limit) return {SolverResult::Unknown, {}, "pivot budget"};
    if (r.status == LpSolver::Status::Infeasible) return {SolverResult::Unsat, {}, ""};
    if (epsCol >= 0 && r.model[(size_t)epsCol] == 0) return {SolverResult::Unsat, {}, "no interior point"};

    auto model = extract(r.model);
    VarId fractional = -1;
    for (auto& [v, val] : model) {
      if (sortOf(v) == VarSort::Integer && !isIntegral(val)) {
        fractional = v;
        break;
      }
    }
    if (fractional < 0) return {SolverResult::Sat, model, ""};
    if (++bnbNodes > kBnbCap) return {SolverResult::Unknown, {}, "branch limit"};

    Rat val = model[fractional];
    auto& pc = cols.at(fractional);
    std::vector<std::pair<int, Rat>> up{{pc.first, Rat(1)}}, down{{pc.first, Rat(-1)}};
    if (pc.second >= 0) {
      up.emplace_back(pc.second, Rat(-1));
      down.emplace_back(pc.second, Rat(1));
    }
    // left: v <= floor(val)
    extra.push_back(up);
    extraRhs_.push_back(Rat(ratFloor(val)));
    SolverResult left = branch(lp, extra);
    extra.pop_back();
    extraRhs_.pop_back();
    if (left.kind == SolverResult::Sat) return left;
    // right: v >= ceil(val)  <=>  -v <= -ceil
    extra.push_back(down);
    extraRhs_.push_back(Rat(-ratCeil(val)));
    SolverResult right = branch(lp, extra);
    extra.pop_back();
    extraRhs_.pop_back();
    if (right.kind == SolverResult::Sat) return right;
    if (left.kind == SolverResult::Unknown || right.kind == SolverResult::Unknown)
      return {SolverResult::Unknown, {}, "branch limit"};
    return {SolverResult::Unsat, {}, ""};
  }

  std::vector<Rat> extraRhs_;
};

// Splits disjunctive clauses by case analysis.
SolverResult solveClauses(const SolverQuery& q, std::vector<LinearAtom> fixed,
                          const std::vector<std::vector<LinearAtom>>& clauses, size_t idx,
                          Clock::time_point deadline, int& branches) {
  while (idx < clauses.size() && clauses[idx].size() == 1) fixed.push_back(clauses[idx++][0]);
  if (idx >= clauses.size()) {
    ConjSolver cs(q, deadline);
    return cs.run(std::move(fixed));
  }
  if (++branches > 4096) return {SolverResult::Unknown, {}, "case-split limit"};
  bool unknown = false;
  for (auto& atom : clauses[idx]) {
    auto fixed2 = fixed;
    fixed2.push_back(atom);
    SolverResult r = solveClauses(q, std::move(fixed2), clauses, idx + 1, deadline, branches);
    if (r.kind == SolverResult::Sat) return r;
    if (r.kind == SolverResult::Unknown) unknown = true;
  }
  return unknown ? SolverResult{SolverResult::Unknown, {}, "case-split"} : SolverResult{SolverResult::Unsat, {}, ""};
}

}  // namespace

SolverResult InProcessSolver::checkSat(const SolverQuery& q, int timeoutMs) {
  auto deadline = Clock::now() + std::chrono::milliseconds(timeoutMs);
  for (auto& clause : q.clauses) {
    if (clause.empty()) return {SolverResult::Unsat, {}, "empty clause"};
  }
  int branches = 0;
  return solveClauses(q, {}, q.clauses, 0, deadline, branches);
}

// --- env-configured default --------------------------------------------------

SolverBackend& defaultSolver() {
  static std::unique_ptr<SolverBackend> instance = []() -> std::unique_ptr<SolverBackend> {
    const char* cmd = std::getenv("LOOPBOUND_SMT_CMD");
    if (cmd && *cmd) return std::make_unique<SmtLibSolver>(cmd);
    return std::make_unique<InProcessSolver>();
  }();
  return *instance;
}

int defaultSolverTimeoutMs() {
  const char* v = std::getenv("LOOPBOUND_SOLVER_TIMEOUT_MS");
  if (v && *v) {
    int t = std::atoi(v);
    if (t > 0) return t;
  }
  return 5000;
}

// --- entailment over the integers --------------------------------------------

VarId Linearizer::varFor(const Monomial& m) {
  auto it = cache_.find(m);
  if (it != cache_.end()) return it->second;
  static int counter = 0;
  VarId fresh = symbols::var("$mono" + std::to_string(counter++));
  cache_.emplace(m, fresh);
  return fresh;
}

LinearAtom Linearizer::atom(const Polynomial& p, bool strict) {
  LinearAtom a;
  a.strict = strict;
  for (auto& [m, c] : p.terms()) {
    if (m.empty()) {
      a.constant += Rat(c);
    } else if (m.size() == 1 && m[0].second == 1) {
      a.coeffs[m[0].first] += Rat(c);
    } else {
      a.coeffs[varFor(m)] += Rat(c);
    }
  }
  return a;
}

void Linearizer::declareAll(SolverQuery& q, VarSort sort) const {
  for (auto& [m, v] : cache_) q.declare(v, sort);
}

namespace {

SolverResult intSat(const Constraint& c, const Polynomial* negatedConclusion) {
  SolverQuery q;
  Linearizer lz;
  for (auto& a : c.atoms()) {
    for (VarId v : a.vars()) q.declare(v, VarSort::Integer);
    q.assertAtom(lz.atom(a));
  }
  if (negatedConclusion) {
    for (VarId v : negatedConclusion->vars()) q.declare(v, VarSort::Integer);
    // not(p <= 0) over the integers: 1 - p <= 0
    q.assertAtom(lz.atom(Polynomial::constant(1) - *negatedConclusion));
  }
  lz.declareAll(q, VarSort::Integer);
  return defaultSolver().checkSat(q, defaultSolverTimeoutMs());
}

}  // namespace

Entailment entailsInt(const Constraint& premise, const Polynomial& conclusionLeqZero) {
  Polynomial conc = normalizeAtom(conclusionLeqZero);
  if (conc.isZero()) return Entailment::Yes;  // trivially true atom
  SolverResult r = intSat(premise, &conc);
  switch (r.kind) {
    case SolverResult::Unsat: return Entailment::Yes;
    case SolverResult::Sat: return Entailment::No;
    default: return Entailment::Unknown;
  }
}

bool maybeSatisfiableInt(const Constraint& c) {
  if (c.isFalseLiteral()) return false;
  if (c.isTrue()) return true;
  return intSat(c, nullptr).kind != SolverResult::Unsat;
}

bool definitelyUnsatInt(const Constraint& c) {
  if (c.isFalseLiteral()) return true;
  if (c.isTrue()) return false;
  return intSat(c, nullptr).kind == SolverResult::Unsat;
}

}  // namespace loopbound
