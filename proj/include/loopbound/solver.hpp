#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopbound/constraint.hpp"

namespace loopbound {

struct LinearAtom {
  std::map<VarId, Rat> coeffs;
  Rat constant;           // sum(coeffs_v * v) + constant  REL  0
  bool strict = false;    // <  instead of <=
  bool equality = false;  // == (strict ignored)

  Rat evaluate(const std::map<VarId, Rat>& model) const;
  bool satisfiedBy(const std::map<VarId, Rat>& model) const;
};

enum class VarSort { Rational, Integer };

struct SolverQuery {
  std::map<VarId, VarSort> vars;
  // Unknowns known to be nonnegative (a representation hint; backends add the
  // bound themselves).
  std::set<VarId> nonneg;
  // Conjunction of clauses; each clause is a disjunction of atoms. Most
  // clauses are singletons.
  std::vector<std::vector<LinearAtom>> clauses;
  // Lexicographic minimization targets (linear forms). Honored by the
  // in-process backend; the SMT-LIB backend ignores them.
  std::vector<std::map<VarId, Rat>> objectives;

  void declare(VarId v, VarSort s) { vars.emplace(v, s); }
  void declareNonneg(VarId v, VarSort s) {
    vars.emplace(v, s);
    nonneg.insert(v);
  }
  void assertAtom(LinearAtom a) { clauses.push_back({std::move(a)}); }
};

struct SolverResult {
  enum Kind { Sat, Unsat, Unknown } kind = Unknown;
  std::map<VarId, Rat> model;
  std::string info;
};

// Backend process died, produced garbage, or could not be started. Distinct
// from Unknown (resource exhaustion).
struct SolverProcessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SolverResult checkSat(const SolverQuery& q, int timeoutMs) = 0;
};

// Exact rational simplex with branch-and-bound for integer unknowns.
class InProcessSolver : public SolverBackend {
 public:
  SolverResult checkSat(const SolverQuery& q, int timeoutMs) override;
};

// Talks SMT-LIB2 v2.6 to an external process over stdin/stdout.
class SmtLibSolver : public SolverBackend {
 public:
  explicit SmtLibSolver(std::string command) : command_(std::move(command)) {}
  SolverResult checkSat(const SolverQuery& q, int timeoutMs) override;

 private:
  std::string command_;
};

// Default backend: SmtLibSolver when LOOPBOUND_SMT_CMD is set, in-process
// otherwise. One instance per process; instances are stateless per query.
SolverBackend& defaultSolver();
int defaultSolverTimeoutMs();  // LOOPBOUND_SOLVER_TIMEOUT_MS or 5000

enum class Entailment { Yes, No, Unknown };

// premise |= (p <= 0) over integer-valued variables. Nonlinear monomials are
// abstracted by fresh integer variables, which keeps Yes sound.
Entailment entailsInt(const Constraint& premise, const Polynomial& conclusionLeqZero);

// Integer satisfiability. maybeSatisfiableInt treats Unknown as satisfiable.
bool maybeSatisfiableInt(const Constraint& c);
bool definitelyUnsatInt(const Constraint& c);

// Shared helper: rewrites polynomial atoms over an extended variable space
// where every nonlinear monomial becomes one fresh variable.
class Linearizer {
 public:
  // Returns the atom p <= 0 as a LinearAtom.
  LinearAtom atom(const Polynomial& p, bool strict = false);
  // The substitute variable for a (nonlinear) monomial.
  VarId varFor(const Monomial& m);
  const std::map<Monomial, VarId>& monomialVars() const { return cache_; }
  void declareAll(SolverQuery& q, VarSort sort) const;

 private:
  std::map<Monomial, VarId> cache_;
};

}  // namespace loopbound
