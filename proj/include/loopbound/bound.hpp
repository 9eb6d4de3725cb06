#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loopbound/polynomial.hpp"

namespace loopbound {

// Extended natural: value in N or omega.
struct ExtNat {
  bool omega = false;
  Int value = 0;

  static ExtNat inf() { return {true, 0}; }
  static ExtNat of(Int v) { return {false, std::move(v)}; }
  bool operator==(const ExtNat& o) const { return omega == o.omega && (omega || value == o.value); }
  bool operator<=(const ExtNat& o) const { return o.omega || (!omega && value <= o.value); }
  std::string toString() const { return omega ? "INF" : value.str(); }
};

struct AsymClass {
  enum Kind { Poly = 0, Exp = 1, Infinite = 2 };
  Kind kind = Poly;
  int degree = 0;  // meaningful for Poly

  static AsymClass poly(int d) { return {Poly, d}; }
  static AsymClass exp() { return {Exp, 0}; }
  static AsymClass infinite() { return {Infinite, 0}; }

  bool operator==(const AsymClass& o) const {
    return kind == o.kind && (kind != Poly || degree == o.degree);
  }
  bool operator<(const AsymClass& o) const {
    if (kind != o.kind) return kind < o.kind;
    return kind == Poly && degree < o.degree;
  }
  bool isLinearOrConst() const { return kind == Poly && degree <= 1; }
  std::string toString() const;
};

// The bound algebra: nonnegative integer constants, omega, program variables,
// +, *, and k^b for k in N. Kept in a canonical sum-of-terms form where a term
// is coeff * monomial * product of exponentials with non-constant exponents.
class Bound {
 public:
  struct ExpFactor;
  struct Term;

  Bound() = default;  // zero
  static Bound omega();
  static Bound constant(Int c);  // requires c >= 0
  static Bound variable(VarId v);
  static Bound fromPolynomialAbs(const Polynomial& p);  // |coeff| per monomial

  bool isOmega() const;  // the constant omega
  bool isZero() const { return terms_.empty(); }
  bool isConstant() const;
  std::optional<Int> constantValue() const;

  Bound operator+(const Bound& o) const;
  Bound operator*(const Bound& o) const;
  static Bound pow(const Int& base, const Bound& exponent);

  Bound substitute(const std::map<VarId, Bound>& m) const;
  ExtNat evalAbs(const std::map<VarId, Int>& state) const;
  AsymClass classify() const;
  int polyDegree() const;

  std::set<VarId> vars() const;

  bool operator==(const Bound& o) const;
  bool operator<(const Bound& o) const;

  std::string toString() const;

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
  void addTerm(const Term& t);
  void normalize();
};

struct Bound::ExpFactor {
  Int base;       // >= 2
  Bound exponent;  // non-constant
  bool operator==(const ExpFactor& o) const { return base == o.base && exponent == o.exponent; }
  bool operator<(const ExpFactor& o) const {
    if (base != o.base) return base < o.base;
    return exponent < o.exponent;
  }
};

struct Bound::Term {
  Int coeff;  // > 0
  Monomial mono;
  std::vector<ExpFactor> exps;  // sorted
  // An omega factor: the term evaluates to omega unless the rest of the term
  // evaluates to 0 (the 0*omega = 0 convention).
  bool omegaFactor = false;

  bool sameShape(const Term& o) const {
    return mono == o.mono && exps == o.exps && omegaFactor == o.omegaFactor;
  }
  bool operator==(const Term& o) const { return coeff == o.coeff && sameShape(o); }
  bool operator<(const Term& o) const;
};

// Over-approximation of a program-variable polynomial per Sec. 3.2: every
// coefficient replaced by its absolute value. Throws if p mentions a variable
// outside pv.
Bound overapproxPoly(const Polynomial& p, const std::vector<VarId>& pv);

}  // namespace loopbound
