#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "loopbound/numbers.hpp"
#include "loopbound/symbols.hpp"

namespace loopbound {

// A monomial is a sorted list of (variable, exponent>0) pairs; empty = 1.
using Monomial = std::vector<std::pair<VarId, int>>;

int monomialDegree(const Monomial& m);

// Name-based canonical key, independent of variable-id interning order.
std::vector<std::pair<std::string, int>> monomialNameKey(const Monomial& m);

// Multivariate polynomial with integer coefficients, kept in canonical form
// (no zero coefficients, monomials sorted), so operator== is mathematical
// equality.
class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(Int c);
  static Polynomial variable(VarId v);

  const std::map<Monomial, Int>& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }
  bool isConstant() const;
  Int constantTerm() const;
  // Coefficient of a plain variable (degree-1 monomial).
  Int coeff(VarId v) const;
  int degree() const;
  bool isLinear() const { return degree() <= 1; }

  std::set<VarId> vars() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(const Int& k) const;
  Polynomial operator+(const Int& k) const { return *this + constant(k); }
  Polynomial operator-(const Int& k) const { return *this - constant(k); }

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }
  bool operator!=(const Polynomial& o) const { return terms_ != o.terms_; }
  bool operator<(const Polynomial& o) const { return terms_ < o.terms_; }

  // Substitutes each variable by the mapped polynomial (identity if absent).
  Polynomial compose(const std::map<VarId, Polynomial>& subst) const;

  Int evaluate(const std::map<VarId, Int>& state) const;

  std::string toString() const;

 private:
  void add(const Monomial& m, const Int& c);
  std::map<Monomial, Int> terms_;
};

}  // namespace loopbound
