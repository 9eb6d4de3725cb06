#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loopbound/polynomial.hpp"

namespace loopbound {

// Conjunction of atoms p <= 0 with integer polynomial p. Relations other than
// <= are normalized at construction using the integer shift (e1 > e2 becomes
// e2 + 1 <= e1). Kept canonical: atoms gcd-reduced with integer tightening,
// sorted, deduplicated, trivially-true atoms dropped. An unsatisfiable
// constant atom is kept as the canonical 1 <= 0.
class Constraint {
 public:
  Constraint() = default;
  static Constraint top() { return Constraint(); }

  void addLeqZero(Polynomial p);               // p <= 0
  void addLeq(const Polynomial& a, const Polynomial& b);  // a <= b
  void addLt(const Polynomial& a, const Polynomial& b);   // a <  b
  void addGeq(const Polynomial& a, const Polynomial& b);  // a >= b
  void addGt(const Polynomial& a, const Polynomial& b);   // a >  b
  void addEq(const Polynomial& a, const Polynomial& b);   // a ==  b
  void conjoin(const Constraint& o);

  const std::vector<Polynomial>& atoms() const { return atoms_; }
  bool isTrue() const { return atoms_.empty(); }
  // True iff the constraint contains a constant false atom.
  bool isFalseLiteral() const;

  std::set<VarId> vars() const;

  bool satisfiedBy(const std::map<VarId, Int>& state) const;

  Constraint composeUpdate(const std::map<VarId, Polynomial>& subst) const;

  bool operator==(const Constraint& o) const { return atoms_ == o.atoms_; }
  bool operator<(const Constraint& o) const { return atoms_ < o.atoms_; }

  std::string toString() const;  // "x-1<=0 && ..."; "true" when empty

 private:
  void insertNormalized(Polynomial p);
  std::vector<Polynomial> atoms_;
};

// Canonical form of a single atom p <= 0: divide by the gcd of all
// coefficients; if the variable part has gcd g > 1, apply integer tightening.
Polynomial normalizeAtom(Polynomial p);

}  // namespace loopbound
