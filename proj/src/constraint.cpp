#include "loopbound/constraint.hpp"

#include <algorithm>
#include <sstream>

namespace loopbound {

static Int gcdInt(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Polynomial normalizeAtom(Polynomial p) {
  if (p.isConstant()) {
    return p.constantTerm() <= 0 ? Polynomial() : Polynomial::constant(1);
  }
  Int g = 0;
  for (auto& [m, c] : p.terms())
    if (!m.empty()) g = gcdInt(g, c);
  if (g <= 1) return p;
  // sum(g*q_j x_j) + c <= 0  <=>  sum(q_j x_j) <= floor(-c/g) over the integers
  Int c = p.constantTerm();
  Polynomial out;
  for (auto& [m, coeff] : p.terms()) {
    if (m.empty()) continue;
    Polynomial mono;
    Polynomial term = Polynomial::constant(coeff / g);
    for (auto& [v, e] : m) {
      Polynomial pv = Polynomial::variable(v);
      for (int i = 0; i < e; ++i) term = term * pv;
    }
    out = out + term;
  }
  out = out - Polynomial::constant(floorDiv(-c, g));
  return out;
}

void Constraint::insertNormalized(Polynomial p) {
  p = normalizeAtom(std::move(p));
  if (p.isZero()) return;  // trivially true
  // Atoms with the same variable part are comparable: keep only the tightest.
  Polynomial vp = p - Polynomial::constant(p.constantTerm());
  for (auto& a : atoms_) {
    if (a - Polynomial::constant(a.constantTerm()) == vp) {
      if (p.constantTerm() > a.constantTerm()) a = std::move(p);
      return;
    }
  }
  atoms_.push_back(std::move(p));
  std::sort(atoms_.begin(), atoms_.end());
}

void Constraint::addLeqZero(Polynomial p) { insertNormalized(std::move(p)); }
void Constraint::addLeq(const Polynomial& a, const Polynomial& b) { insertNormalized(a - b); }
void Constraint::addLt(const Polynomial& a, const Polynomial& b) { insertNormalized(a - b + Int(1)); }
void Constraint::addGeq(const Polynomial& a, const Polynomial& b) { insertNormalized(b - a); }
void Constraint::addGt(const Polynomial& a, const Polynomial& b) { insertNormalized(b - a + Int(1)); }

void Constraint::addEq(const Polynomial& a, const Polynomial& b) {
  addLeq(a, b);
  addGeq(a, b);
}

void Constraint::conjoin(const Constraint& o) {
  for (auto& a : o.atoms_) insertNormalized(a);
}

bool Constraint::isFalseLiteral() const {
  for (auto& a : atoms_)
    if (a.isConstant() && a.constantTerm() > 0) return true;
  return false;
}

std::set<VarId> Constraint::vars() const {
  std::set<VarId> out;
  for (auto& a : atoms_) {
    auto vs = a.vars();
    out.insert(vs.begin(), vs.end());
  }
  return out;
}

bool Constraint::satisfiedBy(const std::map<VarId, Int>& state) const {
  for (auto& a : atoms_)
    if (a.evaluate(state) > 0) return false;
  return true;
}

Constraint Constraint::composeUpdate(const std::map<VarId, Polynomial>& subst) const {
  Constraint out;
  for (auto& a : atoms_) out.insertNormalized(a.compose(subst));
  return out;
}

std::string Constraint::toString() const {
  if (atoms_.empty()) return "true";
  std::ostringstream os;
  for (size_t i = 0; i < atoms_.size(); ++i) {
    if (i) os << " && ";
    os << atoms_[i].toString() << "<=0";
  }
  return os.str();
}

}  // namespace loopbound
