#include "loopbound/bound.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace loopbound {

std::string AsymClass::toString() const {
  switch (kind) {
    case Infinite: return "INF";
    case Exp: return "O(EXP)";
    default: break;
  }
  if (degree == 0) return "O(1)";
  if (degree == 1) return "O(n)";
  return "O(n^" + std::to_string(degree) + ")";
}

bool Bound::Term::operator<(const Term& o) const {
  if (omegaFactor != o.omegaFactor) return omegaFactor;  // omega terms first
  bool e1 = !exps.empty(), e2 = !o.exps.empty();
  if (e1 != e2) return e1;  // exponential terms next
  int d1 = monomialDegree(mono), d2 = monomialDegree(o.mono);
  if (d1 != d2) return d1 > d2;  // higher degree first
  if (mono != o.mono) return monomialNameKey(mono) < monomialNameKey(o.mono);
  if (exps != o.exps) return exps < o.exps;
  return coeff < o.coeff;
}

Bound Bound::omega() {
  Bound b;
  b.terms_.push_back({Int(1), {}, {}, true});
  return b;
}

Bound Bound::constant(Int c) {
  if (c < 0) throw std::invalid_argument("bound constants must be nonnegative");
  Bound b;
  if (c != 0) b.terms_.push_back({std::move(c), {}, {}, false});
  return b;
}

Bound Bound::variable(VarId v) {
  Bound b;
  b.terms_.push_back({Int(1), Monomial{{v, 1}}, {}, false});
  return b;
}

Bound Bound::fromPolynomialAbs(const Polynomial& p) {
  Bound b;
  for (auto& [m, c] : p.terms()) b.terms_.push_back({c < 0 ? Int(-c) : c, m, {}, false});
  b.normalize();
  return b;
}

Bound overapproxPoly(const Polynomial& p, const std::vector<VarId>& pv) {
  for (VarId v : p.vars())
    if (std::find(pv.begin(), pv.end(), v) == pv.end())
      throw std::invalid_argument("overapproxPoly: temporary variable " + symbols::varName(v));
  return Bound::fromPolynomialAbs(p);
}

bool Bound::isOmega() const {
  return terms_.size() == 1 && terms_[0].omegaFactor && terms_[0].mono.empty() && terms_[0].exps.empty();
}

bool Bound::isConstant() const {
  if (terms_.empty()) return true;
  return terms_.size() == 1 && terms_[0].mono.empty() && terms_[0].exps.empty() && !terms_[0].omegaFactor;
}

std::optional<Int> Bound::constantValue() const {
  if (!isConstant()) return std::nullopt;
  return terms_.empty() ? Int(0) : terms_[0].coeff;
}

void Bound::addTerm(const Term& t) {
  if (t.coeff == 0) return;
  for (auto& u : terms_) {
    if (u.sameShape(t)) {
      u.coeff += t.coeff;
      return;
    }
  }
  terms_.push_back(t);
}

void Bound::normalize() {
  std::vector<Term> in = std::move(terms_);
  terms_.clear();
  for (auto& t : in) {
    // A constant omega term absorbs the entire sum.
    if (t.omegaFactor && t.mono.empty() && t.exps.empty() && t.coeff != 0) {
      terms_ = {{Int(1), {}, {}, true}};
      return;
    }
    addTerm(t);
  }
  std::sort(terms_.begin(), terms_.end());
}

Bound Bound::operator+(const Bound& o) const {
  Bound out = *this;
  for (auto& t : o.terms_) out.terms_.push_back(t);
  out.normalize();
  return out;
}

static std::vector<Bound::ExpFactor> mulExps(const std::vector<Bound::ExpFactor>& a,
                                             const std::vector<Bound::ExpFactor>& b) {
  // k^e1 * k^e2 = k^(e1+e2)
  std::vector<Bound::ExpFactor> out = a;
  for (auto& f : b) {
    bool merged = false;
    for (auto& g : out) {
      if (g.base == f.base) {
        g.exponent = g.exponent + f.exponent;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

static Monomial mulMonoB(const Monomial& a, const Monomial& b) {
  Monomial out;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

Bound Bound::operator*(const Bound& o) const {
  if (isZero() || o.isZero()) return Bound();
  Bound out;
  for (auto& t : terms_) {
    for (auto& u : o.terms_) {
      Term prod;
      prod.coeff = t.coeff * u.coeff;
      prod.mono = mulMonoB(t.mono, u.mono);
      prod.exps = mulExps(t.exps, u.exps);
      prod.omegaFactor = t.omegaFactor || u.omegaFactor;
      out.terms_.push_back(prod);
    }
  }
  out.normalize();
  return out;
}

Bound Bound::pow(const Int& base, const Bound& exponent) {
  if (base < 0) throw std::invalid_argument("exponential base must be in N");
  if (base == 0 || base == 1) return constant(1);  // folded; 0^b reads as 1 to stay monotone
  if (exponent.isOmega()) return omega();
  if (auto c = exponent.constantValue()) {
    Int v = 1;
    for (Int i = 0; i < *c; ++i) v *= base;
    return constant(v);
  }
  Bound b;
  b.terms_.push_back({Int(1), {}, {ExpFactor{base, exponent}}, false});
  return b;
}

Bound Bound::substitute(const std::map<VarId, Bound>& m) const {
  Bound out;  // zero
  for (auto& t : terms_) {
    Bound term = constant(t.coeff);
    if (t.omegaFactor) term = term * omega();
    for (auto& [v, e] : t.mono) {
      auto it = m.find(v);
      Bound base = it == m.end() ? variable(v) : it->second;
      for (int i = 0; i < e; ++i) term = term * base;
    }
    for (auto& f : t.exps) term = term * pow(f.base, f.exponent.substitute(m));
    out = out + term;
  }
  return out;
}

ExtNat Bound::evalAbs(const std::map<VarId, Int>& state) const {
  Int total = 0;
  bool infinite = false;
  for (auto& t : terms_) {
    Int val = t.coeff;
    for (auto& [v, e] : t.mono) {
      auto it = state.find(v);
      if (it == state.end()) throw std::invalid_argument("unassigned variable " + symbols::varName(v));
      Int a = it->second < 0 ? Int(-it->second) : it->second;
      for (int i = 0; i < e; ++i) val *= a;
    }
    if (val == 0) continue;  // 0 * omega = 0, 0 * k^e = 0
    bool termInf = t.omegaFactor;
    for (auto& f : t.exps) {
      ExtNat e = f.exponent.evalAbs(state);
      if (e.omega) {
        termInf = true;
        break;
      }
      if (e.value > 4096) throw std::overflow_error("exponent too large to evaluate");
      Int pw = 1;
      for (Int i = 0; i < e.value; ++i) pw *= f.base;
      val *= pw;
    }
    if (termInf) {
      infinite = true;
    } else {
      total += val;
    }
  }
  return infinite ? ExtNat::inf() : ExtNat::of(total);
}

int Bound::polyDegree() const {
  int d = 0;
  for (auto& t : terms_)
    if (t.exps.empty() && !t.omegaFactor) d = std::max(d, monomialDegree(t.mono));
  return d;
}

AsymClass Bound::classify() const {
  bool anyExp = false;
  int deg = 0;
  for (auto& t : terms_) {
    if (t.omegaFactor) return AsymClass::infinite();
    if (!t.exps.empty()) {
      anyExp = true;
    } else {
      deg = std::max(deg, monomialDegree(t.mono));
    }
  }
  return anyExp ? AsymClass::exp() : AsymClass::poly(deg);
}

std::set<VarId> Bound::vars() const {
  std::set<VarId> out;
  for (auto& t : terms_) {
    for (auto& [v, e] : t.mono) out.insert(v);
    for (auto& f : t.exps) {
      auto vs = f.exponent.vars();
      out.insert(vs.begin(), vs.end());
    }
  }
  return out;
}

bool Bound::operator==(const Bound& o) const { return terms_ == o.terms_; }

bool Bound::operator<(const Bound& o) const { return terms_ < o.terms_; }

std::string Bound::toString() const {
  if (isOmega()) return "INF";
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& t : terms_) {
    if (!first) os << "+";
    first = false;
    bool needCoeff = t.coeff != 1 || (t.mono.empty() && t.exps.empty() && !t.omegaFactor);
    bool printed = false;
    if (needCoeff) {
      os << t.coeff;
      printed = true;
    }
    if (t.omegaFactor) {
      if (printed) os << "*";
      os << "INF";
      printed = true;
    }
    for (auto& f : t.exps) {
      if (printed) os << "*";
      os << f.base << "^(" << f.exponent.toString() << ")";
      printed = true;
    }
    for (auto& [name, e] : monomialNameKey(t.mono)) {
      if (printed) os << "*";
      os << name;
      if (e > 1) os << "^" << e;
      printed = true;
    }
  }
  return os.str();
}

}  // namespace loopbound
