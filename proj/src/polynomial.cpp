#include "loopbound/polynomial.hpp"

#include <sstream>
#include <stdexcept>

namespace loopbound {

int monomialDegree(const Monomial& m) {
  int d = 0;
  for (auto& [v, e] : m) d += e;
  return d;
}

static Monomial mulMono(const Monomial& a, const Monomial& b) {
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

Polynomial Polynomial::constant(Int c) {
  Polynomial p;
  if (c != 0) p.terms_.emplace(Monomial{}, std::move(c));
  return p;
}

Polynomial Polynomial::variable(VarId v) {
  Polynomial p;
  p.terms_.emplace(Monomial{{v, 1}}, Int(1));
  return p;
}

bool Polynomial::isConstant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Int Polynomial::constantTerm() const {
  auto it = terms_.find(Monomial{});
  return it == terms_.end() ? Int(0) : it->second;
}

Int Polynomial::coeff(VarId v) const {
  auto it = terms_.find(Monomial{{v, 1}});
  return it == terms_.end() ? Int(0) : it->second;
}

int Polynomial::degree() const {
  int d = 0;
  for (auto& [m, c] : terms_) d = std::max(d, monomialDegree(m));
  return d;
}

std::set<VarId> Polynomial::vars() const {
  std::set<VarId> out;
  for (auto& [m, c] : terms_)
    for (auto& [v, e] : m) out.insert(v);
  return out;
}

void Polynomial::add(const Monomial& m, const Int& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial out = *this;
  for (auto& [m, c] : o.terms_) out.add(m, c);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial out = *this;
  for (auto& [m, c] : o.terms_) out.add(m, -c);
  return out;
}

Polynomial Polynomial::operator-() const {
  Polynomial out;
  for (auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial out;
  for (auto& [m1, c1] : terms_)
    for (auto& [m2, c2] : o.terms_) out.add(mulMono(m1, m2), c1 * c2);
  return out;
}

Polynomial Polynomial::operator*(const Int& k) const {
  Polynomial out;
  if (k == 0) return out;
  for (auto& [m, c] : terms_) out.terms_.emplace(m, c * k);
  return out;
}

Polynomial Polynomial::compose(const std::map<VarId, Polynomial>& subst) const {
  Polynomial out;
  for (auto& [m, c] : terms_) {
    Polynomial term = Polynomial::constant(c);
    for (auto& [v, e] : m) {
      auto it = subst.find(v);
      Polynomial base = it == subst.end() ? Polynomial::variable(v) : it->second;
      for (int i = 0; i < e; ++i) term = term * base;
    }
    out = out + term;
  }
  return out;
}

Int Polynomial::evaluate(const std::map<VarId, Int>& state) const {
  Int total = 0;
  for (auto& [m, c] : terms_) {
    Int val = c;
    for (auto& [v, e] : m) {
      auto it = state.find(v);
      if (it == state.end()) throw std::invalid_argument("unassigned variable " + symbols::varName(v));
      for (int i = 0; i < e; ++i) val *= it->second;
    }
    total += val;
  }
  return total;
}

std::vector<std::pair<std::string, int>> monomialNameKey(const Monomial& m) {
  std::vector<std::pair<std::string, int>> key;
  for (auto& [v, e] : m) key.emplace_back(symbols::varName(v), e);
  std::sort(key.begin(), key.end());
  return key;
}

static void printMono(std::ostringstream& os, const Monomial& m) {
  bool first = true;
  for (auto& [name, e] : monomialNameKey(m)) {
    if (!first) os << "*";
    first = false;
    os << name;
    if (e > 1) os << "^" << e;
  }
}

std::string Polynomial::toString() const {
  if (terms_.empty()) return "0";
  // Highest degree first, then monomials by variable name (the interning
  // order of variable ids is an implementation detail).
  std::vector<std::pair<Monomial, Int>> sorted(terms_.begin(), terms_.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    int da = monomialDegree(a.first), db = monomialDegree(b.first);
    if (da != db) return da > db;
    return monomialNameKey(a.first) < monomialNameKey(b.first);
  });
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : sorted) {
    Int coeff = c;
    if (first) {
      if (coeff < 0) {
        os << "-";
        coeff = -coeff;
      }
    } else {
      os << (coeff < 0 ? "-" : "+");
      if (coeff < 0) coeff = -coeff;
    }
    first = false;
    if (m.empty()) {
      os << coeff;
    } else {
      if (coeff != 1) os << coeff << "*";
      printMono(os, m);
    }
  }
  return os.str();
}

}  // namespace loopbound
