#include "loopbound/invariants.hpp"

#include <deque>
#include <optional>

namespace loopbound {

namespace {

struct Itv {
  std::optional<Int> lo, hi;  // absent = unbounded

  bool empty() const { return lo && hi && *lo > *hi; }
  static Itv top() { return {}; }
  static Itv point(Int v) { return {v, v}; }

  Itv join(const Itv& o) const {
    Itv out;
    if (lo && o.lo) out.lo = std::min(*lo, *o.lo);
    if (hi && o.hi) out.hi = std::max(*hi, *o.hi);
    return out;
  }
  // Unstable bounds are widened away.
  Itv widen(const Itv& next) const {
    Itv out = next;
    if (lo && (!next.lo || *next.lo < *lo)) out.lo.reset();
    if (!lo) out.lo.reset();
    if (hi && (!next.hi || *next.hi > *hi)) out.hi.reset();
    if (!hi) out.hi.reset();
    return out;
  }
  bool operator==(const Itv& o) const { return lo == o.lo && hi == o.hi; }
};

Itv add(const Itv& a, const Itv& b) {
  Itv out;
  if (a.lo && b.lo) out.lo = *a.lo + *b.lo;
  if (a.hi && b.hi) out.hi = *a.hi + *b.hi;
  return out;
}

Itv mulConst(const Itv& a, const Int& k) {
  if (k == 0) return Itv::point(0);
  Itv out;
  if (k > 0) {
    if (a.lo) out.lo = *a.lo * k;
    if (a.hi) out.hi = *a.hi * k;
  } else {
    if (a.hi) out.lo = *a.hi * k;
    if (a.lo) out.hi = *a.lo * k;
  }
  return out;
}

Itv mul(const Itv& a, const Itv& b) {
  // General interval product; unbounded operands give up unless one side is a
  // point at zero.
  if (a.lo && a.hi && *a.lo == *a.hi) return mulConst(b, *a.lo);
  if (b.lo && b.hi && *b.lo == *b.hi) return mulConst(a, *b.lo);
  if (a.lo && a.hi && b.lo && b.hi) {
    Int c1 = *a.lo * *b.lo, c2 = *a.lo * *b.hi, c3 = *a.hi * *b.lo, c4 = *a.hi * *b.hi;
    return {std::min(std::min(c1, c2), std::min(c3, c4)), std::max(std::max(c1, c2), std::max(c3, c4))};
  }
  return Itv::top();
}

using Env = std::map<VarId, Itv>;  // total on PV for reachable locations

Itv evalPoly(const Polynomial& p, const Env& env) {
  Itv total = Itv::point(0);
  for (auto& [m, c] : p.terms()) {
    Itv term = Itv::point(c);
    for (auto& [v, e] : m) {
      auto it = env.find(v);
      Itv vi = it == env.end() ? Itv::top() : it->second;
      for (int i = 0; i < e; ++i) term = mul(term, vi);
    }
    total = add(total, term);
  }
  return total;
}

// Refines env by single-variable guard atoms c*v + d <= 0.
bool refineByGuard(const Constraint& guard, Env& env) {
  for (auto& a : guard.atoms()) {
    auto vs = a.vars();
    if (vs.size() != 1) continue;
    VarId v = *vs.begin();
    if (a.degree() > 1) continue;
    Int c = a.coeff(v), d = a.constantTerm();
    Itv& vi = env[v];
    if (c > 0) {  // v <= floor(-d/c)
      Int b = floorDiv(-d, c);
      if (!vi.hi || *vi.hi > b) vi.hi = b;
    } else if (c < 0) {  // v >= ceil(-d/c) = ceil(d/(-c))... -c*v <= -d
      Int b = -floorDiv(d, -c);
      if (!vi.lo || *vi.lo < b) vi.lo = b;
    }
    if (vi.empty()) return false;
  }
  return true;
}

}  // namespace

std::map<LocId, Constraint> intervalInvariants(const IntegerProgram& p) {
  std::map<LocId, Env> state;
  std::map<LocId, int> joins;
  Env top;
  for (VarId v : p.programVars()) top[v] = Itv::top();
  state[p.initial()] = top;

  std::deque<LocId> work{p.initial()};
  while (!work.empty()) {
    LocId l = work.front();
    work.pop_front();
    Env src = state.at(l);
    for (int tid : p.outgoing(l)) {
      const Transition& t = p.transition(tid);
      Env env = src;
      for (VarId v : t.guard.vars())
        if (!p.isProgramVar(v)) env[v] = Itv::top();  // temporaries
      if (!refineByGuard(t.guard, env)) continue;     // guard unsatisfiable here
      Env post;
      for (VarId v : p.programVars()) {
        auto it = t.update.find(v);
        post[v] = it == t.update.end() ? env[v] : evalPoly(it->second, env);
      }
      auto cur = state.find(t.tgt);
      if (cur == state.end()) {
        state[t.tgt] = post;
        work.push_back(t.tgt);
        continue;
      }
      Env joined;
      bool changed = false;
      bool widen = ++joins[t.tgt] > 3;
      for (VarId v : p.programVars()) {
        Itv j = cur->second[v].join(post[v]);
        if (widen) j = cur->second[v].widen(j);
        if (!(j == cur->second[v])) changed = true;
        joined[v] = j;
      }
      if (changed) {
        state[t.tgt] = joined;
        work.push_back(t.tgt);
      }
    }
  }

  std::map<LocId, Constraint> out;
  for (auto& [l, env] : state) {
    Constraint c;
    for (VarId v : p.programVars()) {
      auto it = env.find(v);
      if (it == env.end()) continue;
      if (it->second.hi) c.addLeq(Polynomial::variable(v), Polynomial::constant(*it->second.hi));
      if (it->second.lo) c.addGeq(Polynomial::variable(v), Polynomial::constant(*it->second.lo));
    }
    out[l] = c;
  }
  return out;
}

}  // namespace loopbound
