#include "loopbound/sizebound.hpp"

#include <algorithm>
#include <cassert>

#include "loopbound/solver.hpp"

namespace loopbound {

namespace {

Polynomial updateOf(const Transition& t, VarId v) {
  auto it = t.update.find(v);
  return it == t.update.end() ? Polynomial::variable(v) : it->second;
}

bool guardBoundsAbs(const Constraint& guard, const Polynomial& e, const Int& c) {
  // |e| <= c under guard
  return entailsInt(guard, e - Polynomial::constant(c)) == Entailment::Yes &&
         entailsInt(guard, -e - Polynomial::constant(c)) == Entailment::Yes;
}

}  // namespace

LocalSizeBound localSizeBound(const IntegerProgram& p, const Transition& t, VarId v) {
  Polynomial up = updateOf(t, v);
  if (up == Polynomial::variable(v)) return {LocalSizeBound::Identity, 0, {}, up};

  if (up.isConstant()) {
    Int c = up.constantTerm();
    return {LocalSizeBound::Constant, c < 0 ? -c : c, {}, up};
  }

  // Guard-forced constant bound, |eta| <= c with c binary-searched below 2^16.
  if (!t.guard.isTrue()) {
    const Int limit = 65536;
    if (guardBoundsAbs(t.guard, up, limit)) {
      Int lo = 0, hi = limit;
      while (lo < hi) {
        Int mid = (lo + hi) / 2;
        if (guardBoundsAbs(t.guard, up, mid)) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      return {LocalSizeBound::Constant, lo, {}, up};
    }
  }

  bool hasTemp = false;
  for (VarId u : up.vars())
    if (!p.isProgramVar(u)) hasTemp = true;

  // Additive: sum of +-1-coefficient variables plus a constant.
  if (!hasTemp) {
    bool additive = true;
    std::vector<VarId> vars;
    for (auto& [m, c] : up.terms()) {
      if (m.empty()) continue;
      if (m.size() != 1 || m[0].second != 1 || (c != 1 && c != -1)) {
        additive = false;
        break;
      }
      vars.push_back(m[0].first);
    }
    if (additive) {
      Int d = up.constantTerm();
      if (d != 0) {
        // The constant is absorbed when the guard pins eta's sign against it.
        bool absorb = false;
        if (d < 0 && entailsInt(t.guard, -up) == Entailment::Yes) absorb = true;          // eta >= 0
        if (d > 0 && entailsInt(t.guard, up) == Entailment::Yes) absorb = true;           // eta <= 0
        if (absorb) d = 0;
      }
      std::sort(vars.begin(), vars.end());
      return {LocalSizeBound::Additive, d < 0 ? -d : d, vars, up};
    }
    return {LocalSizeBound::Poly, 0, {}, up};
  }
  return {LocalSizeBound::Unbounded, 0, {}, up};
}

namespace {

using RvNode = std::pair<int, VarId>;  // (transition, variable)

struct RvGraph {
  std::vector<RvNode> nodes;
  std::map<RvNode, int> index;
  std::vector<std::vector<int>> succs;  // by node index

  explicit RvGraph(const IntegerProgram& p) {
    for (auto& t : p.transitions())
      for (VarId v : p.programVars()) {
        index[{t.id, v}] = (int)nodes.size();
        nodes.push_back({t.id, v});
      }
    succs.resize(nodes.size());
    for (auto& t : p.transitions()) {
      for (int nid : p.outgoing(t.tgt)) {
        const Transition& nxt = p.transition(nid);
        for (VarId v2 : p.programVars()) {
          auto reads = updateOf(nxt, v2).vars();
          for (VarId v : p.programVars())
            if (reads.count(v)) succs[(size_t)index[{t.id, v}]].push_back(index[{nid, v2}]);
        }
      }
    }
  }
};

struct RvTarjan {
  const RvGraph& g;
  std::vector<int> idx, low, comp;
  std::vector<int> stack;
  std::vector<bool> onStack;
  int counter = 0, comps = 0;

  explicit RvTarjan(const RvGraph& graph)
      : g(graph), idx(graph.nodes.size(), -1), low(graph.nodes.size(), 0), comp(graph.nodes.size(), -1),
        onStack(graph.nodes.size(), false) {}

  void strongconnect(int v) {
    idx[(size_t)v] = low[(size_t)v] = counter++;
    stack.push_back(v);
    onStack[(size_t)v] = true;
    for (int w : g.succs[(size_t)v]) {
      if (idx[(size_t)w] < 0) {
        strongconnect(w);
        low[(size_t)v] = std::min(low[(size_t)v], low[(size_t)w]);
      } else if (onStack[(size_t)w]) {
        low[(size_t)v] = std::min(low[(size_t)v], idx[(size_t)w]);
      }
    }
    if (low[(size_t)v] == idx[(size_t)v]) {
      while (true) {
        int w = stack.back();
        stack.pop_back();
        onStack[(size_t)w] = false;
        comp[(size_t)w] = comps;
        if (w == v) break;
      }
      ++comps;
    }
  }

  void run() {
    for (size_t v = 0; v < g.nodes.size(); ++v)
      if (idx[v] < 0) strongconnect((int)v);
  }
};

struct SizeComputation {
  const IntegerProgram& p;
  const RuntimeBoundTable& rb;
  SizeBoundTable& sb;
  bool improved = false;

  // Incoming size of u right before transition t fires.
  Bound incomingSize(const Transition& t, VarId u) const {
    if (t.src == p.initial()) return Bound::variable(u);
    Bound sum;
    for (int pred : p.incoming(t.src)) sum = sum + sb.get(pred, u);
    return sum;
  }

  void propose(int t, VarId v, const Bound& candidate) {
    Bound old = sb.get(t, v);
    if (candidate.classify() < old.classify()) {
      sb.set(t, v, candidate);
      improved = true;
    } else if (!sb.entries.count({t, v}) && !candidate.isOmega()) {
      sb.set(t, v, candidate);
      improved = true;
    }
  }

  Bound trivialBound(const Transition& t, VarId v) const {
    LocalSizeBound l = localSizeBound(p, t, v);
    switch (l.kind) {
      case LocalSizeBound::Identity:
        return incomingSize(t, v);
      case LocalSizeBound::Constant:
        return Bound::constant(l.constant);
      case LocalSizeBound::Additive: {
        Bound sum;
        for (VarId u : l.vars) sum = sum + incomingSize(t, u);
        return sum + Bound::constant(l.constant);
      }
      case LocalSizeBound::Poly: {
        Bound shape = Bound::fromPolynomialAbs(l.poly);
        std::map<VarId, Bound> subst;
        for (VarId u : shape.vars()) subst[u] = incomingSize(t, u);
        return shape.substitute(subst);
      }
      default:
        return Bound::omega();
    }
  }

  void computeScc(const std::vector<RvNode>& nodes, bool nontrivial) {
    if (!nontrivial) {
      auto& [tid, v] = nodes[0];
      propose(tid, v, trivialBound(p.transition(tid), v));
      return;
    }
    std::set<RvNode> inScc(nodes.begin(), nodes.end());
    // Every cycle node must keep its value within a bounded drift: identity or
    // v' = (+-)u + d for a single variable u.
    Bound total;
    bool ok = true;
    for (auto& [tid, v] : nodes) {
      const Transition& t = p.transition(tid);
      LocalSizeBound l = localSizeBound(p, t, v);
      std::vector<VarId> reads;
      if (l.kind == LocalSizeBound::Identity) {
        reads.push_back(v);  // no drift
      } else if (l.kind == LocalSizeBound::Constant) {
        total = total + Bound::constant(l.constant);
      } else if (l.kind == LocalSizeBound::Additive && l.vars.size() == 1) {
        if (l.constant != 0) total = total + rb.get(tid) * Bound::constant(l.constant);
        reads = l.vars;
      } else {
        ok = false;
        break;
      }
      // Sizes flowing into this node from outside the component.
      for (VarId u : reads) {
        if (t.src == p.initial()) {
          total = total + Bound::variable(u);
          continue;
        }
        for (int pred : p.incoming(t.src)) {
          if (inScc.count({pred, u})) continue;
          total = total + sb.get(pred, u);
        }
      }
    }
    Bound result = ok ? total : Bound::omega();
    for (auto& [tid, v] : nodes) propose(tid, v, result);
  }
};

}  // namespace

bool computeSizeBounds(const IntegerProgram& p, const RuntimeBoundTable& rb, const std::set<int>& transitions,
                       SizeBoundTable& sb) {
  RvGraph g(p);
  RvTarjan tarjan(g);
  tarjan.run();
  // Group nodes per component; Tarjan numbers components in reverse
  // topological order, so iterate components from the last to the first.
  std::vector<std::vector<RvNode>> comps((size_t)tarjan.comps);
  std::vector<bool> nontrivial((size_t)tarjan.comps, false);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    int c = tarjan.comp[i];
    comps[(size_t)c].push_back(g.nodes[i]);
    for (int w : g.succs[i])
      if (tarjan.comp[(size_t)w] == c) nontrivial[(size_t)c] = true;
  }
  SizeComputation comp{p, rb, sb};
  for (int c = tarjan.comps - 1; c >= 0; --c) {
    auto& nodes = comps[(size_t)c];
    std::sort(nodes.begin(), nodes.end());
    bool relevant = false;
    for (auto& [tid, v] : nodes)
      if (transitions.count(tid)) relevant = true;
    if (!relevant) continue;
    comp.computeScc(nodes, nontrivial[(size_t)c]);
  }
  return comp.improved;
}

}  // namespace loopbound
