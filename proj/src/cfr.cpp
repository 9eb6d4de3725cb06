#include "loopbound/cfr.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <sstream>

#include "loopbound/solver.hpp"

namespace loopbound {

namespace {

constexpr size_t kAtomCap = 64;    // max atoms kept by projection
constexpr size_t kLayerCap = 24;   // max atoms per abstraction layer

// --- Fourier-Motzkin projection ----------------------------------------------

// Atoms are integer polynomials p <= 0 treated as linear over an extended
// variable space where each nonlinear monomial is one variable.
struct FmSpace {
  std::map<Monomial, VarId> monoVars;

  Polynomial linearize(const Polynomial& p) {
    Polynomial out;
    for (auto& [m, c] : p.terms()) {
      if (m.empty()) {
        out = out + Polynomial::constant(c);
      } else if (m.size() == 1 && m[0].second == 1) {
        out = out + Polynomial::variable(m[0].first) * c;
      } else {
        auto it = monoVars.find(m);
        if (it == monoVars.end()) {
          static int counter = 0;
          it = monoVars.emplace(m, symbols::var("$fm" + std::to_string(counter++))).first;
        }
        out = out + Polynomial::variable(it->second) * c;
      }
    }
    return out;
  }

  // Monomial variables that mention any of the given base variables.
  std::set<VarId> touching(const std::set<VarId>& base) const {
    std::set<VarId> out;
    for (auto& [m, mv] : monoVars)
      for (auto& [v, e] : m)
        if (base.count(v)) {
          out.insert(mv);
          break;
        }
    return out;
  }
};

std::vector<Polynomial> tidyAtoms(std::vector<Polynomial> atoms) {
  std::vector<Polynomial> out;
  for (auto& a : atoms) {
    Polynomial n = normalizeAtom(a);
    if (n.isZero()) continue;
    out.push_back(std::move(n));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.size() > kAtomCap) out.resize(kAtomCap);  // dropping atoms only weakens
  return out;
}

// Eliminates `v` from the atom set (all atoms linear in v).
std::vector<Polynomial> eliminate(const std::vector<Polynomial>& atoms, VarId v) {
  std::vector<Polynomial> keep, lower, upper;  // lower: coeff<0, upper: coeff>0
  for (auto& a : atoms) {
    Int c = a.coeff(v);
    if (c == 0) {
      keep.push_back(a);
    } else if (c > 0) {
      upper.push_back(a);
    } else {
      lower.push_back(a);
    }
  }
  for (auto& up : upper) {
    for (auto& lo : lower) {
      Int cu = up.coeff(v), cl = -lo.coeff(v);
      keep.push_back(up * cl + lo * cu);
    }
  }
  return tidyAtoms(std::move(keep));
}

}  // namespace

Constraint propagate(const Constraint& phi, const Transition& t, const std::vector<VarId>& pvars) {
  FmSpace space;
  std::vector<Polynomial> atoms;
  for (auto& a : phi.atoms()) atoms.push_back(space.linearize(a));
  for (auto& a : t.guard.atoms()) atoms.push_back(space.linearize(a));

  // Primed variables for the post-state.
  std::map<VarId, VarId> primed;
  static int counter = 0;
  for (VarId v : pvars) primed[v] = symbols::var("$post" + std::to_string(counter++));
  for (VarId v : pvars) {
    auto it = t.update.find(v);
    Polynomial up = it == t.update.end() ? Polynomial::variable(v) : it->second;
    Polynomial lin = space.linearize(up);
    // v' = up; skipping the equation (never required) would only weaken.
    Polynomial eq = Polynomial::variable(primed[v]) - lin;
    atoms.push_back(eq);
    atoms.push_back(-eq);
  }
  atoms = tidyAtoms(std::move(atoms));

  // Eliminate everything except the primed variables.
  std::set<VarId> elim;
  for (auto& a : atoms)
    for (VarId v : a.vars()) elim.insert(v);
  for (auto& [v, pv] : primed) elim.erase(pv);
  for (VarId v : elim) atoms = eliminate(atoms, v);

  // Rename primed back to plain program variables.
  std::map<VarId, Polynomial> rename;
  for (auto& [v, pv] : primed) rename[pv] = Polynomial::variable(v);
  Constraint out;
  for (auto& a : atoms) out.addLeqZero(a.compose(rename));
  return out;
}

Constraint abstractWith(const Layer& atoms, const Constraint& phi) {
  Constraint out;
  for (auto& a : atoms)
    if (entailsInt(phi, a) == Entailment::Yes) out.addLeqZero(a);
  return out;
}

Layers buildAbstractionLayer(const IntegerProgram& p, const std::set<int>& scc) {
  Layers layers;
  std::set<VarId> pv(p.programVars().begin(), p.programVars().end());
  auto pvOnly = [&](const Polynomial& a) {
    for (VarId v : a.vars())
      if (!pv.count(v)) return false;
    return true;
  };
  for (int tid : scc) {
    const Transition& t = p.transition(tid);
    for (LocId l : {t.src, t.tgt}) {
      for (auto& a : t.guard.atoms())
        if (pvOnly(a)) layers[l].push_back(a);
    }
    // One-step postcondition atoms land at the target location.
    Constraint post = propagate(Constraint::top(), t, p.programVars());
    for (auto& a : post.atoms()) layers[t.tgt].push_back(a);
  }
  for (auto& [l, atoms] : layers) {
    atoms = tidyAtoms(std::move(atoms));
    if (atoms.size() > kLayerCap) atoms.resize(kLayerCap);
  }
  return layers;
}

// --- Algorithm: whole-SCC partial evaluation ---------------------------------

namespace {

std::string mangleAtoms(const std::vector<Polynomial>& atoms) {
  if (atoms.empty()) return "true";
  std::ostringstream os;
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (i) os << "__";
    std::string s = atoms[i].toString() + "_le_0";
    std::string clean;
    for (char c : s) {
      if (std::isalnum((unsigned char)c) || c == '_') {
        clean += c;
      } else if (c == '-') {
        clean += "_m_";
      } else if (c == '+') {
        clean += "_p_";
      }
    }
    os << clean;
  }
  return os.str();
}

using LabelKey = std::vector<Polynomial>;  // canonical sorted atom set

struct PeState {
  const IntegerProgram& p;
  const std::set<int>& scc;
  const Layers& layers;
  int* nextId;

  std::map<std::pair<LocId, LabelKey>, LocId> pairLoc;
  std::map<LocId, std::pair<LocId, LabelKey>> owner;  // collision detection
  std::map<LocId, LabeledLoc> labels;
  std::vector<Transition> result;
  std::vector<std::pair<Transition, std::string>> removed;
  std::map<int, int> originOf;

  LocId locFor(LocId base, const LabelKey& key) {
    auto it = pairLoc.find({base, key});
    if (it != pairLoc.end()) return it->second;
    // Interning by the canonical mangled name keeps repeated analyses of the
    // same program on identical location tokens; a mangling collision inside
    // one refinement falls back to a fresh token.
    LocId named = symbols::loc(symbols::locName(base) + "__" + mangleAtoms(key));
    auto own = owner.find(named);
    LocId fresh = own == owner.end() ? named : symbols::freshLoc(symbols::locName(named));
    owner.emplace(fresh, std::make_pair(base, key));
    pairLoc.emplace(std::make_pair(base, key), fresh);
    Constraint label;
    for (auto& a : key) label.addLeqZero(a);
    labels.emplace(fresh, LabeledLoc{base, label});
    return fresh;
  }
};

}  // namespace

Refinement partialEvaluateScc(const IntegerProgram& p, const std::set<int>& scc, const Layers* layersOpt) {
  if (scc.empty()) throw std::invalid_argument("partialEvaluateScc: empty SCC");
  Layers harvested;
  if (!layersOpt) harvested = buildAbstractionLayer(p, scc);
  const Layers& layers = layersOpt ? *layersOpt : harvested;

  int nextId = p.maxTransitionId() + 1;
  PeState st{p, scc, layers, &nextId};

  std::set<LocId> sccLocs;
  for (int tid : scc) {
    sccLocs.insert(p.transition(tid).src);
    sccLocs.insert(p.transition(tid).tgt);
  }

  auto entry = entryTransitions(p, scc);
  std::deque<std::pair<LocId, LabelKey>> work;
  std::set<std::pair<LocId, LabelKey>> seen;
  for (LocId l : entry.entryLocations) {
    std::pair<LocId, LabelKey> pair{l, {}};
    st.locFor(l, {});
    seen.insert(pair);
    work.push_back(pair);
  }

  // Entry transitions are redirected to <l', true>, keeping their ids.
  std::set<int> entrySet(entry.entryTransitions.begin(), entry.entryTransitions.end());
  for (int tid : entry.entryTransitions) {
    Transition t = p.transition(tid);
    t.tgt = st.locFor(t.tgt, {});
    st.result.push_back(std::move(t));
    st.originOf[tid] = tid;
  }

  while (!work.empty()) {
    auto [base, key] = work.front();
    work.pop_front();
    LocId self = st.locFor(base, key);
    Constraint phi = st.labels.at(self).label;

    for (int tid : p.outgoing(base)) {
      const Transition& t = p.transition(tid);
      Constraint newGuard = phi;
      newGuard.conjoin(t.guard);
      bool inScc = scc.count(tid) > 0;
      Transition copy;
      copy.id = (*st.nextId)++;
      copy.src = self;
      copy.guard = newGuard;
      copy.update = t.update;
      if (definitelyUnsatInt(newGuard)) {
        copy.tgt = t.tgt;  // target irrelevant; the transition is dropped
        st.removed.emplace_back(copy, "unsat-guard");
        --(*st.nextId);
        continue;
      }
      if (inScc) {
        Constraint phiNew = propagate(phi, t, p.programVars());
        Layer layer;
        auto lit = layers.find(t.tgt);
        if (lit != layers.end()) layer = lit->second;
        Constraint lab = abstractWith(layer, phiNew);
        LabelKey labKey = lab.atoms();
        copy.tgt = st.locFor(t.tgt, labKey);
        std::pair<LocId, LabelKey> pairKey{t.tgt, labKey};
        if (seen.insert(pairKey).second) work.push_back(pairKey);
      } else {
        copy.tgt = t.tgt;  // leaves the SCC
      }
      st.originOf[copy.id] = tid;
      st.result.push_back(std::move(copy));
    }
  }

  // Assemble: all locations and transitions not touching the SCC survive.
  std::vector<Transition> transitions;
  for (auto& t : p.transitions()) {
    if (sccLocs.count(t.src) || sccLocs.count(t.tgt)) continue;
    if (entrySet.count(t.id)) continue;
    transitions.push_back(t);
  }
  for (auto& t : st.result) transitions.push_back(t);

  std::set<LocId> locs;
  locs.insert(p.initial());
  for (auto& t : transitions) {
    locs.insert(t.src);
    locs.insert(t.tgt);
  }
  for (LocId l : p.locations())
    if (!sccLocs.count(l)) locs.insert(l);

  Refinement ref;
  ref.program = IntegerProgram(p.programVars(), {locs.begin(), locs.end()}, p.initial(), std::move(transitions));
  ref.labels = std::move(st.labels);
  ref.removed = std::move(st.removed);
  ref.originOf = std::move(st.originOf);
  ref.refinedOrigins = scc;

  // Cleanup: drop unsatisfiable guards, then unreachable parts, to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Transition> keep;
    for (auto& t : ref.program.transitions()) {
      if (t.guard.isFalseLiteral() || definitelyUnsatInt(t.guard)) {
        ref.removed.emplace_back(t, "unsat-guard");
        changed = true;
      } else {
        keep.push_back(t);
      }
    }
    IntegerProgram pruned(ref.program.programVars(), ref.program.locations(), ref.program.initial(),
                          std::move(keep));
    auto reach = reachableLocations(pruned);
    std::vector<Transition> keep2;
    for (auto& t : pruned.transitions()) {
      if (!reach.count(t.src)) {
        ref.removed.emplace_back(t, "unreachable");
        changed = true;
      } else {
        keep2.push_back(t);
      }
    }
    std::vector<LocId> locs2;
    for (LocId l : pruned.locations())
      if (reach.count(l)) locs2.push_back(l);
    ref.program = IntegerProgram(pruned.programVars(), locs2, pruned.initial(), std::move(keep2));
  }
  return ref;
}

// --- Algorithm: sub-SCC partial evaluation -----------------------------------

namespace {

// Shortest return path target -> source inside the SCC, ties broken by
// transition-id order; returns the transition ids along the path.
std::vector<int> shortestReturnPath(const IntegerProgram& p, const std::set<int>& scc, LocId from, LocId to) {
  if (from == to) return {};
  std::map<LocId, int> parentEdge;
  std::deque<LocId> queue{from};
  std::set<LocId> visited{from};
  while (!queue.empty()) {
    LocId l = queue.front();
    queue.pop_front();
    std::vector<int> outs;
    for (int tid : p.outgoing(l))
      if (scc.count(tid)) outs.push_back(tid);
    std::sort(outs.begin(), outs.end());
    for (int tid : outs) {
      LocId w = p.transition(tid).tgt;
      if (visited.count(w)) continue;
      visited.insert(w);
      parentEdge[w] = tid;
      if (w == to) {
        std::vector<int> path;
        LocId cur = to;
        while (cur != from) {
          int e = parentEdge.at(cur);
          path.push_back(e);
          cur = p.transition(e).src;
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(w);
    }
  }
  throw std::logic_error("no return path inside the SCC");
}

}  // namespace

Refinement partialEvaluateSubScc(const IntegerProgram& p, const std::set<int>& tCfr) {
  if (tCfr.empty()) throw std::invalid_argument("partialEvaluateSubScc: empty transition set");
  auto sccs = sccsTopological(p);
  const std::vector<int>* home = nullptr;
  for (auto& scc : sccs) {
    bool any = false, all = true;
    for (int tid : tCfr) {
      bool in = std::find(scc.begin(), scc.end(), tid) != scc.end();
      any = any || in;
      all = all && in;
    }
    if (any) {
      if (!all || home) throw std::invalid_argument("tCfr spans multiple SCCs");
      home = &scc;
    }
  }
  if (!home) throw std::invalid_argument("tCfr is not inside a non-trivial SCC");
  std::set<int> sccSet(home->begin(), home->end());

  // Minimal cyclic piece per transition, closed under parallel transitions.
  std::vector<std::set<int>> pieces;
  for (int tid : tCfr) {
    const Transition& t = p.transition(tid);
    std::set<int> piece{tid};
    for (int e : shortestReturnPath(p, sccSet, t.tgt, t.src)) piece.insert(e);
    std::set<std::pair<LocId, LocId>> endpoints;
    for (int e : piece) endpoints.insert({p.transition(e).src, p.transition(e).tgt});
    for (auto& tr : p.transitions())
      if (endpoints.count({tr.src, tr.tgt})) piece.insert(tr.id);
    pieces.push_back(std::move(piece));
  }
  // Merge pieces sharing a location.
  auto locsOf = [&](const std::set<int>& piece) {
    std::set<LocId> out;
    for (int tid : piece) {
      out.insert(p.transition(tid).src);
      out.insert(p.transition(tid).tgt);
    }
    return out;
  };
  bool mergedAny = true;
  while (mergedAny) {
    mergedAny = false;
    for (size_t i = 0; i < pieces.size() && !mergedAny; ++i) {
      for (size_t j = i + 1; j < pieces.size() && !mergedAny; ++j) {
        auto li = locsOf(pieces[i]), lj = locsOf(pieces[j]);
        bool share = false;
        for (LocId l : li)
          if (lj.count(l)) share = true;
        if (share) {
          pieces[i].insert(pieces[j].begin(), pieces[j].end());
          pieces.erase(pieces.begin() + (long)j);
          mergedAny = true;
        }
      }
    }
  }

  Refinement out;
  out.pieces = (int)pieces.size();
  IntegerProgram cur = p;
  int nextId = p.maxTransitionId() + 1;

  for (auto& piece : pieces) out.refinedOrigins.insert(piece.begin(), piece.end());
  for (auto& piece : pieces) {
    std::set<LocId> region = locsOf(piece);
    // Build the standalone piece program with a fresh initial location.
    LocId lnew = symbols::freshLoc("lnew");
    std::vector<Transition> pieceTrans;
    for (int tid : piece) pieceTrans.push_back(p.transition(tid));
    auto entry = entryTransitions(p, piece);
    for (int tid : entry.entryTransitions) {
      Transition c = p.transition(tid);
      c.id = nextId++;
      c.src = lnew;
      pieceTrans.push_back(std::move(c));
    }
    std::vector<LocId> pieceLocs(region.begin(), region.end());
    pieceLocs.push_back(lnew);
    IntegerProgram pieceProg(p.programVars(), pieceLocs, lnew, std::move(pieceTrans));

    auto pieceSccs = sccsTopological(pieceProg);
    if (pieceSccs.size() != 1) throw std::logic_error("piece must have exactly one non-trivial SCC");
    std::set<int> pieceScc(pieceSccs[0].begin(), pieceSccs[0].end());
    Refinement ref = partialEvaluateScc(pieceProg, pieceScc);
    nextId = std::max(nextId, ref.program.maxTransitionId() + 1);

    // Splice: new in-region transitions are the refined pair transitions.
    std::map<LocId, LocId> trueLoc;  // base -> <base,true>
    for (auto& [l, lab] : ref.labels) {
      out.labels.emplace(l, lab);
      if (lab.label.isTrue()) trueLoc[lab.base] = l;
    }
    for (auto& [nid, oid] : ref.originOf) out.originOf[nid] = oid;
    for (auto& [t, reason] : ref.removed) out.removed.emplace_back(t, reason);

    std::vector<Transition> assembled;
    for (auto& t : cur.transitions()) {
      if (piece.count(t.id)) continue;  // replaced by the refinement
      Transition copy = t;
      if (region.count(t.tgt)) {
        // entry into the refined region
        auto it = trueLoc.find(t.tgt);
        if (it != trueLoc.end()) copy.tgt = it->second;
      }
      if (region.count(t.src)) {
        // outgoing transition: one copy per refined pair of its source
        for (auto& [l, lab] : ref.labels) {
          if (lab.base != copy.src) continue;
          Transition c2 = copy;
          c2.id = nextId++;
          c2.src = l;
          out.originOf[c2.id] = out.originOf.count(t.id) ? out.originOf[t.id] : t.id;
          assembled.push_back(std::move(c2));
        }
        continue;  // the original becomes unreachable
      }
      assembled.push_back(std::move(copy));
    }
    for (auto& t : ref.program.transitions()) {
      if (t.src == lnew) continue;  // scaffolding entries are dropped
      assembled.push_back(t);
    }

    std::set<LocId> locs{cur.initial()};
    for (auto& t : assembled) {
      locs.insert(t.src);
      locs.insert(t.tgt);
    }
    cur = IntegerProgram(p.programVars(), {locs.begin(), locs.end()}, cur.initial(), std::move(assembled));
  }

  // Final cleanup.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Transition> keep;
    for (auto& t : cur.transitions()) {
      if (t.guard.isFalseLiteral() || definitelyUnsatInt(t.guard)) {
        out.removed.emplace_back(t, "unsat-guard");
        changed = true;
      } else {
        keep.push_back(t);
      }
    }
    IntegerProgram pruned(cur.programVars(), cur.locations(), cur.initial(), std::move(keep));
    auto reach = reachableLocations(pruned);
    std::vector<Transition> keep2;
    for (auto& t : pruned.transitions()) {
      if (!reach.count(t.src)) {
        out.removed.emplace_back(t, "unreachable");
        changed = true;
      } else {
        keep2.push_back(t);
      }
    }
    std::vector<LocId> locs2;
    for (LocId l : pruned.locations())
      if (reach.count(l)) locs2.push_back(l);
    cur = IntegerProgram(pruned.programVars(), locs2, pruned.initial(), std::move(keep2));
  }
  out.program = std::move(cur);
  return out;
}

}  // namespace loopbound
