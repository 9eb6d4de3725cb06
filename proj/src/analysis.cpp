#include "loopbound/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "loopbound/cfr.hpp"
#include "loopbound/invariants.hpp"
#include "loopbound/mprf.hpp"
#include "loopbound/sizebound.hpp"
#include "loopbound/solver.hpp"

namespace loopbound {

std::string cfrModeName(CfrMode m) {
  switch (m) {
    case CfrMode::Off: return "off";
    case CfrMode::Scc: return "scc";
    case CfrMode::SubScc: return "sub-scc";
    default: return "global";
  }
}

CfrMode cfrModeFromName(const std::string& s) {
  if (s == "off") return CfrMode::Off;
  if (s == "scc") return CfrMode::Scc;
  if (s == "sub-scc") return CfrMode::SubScc;
  if (s == "global") return CfrMode::Global;
  throw std::invalid_argument("unknown cfr mode: " + s);
}

IntegerProgram preprocess(const IntegerProgram& p0, bool invariants, ProofLog* log) {
  IntegerProgram p = p0;

  // Drop program variables that cannot influence any guard.
  std::set<VarId> influencing;
  for (auto& t : p.transitions())
    for (VarId v : t.guard.vars())
      if (p.isProgramVar(v)) influencing.insert(v);
  bool grew = true;
  while (grew) {
    grew = false;
    for (auto& t : p.transitions()) {
      for (auto& [w, up] : t.update) {
        if (!influencing.count(w)) continue;
        for (VarId v : up.vars())
          if (p.isProgramVar(v) && influencing.insert(v).second) grew = true;
      }
    }
  }
  if (influencing.size() != p.programVars().size()) {
    std::vector<VarId> keep;
    for (VarId v : p.programVars())
      if (influencing.count(v)) keep.push_back(v);
    std::vector<Transition> ts = p.transitions();
    for (auto& t : ts) {
      std::map<VarId, Polynomial> up;
      for (auto& [v, e] : t.update)
        if (influencing.count(v)) up[v] = e;
      t.update = std::move(up);
    }
    p = IntegerProgram(keep, p.locations(), p.initial(), std::move(ts));
  }

  if (invariants) {
    auto invs = intervalInvariants(p);
    std::vector<Transition> ts = p.transitions();
    for (auto& t : ts) {
      auto it = invs.find(t.src);
      if (it != invs.end()) t.guard.conjoin(it->second);
    }
    p = IntegerProgram(p.programVars(), p.locations(), p.initial(), std::move(ts));
  }

  // Remove unsatisfiable guards and unreachable parts, to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Transition> keep;
    for (auto& t : p.transitions()) {
      if (t.guard.isFalseLiteral() || definitelyUnsatInt(t.guard)) {
        if (log) log->push_back("preprocess: dropped " + t.name() + " (unsatisfiable guard)");
        changed = true;
      } else {
        keep.push_back(t);
      }
    }
    IntegerProgram pruned(p.programVars(), p.locations(), p.initial(), std::move(keep));
    auto reach = reachableLocations(pruned);
    std::vector<Transition> keep2;
    for (auto& t : pruned.transitions()) {
      if (!reach.count(t.src)) {
        if (log) log->push_back("preprocess: dropped " + t.name() + " (unreachable)");
        changed = true;
      } else {
        keep2.push_back(t);
      }
    }
    std::vector<LocId> locs;
    for (LocId l : pruned.locations())
      if (reach.count(l)) locs.push_back(l);
    p = IntegerProgram(pruned.programVars(), locs, pruned.initial(), std::move(keep2));
  }
  return p;
}

std::pair<RuntimeBoundTable, SizeBoundTable> initialTables(const IntegerProgram& p) {
  RuntimeBoundTable rb;
  auto cyc = cyclicTransitions(p);
  for (auto& t : p.transitions())
    if (!cyc.count(t.id)) rb.set(t.id, Bound::constant(1));
  SizeBoundTable sb;
  std::set<int> all;
  for (auto& t : p.transitions()) all.insert(t.id);
  computeSizeBounds(p, rb, all, sb);
  return {std::move(rb), std::move(sb)};
}

namespace {

using Clock = std::chrono::steady_clock;

struct Analyzer {
  AnalysisConfig cfg;
  Clock::time_point deadline;
  IntegerProgram p;
  RuntimeBoundTable rb;
  SizeBoundTable sb;
  ProofLog log;
  bool timedOut = false;

  bool expired() {
    if (Clock::now() > deadline) timedOut = true;
    return timedOut;
  }

  // One SCC pass of the main algorithm: alternate runtime-bound synthesis and
  // size-bound updates until nothing improves. Failed (target, depth) pairs
  // are not retried until a table entry improved, since the program and the
  // candidate set stay fixed within the pass.
  void runSccPass(const std::set<int>& scc) {
    bool improved = true;
    std::set<std::pair<int, int>> failed;
    while (improved && !expired()) {
      improved = false;
      for (int target : scc) {
        if (expired()) return;
        if (!rb.get(target).isOmega()) continue;
        std::optional<Mprf> f;
        for (int d = 1; d <= cfg.mdepth && !f; ++d) {
          if (failed.count({target, d})) continue;
          f = findMprf(p, target, scc, d, {&rb, &sb});
          if (!f) failed.insert({target, d});
        }
        if (f) {
          auto outcome = liftBound(p, *f, rb, sb, &log);
          improved = improved || outcome.improvedAny;
        }
      }
      if (computeSizeBounds(p, rb, scc, sb)) improved = true;
      if (improved) failed.clear();
    }
  }

  void updateOutgoingSizes(const std::set<int>& scc) {
    std::set<LocId> locs;
    for (int tid : scc) {
      if (!p.hasTransition(tid)) continue;
      locs.insert(p.transition(tid).src);
      locs.insert(p.transition(tid).tgt);
    }
    std::set<int> outs;
    for (auto& t : p.transitions())
      if (locs.count(t.src) && !scc.count(t.id)) outs.insert(t.id);
    if (!outs.empty()) computeSizeBounds(p, rb, outs, sb);
  }

  // Carries tables onto a refined program and initializes fresh entries.
  void carryTables(const Refinement& ref, const IntegerProgram& oldP) {
    auto cyc = cyclicTransitions(ref.program);
    for (auto& t : ref.program.transitions()) {
      if (oldP.hasTransition(t.id)) continue;  // kept id, tables carry over
      auto oit = ref.originOf.find(t.id);
      int origin = oit == ref.originOf.end() ? -1 : oit->second;
      if (origin >= 0 && !ref.refinedOrigins.count(origin) && oldP.hasTransition(origin)) {
        // Copy of an unrefined transition: it fires at most as often as its
        // original and performs the same update from a stronger guard.
        rb.set(t.id, rb.get(origin));
        for (VarId v : p.programVars()) sb.set(t.id, v, sb.get(origin, v));
      } else if (!cyc.count(t.id)) {
        rb.set(t.id, Bound::constant(1));
      }
    }
  }

  AsymClass sumClass(const std::vector<Bound>& bounds) const {
    Bound total;
    for (auto& b : bounds) total = total + b;
    return total.classify();
  }

  void logCfr(CfrMode mode, const std::set<int>& on) {
    std::ostringstream os;
    os << "CFR mode=" << cfrModeName(mode) << " on={";
    bool first = true;
    for (int tid : on) os << (first ? "" : ",") << "t" << tid, first = false;
    os << "}";
    log.push_back(os.str());
  }

  // Returns true when the refinement was kept.
  bool attemptCfr(const std::set<int>& scc) {
    std::set<int> tcfr;
    for (int tid : scc)
      if (!rb.get(tid).classify().isLinearOrConst()) tcfr.insert(tid);
    if (tcfr.empty()) return false;

    logCfr(cfg.cfr, tcfr);
    Refinement ref;
    try {
      ref = cfg.cfr == CfrMode::Scc ? partialEvaluateScc(p, scc) : partialEvaluateSubScc(p, tcfr);
    } catch (const std::exception& e) {
      log.push_back(std::string("CFR failed: ") + e.what());
      return false;
    }

    IntegerProgram savedP = p;
    RuntimeBoundTable savedRb = rb;
    SizeBoundTable savedSb = sb;

    std::vector<Bound> before;
    for (int tid : scc) before.push_back(rb.get(tid));

    p = ref.program;
    carryTables(ref, savedP);

    // Fresh transitions need size bounds before the re-run.
    std::set<int> fresh;
    for (auto& t : p.transitions())
      if (!savedP.hasTransition(t.id)) fresh.insert(t.id);
    computeSizeBounds(p, rb, fresh, sb);

    // Re-run the bound pass once per refined SCC, in topological order.
    for (auto& newScc : sccsTopological(p)) {
      bool isNew = false;
      for (int tid : newScc)
        if (fresh.count(tid)) isNew = true;
      if (!isNew) continue;
      std::set<int> sccSet(newScc.begin(), newScc.end());
      runSccPass(sccSet);
      updateOutgoingSizes(sccSet);
    }

    std::vector<Bound> after;
    for (auto& t : p.transitions()) {
      auto oit = ref.originOf.find(t.id);
      bool inRegion = scc.count(t.id) || (oit != ref.originOf.end() && scc.count(oit->second));
      if (inRegion) after.push_back(rb.get(t.id));
    }

    if (sumClass(after) < sumClass(before)) {
      log.push_back("CFR kept");
      return true;
    }
    log.push_back("CFR reverted");
    p = std::move(savedP);
    rb = std::move(savedRb);
    sb = std::move(savedSb);
    return false;
  }

  void run() {
    if (cfg.cfr == CfrMode::Global) {
      // Refine every non-trivial SCC once, before any bound computation.
      std::set<int> refinedOutput;
      while (!expired()) {
        auto sccs = sccsTopological(p);
        const std::vector<int>* pick = nullptr;
        for (auto& s : sccs) {
          bool untouched = true;
          for (int tid : s)
            if (refinedOutput.count(tid)) untouched = false;
          if (untouched) {
            pick = &s;
            break;
          }
        }
        if (!pick) break;
        std::set<int> sccSet(pick->begin(), pick->end());
        logCfr(CfrMode::Global, sccSet);
        Refinement ref = partialEvaluateScc(p, sccSet);
        for (auto& t : ref.program.transitions())
          if (!p.hasTransition(t.id)) refinedOutput.insert(t.id);
        p = ref.program;
      }
      auto tables = initialTables(p);
      rb = std::move(tables.first);
      sb = std::move(tables.second);
    }

    auto sccs = sccsTopological(p);
    for (auto& sccVec : sccs) {
      if (expired()) break;
      std::set<int> scc(sccVec.begin(), sccVec.end());
      // Transitions may have been replaced by an earlier kept refinement.
      bool stale = false;
      for (int tid : scc)
        if (!p.hasTransition(tid)) stale = true;
      if (stale) continue;
      runSccPass(scc);
      if (!expired() && (cfg.cfr == CfrMode::Scc || cfg.cfr == CfrMode::SubScc)) attemptCfr(scc);
      updateOutgoingSizes(scc);
    }
  }
};

}  // namespace

AnalysisResult analyze(const IntegerProgram& input, const AnalysisConfig& cfg) {
  Analyzer a;
  a.cfg = cfg;
  a.deadline = Clock::now() + std::chrono::seconds(cfg.timeoutSec);
  a.p = preprocess(input, cfg.invariants, &a.log);
  auto tables = initialTables(a.p);
  a.rb = std::move(tables.first);
  a.sb = std::move(tables.second);
  a.run();

  AnalysisResult res;
  res.program = a.p;
  res.overall = Bound();
  for (auto& t : a.p.transitions()) res.overall = res.overall + a.rb.get(t.id);
  res.cls = res.overall.classify();
  res.rb = std::move(a.rb);
  res.sb = std::move(a.sb);
  res.proofLog = std::move(a.log);
  res.timedOut = a.timedOut;
  return res;
}

}  // namespace loopbound
