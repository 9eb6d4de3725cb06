#include "loopbound/simulate.hpp"

#include <algorithm>
#include <stdexcept>

namespace loopbound {

namespace {

long long toLongChecked(const Int& v) {
  static const Int lim = Int(1) << 62;
  if (v > lim || v < -lim) throw std::overflow_error("simulator value out of range");
  return v.convert_to<long long>();
}

std::map<VarId, Int> fullState(const IntegerProgram& p, const SimState& s,
                               const std::map<VarId, long long>& tvChoice) {
  std::map<VarId, Int> m;
  const auto& pv = p.programVars();
  for (size_t i = 0; i < pv.size(); ++i) m[pv[i]] = Int(s[i]);
  for (auto& [v, val] : tvChoice) m[v] = Int(val);
  return m;
}

std::vector<VarId> tvList(const IntegerProgram& p, const Transition& t) {
  auto tvs = p.temporariesOf(t);
  return {tvs.begin(), tvs.end()};
}

// Enumerates tvChoice assignments over [lo,hi]^|tvs| and calls fn.
template <typename Fn>
void forEachChoice(const std::vector<VarId>& tvs, long long lo, long long hi, Fn&& fn) {
  long long width = hi - lo + 1;
  double total = 1;
  for (size_t i = 0; i < tvs.size(); ++i) total *= (double)width;
  if (total > 200000.0) throw std::runtime_error("temporary-variable enumeration too large");
  std::map<VarId, long long> choice;
  std::vector<long long> idx(tvs.size(), 0);
  while (true) {
    for (size_t i = 0; i < tvs.size(); ++i) choice[tvs[i]] = lo + idx[i];
    fn(choice);
    size_t k = 0;
    while (k < tvs.size()) {
      if (++idx[k] < width) break;
      idx[k] = 0;
      ++k;
    }
    if (k == tvs.size()) break;
    if (tvs.empty()) break;
  }
}

}  // namespace

std::optional<Configuration> step(const IntegerProgram& p, const Configuration& c, const Transition& t,
                                  const std::map<VarId, long long>& tvChoice) {
  if (t.src != c.loc) return std::nullopt;
  auto st = fullState(p, c.state, tvChoice);
  if (!t.guard.satisfiedBy(st)) return std::nullopt;
  Configuration out;
  out.loc = t.tgt;
  const auto& pv = p.programVars();
  out.state.resize(pv.size());
  for (size_t i = 0; i < pv.size(); ++i) {
    auto it = t.update.find(pv[i]);
    out.state[i] = it == t.update.end() ? c.state[i] : toLongChecked(it->second.evaluate(st));
  }
  return out;
}

namespace {

// Shared level-wise engine. Value is a user-managed annotation merged with
// max/sum semantics by the callbacks.
struct Expansion {
  int transId;
  Configuration succ;
};

template <typename Fn>
bool expand(const IntegerProgram& p, const Configuration& c, long long lo, long long hi,
            const std::set<int>* restrict, Fn&& emit) {
  bool any = false;
  for (int tid : p.outgoing(c.loc)) {
    if (restrict && !restrict->count(tid)) continue;
    const Transition& t = p.transition(tid);
    auto tvs = tvList(p, t);
    forEachChoice(tvs, lo, hi, [&](const std::map<VarId, long long>& choice) {
      auto succ = step(p, c, t, choice);
      if (succ) {
        emit(Expansion{tid, *succ});
        any = true;
      }
    });
  }
  return any;
}

}  // namespace

RunSummary explore(const IntegerProgram& p, const SimState& sigma0, long long fuelPerRun, long long totalBudget,
                   long long tvLo, long long tvHi) {
  RunSummary summary;
  std::vector<int> tids;
  for (auto& t : p.transitions()) tids.push_back(t.id);
  std::sort(tids.begin(), tids.end());
  std::map<int, size_t> tIdx;
  for (size_t i = 0; i < tids.size(); ++i) tIdx[tids[i]] = i;
  for (int t : tids) summary.counts[t] = 0;

  using Counts = std::vector<long long>;  // per transition, max over paths reaching the config
  std::map<Configuration, Counts> frontier;
  frontier[{p.initial(), sigma0}] = Counts(tids.size(), 0);
  long long spent = 0;

  for (long long level = 0; level < fuelPerRun && !frontier.empty(); ++level) {
    std::map<Configuration, Counts> next;
    bool over = false;
    for (auto& [conf, counts] : frontier) {
      if (spent >= totalBudget) {
        over = true;
        break;
      }
      expand(p, conf, tvLo, tvHi, nullptr, [&](const Expansion& e) {
        ++spent;
        Counts succCounts = counts;
        ++succCounts[tIdx[e.transId]];
        auto [it, inserted] = next.emplace(e.succ, succCounts);
        if (!inserted)
          for (size_t i = 0; i < succCounts.size(); ++i) it->second[i] = std::max(it->second[i], succCounts[i]);
        // sizes right after the transition
        const auto& pv = p.programVars();
        for (size_t i = 0; i < pv.size(); ++i) {
          long long a = std::abs(e.succ.state[i]);
          auto key = std::make_pair(e.transId, pv[i]);
          auto mit = summary.maxAbs.find(key);
          if (mit == summary.maxAbs.end() || mit->second < a) summary.maxAbs[key] = a;
        }
      });
    }
    if (over) {
      summary.truncated = true;
      break;
    }
    if (!next.empty()) summary.length = level + 1;
    for (auto& [conf, counts] : next)
      for (size_t i = 0; i < counts.size(); ++i)
        summary.counts[tids[i]] = std::max(summary.counts[tids[i]], counts[i]);
    frontier = std::move(next);
  }
  if (!frontier.empty() && !summary.truncated && summary.length >= fuelPerRun) summary.truncated = true;
  return summary;
}

std::map<std::pair<long long, SimState>, unsigned long long> exploreTraces(
    const IntegerProgram& p, const SimState& sigma0, long long maxLen, long long tvLo, long long tvHi,
    const std::map<int, int>* originOf) {
  std::map<std::pair<long long, SimState>, unsigned long long> multiset;
  // Path counts per (loc, state); edges deduplicated by (origin transition,
  // successor state) so distinct temporary choices with equal effect collapse.
  std::map<Configuration, unsigned long long> frontier{{{p.initial(), sigma0}, 1}};
  multiset[{0, sigma0}] = 1;
  for (long long level = 1; level <= maxLen && !frontier.empty(); ++level) {
    std::map<Configuration, unsigned long long> next;
    for (auto& [conf, paths] : frontier) {
      std::set<std::pair<int, Configuration>> edges;
      expand(p, conf, tvLo, tvHi, nullptr, [&](const Expansion& e) {
        int orig = e.transId;
        if (originOf) {
          auto it = originOf->find(e.transId);
          if (it != originOf->end()) orig = it->second;
        }
        edges.emplace(orig, e.succ);
      });
      for (auto& [orig, succ] : edges) next[succ] += paths;
    }
    for (auto& [conf, paths] : next) multiset[{level, conf.state}] += paths;
    frontier = std::move(next);
  }
  return multiset;
}

SubRunBound countSubprogram(const IntegerProgram& p, const std::set<int>& scope, const std::set<int>& decreasing,
                            LocId startLoc, const SimState& sigma, long long fuelPerRun, long long totalBudget,
                            long long tvLo, long long tvHi) {
  SubRunBound out;
  long long spent = 0;
  std::map<Configuration, long long> frontier{{{startLoc, sigma}, 0}};
  for (long long level = 0; level < fuelPerRun && !frontier.empty(); ++level) {
    std::map<Configuration, long long> next;
    for (auto& [conf, dec] : frontier) {
      if (spent >= totalBudget) {
        out.truncated = true;
        return out;
      }
      expand(p, conf, tvLo, tvHi, &scope, [&](const Expansion& e) {
        ++spent;
        long long d = dec + (decreasing.count(e.transId) ? 1 : 0);
        auto [it, inserted] = next.emplace(e.succ, d);
        if (!inserted) it->second = std::max(it->second, d);
        out.maxDecreasing = std::max(out.maxDecreasing, d);
      });
    }
    frontier = std::move(next);
  }
  if (!frontier.empty()) out.truncated = true;
  return out;
}

}  // namespace loopbound
