#include "simplex.hpp"

#include <cassert>

namespace loopbound {

void LpSolver::addLe(std::vector<std::pair<int, Rat>> coeffs, Rat rhs) {
  rows_.push_back({std::move(coeffs), false, std::move(rhs)});
}

void LpSolver::addEq(std::vector<std::pair<int, Rat>> coeffs, Rat rhs) {
  rows_.push_back({std::move(coeffs), true, std::move(rhs)});
}

namespace {

struct Tableau {
  // T is m x (n+1); last column is the rhs. basis[i] is the column basic in
  // row i. blocked columns may not enter the basis (retired artificials).
  std::vector<std::vector<Rat>> T;
  std::vector<int> basis;
  std::vector<bool> blocked;
  int n = 0;

  void pivot(int row, int col) {
    Rat p = T[row][col];
    for (auto& v : T[row]) v /= p;
    for (size_t i = 0; i < T.size(); ++i) {
      if ((int)i == row) continue;
      Rat f = T[i][col];
      if (f == 0) continue;
      for (int j = 0; j <= n; ++j) T[i][j] -= f * T[row][j];
    }
    basis[row] = col;
  }

  // Minimizes cost (a row of length n+1 over the same columns, kept reduced
  // w.r.t. the basis). Dantzig's rule while the objective makes progress,
  // permanently switching to Bland's rule after a degenerate streak so that
  // cycling is impossible.
  enum class Run { Optimal, Unbounded, Limit };
  Run iterate(std::vector<Rat>& cost, long& budget) {
    int degenerate = 0;
    bool bland = false;
    while (true) {
      int enter = -1;
      if (bland) {
        for (int j = 0; j < n; ++j) {
          if (!blocked[j] && cost[j] < 0) {
            enter = j;
            break;  // smallest index
          }
        }
      } else {
        const Rat* most = nullptr;
        for (int j = 0; j < n; ++j) {
          if (blocked[j] || !(cost[j] < 0)) continue;
          if (!most || cost[j] < *most) {
            most = &cost[j];
            enter = j;
          }
        }
      }
      if (enter < 0) return Run::Optimal;
      int leave = -1;
      Rat best;
      for (size_t i = 0; i < T.size(); ++i) {
        if (T[i][enter] <= 0) continue;
        Rat ratio = T[i][n] / T[i][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          best = ratio;
          leave = (int)i;
        }
      }
      if (leave < 0) return Run::Unbounded;
      if (--budget < 0) return Run::Limit;
      if (!bland) {
        degenerate = best == 0 ? degenerate + 1 : 0;
        if (degenerate > 25) bland = true;
      }
      pivot(leave, enter);
      Rat f = cost[enter];
      if (f != 0)
        for (int j = 0; j <= n; ++j) cost[j] -= f * T[leave][j];
    }
  }
};

}  // namespace

LpSolver::Result LpSolver::solve(const std::vector<Rat>& obj, long pivotBudget) const {
  const int m = (int)rows_.size();
  // Column layout: [0, nVars_) structural, then one slack per <= row, then
  // one artificial per row without a usable slack basis.
  int nSlack = 0;
  for (auto& r : rows_)
    if (!r.isEq) ++nSlack;
  int nArt = 0;
  for (auto& r : rows_) {
    Rat rhs = r.rhs;  // sign after potential negation decides the basis
    if (r.isEq || rhs < 0) ++nArt;
  }

  Tableau tb;
  tb.n = nVars_ + nSlack + nArt;
  tb.T.assign((size_t)m, std::vector<Rat>((size_t)tb.n + 1, Rat(0)));
  tb.basis.assign((size_t)m, -1);
  tb.blocked.assign((size_t)tb.n, false);

  int slackAt = nVars_;
  int artAt = nVars_ + nSlack;
  std::vector<int> artCols;
  for (int i = 0; i < m; ++i) {
    const Row& r = rows_[(size_t)i];
    auto& row = tb.T[(size_t)i];
    for (auto& [j, c] : r.coeffs) {
      assert(j >= 0 && j < nVars_);
      row[(size_t)j] += c;
    }
    row[(size_t)tb.n] = r.rhs;
    int slackCol = -1;
    if (!r.isEq) {
      slackCol = slackAt++;
      row[(size_t)slackCol] = 1;
    }
    bool negated = row[(size_t)tb.n] < 0;
    if (negated)
      for (auto& v : row) v = -v;
    if (slackCol >= 0 && !negated) {
      tb.basis[(size_t)i] = slackCol;
    } else {
      int a = artAt++;
      row[(size_t)a] = 1;
      tb.basis[(size_t)i] = a;
      artCols.push_back(a);
    }
  }

  long budget = pivotBudget;

  // Phase 1: minimize the sum of artificials.
  if (!artCols.empty()) {
    std::vector<Rat> cost((size_t)tb.n + 1, Rat(0));
    for (int a : artCols) cost[(size_t)a] = 1;
    // Reduce cost row w.r.t. the starting basis.
    for (int i = 0; i < m; ++i) {
      int b = tb.basis[(size_t)i];
      if (cost[(size_t)b] != 0) {
        Rat f = cost[(size_t)b];
        for (int j = 0; j <= tb.n; ++j) cost[(size_t)j] -= f * tb.T[(size_t)i][(size_t)j];
      }
    }
    auto run = tb.iterate(cost, budget);
    if (run == Tableau::Run::Limit) return {Status::Limit, Rat(0), {}};
    // Phase-1 objective is bounded below by 0, so Unbounded cannot happen.
    Rat phase1 = -cost[(size_t)tb.n];
    if (phase1 != 0) return {Status::Infeasible, Rat(0), {}};
    // Drive leftover artificials out of the basis.
    for (int i = 0; i < m; ++i) {
      int b = tb.basis[(size_t)i];
      bool isArt = false;
      for (int a : artCols)
        if (a == b) isArt = true;
      if (!isArt) continue;
      int col = -1;
      for (int j = 0; j < nVars_ + nSlack; ++j) {
        if (tb.T[(size_t)i][(size_t)j] != 0) {
          col = j;
          break;
        }
      }
      if (col >= 0) tb.pivot(i, col);
      // else: redundant row; keep it (basic artificial stays at value 0).
    }
    for (int a : artCols) tb.blocked[(size_t)a] = true;
  }

  // Phase 2.
  std::vector<Rat> cost((size_t)tb.n + 1, Rat(0));
  for (size_t j = 0; j < obj.size() && (int)j < nVars_; ++j) cost[j] = obj[j];
  for (int i = 0; i < m; ++i) {
    int b = tb.basis[(size_t)i];
    if (cost[(size_t)b] != 0) {
      Rat f = cost[(size_t)b];
      for (int j = 0; j <= tb.n; ++j) cost[(size_t)j] -= f * tb.T[(size_t)i][(size_t)j];
    }
  }
  if (!obj.empty()) {
    auto run = tb.iterate(cost, budget);
    if (run == Tableau::Run::Limit) return {Status::Limit, Rat(0), {}};
    if (run == Tableau::Run::Unbounded) return {Status::Unbounded, Rat(0), {}};
  }

  Result res;
  res.status = Status::Optimal;
  res.model.assign((size_t)nVars_, Rat(0));
  Rat value = 0;
  for (int i = 0; i < m; ++i) {
    int b = tb.basis[(size_t)i];
    if (b < nVars_) res.model[(size_t)b] = tb.T[(size_t)i][(size_t)tb.n];
  }
  for (size_t j = 0; j < obj.size() && (int)j < nVars_; ++j) value += obj[j] * res.model[j];
  res.value = value;
  return res;
}

}  // namespace loopbound
