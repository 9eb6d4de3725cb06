#pragma once

#include <utility>
#include <vector>

#include "loopbound/numbers.hpp"

namespace loopbound {

// Dense exact-rational two-phase simplex over nonnegative structural
// variables. Bland's rule throughout, so it cannot cycle; a pivot budget
// turns pathological instances into Limit results.
class LpSolver {
 public:
  explicit LpSolver(int nVars) : nVars_(nVars) {}

  void addLe(std::vector<std::pair<int, Rat>> coeffs, Rat rhs);
  void addEq(std::vector<std::pair<int, Rat>> coeffs, Rat rhs);

  enum class Status { Optimal, Infeasible, Unbounded, Limit };

  struct Result {
    Status status;
    Rat value;                // objective value when Optimal
    std::vector<Rat> model;   // structural variable values
  };

  // Minimizes obj (empty = pure feasibility). Objective must be bounded below
  // on the feasible region unless callers handle Unbounded.
  Result solve(const std::vector<Rat>& obj, long pivotBudget) const;
  Result feasible(long pivotBudget) const { return solve({}, pivotBudget); }

  int numVars() const { return nVars_; }

 private:
  struct Row {
    std::vector<std::pair<int, Rat>> coeffs;
    bool isEq;
    Rat rhs;
  };
  int nVars_;
  std::vector<Row> rows_;
};

}  // namespace loopbound
