#pragma once

#include "loopbound/program.hpp"
#include "loopbound/tables.hpp"

namespace loopbound {

enum class CfrMode { Off, Scc, SubScc, Global };

std::string cfrModeName(CfrMode m);
CfrMode cfrModeFromName(const std::string& s);  // "off" | "scc" | "sub-scc" | "global"

struct AnalysisConfig {
  int mdepth = 5;  // 1..10
  CfrMode cfr = CfrMode::SubScc;
  int timeoutSec = 300;
  bool invariants = false;
  unsigned seed = 0;  // reserved for tie-breaking; the analysis is deterministic
};

struct AnalysisResult {
  IntegerProgram program;  // analyzed (possibly refined) program
  RuntimeBoundTable rb;
  SizeBoundTable sb;
  Bound overall;  // sum of RB over all transitions
  AsymClass cls;
  ProofLog proofLog;
  bool timedOut = false;
};

// Removes unreachable locations, transitions with unsatisfiable guards, and
// program variables that cannot influence any guard; optionally conjoins
// interval invariants to the guards.
IntegerProgram preprocess(const IntegerProgram& p, bool invariants = false, ProofLog* log = nullptr);

// RB(t) = 1 for transitions outside all cycles, omega otherwise; SB from one
// pass of the size-bound calculus.
std::pair<RuntimeBoundTable, SizeBoundTable> initialTables(const IntegerProgram& p);

AnalysisResult analyze(const IntegerProgram& p, const AnalysisConfig& cfg);

}  // namespace loopbound
