#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cassert>
#include <chrono>
#include <cstring>
#include <sstream>

#include "loopbound/solver.hpp"

namespace loopbound {

namespace {

struct Subprocess {
  pid_t pid = -1;
  int toChild = -1;
  int fromChild = -1;

  explicit Subprocess(const std::string& command) {
    int inPipe[2], outPipe[2];
    if (pipe(inPipe) != 0 || pipe(outPipe) != 0) throw SolverProcessError("pipe() failed");
    pid = fork();
    if (pid < 0) throw SolverProcessError("fork() failed");
    if (pid == 0) {
      dup2(inPipe[0], STDIN_FILENO);
      dup2(outPipe[1], STDOUT_FILENO);
      close(inPipe[0]);
      close(inPipe[1]);
      close(outPipe[0]);
      close(outPipe[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
      _exit(127);
    }
    close(inPipe[0]);
    close(outPipe[1]);
    toChild = inPipe[1];
    fromChild = outPipe[0];
  }

  ~Subprocess() {
    if (toChild >= 0) close(toChild);
    if (fromChild >= 0) close(fromChild);
    if (pid > 0) {
      kill(pid, SIGKILL);
      int status;
      waitpid(pid, &status, 0);
    }
  }

  void writeAll(const std::string& s) {
    size_t off = 0;
    while (off < s.size()) {
      ssize_t n = write(toChild, s.data() + off, s.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SolverProcessError("write to solver failed");
      }
      off += (size_t)n;
    }
    close(toChild);
    toChild = -1;
  }

  // Reads everything the child prints, observing the deadline. Returns false
  // on timeout.
  bool readAll(std::string& out, std::chrono::steady_clock::time_point deadline) {
    char buf[4096];
    while (true) {
      auto now = std::chrono::steady_clock::now();
      long remainMs = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      if (remainMs <= 0) return false;
      struct pollfd pfd = {fromChild, POLLIN, 0};
      int pr = poll(&pfd, 1, (int)std::min(remainMs, 1000L));
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw SolverProcessError("poll on solver failed");
      }
      if (pr == 0) continue;
      ssize_t n = read(fromChild, buf, sizeof buf);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SolverProcessError("read from solver failed");
      }
      if (n == 0) return true;  // EOF
      out.append(buf, (size_t)n);
    }
  }
};

std::string smtRat(const Rat& r, bool realSort) {
  Int num = numerator(r), den = denominator(r);
  std::ostringstream os;
  auto lit = [&](const Int& v) -> std::string {
    if (v < 0) return "(- " + Int(-v).str() + (realSort && den == 1 ? ".0" : "") + ")";
    return v.str() + (realSort && den == 1 ? ".0" : "");
  };
  if (den == 1) return lit(num);
  os << "(/ " << lit(num) << " " << den.str() << ")";
  return os.str();
}

std::string smtName(VarId v) { return "|" + symbols::varName(v) + "|"; }

std::string atomSmt(const LinearAtom& a, const std::map<VarId, VarSort>& sorts) {
  std::ostringstream os;
  os << "(" << (a.equality ? "=" : a.strict ? "<" : "<=") << " (+";
  for (auto& [v, c] : a.coeffs) {
    bool real = sorts.count(v) ? sorts.at(v) == VarSort::Rational : true;
    os << " (* " << smtRat(c, real) << " " << smtName(v) << ")";
  }
  os << " " << smtRat(a.constant, true) << ") 0)";
  return os.str();
}

// --- tiny s-expression reader for (get-model) output -------------------------

struct SexpTok {
  std::vector<std::string> toks;
  size_t i = 0;

  explicit SexpTok(const std::string& s) {
    std::string cur;
    bool quoted = false;
    for (char c : s) {
      if (quoted) {
        if (c == '|') {
          quoted = false;
          toks.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
        continue;
      }
      if (c == '|') {
        quoted = true;
        continue;
      }
      if (c == '(' || c == ')') {
        if (!cur.empty()) {
          toks.push_back(cur);
          cur.clear();
        }
        toks.push_back(std::string(1, c));
      } else if (std::isspace((unsigned char)c)) {
        if (!cur.empty()) {
          toks.push_back(cur);
          cur.clear();
        }
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) toks.push_back(cur);
  }

  bool done() const { return i >= toks.size(); }
  const std::string& peek() const { return toks[i]; }
  std::string next() { return toks[i++]; }
};

Rat parseNumeric(const std::string& tok) {
  auto dot = tok.find('.');
  if (dot == std::string::npos) return Rat(Int(tok));
  std::string head = tok.substr(0, dot), tail = tok.substr(dot + 1);
  if (head.empty()) head = "0";
  Int den = 1;
  for (size_t k = 0; k < tail.size(); ++k) den *= 10;
  return Rat(Int(head) * den + (tail.empty() ? Int(0) : Int(tail)), den);
}

// Parses a value s-expression: n | x.y | (- v) | (/ a b)
Rat parseValue(SexpTok& t) {
  if (t.peek() != "(") return parseNumeric(t.next());
  t.next();  // (
  std::string op = t.next();
  Rat out;
  if (op == "-") {
    out = -parseValue(t);
  } else if (op == "/") {
    Rat a = parseValue(t);
    Rat b = parseValue(t);
    if (b == 0) throw SolverProcessError("division by zero in model");
    out = a / b;
  } else {
    throw SolverProcessError("unexpected model value operator " + op);
  }
  if (t.done() || t.next() != ")") throw SolverProcessError("malformed model value");
  return out;
}

void skipSexp(SexpTok& t) {
  if (t.done()) return;
  if (t.peek() != "(") {
    t.next();
    return;
  }
  int depth = 0;
  while (!t.done()) {
    std::string tok = t.next();
    if (tok == "(") ++depth;
    if (tok == ")" && --depth == 0) return;
  }
}

std::map<std::string, Rat> parseModel(const std::string& text) {
  std::map<std::string, Rat> model;
  SexpTok t(text);
  while (!t.done()) {
    if (t.next() != "define-fun") continue;
    if (t.done()) break;
    std::string name = t.next();
    // () SORT VALUE
    if (t.done() || t.next() != "(") continue;
    if (t.done() || t.next() != ")") continue;
    if (t.done()) break;
    t.next();  // sort
    model[name] = parseValue(t);
  }
  return model;
}

}  // namespace

SolverResult SmtLibSolver::checkSat(const SolverQuery& q, int timeoutMs) {
  bool anyInt = false, anyReal = false;
  for (auto& [v, s] : q.vars) (s == VarSort::Integer ? anyInt : anyReal) = true;
  std::string logic = anyInt && anyReal ? "ALL" : (anyInt ? "QF_LIA" : "QF_LRA");

  std::ostringstream script;
  script << "(set-option :print-success false)\n";
  script << "(set-logic " << logic << ")\n";
  for (auto& [v, s] : q.vars)
    script << "(declare-const " << smtName(v) << " " << (s == VarSort::Integer ? "Int" : "Real") << ")\n";
  for (VarId v : q.nonneg) script << "(assert (>= " << smtName(v) << " 0))\n";
  for (auto& clause : q.clauses) {
    script << "(assert ";
    if (clause.size() == 1) {
      script << atomSmt(clause[0], q.vars);
    } else {
      script << "(or";
      for (auto& a : clause) script << " " << atomSmt(a, q.vars);
      script << ")";
    }
    script << ")\n";
  }
  script << "(check-sat)\n(get-model)\n(exit)\n";

  Subprocess proc(command_);
  proc.writeAll(script.str());
  std::string output;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeoutMs);
  if (!proc.readAll(output, deadline)) return {SolverResult::Unknown, {}, "timeout"};

  std::istringstream lines(output);
  std::string line, status;
  size_t statusEnd = 0;
  while (std::getline(lines, line)) {
    std::string trimmed;
    for (char c : line)
      if (!std::isspace((unsigned char)c)) trimmed += c;
    if (trimmed == "sat" || trimmed == "unsat" || trimmed == "unknown") {
      status = trimmed;
      statusEnd = (size_t)lines.tellg() == (size_t)-1 ? output.size() : (size_t)lines.tellg();
      break;
    }
    if (!trimmed.empty() && trimmed.rfind("(error", 0) != 0 && trimmed[0] != ';')
      throw SolverProcessError("unexpected solver output: " + line);
  }
  if (status.empty()) throw SolverProcessError("solver produced no status (command: " + command_ + ")");
  if (status == "unknown") return {SolverResult::Unknown, {}, "solver unknown"};
  if (status == "unsat") return {SolverResult::Unsat, {}, ""};

  auto named = parseModel(output.substr(statusEnd));
  SolverResult res{SolverResult::Sat, {}, ""};
  for (auto& [v, s] : q.vars) {
    auto it = named.find(symbols::varName(v));
    res.model[v] = it == named.end() ? Rat(0) : it->second;
  }
  for (auto& clause : q.clauses) {
    bool ok = false;
    for (auto& a : clause) ok = ok || a.satisfiedBy(res.model);
    if (!ok) throw SolverProcessError("solver model fails an assertion");
  }
  return res;
}

}  // namespace loopbound
