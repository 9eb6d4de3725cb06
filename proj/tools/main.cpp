#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopbound/analysis.hpp"
#include "loopbound/parser.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace loopbound;

namespace {

struct Options {
  int mdepth = 5;
  std::string cfr = "sub-scc";
  int timeout = 300;
  bool invariants = false;
  std::string report = "bound";
  bool jsonOut = false;
  bool noTimes = false;
  unsigned seed = 0;
};

AnalysisConfig toConfig(const Options& o) {
  AnalysisConfig cfg;
  cfg.mdepth = o.mdepth;
  cfg.cfr = cfrModeFromName(o.cfr);
  cfg.timeoutSec = o.timeout;
  cfg.invariants = o.invariants;
  cfg.seed = o.seed;
  return cfg;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string classToken(const AnalysisResult& res) {
  if (res.timedOut) return "INF?";
  return res.cls.toString();
}

json resultJson(const std::string& file, const AnalysisResult& res, double seconds, bool noTimes) {
  json j;
  j["file"] = file;
  j["class"] = classToken(res);
  j["bound"] = res.overall.toString();
  j["timeout"] = res.timedOut;
  j["time_s"] = noTimes ? 0.0 : seconds;
  json rb = json::object();
  for (auto& t : res.program.transitions()) rb[t.name()] = res.rb.get(t.id).toString();
  j["rb"] = rb;
  json sb = json::object();
  for (auto& t : res.program.transitions())
    for (VarId v : res.program.programVars())
      sb[t.name() + ":" + symbols::varName(v)] = res.sb.get(t.id, v).toString();
  j["sb"] = sb;
  j["proof"] = res.proofLog;
  return j;
}

void printText(std::ostream& os, const std::string& file, const AnalysisResult& res, double seconds,
               const Options& opt) {
  os << classToken(res);
  if (opt.report != "class") os << " " << res.overall.toString();
  if (!opt.noTimes) os << " " << std::fixed << std::setprecision(2) << seconds << "s";
  os << " " << file << "\n";
  if (opt.report == "full") {
    os << "  RB:\n";
    for (auto& t : res.program.transitions())
      os << "    " << t.name() << " : " << res.rb.get(t.id).toString() << "\n";
    os << "  SB:\n";
    for (auto& t : res.program.transitions())
      for (VarId v : res.program.programVars())
        os << "    " << t.name() << "," << symbols::varName(v) << " : " << res.sb.get(t.id, v).toString()
           << "\n";
    os << "  proof:\n";
    for (auto& line : res.proofLog) os << "    " << line << "\n";
  }
}

int runAnalyze(const std::vector<std::string>& files, const Options& opt) {
  int exitCode = 0;
  for (auto& file : files) {
    try {
      auto started = std::chrono::steady_clock::now();
      IntegerProgram p = parseProgram(readFile(file));
      AnalysisResult res = analyze(p, toConfig(opt));
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      if (opt.jsonOut) {
        std::cout << resultJson(file, res, secs, opt.noTimes).dump() << "\n";
      } else {
        printText(std::cout, file, res, secs, opt);
      }
    } catch (const ParseError& e) {
      std::cerr << file << ": " << e.what() << "\n";
      exitCode = std::max(exitCode, 1);
    } catch (const SemanticError& e) {
      std::cerr << file << ": " << e.what() << "\n";
      exitCode = std::max(exitCode, 1);
    } catch (const std::exception& e) {
      std::cerr << file << ": internal error: " << e.what() << "\n";
      exitCode = std::max(exitCode, 2);
    }
  }
  return exitCode;
}

std::string selfExe() {
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n <= 0) return "loopbound";
  buf[n] = 0;
  return buf;
}

int runBatch(const std::string& dir, int jobs, const Options& opt) {
  std::vector<std::string> files;
  for (auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".koat") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());

  struct Pending {
    std::string file;
    FILE* pipe;
  };
  std::string base = selfExe() + " analyze --json --mdepth " + std::to_string(opt.mdepth) + " --cfr " + opt.cfr +
                     " --timeout " + std::to_string(opt.timeout) + (opt.invariants ? " --invariants" : "");

  long counts[5] = {0, 0, 0, 0, 0};  // O(1), O(n), O(n^2), O(n^{>2}), O(EXP)
  long finite = 0, failures = 0;
  double sumOk = 0, sumAll = 0;
  long analyzed = 0;

  size_t next = 0;
  std::vector<Pending> running;
  auto harvest = [&](Pending& pend) {
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pend.pipe)) > 0) out.append(buf, n);
    int rc = pclose(pend.pipe);
    if (rc != 0 || out.empty()) {
      std::cout << "error " << fs::path(pend.file).filename().string() << "\n";
      ++failures;
      return;
    }
    try {
      json j = json::parse(out);
      std::string cls = j["class"];
      double t = j["time_s"];
      ++analyzed;
      sumAll += t;
      if (cls != "INF" && cls != "INF?") {
        ++finite;
        sumOk += t;
        if (cls == "O(1)") {
          ++counts[0];
        } else if (cls == "O(n)") {
          ++counts[1];
        } else if (cls == "O(n^2)") {
          ++counts[2];
        } else if (cls == "O(EXP)") {
          ++counts[4];
        } else {
          ++counts[3];
        }
      }
      std::cout << cls << " " << std::string(j["bound"]) << " " << fs::path(pend.file).filename().string()
                << "\n";
    } catch (const std::exception&) {
      std::cout << "error " << fs::path(pend.file).filename().string() << "\n";
      ++failures;
    }
  };

  while (next < files.size() || !running.empty()) {
    while (next < files.size() && (int)running.size() < std::max(1, jobs)) {
      std::string cmd = base + " '" + files[next] + "'";
      FILE* pipe = popen(cmd.c_str(), "r");
      if (!pipe) {
        std::cout << "error " << fs::path(files[next]).filename().string() << "\n";
        ++failures;
      } else {
        running.push_back({files[next], pipe});
      }
      ++next;
    }
    if (!running.empty()) {
      harvest(running.front());
      running.erase(running.begin());
    }
  }

  auto avg = [&](double sum, long n) -> std::string {
    if (opt.noTimes) return "-";
    if (n == 0) return "0.00";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << (sum / (double)n);
    return os.str();
  };
  std::cout << "O(1) O(n) O(n^2) O(n^{>2}) O(EXP) <inf AVG+(s) AVG(s)\n";
  std::cout << counts[0] << " " << counts[1] << " " << counts[2] << " " << counts[3] << " " << counts[4] << " "
            << finite << " " << avg(sumOk, finite) << " " << avg(sumAll, analyzed) << "\n";
  if (failures > 0) std::cout << "errors " << failures << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case runtime bounds for integer transition systems"};
  app.require_subcommand(1);
  Options opt;

  auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("--mdepth", opt.mdepth, "maximal ranking-function depth (1..10)")
        ->check(CLI::Range(1, 10));
    cmd->add_option("--cfr", opt.cfr, "control-flow refinement: off|scc|sub-scc|global")
        ->check(CLI::IsMember({"off", "scc", "sub-scc", "global"}));
    cmd->add_option("--timeout", opt.timeout, "per-program timeout in seconds");
    cmd->add_flag("--invariants", opt.invariants, "conjoin interval invariants to guards");
    cmd->add_option("--report", opt.report, "report level: class|bound|full")
        ->check(CLI::IsMember({"class", "bound", "full"}));
    cmd->add_flag("--json", opt.jsonOut, "emit JSON lines");
    cmd->add_flag("--no-times", opt.noTimes, "omit wall times (for golden output)");
    cmd->add_option("--seed", opt.seed, "tie-breaking seed (analysis is deterministic)");
  };

  std::vector<std::string> files;
  auto* analyzeCmd = app.add_subcommand("analyze", "analyze .koat files");
  analyzeCmd->add_option("files", files, "input files")->required();
  addCommon(analyzeCmd);

  std::string dir;
  int jobs = 4;
  auto* batchCmd = app.add_subcommand("batch", "analyze a directory of .koat files");
  batchCmd->add_option("dir", dir, "directory")->required();
  batchCmd->add_option("--jobs", jobs, "parallel worker processes");
  addCommon(batchCmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyzeCmd) return runAnalyze(files, opt);
    if (*batchCmd) return runBatch(dir, jobs, opt);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
