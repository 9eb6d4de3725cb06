#include "loopbound/symbols.hpp"

#include <mutex>
#include <unordered_map>

namespace loopbound::symbols {

namespace {

struct Pool {
  std::mutex mtx;
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;

  int intern(const std::string& name) {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(names.size());
    names.push_back(name);
    ids.emplace(name, id);
    return id;
  }

  bool contains(const std::string& name) {
    std::lock_guard<std::mutex> lock(mtx);
    return ids.count(name) > 0;
  }

  int fresh(const std::string& base) {
    std::lock_guard<std::mutex> lock(mtx);
    std::string candidate = base;
    int suffix = 0;
    while (ids.count(candidate)) candidate = base + "_" + std::to_string(++suffix);
    int id = static_cast<int>(names.size());
    names.push_back(candidate);
    ids.emplace(candidate, id);
    return id;
  }

  const std::string& name(int id) {
    std::lock_guard<std::mutex> lock(mtx);
    return names.at(static_cast<size_t>(id));
  }
};

Pool& varPool() {
  static Pool p;
  return p;
}

Pool& locPool() {
  static Pool p;
  return p;
}

}  // namespace

VarId var(const std::string& name) { return varPool().intern(name); }
const std::string& varName(VarId v) { return varPool().name(v); }
bool knownVar(const std::string& name) { return varPool().contains(name); }

LocId loc(const std::string& name) { return locPool().intern(name); }
LocId freshLoc(const std::string& base) { return locPool().fresh(base); }
const std::string& locName(LocId l) { return locPool().name(l); }

}  // namespace loopbound::symbols
