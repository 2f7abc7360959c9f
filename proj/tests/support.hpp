#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>

#include "mills/pipeline.hpp"

namespace mills::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mills-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline Position pos_of(const BoardDef& b, std::initializer_list<const char*> mine,
                       std::initializer_list<const char*> theirs, int myHand = 0, int theirHand = 0) {
  Position p;
  for (const char* n : mine) p.mine |= bit(*b.find_point(n));
  for (const char* n : theirs) p.theirs |= bit(*b.find_point(n));
  p.myHand = myHand;
  p.theirHand = theirHand;
  return p;
}

// Solves into `dir` quietly and returns the report.
inline SolveReport solve_quiet(SolveConfig c) {
  static std::ostringstream sink;
  c.log = &sink;
  return run_solve(c);
}

// Solved databases shared by the tests of one binary, keyed by a label.
// Directories live until process exit.
class SolvedCache {
public:
  static SolvedCache& instance() {
    static SolvedCache c;
    return c;
  }
  const std::filesystem::path& get(const std::string& label, const SolveConfig& cfg) {
    std::lock_guard lock(mu_);
    auto it = dirs_.find(label);
    if (it != dirs_.end()) return it->second->path();
    auto dir = std::make_unique<TempDir>(label);
    SolveConfig c = cfg;
    c.outDir = dir->path();
    c.scratch = dir->path() / "scratch";
    solve_quiet(c);
    return dirs_.emplace(label, std::move(dir)).first->second->path();
  }

private:
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<TempDir>> dirs_;
};

}  // namespace mills::test
