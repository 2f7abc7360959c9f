#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mills/dbstore.hpp"
#include "mills/retro_basic.hpp"
#include "mills/ultra.hpp"
#include "mills/workunits.hpp"

namespace mills {

// Single-line "key=value" log records. Values with spaces are quoted.
class EventLog {
public:
  explicit EventLog(std::ostream* out = &std::cerr) : out_(out) {}

  void emit(const std::string& event, std::initializer_list<std::pair<std::string, std::string>> fields) {
    if (!out_) return;
    std::ostringstream line;
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    line << "ts=" << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " event=" << event;
    for (const auto& [k, v] : fields) {
      line << ' ' << k << '=';
      if (v.find_first_of(" \"=") != std::string::npos) line << std::quoted(v);
      else line << v;
    }
    std::lock_guard lock(mu_);
    *out_ << line.str() << '\n' << std::flush;
  }

private:
  std::ostream* out_;
  std::mutex mu_;
};

// ---- variant persistence ----------------------------------------------------

inline nlohmann::json rules_to_json(const RuleFlags& r) {
  return {{"stonesToPlace", r.stonesToPlace},
          {"laskerPlacement", r.laskerPlacement},
          {"fullBoardDraw", r.fullBoardDraw},
          {"captureFromMillWhenAllInMills", r.captureFromMillWhenAllInMills},
          {"flyingAtThree", r.flyingAtThree}};
}

inline RuleFlags rules_from_json(const nlohmann::json& j, RuleFlags base = {}) {
  if (j.contains("stonesToPlace")) base.stonesToPlace = j.at("stonesToPlace").get<int>();
  if (j.contains("laskerPlacement")) base.laskerPlacement = j.at("laskerPlacement").get<bool>();
  if (j.contains("fullBoardDraw")) base.fullBoardDraw = j.at("fullBoardDraw").get<bool>();
  if (j.contains("captureFromMillWhenAllInMills"))
    base.captureFromMillWhenAllInMills = j.at("captureFromMillWhenAllInMills").get<bool>();
  if (j.contains("flyingAtThree")) base.flyingAtThree = j.at("flyingAtThree").get<bool>();
  base.validate();
  return base;
}

// variant.board + variant.json describe what a database directory holds.
inline void save_variant(const std::filesystem::path& dir, const Variant& v, IndexingMode indexing) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream b(dir / "variant.board", std::ios::binary | std::ios::trunc);
    b << v.board->to_text();
  }
  nlohmann::json j{{"name", v.name}, {"board", v.board->name()}, {"rules", rules_to_json(v.rules)},
                   {"indexing", to_string(indexing)}};
  std::ofstream out(dir / "variant.json", std::ios::trunc);
  out << j.dump(2) << '\n';
}

struct DirVariant {
  Variant variant;
  IndexingMode indexing = IndexingMode::Plain;
};

inline DirVariant load_variant(const std::filesystem::path& dir) {
  auto jp = dir / "variant.json";
  std::ifstream in(jp);
  if (!in) throw Error(jp.string() + ": missing; not a database directory");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(jp.string() + ": " + e.what());
  }
  DirVariant dv;
  dv.variant.name = j.value("name", "custom");
  dv.variant.board = std::make_shared<const BoardDef>(BoardDef::load(dir / "variant.board"));
  dv.variant.rules = rules_from_json(j.at("rules"));
  dv.indexing = parse_indexing_mode(j.value("indexing", "plain"));
  return dv;
}

// ---- solve ------------------------------------------------------------------

struct SolveConfig {
  Variant variant;
  std::vector<Start> starts;       // extended solve
  std::vector<SubspaceId> roots;   // explicit subspaces (with their dependencies)
  SolveMode mode = SolveMode::Strong;
  IndexingMode indexing = IndexingMode::Plain;
  int workers = 1;
  std::uint64_t memBudget = 4ull << 30;
  std::filesystem::path outDir = "db";
  std::optional<RankTable> ranks;  // ultra mode
  std::uint64_t spillThreshold = 256ull << 20;
  std::filesystem::path scratch = default_scratch_dir();
  std::ostream* log = &std::cerr;
};

struct SolveReport {
  int unitsSolved = 0;
  int unitsSkipped = 0;
  double seconds = 0;
  UnitDag dag;
};

inline UnitDag dag_for(const SolveConfig& cfg) {
  std::vector<SubspaceId> roots = cfg.roots;
  for (const auto& st : cfg.starts) {
    if (st.first < 3 || st.second < 3) throw Error("each start needs at least three stones per side");
    roots.push_back(st.subspace());
  }
  return build_dag_from(roots, *cfg.variant.board, cfg.variant.rules);
}

// True if every database of the unit exists with a matching, intact header
// and payload (resume support).
inline bool unit_complete(const SolveConfig& cfg, const WorkUnit& u, const IndexerCache& ix) {
  for (const auto& s : u.subspaces) {
    auto p = cfg.outDir / db_file_name(s, cfg.mode);
    if (!std::filesystem::exists(p)) return false;
    try {
      DbRequest req;
      req.mode = cfg.mode;
      req.boardDigest = cfg.variant.board->digest();
      req.flagBits = cfg.variant.rules.flag_bits();
      req.subspace = s;
      req.indexing = cfg.indexing;
      DbHeader h = read_header(p);
      if (h.mode != cfg.mode || h.boardDigest != *req.boardDigest || h.flagBits != *req.flagBits ||
          h.subspace != s || h.indexing != cfg.indexing || h.records != ix.get(s)->size())
        return false;
      if (cfg.mode == SolveMode::Ultra && h.rankDigest != cfg.ranks->digest()) return false;
      read_db(p, req);
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

inline void write_progress(const std::filesystem::path& dir, const UnitDag& dag,
                           const std::vector<std::string>& state, const std::vector<int>& wave,
                           const std::vector<double>& secs) {
  nlohmann::json units = nlohmann::json::array();
  for (std::size_t u = 0; u < dag.units.size(); ++u)
    units.push_back({{"unit", dag.units[u].name()},
                     {"wave", wave[u]},
                     {"state", state[u]},
                     {"seconds", secs[u]}});
  auto tmp = dir / "progress.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << nlohmann::json{{"units", units}}.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, dir / "progress.json");
}

inline SolveReport run_solve(const SolveConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Variant& v = cfg.variant;
  const BoardDef& board = *v.board;
  if (cfg.mode == SolveMode::Ultra && !cfg.ranks) throw Error("ultra mode needs a rank table");
  EventLog log(cfg.log);
  SolveReport rep;
  rep.dag = dag_for(cfg);
  const UnitDag& dag = rep.dag;
  if (cfg.mode == SolveMode::Ultra)
    for (const auto& s : dag.all_subspaces()) cfg.ranks->rank(s);
  Plan plan = schedule(dag, cfg.workers, cfg.memBudget, board, v.rules,
                       cfg.mode == SolveMode::Strong ? kStrongCellBytes : kMultiCellBytes);
  std::filesystem::create_directories(cfg.outDir);
  if (std::filesystem::exists(cfg.outDir / "variant.json")) {
    DirVariant existing = load_variant(cfg.outDir);
    if (existing.variant.board->digest() != board.digest() ||
        existing.variant.rules.flag_bits() != v.rules.flag_bits() || existing.indexing != cfg.indexing)
      throw Error(cfg.outDir.string() + " already holds databases of a different variant or indexing");
  }
  save_variant(cfg.outDir, v, cfg.indexing);
  if (cfg.mode == SolveMode::Ultra) cfg.ranks->save(cfg.outDir / "ranks.txt");

  IndexerCache indexers(v.board, cfg.indexing);
  std::vector<std::string> state(dag.units.size(), "pending");
  std::vector<int> waveOf(dag.units.size(), -1);
  std::vector<double> secs(dag.units.size(), 0.0);
  for (std::size_t w = 0; w < plan.waves.size(); ++w)
    for (int u : plan.waves[w]) waveOf[u] = static_cast<int>(w);
  log.emit("plan", {{"units", std::to_string(dag.units.size())},
                    {"waves", std::to_string(plan.waves.size())},
                    {"mode", to_string(cfg.mode)},
                    {"indexing", to_string(cfg.indexing)},
                    {"workers", std::to_string(cfg.workers)}});

  std::mutex mu;
  const SolveMode dbMode = cfg.mode;
  DbLoader loader = [&](const SubspaceId& s) {
    DbRequest req;
    req.mode = dbMode;
    req.boardDigest = board.digest();
    req.flagBits = v.rules.flag_bits();
    req.subspace = s;
    req.indexing = cfg.indexing;
    auto p = cfg.outDir / db_file_name(s, dbMode);
    if (!std::filesystem::exists(p)) throw Error("missing secondary database " + p.string());
    return std::make_shared<const SubspaceDb>(read_db(p, req));
  };

  auto solve_one = [&](int u) {
    const WorkUnit& unit = dag.units[u];
    const auto ts = std::chrono::steady_clock::now();
    UnitSpace space(v, unit.subspaces, indexers);
    auto secondaries = dag.secondaries(u, board, v.rules);
    std::vector<SubspaceDb> out;
    if (cfg.mode == SolveMode::Strong) {
      StrongSolveOptions o{cfg.spillThreshold, cfg.scratch};
      auto r = solve_strong_unit(space, secondaries, loader, o);
      for (std::size_t k = 0; k < unit.subspaces.size(); ++k)
        out.push_back(make_strong_db(base_header(v, unit.subspaces[k], cfg.indexing), r.codes[k]));
    } else {
      UltraSolveOptions o{cfg.spillThreshold, cfg.scratch};
      auto r = solve_ultra_unit(space, secondaries, loader, *cfg.ranks, o);
      for (std::size_t k = 0; k < unit.subspaces.size(); ++k) {
        DbHeader h = base_header(v, unit.subspaces[k], cfg.indexing);
        h.rank = cfg.ranks->rank(unit.subspaces[k]);
        h.winKey = cfg.ranks->win_key();
        h.rankDigest = cfg.ranks->digest();
        out.push_back(make_ultra_db(h, r.records[k]));
      }
    }
    for (const auto& db : out) write_db(cfg.outDir / db_file_name(db.subspace(), cfg.mode), db);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - ts).count();
    std::lock_guard lock(mu);
    secs[u] = dt;
    state[u] = "done";
    ++rep.unitsSolved;
    std::uint64_t records = 0;
    for (const auto& db : out) records += db.size();
    log.emit("unit", {{"unit", unit.name()},
                      {"wave", std::to_string(waveOf[u])},
                      {"state", "done"},
                      {"records", std::to_string(records)},
                      {"seconds", std::to_string(dt)}});
    write_progress(cfg.outDir, dag, state, waveOf, secs);
  };

  for (std::size_t w = 0; w < plan.waves.size(); ++w) {
    std::vector<int> todo;
    for (int u : plan.waves[w]) {
      if (unit_complete(cfg, dag.units[u], indexers)) {
        state[u] = "done";
        ++rep.unitsSkipped;
        log.emit("unit", {{"unit", dag.units[u].name()},
                          {"wave", std::to_string(w)},
                          {"state", "skipped"}});
      } else {
        todo.push_back(u);
      }
    }
    write_progress(cfg.outDir, dag, state, waveOf, secs);
    if (todo.size() <= 1 || cfg.workers <= 1) {
      for (int u : todo) solve_one(u);
      continue;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(todo.size());
    for (std::size_t i = 0; i < todo.size(); ++i)
      threads.emplace_back([&, i] {
        try {
          solve_one(todo[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log.emit("solve", {{"state", "done"},
                     {"solved", std::to_string(rep.unitsSolved)},
                     {"skipped", std::to_string(rep.unitsSkipped)},
                     {"seconds", std::to_string(rep.seconds)}});
  return rep;
}

// Statistics of every database of one mode in a directory, from headers.
inline std::map<SubspaceId, SubspaceStats> collect_stats(const std::filesystem::path& dir, SolveMode mode) {
  std::map<SubspaceId, SubspaceStats> out;
  const std::string suffix = "." + to_string(mode) + ".mmdb";
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::string n = e.path().filename().string();
    if (n.size() <= suffix.size() || n.compare(n.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    DbHeader h = read_header(e.path());
    out[h.subspace] = h.stats;
  }
  return out;
}

}  // namespace mills
