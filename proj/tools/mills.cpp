#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <regex>

#include "mills/match.hpp"
#include "mills/pipeline.hpp"
#include "mills/service.hpp"
#include "mills/ultra_paths.hpp"
#include "mills/verify.hpp"

using namespace mills;

namespace {

// "4G", "512M", "1000" -> bytes
std::uint64_t parse_bytes(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  std::string suf = s.substr(pos);
  double mul = 1;
  if (suf == "K" || suf == "k") mul = 1 << 10;
  else if (suf == "M" || suf == "m") mul = 1 << 20;
  else if (suf == "G" || suf == "g") mul = 1 << 30;
  else if (!suf.empty()) throw Error("bad size '" + s + "'");
  return static_cast<std::uint64_t>(v * mul);
}

// "3..4" -> every (i, j) with i, j in [3, 4]; "3:4,5:5" -> the listed pairs.
std::vector<Start> parse_starts(const std::string& s) {
  std::smatch m;
  std::vector<Start> out;
  if (std::regex_match(s, m, std::regex(R"((\d+)\.\.(\d+))"))) {
    int lo = std::stoi(m[1]), hi = std::stoi(m[2]);
    for (int i = lo; i <= hi; ++i)
      for (int j = lo; j <= hi; ++j) out.push_back(Start{i, j});
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!std::regex_match(item, m, std::regex(R"((\d+):(\d+))"))) throw Error("bad start '" + item + "'");
    out.push_back(Start{std::stoi(m[1]), std::stoi(m[2])});
  }
  return out;
}

std::pair<std::uint64_t, std::uint64_t> parse_interval(const std::string& s) {
  std::smatch m;
  if (std::regex_match(s, m, std::regex(R"((\d+)\.\.(\d+))"))) return {std::stoull(m[1]), std::stoull(m[2])};
  std::uint64_t v = std::stoull(s);
  return {v, v};
}

struct VariantOpts {
  std::string name = "standard";
  std::string boardFile;
  std::optional<bool> lasker, fullBoardDraw;
  std::optional<int> stones;

  void add(CLI::App* app) {
    app->add_option("--variant", name, "standard, lasker, morabaraba, morabaraba-fbd, or a board name");
    app->add_option("--board", boardFile, "custom board file (standard rules unless overridden)");
    app->add_flag("--lasker,!--no-lasker", lasker, "stones may be moved while some remain in hand");
    app->add_flag("--full-board-draw,!--no-full-board-draw", fullBoardDraw, "a full board is a draw");
    app->add_option("--stones", stones, "stones each player places");
  }

  Variant make() const {
    Variant v;
    if (!boardFile.empty()) {
      auto board = std::make_shared<const BoardDef>(BoardDef::load(boardFile));
      v = make_variant(board, RuleFlags::standard(), board->name());
    } else {
      v = make_variant(name);
    }
    if (lasker) v.rules.laskerPlacement = *lasker;
    if (fullBoardDraw) v.rules.fullBoardDraw = *fullBoardDraw;
    if (stones) v.rules.stonesToPlace = *stones;
    v.rules.validate();
    return v;
  }
};

void print_report(const VerifyReport& r, const std::string& what) {
  std::cout << what << ": " << r.summary() << '\n';
  for (const auto& v : r.first) std::cout << "  " << v.subspace.to_string() << " #" << v.index << ": " << v.detail << '\n';
}

void print_board(const json& st) {
  std::cout << "to move: " << st["toMove"].get<std::string>() << "  in hand: white "
            << st["inHand"]["white"] << ", black " << st["inHand"]["black"] << '\n';
  std::string w, b;
  for (auto& [pt, c] : st["board"].items()) {
    if (c == "white") w += " " + pt;
    if (c == "black") b += " " + pt;
  }
  std::cout << "white:" << (w.empty() ? " -" : w) << "\nblack:" << (b.empty() ? " -" : b) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nine men's morris family solver, verifier and player"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "compute databases");
  VariantOpts solveVariant;
  solveVariant.add(solve);
  bool extended = false;
  std::string starts, modeName = "strong", indexing = "plain", outDir = "db", ranksFile, mem = "4G",
              scratch, spill = "256M";
  std::vector<std::string> subspaces;
  int workers = 1;
  solve->add_flag("--extended", extended, "solve several starting stone counts");
  solve->add_option("--starts", starts, "with --extended: 'a..b' or 'i:j,...' stones in hand (white:black)");
  solve->add_option("--subspace", subspaces, "solve this subspace and its dependencies (wb,bb,wf,bf)");
  solve->add_option("--mode", modeName, "strong or ultra")->check(CLI::IsMember({"strong", "ultra"}));
  solve->add_option("--ranks", ranksFile, "rank table for ultra mode");
  solve->add_option("--indexing", indexing, "plain or canonical")->check(CLI::IsMember({"plain", "canonical"}));
  solve->add_option("--workers", workers, "units solved in parallel")->check(CLI::PositiveNumber);
  solve->add_option("--mem", mem, "memory budget, e.g. 4G");
  solve->add_option("--out", outDir, "output directory");
  solve->add_option("--scratch", scratch, "scratch directory for bucket files (default $MILLS_SCRATCH or temp)");
  solve->add_option("--spill-threshold", spill, "in-memory queue size before spilling, e.g. 256M");

  // ranks
  auto* ranks = app.add_subcommand("ranks", "derive a rank table from strong databases");
  std::string ranksDb = "db", heuristic = "wdl", overridesFile, ranksOut;
  bool ranksReport = false;
  ranks->add_option("--db", ranksDb, "database directory");
  ranks->add_option("--heuristic", heuristic, "wdl or stonediff")->check(CLI::IsMember({"wdl", "stonediff"}));
  ranks->add_option("--overrides", overridesFile, "rank file with manual ranks applied last");
  ranks->add_option("--out", ranksOut, "write the table here (default: stdout)");
  ranks->add_flag("--report", ranksReport, "instead: distribution of draws in ultra databases");

  // verify
  auto* verify = app.add_subcommand("verify", "check databases against their successors");
  std::string verifyDb = "db", verifyMode = "all";
  bool verifyPaths = false;
  std::size_t keep = 20;
  verify->add_option("--db", verifyDb, "database directory");
  verify->add_option("--mode", verifyMode, "strong, ultra or all")->check(CLI::IsMember({"strong", "ultra", "all"}));
  verify->add_flag("--paths", verifyPaths, "ultra: also check dtw along optimal paths");
  verify->add_option("--show", keep, "violations listed");

  // stats
  auto* stats = app.add_subcommand("stats", "win/draw/loss statistics");
  std::string statsDb = "db", statsMode = "strong", format = "table";
  stats->add_option("--db", statsDb, "database directory");
  stats->add_option("--mode", statsMode, "strong or ultra")->check(CLI::IsMember({"strong", "ultra"}));
  stats->add_option("--format", format, "table, csv, grid or maxdtw")
      ->check(CLI::IsMember({"table", "csv", "grid", "maxdtw"}));

  // match
  auto* match = app.add_subcommand("match", "play games between two players");
  std::string matchDb = "db", pa = "ultra", pb = "ab", budget = "1000..5000", matchStart, csvOut, transcripts;
  int games = 10, quiet = 50;
  std::uint64_t seed = 1;
  match->add_option("--db", matchDb, "database directory (for strong/ultra players)");
  match->add_option("--a", pa, "strong, ultra, ab or random");
  match->add_option("--b", pb, "strong, ultra, ab or random");
  match->add_option("--games", games, "number of games")->check(CLI::PositiveNumber);
  match->add_option("--budget", budget, "alpha-beta node budget per move, 'lo..hi' drawn per game");
  match->add_option("--start", matchStart, "stones in hand 'white:black' (default: the rules)");
  match->add_option("--quiet", quiet, "draw after this many moves without placement or capture");
  match->add_option("--seed", seed, "master seed");
  match->add_option("--csv", csvOut, "write tallies as CSV");
  match->add_option("--transcripts", transcripts, "write one game per line");

  // play
  auto* play = app.add_subcommand("play", "play against the engine in the terminal");
  std::string playDb = "db", playMode = "strong", side = "white";
  std::uint64_t playSeed = 1;
  play->add_option("--db", playDb, "database directory");
  play->add_option("--mode", playMode, "strong or ultra");
  play->add_option("--side", side, "white or black")->check(CLI::IsMember({"white", "black"}));
  play->add_option("--start", matchStart, "stones in hand 'white:black'");
  play->add_option("--seed", playSeed, "engine tie-break seed");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP/JSON game service");
  std::string serveDb = "db", host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--db", serveDb, "database directory");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      SolveConfig cfg;
      cfg.variant = solveVariant.make();
      if (extended) {
        if (starts.empty()) throw Error("--extended needs --starts");
        cfg.starts = parse_starts(starts);
        int most = cfg.variant.rules.stonesToPlace;
        for (const auto& s : cfg.starts) most = std::max({most, s.first, s.second});
        cfg.variant.rules.stonesToPlace = most;
      }
      for (const auto& s : subspaces) cfg.roots.push_back(parse_subspace(s));
      if (cfg.starts.empty() && cfg.roots.empty())
        cfg.starts = {Start{cfg.variant.rules.stonesToPlace, cfg.variant.rules.stonesToPlace}};
      cfg.mode = parse_solve_mode(modeName);
      cfg.indexing = parse_indexing_mode(indexing);
      cfg.workers = workers;
      cfg.memBudget = parse_bytes(mem);
      cfg.outDir = outDir;
      cfg.spillThreshold = parse_bytes(spill);
      if (!scratch.empty()) cfg.scratch = scratch;
      if (cfg.mode == SolveMode::Ultra) {
        std::filesystem::path rf = ranksFile.empty() ? cfg.outDir / "ranks.txt" : std::filesystem::path(ranksFile);
        if (!std::filesystem::exists(rf)) throw Error("ultra mode needs --ranks (run 'mills ranks' first)");
        cfg.ranks = RankTable::load(rf);
      }
      auto rep = run_solve(cfg);
      std::cout << "solved " << rep.unitsSolved << " units, skipped " << rep.unitsSkipped << " in "
                << rep.seconds << " s\n";
      return 0;
    }

    if (*ranks) {
      if (ranksReport) {
        auto dbs = open_db_set(ranksDb, SolveMode::Ultra);
        RankReport r = rank_report(*dbs);
        std::cout << "draws " << r.draws << '\n';
        if (heuristic == "wdl") {
          std::cout << "absolute first key,count\n";
          for (const auto& [k, n] : r.byAbsoluteKey) std::cout << k << ',' << n << '\n';
        } else {
          std::cout << "stone difference,count\n";
          for (const auto& [k, n] : r.byStoneDifference) std::cout << k << ',' << n << '\n';
        }
        std::cout << "reached subspace,count\n";
        for (const auto& [s, n] : r.byReached) std::cout << '"' << s.to_string() << "\"," << n << '\n';
        return 0;
      }
      DirVariant dv = load_variant(ranksDb);
      auto st = collect_stats(ranksDb, SolveMode::Strong);
      std::vector<SubspaceId> roots;
      for (const auto& [s, x] : st) roots.push_back(s);
      if (roots.empty()) throw Error(ranksDb + ": no strong databases");
      UnitDag dag = build_dag_from(roots, *dv.variant.board, dv.variant.rules);
      std::map<SubspaceId, int> overrides;
      if (!overridesFile.empty()) overrides = RankTable::load(overridesFile).ranks;
      RankTable t = compute_ranks(dag, st, parse_heuristic(heuristic), overrides);
      if (ranksOut.empty()) std::cout << t.to_text();
      else t.save(ranksOut);
      return 0;
    }

    if (*verify) {
      bool failed = false;
      for (SolveMode m : {SolveMode::Strong, SolveMode::Ultra}) {
        if (verifyMode != "all" && parse_solve_mode(verifyMode) != m) continue;
        auto dbs = open_db_set(verifyDb, m);
        if (dbs->available().empty()) {
          if (verifyMode != "all") throw Error(verifyDb + ": no " + to_string(m) + " databases");
          continue;
        }
        auto r = verify_all(*dbs, keep);
        print_report(r, to_string(m));
        failed |= !r.ok();
        if (m == SolveMode::Ultra && verifyPaths) {
          auto p = check_dtw_paths(*dbs, keep);
          print_report(p, "ultra paths");
          failed |= !p.ok();
        }
      }
      return failed ? 1 : 0;
    }

    if (*stats) {
      SolveMode m = parse_solve_mode(statsMode);
      auto st = collect_stats(statsDb, m);
      if (format == "csv") {
        std::cout << stats_csv_header() << '\n';
        for (const auto& [s, x] : st) std::cout << stats_csv_row(s, x) << '\n';
      } else if (format == "grid") {
        std::cout << render_grid(st, [](const SubspaceStats& x) { return format_wdl(x); });
      } else if (format == "maxdtw") {
        std::cout << render_grid(st, [](const SubspaceStats& x) { return std::to_string(x.maxDtw); });
      } else {
        for (const auto& [s, x] : st)
          std::cout << s.to_string() << "  " << format_wdl(x) << "  max dtw " << x.maxDtw << "  positions "
                    << x.total() << '\n';
      }
      // Values of the empty-board starts present.
      auto dbs = open_db_set(statsDb, m);
      for (const auto& s : dbs->available()) {
        if (s.wb != 0 || s.bb != 0) continue;
        Position start{0, 0, s.wf, s.bf};
        auto db = dbs->get(s);
        StrongValue v = m == SolveMode::Strong
                            ? db->strong(dbs->index_of(start))
                            : ultra_to_strong(db->ultra(dbs->index_of(start)), db->header().rank, db->header().winKey);
        std::cout << "start " << s.wf << ':' << s.bf << " = " << v.to_string() << '\n';
      }
      return 0;
    }

    if (*match) {
      DirVariant dv = load_variant(matchDb);
      const Variant& v = dv.variant;
      auto [lo, hi] = parse_interval(budget);
      MatchConfig cfg;
      cfg.games = games;
      cfg.quietDrawAfter = quiet;
      cfg.budgetMin = lo;
      cfg.budgetMax = hi;
      cfg.seed = seed;
      cfg.whiteStones = cfg.blackStones = v.rules.stonesToPlace;
      if (!matchStart.empty()) {
        auto st = parse_starts(matchStart).at(0);
        cfg.whiteStones = st.first;
        cfg.blackStones = st.second;
      }
      auto make = [&](const std::string& kind) -> std::unique_ptr<Player> {
        if (kind == "strong" || kind == "ultra")
          return std::make_unique<EnginePlayer>(open_db_set(matchDb, parse_solve_mode(kind)), kind);
        if (kind == "ab") return std::make_unique<AlphaBetaPlayer>(v, AbConfig{}, "ab");
        if (kind == "random") return std::make_unique<RandomPlayer>(v);
        throw Error("unknown player '" + kind + "'");
      };
      auto a = make(pa);
      auto b = make(pb);
      if (a->name() == b->name()) throw Error("players need different kinds");
      MatchResult r = run_match(*a, *b, v, cfg);
      std::cout << r.csv();
      if (!csvOut.empty()) std::ofstream(csvOut) << r.csv();
      if (!transcripts.empty()) {
        std::ofstream out(transcripts);
        for (const auto& g : r.games) out << g.white << " vs " << g.black << " (" << g.reason << "): " << g.transcript() << '\n';
      }
      if (!r.error.empty()) {
        std::cerr << "match aborted: " << r.error << '\n';
        return 1;
      }
      return 0;
    }

    if (*play) {
      GameService svc(playDb);
      json req{{"mode", playMode}, {"humanSide", side}, {"seed", playSeed}};
      if (!matchStart.empty()) {
        auto st = parse_starts(matchStart).at(0);
        req["inHand"] = {{"white", st.first}, {"black", st.second}};
      }
      auto r = svc.create(req);
      if (r.status >= 300) throw Error(r.body["error"].get<std::string>());
      std::string id = r.body["gameId"];
      json st = r.body["state"];
      if (!r.body["engineMove"].is_null()) std::cout << "engine: " << r.body["engineMove"].get<std::string>() << '\n';
      std::string line;
      while (st["status"]["state"] == "ongoing") {
        print_board(st);
        std::cout << "your move (or 'hint'): " << std::flush;
        if (!std::getline(std::cin, line)) return 0;
        if (line == "hint") {
          auto hint = svc.analysis(id);
          for (const auto& a : hint.body["moves"]) std::cout << "  " << a.dump() << '\n';
          continue;
        }
        auto m = svc.move(id, json{{"move", line}});
        if (m.status != 200) {
          std::cout << m.body["error"].get<std::string>() << '\n';
          continue;
        }
        st = m.body["state"];
        if (!m.body["engineMove"].is_null()) std::cout << "engine: " << m.body["engineMove"].get<std::string>() << '\n';
      }
      std::cout << "result: " << st["status"]["state"].get<std::string>() << " ("
                << st["status"]["reason"].get<std::string>() << ")\n";
      return 0;
    }

    if (*serve) {
      GameService svc(serveDb);
      httplib::Server srv;
      svc.install(srv);
      EventLog(&std::cerr).emit("serve", {{"host", host}, {"port", std::to_string(port)}, {"db", serveDb}});
      if (!srv.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
