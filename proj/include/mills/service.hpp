#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mills/engine.hpp"

namespace mills {

using nlohmann::json;

enum class Color { White, Black };

inline std::string to_string(Color c) { return c == Color::White ? "white" : "black"; }
inline Color parse_color(const std::string& s) {
  if (s == "white") return Color::White;
  if (s == "black") return Color::Black;
  throw Error("unknown side '" + s + "' (white, black)");
}
inline Color other(Color c) { return c == Color::White ? Color::Black : Color::White; }

// One game against the engine. The position is kept from the mover's
// perspective; `toMove` says which color that is.
struct GameSession {
  std::string id;
  Color human = Color::White;
  std::uint64_t seed = 1;
  int startWhite = 9, startBlack = 9;
  Position pos;
  Color toMove = Color::White;
  std::vector<std::string> history;
  int quiet = 0;
  int quietLimit = 50;
  std::string state = "ongoing";  // ongoing | win | loss | draw, from the human's side
  std::optional<Color> winner;
  std::string reason;
  std::unique_ptr<Engine> engine;
  std::mutex mu;
};

// Applies `m` to a session and updates its status. The move must be legal.
inline void advance(GameSession& g, const Move& m, const Variant& v) {
  g.pos = apply_move(g.pos, m, *v.board, v.rules);
  g.history.push_back(format_move(m, *v.board));
  g.quiet = m.is_quiet() ? g.quiet + 1 : 0;
  g.toMove = other(g.toMove);
  auto finish = [&](std::optional<Color> winner, std::string reason) {
    g.winner = winner;
    g.reason = std::move(reason);
    g.state = !winner ? "draw" : *winner == g.human ? "win" : "loss";
  };
  if (auto t = terminal_value(g.pos, *v.board, v.rules)) {
    if (*t == Terminal::Draw) finish(std::nullopt, "full board");
    else finish(other(g.toMove), g.pos.my_total() < 3 ? "fewer than three stones" : "blocked");
  } else if (g.quiet >= g.quietLimit) {
    finish(std::nullopt, std::to_string(g.quietLimit) + " quiet moves");
  }
}

class GameService {
public:
  struct Reply {
    int status = 200;
    json body;
  };

  // Serves every mode whose databases exist in `dbDir`.
  explicit GameService(const std::filesystem::path& dbDir) {
    DirVariant dv = load_variant(dbDir);
    variant_ = dv.variant;
    for (SolveMode m : {SolveMode::Strong, SolveMode::Ultra}) {
      auto set = std::make_shared<DbSet>(dbDir, variant_, m, dv.indexing);
      if (!set->available().empty()) dbs_[m] = set;
    }
    if (dbs_.empty()) throw Error(dbDir.string() + ": no databases");
  }

  const Variant& variant() const { return variant_; }

  Reply create(const json& req) {
    try {
      std::string variantName = req.value("variant", variant_.name);
      if (variantName != variant_.name)
        return error(422, "variant '" + variantName + "' is not served (have '" + variant_.name + "')");
      if (req.contains("rules")) {
        RuleFlags r = rules_from_json(req.at("rules"), variant_.rules);
        if (r.flag_bits() != variant_.rules.flag_bits()) return error(422, "rules do not match the databases");
      }
      SolveMode mode = parse_solve_mode(req.value("mode", std::string("strong")));
      auto it = dbs_.find(mode);
      if (it == dbs_.end()) return error(422, "no " + to_string(mode) + " databases");
      auto g = std::make_shared<GameSession>();
      g->human = parse_color(req.value("humanSide", std::string("white")));
      g->seed = req.value("seed", static_cast<std::uint64_t>(nextSeed_++));
      g->startWhite = variant_.rules.stonesToPlace;
      g->startBlack = variant_.rules.stonesToPlace;
      if (req.contains("inHand")) {
        g->startWhite = req.at("inHand").value("white", g->startWhite);
        g->startBlack = req.at("inHand").value("black", g->startBlack);
      }
      if (g->startWhite < 3 || g->startBlack < 3) return error(422, "each side needs at least three stones");
      g->quietLimit = req.value("quietMoveLimit", 50);
      g->pos = Position{0, 0, g->startWhite, g->startBlack};
      g->engine = std::make_unique<Engine>(it->second, g->seed);
      {
        std::lock_guard lock(mu_);
        g->id = "g" + std::to_string(++counter_);
        games_[g->id] = g;
      }
      std::lock_guard lock(g->mu);
      json out{{"gameId", g->id}};
      out["engineMove"] = engine_reply(*g);
      out["state"] = state_json(*g);
      return Reply{201, out};
    } catch (const std::exception& e) {
      return error(400, e.what());
    }
  }

  Reply get(const std::string& id) {
    auto g = find(id);
    if (!g) return error(404, "unknown game '" + id + "'");
    std::lock_guard lock(g->mu);
    return Reply{200, state_json(*g)};
  }

  Reply move(const std::string& id, const json& req) {
    auto g = find(id);
    if (!g) return error(404, "unknown game '" + id + "'");
    std::lock_guard lock(g->mu);
    if (g->state != "ongoing") return error(422, "game is over");
    if (g->toMove != g->human) return error(422, "not the human's turn");
    if (!req.contains("move") || !req.at("move").is_string()) return error(400, "body needs a 'move' string");
    const BoardDef& board = *variant_.board;
    Move m;
    try {
      m = parse_move(req.at("move").get<std::string>(), board, &g->pos, &variant_.rules);
    } catch (const Error& e) {
      return error(422, e.what());
    }
    if (auto why = check_move(g->pos, m, board, variant_.rules)) return error(422, *why);
    advance(*g, m, variant_);
    json out;
    try {
      out["engineMove"] = engine_reply(*g);
    } catch (const std::exception& e) {
      return error(500, std::string("engine failure: ") + e.what());
    }
    out["state"] = state_json(*g);
    return Reply{200, out};
  }

  Reply analysis(const std::string& id) {
    auto g = find(id);
    if (!g) return error(404, "unknown game '" + id + "'");
    std::lock_guard lock(g->mu);
    json moves = json::array();
    if (g->state == "ongoing") {
      try {
        for (const auto& a : g->engine->analyze(g->pos)) moves.push_back(analysis_json(a));
      } catch (const std::exception& e) {
        return error(500, e.what());
      }
    }
    return Reply{200, json{{"gameId", g->id}, {"moves", moves}}};
  }

  static json analysis_json(const MoveAnalysis& a) {
    json j{{"move", a.notation}};
    j["class"] = a.value.outcome == Outcome::Win ? "W" : a.value.outcome == Outcome::Loss ? "L" : "D";
    if (a.value.outcome != Outcome::Draw) j["dtw"] = a.value.dtw;
    else if (a.keyDtw) j["dtw"] = *a.keyDtw;
    else j["dtw"] = nullptr;
    if (a.firstKey) j["firstKey"] = *a.firstKey;
    return j;
  }

  json state_json(const GameSession& g) const {
    const BoardDef& board = *variant_.board;
    const PointSet white = g.toMove == Color::White ? g.pos.mine : g.pos.theirs;
    const PointSet black = g.toMove == Color::White ? g.pos.theirs : g.pos.mine;
    json cells = json::object();
    json points = json::array();
    for (int i = 0; i < board.size(); ++i) {
      const std::string& n = board.point_name(i);
      points.push_back(n);
      cells[n] = (white & bit(i)) ? "white" : (black & bit(i)) ? "black" : "empty";
    }
    json legal = json::array();
    if (g.state == "ongoing")
      for (const Move& m : legal_moves(g.pos, board, variant_.rules)) legal.push_back(format_move(m, board));
    const int myHand = g.pos.myHand, theirHand = g.pos.theirHand;
    json status{{"state", g.state}, {"reason", g.reason}};
    status["winner"] = g.winner ? json(to_string(*g.winner)) : json(nullptr);
    return json{{"gameId", g.id},
                {"variant", variant_.name},
                {"mode", to_string(g.engine->mode())},
                {"humanSide", to_string(g.human)},
                {"seed", g.seed},
                {"points", points},
                {"board", cells},
                {"inHand",
                 {{"white", g.toMove == Color::White ? myHand : theirHand},
                  {"black", g.toMove == Color::White ? theirHand : myHand}}},
                {"start", {{"white", g.startWhite}, {"black", g.startBlack}}},
                {"toMove", to_string(g.toMove)},
                {"legalMoves", legal},
                {"history", g.history},
                {"quietMoves", g.quiet},
                {"status", status}};
  }

  // Registers the JSON endpoints on `srv`.
  void install(httplib::Server& srv) {
    auto send = [](httplib::Response& res, const Reply& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    auto parse = [](const httplib::Request& req) -> std::optional<json> {
      if (req.body.empty()) return json::object();
      json j = json::parse(req.body, nullptr, false);
      if (j.is_discarded() || !j.is_object()) return std::nullopt;
      return j;
    };
    srv.Post("/games", [=, this](const httplib::Request& req, httplib::Response& res) {
      auto j = parse(req);
      send(res, j ? create(*j) : error(400, "malformed JSON body"));
    });
    srv.Get(R"(/games/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, get(req.matches[1]));
    });
    srv.Post(R"(/games/([^/]+)/moves)", [=, this](const httplib::Request& req, httplib::Response& res) {
      auto j = parse(req);
      send(res, j ? move(req.matches[1], *j) : error(400, "malformed JSON body"));
    });
    srv.Get(R"(/games/([^/]+)/analysis)", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, analysis(req.matches[1]));
    });
  }

private:
  static Reply error(int status, const std::string& why) { return Reply{status, json{{"error", why}}}; }

  std::shared_ptr<GameSession> find(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = games_.find(id);
    return it == games_.end() ? nullptr : it->second;
  }

  // Lets the engine move while it is its turn; returns its move or null.
  json engine_reply(GameSession& g) {
    if (g.state != "ongoing" || g.toMove == g.human) return nullptr;
    Move m = g.engine->choose(g.pos);
    advance(g, m, variant_);
    return format_move(m, *variant_.board);
  }

  Variant variant_;
  std::map<SolveMode, std::shared_ptr<const DbSet>> dbs_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<GameSession>> games_;
  std::uint64_t counter_ = 0;
  std::atomic<std::uint64_t> nextSeed_{1};
};

// Replays a move list from a start and returns the final position and the
// color to move; throws on an illegal move.
inline std::pair<Position, Color> replay(const Variant& v, int white, int black,
                                         const std::vector<std::string>& history) {
  Position p{0, 0, white, black};
  Color c = Color::White;
  for (const auto& s : history) {
    p = apply_move(p, parse_move(s, *v.board, &p, &v.rules), *v.board, v.rules);
    c = other(c);
  }
  return {p, c};
}

}  // namespace mills
