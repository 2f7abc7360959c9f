#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <tuple>

#include "mills/board.hpp"
#include "mills/position.hpp"
#include "mills/rules.hpp"

namespace mills {

// Stones on the board (wb, bb) and in hand (wf, bf) for the mover (w) and the
// opponent (b).
struct SubspaceId {
  int wb = 0;
  int bb = 0;
  int wf = 0;
  int bf = 0;

  SubspaceId negate() const { return SubspaceId{bb, wb, bf, wf}; }
  // Equal Stone Count: fixed point of negate().
  bool is_esc() const { return wb == bb && wf == bf; }

  std::string to_string() const {
    return std::to_string(wb) + "," + std::to_string(bb) + "," + std::to_string(wf) + "," +
           std::to_string(bf);
  }
  std::string file_stem() const {
    return std::to_string(wb) + "-" + std::to_string(bb) + "-" + std::to_string(wf) + "-" +
           std::to_string(bf);
  }

  friend bool operator==(const SubspaceId&, const SubspaceId&) = default;
  friend auto operator<=>(const SubspaceId& a, const SubspaceId& b) {
    return std::tie(a.wb, a.bb, a.wf, a.bf) <=> std::tie(b.wb, b.bb, b.wf, b.bf);
  }
};

inline SubspaceId negate(const SubspaceId& s) { return s.negate(); }

inline SubspaceId subspace_of(const Position& p) {
  return SubspaceId{popcount(p.mine), popcount(p.theirs), p.myHand, p.theirHand};
}

// Accepts "wb,bb,wf,bf" or "wb-bb-wf-bf".
inline SubspaceId parse_subspace(std::string_view text) {
  std::string t(text);
  for (char& c : t)
    if (c == ',' || c == '-') c = ' ';
  std::istringstream in(t);
  SubspaceId s;
  if (!(in >> s.wb >> s.bb >> s.wf >> s.bf)) throw Error("bad subspace '" + std::string(text) + "'");
  std::string rest;
  if (in >> rest) throw Error("bad subspace '" + std::string(text) + "'");
  return s;
}

// A subspace holds non-terminal positions only: both sides keep at least
// three stones counting the hand.
inline bool is_valid_subspace(const SubspaceId& s, int points, const RuleFlags& rules) {
  if (s.wb < 0 || s.bb < 0 || s.wf < 0 || s.bf < 0) return false;
  if (s.wb + s.wf > rules.stonesToPlace || s.bb + s.bf > rules.stonesToPlace) return false;
  if (s.wb + s.bb > points) return false;
  return s.wb + s.wf >= 3 && s.bb + s.bf >= 3;
}

struct SubspaceHash {
  std::size_t operator()(const SubspaceId& s) const {
    return static_cast<std::size_t>((s.wb << 24) | (s.bb << 16) | (s.wf << 8) | s.bf);
  }
};

}  // namespace mills
