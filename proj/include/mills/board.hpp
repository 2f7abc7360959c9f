#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mills/common.hpp"

namespace mills {

// Board topology loaded from a versioned text file. Points are indexed in the
// order of the [points] section; every derived mask uses those indices.
//
// File grammar (whitespace separated tokens, '#' starts a comment):
//
//   mills-board 1
//   name <identifier>
//   [points]      <point names ...>
//   [layout]      <point> <x> <y>           (optional, used for rendering)
//   [adjacency]   <point> <point>           (one pair per line)
//   [mills]       <point> <point> <point>   (one triple per line)
//   [symmetries]  <image of each point, in [points] order>  (one per line)
class BoardDef {
public:
  struct Layout {
    int x = 0;
    int y = 0;
  };

  static BoardDef parse(std::string_view text);
  static BoardDef load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(points_.size()); }
  PointSet all() const { return all_; }
  const std::string& point_name(int i) const { return points_.at(i); }
  std::optional<int> find_point(std::string_view n) const;

  PointSet neighbors(int p) const { return neighbors_[p]; }
  const std::vector<std::pair<int, int>>& adjacency() const { return edges_; }
  const std::vector<std::array<int, 3>>& mill_triples() const { return mills_; }
  const std::vector<PointSet>& mills() const { return millMasks_; }
  const std::vector<PointSet>& mills_through(int p) const { return millsThrough_[p]; }
  const std::vector<std::vector<int>>& symmetries() const { return symmetries_; }
  int symmetry_count() const { return static_cast<int>(symmetries_.size()); }
  const std::vector<Layout>& layout() const { return layout_; }
  bool has_layout() const { return hasLayout_; }
  PointSet four_neighbor_points() const { return fourNeighbor_; }

  // True if stone set `s` contains a full mill through point p.
  bool closes_mill(int p, PointSet s) const {
    for (PointSet m : millsThrough_[p])
      if ((m & s) == m) return true;
    return false;
  }

  // Union of all mills fully contained in s.
  PointSet in_mills(PointSet s) const {
    PointSet out = 0;
    for (PointSet m : millMasks_)
      if ((m & s) == m) out |= m;
    return out;
  }

  PointSet permute(int sym, PointSet s) const {
    const auto& t = symTables_[sym];
    return t[0][s & 0xff] | t[1][(s >> 8) & 0xff] | t[2][(s >> 16) & 0xff] | t[3][s >> 24];
  }

  // Stable digest of the topology (independent of comments and layout).
  std::uint64_t digest() const { return digest_; }

  // Canonical text form; parse(to_text()) reproduces the board.
  std::string to_text() const;

private:
  void finalize();

  std::string name_;
  std::vector<std::string> points_;
  std::vector<Layout> layout_;
  bool hasLayout_ = false;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::array<int, 3>> mills_;
  std::vector<std::vector<int>> symmetries_;

  PointSet all_ = 0;
  PointSet fourNeighbor_ = 0;
  std::array<PointSet, kMaxPoints> neighbors_{};
  std::vector<PointSet> millMasks_;
  std::array<std::vector<PointSet>, kMaxPoints> millsThrough_{};
  std::vector<std::array<std::array<PointSet, 256>, 4>> symTables_;
  std::uint64_t digest_ = 0;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

inline std::optional<int> BoardDef::find_point(std::string_view n) const {
  for (int i = 0; i < size(); ++i)
    if (points_[i] == n) return i;
  return std::nullopt;
}

inline BoardDef BoardDef::parse(std::string_view text) {
  BoardDef b;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  bool sawHeader = false;
  int lineNo = 0;
  std::map<std::string, int> index;

  auto fail = [&](const std::string& msg) {
    throw Error("board line " + std::to_string(lineNo) + ": " + msg);
  };
  auto lookup = [&](const std::string& n) {
    auto it = index.find(n);
    if (it == index.end()) fail("unknown point '" + n + "'");
    return it->second;
  };

  while (std::getline(in, raw)) {
    ++lineNo;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto toks = detail::split_ws(raw);
    if (toks.empty()) continue;
    if (!sawHeader) {
      if (toks.size() != 2 || toks[0] != "mills-board") fail("expected 'mills-board <version>'");
      if (toks[1] != "1") fail("unsupported board format version " + toks[1]);
      sawHeader = true;
      continue;
    }
    if (toks[0].front() == '[') {
      section = toks[0];
      if (toks.size() != 1) fail("unexpected tokens after section header");
      static const std::set<std::string> known{"[points]", "[layout]", "[adjacency]", "[mills]",
                                               "[symmetries]"};
      if (!known.count(section)) fail("unknown section " + section);
      continue;
    }
    if (section.empty()) {
      if (toks[0] == "name" && toks.size() == 2) {
        b.name_ = toks[1];
        continue;
      }
      fail("unexpected line outside a section");
    }
    if (section == "[points]") {
      for (auto& t : toks) {
        if (index.count(t)) fail("duplicate point '" + t + "'");
        if (static_cast<int>(b.points_.size()) == kMaxPoints) fail("more than 32 points");
        index[t] = static_cast<int>(b.points_.size());
        b.points_.push_back(t);
      }
    } else if (section == "[layout]") {
      if (toks.size() != 3) fail("layout entries are '<point> <x> <y>'");
      int p = lookup(toks[0]);
      b.layout_.resize(b.points_.size());
      b.layout_[p] = Layout{std::stoi(toks[1]), std::stoi(toks[2])};
      b.hasLayout_ = true;
    } else if (section == "[adjacency]") {
      if (toks.size() != 2) fail("adjacency entries are point pairs");
      int p = lookup(toks[0]), q = lookup(toks[1]);
      if (p == q) fail("self-loop at '" + toks[0] + "'");
      b.edges_.emplace_back(std::min(p, q), std::max(p, q));
    } else if (section == "[mills]") {
      if (toks.size() != 3) fail("mill entries are point triples");
      b.mills_.push_back({lookup(toks[0]), lookup(toks[1]), lookup(toks[2])});
    } else if (section == "[symmetries]") {
      if (toks.size() != b.points_.size()) fail("symmetry must list the image of every point");
      std::vector<int> perm;
      for (auto& t : toks) perm.push_back(lookup(t));
      b.symmetries_.push_back(std::move(perm));
    }
  }
  if (!sawHeader) throw Error("board: missing 'mills-board' header");
  if (b.points_.empty()) throw Error("board: no points");
  if (b.name_.empty()) b.name_ = "custom";
  b.finalize();
  return b;
}

inline BoardDef BoardDef::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open board file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse(ss.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline void BoardDef::finalize() {
  const int n = size();
  all_ = n == 32 ? ~PointSet{0} : (bit(n) - 1);
  if (hasLayout_) layout_.resize(n);

  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [p, q] : edges_) {
    neighbors_[p] |= bit(q);
    neighbors_[q] |= bit(p);
  }
  for (int p = 0; p < n; ++p)
    if (popcount(neighbors_[p]) == 4) fourNeighbor_ |= bit(p);

  std::set<PointSet> seenMills;
  for (auto& m : mills_) {
    if (m[0] == m[1] || m[1] == m[2] || m[0] == m[2])
      throw Error("board: mill repeats a point");
    PointSet mask = bit(m[0]) | bit(m[1]) | bit(m[2]);
    if (!seenMills.insert(mask).second) throw Error("board: duplicate mill");
    // A mill must be a path x-y-z in the adjacency graph.
    bool path = false;
    for (int mid = 0; mid < 3; ++mid) {
      int a = m[(mid + 1) % 3], c = m[(mid + 2) % 3];
      if ((neighbors_[m[mid]] & bit(a)) && (neighbors_[m[mid]] & bit(c))) path = true;
    }
    if (!path)
      throw Error("board: mill " + points_[m[0]] + " " + points_[m[1]] + " " + points_[m[2]] +
                  " is not on a line of adjacency");
    millMasks_.push_back(mask);
    for (int p : m) millsThrough_[p].push_back(mask);
  }

  // Symmetries: identity required, each must be an automorphism, and the set
  // must be closed under composition and inverse.
  std::vector<int> identity(n);
  for (int i = 0; i < n; ++i) identity[i] = i;
  if (symmetries_.empty()) symmetries_.push_back(identity);
  std::set<std::vector<int>> group;
  for (auto& perm : symmetries_) {
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != identity) throw Error("board: symmetry is not a permutation");
    if (!group.insert(perm).second) throw Error("board: duplicate symmetry");
    for (auto [p, q] : edges_) {
      auto e = std::minmax(perm[p], perm[q]);
      if (!std::binary_search(edges_.begin(), edges_.end(), std::pair<int, int>(e.first, e.second)))
        throw Error("board: symmetry does not preserve adjacency");
    }
    for (PointSet m : millMasks_) {
      PointSet img = 0;
      for_each_bit(m, [&](int p) { img |= bit(perm[p]); });
      if (!seenMills.count(img)) throw Error("board: symmetry does not preserve mills");
    }
  }
  if (!group.count(identity)) throw Error("board: symmetry set lacks the identity");
  for (auto& a : symmetries_) {
    std::vector<int> inv(n);
    for (int i = 0; i < n; ++i) inv[a[i]] = i;
    if (!group.count(inv)) throw Error("board: symmetry set is not a group (missing inverse)");
    for (auto& c : symmetries_) {
      std::vector<int> comp(n);
      for (int i = 0; i < n; ++i) comp[i] = a[c[i]];
      if (!group.count(comp)) throw Error("board: symmetry set is not a group (not closed)");
    }
  }
  // Keep the identity first so that symmetry 0 is always the identity.
  auto it = std::find(symmetries_.begin(), symmetries_.end(), identity);
  std::rotate(symmetries_.begin(), it, it + 1);

  symTables_.assign(symmetries_.size(), {});
  for (std::size_t s = 0; s < symmetries_.size(); ++s)
    for (int byte = 0; byte < 4; ++byte)
      for (int v = 0; v < 256; ++v) {
        PointSet img = 0;
        for (int b = 0; b < 8; ++b) {
          int p = byte * 8 + b;
          if ((v >> b) & 1 && p < n) img |= bit(symmetries_[s][p]);
        }
        symTables_[s][byte][v] = img;
      }

  std::string canon = std::to_string(n) + ";";
  for (auto& p : points_) canon += p + ",";
  canon += ";";
  for (auto [p, q] : edges_) canon += std::to_string(p) + "-" + std::to_string(q) + ",";
  canon += ";";
  std::vector<PointSet> sortedMills = millMasks_;
  std::sort(sortedMills.begin(), sortedMills.end());
  for (PointSet m : sortedMills) canon += std::to_string(m) + ",";
  digest_ = fnv1a64(canon);
}

inline std::string BoardDef::to_text() const {
  std::ostringstream o;
  o << "mills-board 1\nname " << name_ << "\n\n[points]\n";
  for (int i = 0; i < size(); ++i) o << (i ? " " : "") << points_[i];
  o << "\n";
  if (hasLayout_) {
    o << "\n[layout]\n";
    for (int i = 0; i < size(); ++i)
      o << points_[i] << ' ' << layout_[i].x << ' ' << layout_[i].y << "\n";
  }
  o << "\n[adjacency]\n";
  for (auto [p, q] : edges_) o << points_[p] << ' ' << points_[q] << "\n";
  o << "\n[mills]\n";
  for (auto& m : mills_) o << points_[m[0]] << ' ' << points_[m[1]] << ' ' << points_[m[2]] << "\n";
  o << "\n[symmetries]\n";
  for (auto& perm : symmetries_) {
    for (int i = 0; i < size(); ++i) o << (i ? " " : "") << points_[perm[i]];
    o << "\n";
  }
  return o.str();
}

}  // namespace mills
