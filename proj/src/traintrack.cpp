#include "foldseq/traintrack.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "foldseq/errors.hpp"
#include "foldseq/specmat.hpp"
#include "json.hpp"

namespace foldseq {

int direction_slot(Direction d, int rank) {
  const int idx = generator_index(d);
  if (d == 0 || idx >= rank) throw InputError("direction outside the rank");
  return d > 0 ? idx : rank + idx;
}

Direction slot_direction(int slot, int rank) {
  return slot < rank ? generator(slot) : inverse(generator(slot - rank));
}

// ---------------------------------------------------------------- DirectionMap

DirectionMap::DirectionMap(int rank, std::vector<Direction> images) : rank_(rank), images_(std::move(images)) {
  if (rank < 1 || rank > kMaxRank) throw InputError("rank out of range");
  if (images_.size() != static_cast<std::size_t>(2 * rank)) throw InputError("direction map must cover 2n directions");
  for (Direction d : images_) direction_slot(d, rank);
}

Direction DirectionMap::operator()(Direction d) const { return images_[static_cast<std::size_t>(direction_slot(d, rank_))]; }

DirectionMap DirectionMap::iterate(int k) const {
  if (k < 0) throw InputError("negative iterate");
  std::vector<Direction> out(images_.size());
  for (int s = 0; s < 2 * rank_; ++s) {
    Direction d = slot_direction(s, rank_);
    for (int i = 0; i < k; ++i) d = (*this)(d);
    out[static_cast<std::size_t>(s)] = d;
  }
  return DirectionMap(rank_, std::move(out));
}

std::string DirectionMap::str() const {
  std::string out;
  for (int s = 0; s < 2 * rank_; ++s) {
    if (s) out += ' ';
    out += letter_char(slot_direction(s, rank_));
    out += "->";
    out += letter_char(images_[static_cast<std::size_t>(s)]);
  }
  return out;
}

DirectionMap direction_map(const Endomorphism& e) {
  const int n = e.rank();
  std::vector<Direction> images(static_cast<std::size_t>(2 * n));
  for (int k = 0; k < n; ++k) {
    const Word& img = e.image(k);
    if (img.empty()) throw InputError(std::string("image of ") + letter_char(generator(k)) + " is empty");
    images[static_cast<std::size_t>(k)] = img.front();
    images[static_cast<std::size_t>(n + k)] = inverse(img.back());
  }
  return DirectionMap(n, std::move(images));
}

// ---------------------------------------------------------------- Turn / structure

Turn Turn::make(Direction x, Direction y, int rank) {
  if (x == y) throw InputError("a turn needs two distinct directions");
  return direction_slot(x, rank) < direction_slot(y, rank) ? Turn{x, y} : Turn{y, x};
}

std::string Turn::str() const { return std::string("{") + letter_char(first) + "," + letter_char(second) + "}"; }

TrainTrackStructure TrainTrackStructure::from_gates(int rank, const std::vector<std::vector<Direction>>& gates) {
  if (rank < 1 || rank > kMaxRank) throw InputError("rank out of range");
  TrainTrackStructure t;
  t.rank_ = rank;
  t.gate_index_.assign(static_cast<std::size_t>(2 * rank), -1);
  for (auto gate : gates) {
    if (gate.empty()) throw InputError("empty gate");
    std::sort(gate.begin(), gate.end(),
              [rank](Direction a, Direction b) { return direction_slot(a, rank) < direction_slot(b, rank); });
    t.gates_.push_back(gate);
  }
  std::sort(t.gates_.begin(), t.gates_.end(), [rank](const auto& a, const auto& b) {
    return direction_slot(a.front(), rank) < direction_slot(b.front(), rank);
  });
  for (std::size_t g = 0; g < t.gates_.size(); ++g) {
    for (Direction d : t.gates_[g]) {
      int& slot = t.gate_index_[static_cast<std::size_t>(direction_slot(d, rank))];
      if (slot != -1) throw InputError(std::string("direction ") + letter_char(d) + " appears in two gates");
      slot = static_cast<int>(g);
    }
  }
  for (int s = 0; s < 2 * rank; ++s) {
    if (t.gate_index_[static_cast<std::size_t>(s)] == -1) {
      throw InputError(std::string("direction ") + letter_char(slot_direction(s, rank)) + " is in no gate");
    }
  }
  if (t.gates_.size() < 2) throw InputError("a train track structure needs at least two gates");
  return t;
}

TrainTrackStructure TrainTrackStructure::parse(std::string_view text, int rank) {
  std::vector<std::vector<Direction>> gates;
  std::vector<Direction>* current = nullptr;
  for (char c : text) {
    if (c == '{') {
      if (current) throw InputError("nested '{' in gate list");
      gates.emplace_back();
      current = &gates.back();
    } else if (c == '}') {
      if (!current) throw InputError("unbalanced '}' in gate list");
      current = nullptr;
    } else if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      continue;
    } else {
      if (!current) throw InputError("direction outside braces in gate list");
      current->push_back(letter_from_char(c, rank));
    }
  }
  if (current) throw InputError("unterminated gate");
  return from_gates(rank, gates);
}

int TrainTrackStructure::gate_of(Direction d) const {
  return gate_index_[static_cast<std::size_t>(direction_slot(d, rank_))];
}

std::string TrainTrackStructure::str() const {
  std::string out;
  for (const auto& g : gates_) {
    if (!out.empty()) out += ' ';
    out += '{';
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (k) out += ',';
      out += letter_char(g[k]);
    }
    out += '}';
  }
  return out;
}

namespace {

// Class labels in first-occurrence order, so equal partitions give equal vectors.
std::vector<int> partition_labels(const std::vector<Direction>& keys) {
  std::vector<int> labels(keys.size());
  std::map<Direction, int> seen;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    auto [it, fresh] = seen.emplace(keys[k], static_cast<int>(seen.size()));
    labels[k] = it->second;
  }
  return labels;
}

}  // namespace

GateComputation compute_gates(const Endomorphism& e) {
  const DirectionMap D = direction_map(e);
  const int n = e.rank();
  std::vector<Direction> keys(static_cast<std::size_t>(2 * n));
  for (int s = 0; s < 2 * n; ++s) keys[static_cast<std::size_t>(s)] = slot_direction(s, n);
  std::vector<int> labels = partition_labels(keys);
  int k = 0;
  // Partitions coarsen monotonically and stop changing after at most 2n steps.
  while (true) {
    for (Direction& d : keys) d = D(d);
    std::vector<int> next = partition_labels(keys);
    if (next == labels) break;
    labels = std::move(next);
    if (++k > 2 * n) throw LogicError("gate partition failed to stabilise");
  }
  std::vector<std::vector<Direction>> gates;
  for (int s = 0; s < 2 * n; ++s) {
    const auto g = static_cast<std::size_t>(labels[static_cast<std::size_t>(s)]);
    if (gates.size() <= g) gates.resize(g + 1);
    gates[g].push_back(slot_direction(s, n));
  }
  return GateComputation{TrainTrackStructure::from_gates(n, gates), k};
}

TrainTrackStructure gates_from_map(const Endomorphism& e) { return compute_gates(e).structure; }

std::vector<Turn> illegal_turns(const Word& w, const TrainTrackStructure& tts) {
  std::vector<Turn> out;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const Direction x = inverse(w[k]);
    const Direction y = w[k + 1];
    if (tts.same_gate(x, y)) out.push_back(Turn::make(x, y, tts.rank()));
  }
  return out;
}

std::size_t count_illegal_turns(const Word& w, const TrainTrackStructure& tts) { return illegal_turns(w, tts).size(); }

std::size_t count_illegal_turns(const CyclicWord& w, const TrainTrackStructure& tts) {
  std::size_t n = count_illegal_turns(w.word(), tts);
  if (!w.empty() && tts.same_gate(inverse(w.word().back()), w.word().front())) ++n;
  return n;
}

TrainTrackCertificate is_train_track(const Endomorphism& e, const TrainTrackStructure& tts) {
  TrainTrackCertificate cert;
  cert.structure = tts;
  const int n = e.rank();
  if (tts.rank() != n) {
    cert.violations.push_back("structure rank differs from map rank");
    return cert;
  }
  if (tts.gate_count() < 2) cert.violations.push_back("fewer than two gates");
  for (int k = 0; k < n; ++k) {
    for (const Turn& t : illegal_turns(e.image(k), tts)) {
      cert.violations.push_back(std::string("image of ") + letter_char(generator(k)) + " crosses illegal turn " + t.str());
    }
  }
  const DirectionMap D = direction_map(e);
  for (int s = 0; s < 2 * n; ++s) {
    for (int u = s + 1; u < 2 * n; ++u) {
      const Direction x = slot_direction(s, n);
      const Direction y = slot_direction(u, n);
      if (tts.same_gate(x, y)) continue;
      if (D(x) == D(y) || tts.same_gate(D(x), D(y))) {
        cert.violations.push_back("Df sends legal turn " + Turn::make(x, y, n).str() + " to an illegal turn");
      }
    }
  }
  cert.ok = cert.violations.empty();
  return cert;
}

TrainTrackCertificate is_train_track(const Endomorphism& e) { return is_train_track(e, gates_from_map(e)); }

TightenResult map_and_tighten(const Endomorphism& e, const Word& w, const TrainTrackStructure& tts) {
  TightenResult res;
  res.before = count_illegal_turns(w, tts);
  res.image = apply(e, w);
  res.after = count_illegal_turns(res.image, tts);
  return res;
}

const TrainTrackStructure& phi_structure() {
  static const TrainTrackStructure s = gates_from_map(phi_r(3));
  return s;
}

const TrainTrackStructure& psi_structure() {
  static const TrainTrackStructure s = gates_from_map(psi_r(3));
  return s;
}

namespace {

const Endomorphism& cached_psi(std::int64_t r) {
  static std::map<std::int64_t, Endomorphism> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(r);
  if (it == cache.end()) {
    if (r > std::numeric_limits<int>::max()) throw ResourceError("r too large");
    it = cache.emplace(r, psi_r(static_cast<int>(r))).first;
  }
  return it->second;
}

}  // namespace

bool triple_psi_reduces(const RSequence& seq, std::size_t j, const Word& w) {
  if (j + 3 > seq.size()) throw InputError("triple_psi_reduces needs r_{j+1}, r_{j+2}, r_{j+3}");
  for (std::size_t k = j + 1; k <= j + 3; ++k) {
    if (seq(k) <= 0 || seq(k) % 3 != 0) throw InputError("psi-structure needs r = 0 mod 3");
    if (k > j + 1 && seq(k) <= seq(k - 1)) throw InputError("sequence must be increasing");
  }
  const TrainTrackStructure& tts = psi_structure();
  const std::size_t before = count_illegal_turns(w, tts);
  if (before == 0) throw InputError("word is legal in the psi-structure");
  Word x = w;
  for (std::size_t k = j + 1; k <= j + 3; ++k) x = apply(cached_psi(seq(k)), x);
  return count_illegal_turns(x, tts) < before;
}

// ---------------------------------------------------------------- INP search

std::string PeriodicINP::to_json() const {
  nlohmann::json j;
  j["path"] = path.str();
  j["period"] = period;
  j["illegal_turn"] = illegal_turn.str();
  j["turn_position"] = turn_position;
  j["start_fraction"] = start_fraction;
  j["end_fraction"] = end_fraction;
  return j.dump();
}

namespace {

// Legal path from the vertex to a periodic point x: W crossed in order, its last
// letter covered up to x; f^p of it equals tau followed by itself.
struct HalfPath {
  std::vector<Letter> W;
  std::vector<Letter> tau;
  double fraction = 1.0;  // covered part of the last letter
};

std::vector<Letter> image_letters(const Endomorphism& e, Letter x) {
  const Word& img = e.image(generator_index(x));
  std::vector<Letter> out(img.letters().begin(), img.letters().end());
  if (x < 0) {
    std::reverse(out.begin(), out.end());
    for (Letter& y : out) y = inverse(y);
  }
  return out;
}

bool ends_with(const std::vector<Letter>& u, const std::vector<Letter>& w) {
  return u.size() >= w.size() && std::equal(w.begin(), w.end(), u.end() - static_cast<std::ptrdiff_t>(w.size()));
}

std::vector<HalfPath> half_paths(const Endomorphism& ep, const TrainTrackStructure& tts, const Eigen::VectorXd& len,
                                 double stretch, int max_len) {
  const int n = ep.rank();
  std::vector<std::vector<Letter>> images(static_cast<std::size_t>(2 * n));
  for (int s = 0; s < 2 * n; ++s) images[static_cast<std::size_t>(s)] = image_letters(ep, slot_direction(s, n));
  const auto img = [&](Letter x) -> const std::vector<Letter>& {
    return images[static_cast<std::size_t>(direction_slot(x, n))];
  };

  std::vector<HalfPath> out;
  std::size_t visited = 0;
  struct Node {
    std::vector<Letter> W;  // stored reversed: W.back() is the first letter
    std::vector<Letter> U;
    double fraction;
  };
  std::vector<Node> stack;
  for (int s = 0; s < 2 * n; ++s) {
    const Letter y = slot_direction(s, n);
    const auto& fy = img(y);
    double before = 0.0;
    for (std::size_t j = 0; j < fy.size(); ++j) {
      if (fy[j] == y && j > 0) {
        // Fixed point of the affine crossing: stretch * t = before + t.
        const double t = before / (stretch - 1.0);
        const double frac = std::min(1.0, t / len(generator_index(y)));
        stack.push_back(Node{{y}, std::vector<Letter>(fy.begin(), fy.begin() + static_cast<std::ptrdiff_t>(j + 1)), frac});
      }
      before += len(generator_index(fy[j]));
    }
  }
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (++visited > 5'000'000) throw ResourceError("INP search visited too many candidate paths");
    std::vector<Letter> W(node.W.rbegin(), node.W.rend());
    if (!ends_with(node.U, W)) continue;
    out.push_back(HalfPath{W, std::vector<Letter>(node.U.begin(), node.U.end() - static_cast<std::ptrdiff_t>(W.size())),
                           node.fraction});
    if (static_cast<int>(W.size()) >= max_len) continue;
    std::vector<Letter> candidates;
    if (node.U.size() > W.size()) {
      candidates.push_back(node.U[node.U.size() - W.size() - 1]);
    } else {
      for (int s = 0; s < 2 * n; ++s) candidates.push_back(slot_direction(s, n));
    }
    for (Letter w : candidates) {
      if (w == inverse(W.front()) || tts.same_gate(inverse(w), W.front())) continue;
      Node next{node.W, img(w), node.fraction};
      next.W.push_back(w);
      next.U.insert(next.U.end(), node.U.begin(), node.U.end());
      stack.push_back(std::move(next));
    }
  }
  return out;
}

}  // namespace

std::vector<PeriodicINP> find_periodic_inps(const Endomorphism& e, int max_period, int max_len) {
  if (max_period < 1 || max_len < 2) throw InputError("INP search needs max_period >= 1 and max_len >= 2");
  const TrainTrackStructure tts = gates_from_map(e);
  const TrainTrackCertificate cert = is_train_track(e, tts);
  if (!cert.ok) throw InputError("INP search needs a train track map: " + cert.violations.front());
  const PFData pf = pf_eigen(transition_matrix(e));
  const Eigen::VectorXd len = pf.left;

  std::vector<PeriodicINP> found;
  std::set<std::string> seen;
  Endomorphism ep = Endomorphism::identity(e.rank());
  for (int p = 1; p <= max_period; ++p) {
    ep = compose(e, ep);
    const double stretch = std::pow(pf.eigenvalue, p);
    const std::vector<HalfPath> halves = half_paths(ep, tts, len, stretch, max_len - 1);
    std::map<std::vector<Letter>, std::vector<std::size_t>> by_tau;
    for (std::size_t k = 0; k < halves.size(); ++k) by_tau[halves[k].tau].push_back(k);
    for (const auto& [tau, members] : by_tau) {
      for (std::size_t a : members) {
        for (std::size_t b : members) {
          const HalfPath& h1 = halves[a];
          const HalfPath& h2 = halves[b];
          const Direction d1 = h1.W.front();
          const Direction d2 = h2.W.front();
          if (d1 == d2 || !tts.same_gate(d1, d2)) continue;
          if (static_cast<int>(h1.W.size() + h2.W.size()) > max_len) continue;
          std::vector<Letter> path;
          for (auto it = h1.W.rbegin(); it != h1.W.rend(); ++it) path.push_back(inverse(*it));
          path.insert(path.end(), h2.W.begin(), h2.W.end());
          PeriodicINP inp;
          inp.path = Word::from_reduced(path);
          inp.period = p;
          inp.illegal_turn = Turn::make(d1, d2, e.rank());
          inp.turn_position = h1.W.size();
          inp.start_fraction = h1.fraction;
          inp.end_fraction = h2.fraction;
          // One representative per inversion pair, at its smallest period.
          const auto key = [](const Word& w, double f1, double f2) {
            return w.str() + "|" + std::to_string(std::llround(f1 * 1e9)) + "|" + std::to_string(std::llround(f2 * 1e9));
          };
          const std::string k1 = key(inp.path, inp.start_fraction, inp.end_fraction);
          const std::string k2 = key(inp.path.inverse(), inp.end_fraction, inp.start_fraction);
          if (k2 < k1 || seen.count(k1)) continue;
          seen.insert(k1);
          found.push_back(inp);
        }
      }
    }
  }
  return found;
}

// ---------------------------------------------------------------- estimate_R

namespace {

// Paths abar.b are enumerated as a prefix tree. A side marked open may still grow
// at its far end; when the simulation never reads past an open end, every
// extension needs the same number of iterations and the subtree is settled.
struct RSearch {
  const Endomorphism& e;
  const TrainTrackStructure& tts;
  int max_len;
  int cap;
  std::vector<std::vector<Letter>> images;
  std::vector<std::vector<Letter>> followers;       // legal next letters, by slot
  std::vector<std::vector<std::size_t>> exactly;    // legal extensions by exactly j letters
  REstimate result;

  int slot(Letter x) const { return direction_slot(x, e.rank()); }

  // Iterations until the turn is legal, or -1 if an open end decides it.
  int iterations(std::vector<Letter> a, bool a_open, std::vector<Letter> b, bool b_open) const {
    for (int it = 0; it <= cap; ++it) {
      if (a.empty() && a_open) return -1;
      if (b.empty() && b_open) return -1;
      if (a.empty() || b.empty() || !tts.same_gate(a.front(), b.front())) return it;
      std::vector<Letter> fa;
      std::vector<Letter> fb;
      for (Letter x : a) {
        const auto& im = images[static_cast<std::size_t>(slot(x))];
        fa.insert(fa.end(), im.begin(), im.end());
      }
      for (Letter x : b) {
        const auto& im = images[static_cast<std::size_t>(slot(x))];
        fb.insert(fb.end(), im.begin(), im.end());
      }
      if (fa.size() + fb.size() > max_word_length()) throw ResourceError("estimate_R path exceeds word-length cap");
      const auto [ia, ib] = std::mismatch(fa.begin(), fa.end(), fb.begin(), fb.end());
      if ((ia == fa.end() && a_open) || (ib == fb.end() && b_open)) return -1;
      a.assign(ia, fa.end());
      b.assign(ib, fb.end());
    }
    throw LogicError("a one-illegal-turn path kept its illegal turn for " + std::to_string(cap) + " iterations");
  }

  std::size_t up_to(Letter last, int k) const {
    std::size_t n = 0;
    for (int j = 0; j <= k; ++j) n += exactly[static_cast<std::size_t>(slot(last))][static_cast<std::size_t>(j)];
    return n;
  }

  std::size_t subtree_size(const std::vector<Letter>& a, const std::vector<Letter>& b) const {
    const int room = max_len - static_cast<int>(a.size() + b.size());
    if (b.size() > 1) return up_to(b.back(), room);
    std::size_t n = 0;
    for (int j = 0; j <= room; ++j) {
      n += exactly[static_cast<std::size_t>(slot(a.back()))][static_cast<std::size_t>(j)] * up_to(b.back(), room - j);
    }
    return n;
  }

  void record(int it, const std::vector<Letter>& a, const std::vector<Letter>& b) {
    if (it <= result.R) return;
    result.R = it;
    std::vector<Letter> path;
    for (auto x = a.rbegin(); x != a.rend(); ++x) path.push_back(inverse(*x));
    path.insert(path.end(), b.begin(), b.end());
    result.worst = Word::from_reduced(path);
  }

  // a grows only while b is a single letter, so each pair is visited once.
  void visit(std::vector<Letter>& a, std::vector<Letter>& b) {
    const bool room = static_cast<int>(a.size() + b.size()) < max_len;
    const bool a_open = room && b.size() == 1;
    if (room) {
      const int settled = iterations(a, a_open, b, true);
      if (settled >= 0) {
        result.paths += subtree_size(a, b);
        record(settled, a, b);
        return;
      }
    }
    ++result.paths;
    record(iterations(a, false, b, false), a, b);
    if (!room) return;
    if (a_open) {
      for (Letter x : followers[static_cast<std::size_t>(slot(a.back()))]) {
        a.push_back(x);
        visit(a, b);
        a.pop_back();
      }
    }
    for (Letter x : followers[static_cast<std::size_t>(slot(b.back()))]) {
      b.push_back(x);
      visit(a, b);
      b.pop_back();
    }
  }
};

}  // namespace

REstimate estimate_R(const Endomorphism& e, int max_len, int iteration_cap) {
  if (max_len < 2) throw InputError("estimate_R needs max_len >= 2");
  const TrainTrackStructure tts = gates_from_map(e);
  const TrainTrackCertificate cert = is_train_track(e, tts);
  if (!cert.ok) throw InputError("estimate_R needs a train track map");
  if (!find_periodic_inps(e, 10, 40).empty()) throw LogicError("map has a periodic INP; R does not exist");
  RSearch search{e, tts, max_len, iteration_cap, {}, {}, {}, {}};
  const int n = e.rank();
  const auto slots = static_cast<std::size_t>(2 * n);
  for (int s = 0; s < 2 * n; ++s) {
    const Letter x = slot_direction(s, n);
    search.images.push_back(image_letters(e, x));
    std::vector<Letter> next;
    for (int u = 0; u < 2 * n; ++u) {
      const Letter y = slot_direction(u, n);
      if (y != inverse(x) && !tts.same_gate(inverse(x), y)) next.push_back(y);
    }
    search.followers.push_back(next);
  }
  search.exactly.assign(slots, std::vector<std::size_t>(static_cast<std::size_t>(max_len) + 1, 0));
  for (std::size_t s = 0; s < slots; ++s) search.exactly[s][0] = 1;
  for (int j = 1; j <= max_len; ++j) {
    for (std::size_t s = 0; s < slots; ++s) {
      std::size_t total = 0;
      for (Letter y : search.followers[s]) total += search.exactly[static_cast<std::size_t>(search.slot(y))][static_cast<std::size_t>(j - 1)];
      search.exactly[s][static_cast<std::size_t>(j)] = total;
    }
  }
  for (int s = 0; s < 2 * n; ++s) {
    for (int u = s + 1; u < 2 * n; ++u) {
      if (!tts.same_gate(slot_direction(s, n), slot_direction(u, n))) continue;
      std::vector<Letter> a{slot_direction(s, n)};
      std::vector<Letter> b{slot_direction(u, n)};
      search.visit(a, b);
    }
  }
  return search.result;
}

}  // namespace foldseq
