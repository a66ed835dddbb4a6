#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "foldseq/errors.hpp"
#include "foldseq/specmat.hpp"
#include "foldseq/traintrack.hpp"

using namespace foldseq;

namespace {

Direction dir(char c, int rank) { return letter_from_char(c, rank); }

// Brute-force gate oracle: x ~ y iff D^k x = D^k y for some k <= 4n.
std::vector<std::vector<Direction>> brute_gates(const Endomorphism& e) {
  const int n = e.rank();
  const DirectionMap D = direction_map(e);
  std::vector<std::vector<Direction>> gates;
  std::vector<bool> used(static_cast<std::size_t>(2 * n), false);
  for (int s = 0; s < 2 * n; ++s) {
    if (used[static_cast<std::size_t>(s)]) continue;
    std::vector<Direction> g;
    for (int u = s; u < 2 * n; ++u) {
      Direction x = slot_direction(s, n);
      Direction y = slot_direction(u, n);
      bool same = false;
      for (int k = 0; k <= 4 * n && !same; ++k) {
        same = x == y;
        x = D(x);
        y = D(y);
      }
      if (same) {
        g.push_back(slot_direction(u, n));
        used[static_cast<std::size_t>(u)] = true;
      }
    }
    gates.push_back(g);
  }
  return gates;
}

}  // namespace

TEST_CASE("direction map of vartheta and its cube") {
  const auto D = direction_map(maps::vartheta());
  CHECK(D(dir('a', 3)) == dir('B', 3));
  CHECK(D(dir('A', 3)) == dir('C', 3));
  CHECK(D(dir('b', 3)) == dir('a', 3));
  CHECK(D(dir('C', 3)) == dir('B', 3));
  const auto D3 = D.iterate(3);
  CHECK(D3(dir('a', 3)) == dir('C', 3));
  CHECK(D3(dir('b', 3)) == dir('A', 3));
  CHECK(D3(dir('c', 3)) == dir('B', 3));
  for (char c : {'A', 'B', 'C'}) CHECK(D3(dir(c, 3)) == dir(c, 3));
}

TEST_CASE("direction map of theta repeats with period three") {
  const auto D = direction_map(maps::theta());
  const auto D3 = D.iterate(3);
  for (int n = 6; n <= 30; n += 3) CHECK(D.iterate(n) == D3);
  for (char c : {'a', 'b', 'c'}) CHECK(D3(dir(c, 3)) == dir('c', 3));
  for (char c : {'A', 'B', 'C'}) CHECK(D3(dir(c, 3)) == dir(c, 3));
}

TEST_CASE("gates of vartheta") {
  const auto gc = compute_gates(maps::vartheta());
  CHECK(gc.structure.str() == "{a,C} {b,A} {c,B}");
  CHECK(gc.structure.gates() == brute_gates(maps::vartheta()));
  CHECK(is_train_track(maps::vartheta()).ok);
}

TEST_CASE("gates of theta") {
  const auto tts = gates_from_map(maps::theta());
  CHECK(tts.gates() == brute_gates(maps::theta()));
  CHECK(is_train_track(maps::theta()).ok);
}

TEST_CASE("gates of phi_r and psi_r match the oracle and do not depend on r") {
  const auto ref_phi = gates_from_map(phi_r(3));
  for (int r : {3, 4, 5}) {
    const auto e = phi_r(r);
    CHECK(gates_from_map(e).gates() == brute_gates(e));
    CHECK(gates_from_map(e) == ref_phi);
    CHECK(is_train_track(e).ok);
  }
  const auto ref_psi = gates_from_map(psi_r(3));
  for (int r : {3, 15, 30}) {
    const auto e = psi_r(r);
    CHECK(gates_from_map(e).gates() == brute_gates(e));
    CHECK(gates_from_map(e) == ref_psi);
    CHECK(is_train_track(e).ok);
  }
  CHECK(phi_structure() == ref_phi);
  CHECK(psi_structure() == ref_psi);
}

TEST_CASE("illegal turn counts in the psi structure") {
  const auto& tts = psi_structure();
  CHECK(tts.same_gate(dir('a', 7), dir('e', 7)));
  CHECK(count_illegal_turns(Word::parse("Ae"), tts) == 1);
  CHECK(count_illegal_turns(Word::parse("ba"), tts) == 0);
  CHECK(count_illegal_turns(Word::parse("a"), tts) == 0);
  CHECK(count_illegal_turns(Word(), tts) == 0);
}

TEST_CASE("Dpsi moves the turn {a,e} to {d,C} then {g,F}") {
  const auto D = direction_map(psi_r(3));
  const auto& tts = psi_structure();
  Turn t = Turn::make(dir('a', 7), dir('e', 7), 7);
  t = Turn::make(D(t.first), D(t.second), 7);
  CHECK(t == Turn::make(dir('d', 7), dir('C', 7), 7));
  t = Turn::make(D(t.first), D(t.second), 7);
  CHECK(t == Turn::make(dir('g', 7), dir('F', 7), 7));
  CHECK(tts.is_illegal(t));
}

TEST_CASE("structure parsing and validation") {
  const auto tts = TrainTrackStructure::parse("{a,C} {b,A} {c,B}", 3);
  CHECK(tts == gates_from_map(maps::vartheta()));
  CHECK(TrainTrackStructure::parse("{C,a}{A,b}{B,c}", 3) == tts);
  CHECK_THROWS_AS(TrainTrackStructure::parse("{a,C} {b,A}", 3), InputError);
  CHECK_THROWS_AS(TrainTrackStructure::parse("{a,C} {a,A} {b,c,B}", 3), InputError);
  CHECK_THROWS_AS(TrainTrackStructure::parse("{a,b,c,A,B,C}", 3), InputError);
  CHECK_THROWS_AS(TrainTrackStructure::parse("{a,C {b,A} {c,B}", 3), InputError);
}

TEST_CASE("degenerate map is rejected") {
  const auto e = Endomorphism::from_images("aA,b,c", 3);
  CHECK_THROWS_AS(direction_map(e), InputError);
  CHECK_THROWS_AS(is_train_track(e), InputError);
}

TEST_CASE("a map that is not train track is reported") {
  // a -> ab, b -> Ba: the image of b backtracks through the gate of a.
  const auto e = Endomorphism::from_images("ab,bA,c", 3);
  const auto tts = TrainTrackStructure::parse("{a,b} {A,B} {c} {C}", 3);
  const auto cert = is_train_track(e, tts);
  CHECK_FALSE(cert.ok);
  CHECK_FALSE(cert.violations.empty());
}

TEST_CASE("legal words stay legal and lengths scale") {
  const auto e = maps::vartheta();
  const auto tts = gates_from_map(e);
  for (const char* s : {"a", "ab", "abc", "cab", "aCb"}) {
    const Word w = Word::parse(s, 3);
    if (count_illegal_turns(w, tts) != 0) continue;
    const auto res = map_and_tighten(e, w, tts);
    CHECK(res.after == 0);
    CHECK(res.image.size() >= w.size());
  }
}

TEST_CASE("cyclic count includes the closing turn") {
  const auto tts = gates_from_map(maps::vartheta());
  const auto w = cyclic_reduce(Word::parse("ab", 3));
  const std::size_t open = count_illegal_turns(w.word(), tts);
  const bool closing = tts.same_gate(dir('B', 3), dir('a', 3));
  CHECK(count_illegal_turns(w, tts) == open + (closing ? 1 : 0));
}

TEST_CASE("vartheta and its square have no periodic INP") {
  CHECK(find_periodic_inps(maps::vartheta()).empty());
  CHECK(find_periodic_inps(power(maps::vartheta(), 2)).empty());
}

TEST_CASE("theta has a periodic INP that is fixed by a power") {
  const auto e = maps::theta();
  const auto inps = find_periodic_inps(e);
  REQUIRE_FALSE(inps.empty());
  const auto tts = gates_from_map(e);
  const PFData pf = pf_eigen(transition_matrix(e));
  for (const auto& inp : inps) {
    CHECK(inp.period >= 1);
    CHECK(tts.is_illegal(inp.illegal_turn));
    CHECK(count_illegal_turns(inp.path, tts) == 1);
    CHECK(inp.start_fraction > 0.0);
    CHECK(inp.start_fraction <= 1.0);
    CHECK(inp.end_fraction > 0.0);
    CHECK(inp.end_fraction <= 1.0);
    // PF length of the two halves must agree: both grow by lambda^p minus the same cancellation.
    const auto ell = [&](Letter x) { return pf.left(generator_index(x)); };
    double left = 0.0;
    double right = 0.0;
    const auto letters = inp.path.letters();
    for (std::size_t k = 0; k < letters.size(); ++k) {
      double l = ell(letters[k]);
      if (k == 0) l *= inp.start_fraction;
      if (k + 1 == letters.size()) l *= inp.end_fraction;
      (k < inp.turn_position ? left : right) += l;
    }
    CHECK(left == doctest::Approx(right).epsilon(1e-9));
    CHECK(inp.to_json().find("\"period\"") != std::string::npos);
  }
  CHECK_THROWS_AS(estimate_R(e, 6), LogicError);
}

TEST_CASE("estimate_R for vartheta is small and monotone in max_len") {
  const auto e = maps::vartheta();
  int prev = 0;
  for (int len : {4, 6, 8, 10}) {
    const auto est = estimate_R(e, len);
    CHECK(est.R >= 1);
    CHECK(est.R >= prev);
    CHECK(est.paths > 0);
    CHECK(count_illegal_turns(est.worst, gates_from_map(e)) == 1);
    prev = est.R;
  }
  CHECK(prev <= 10);
}

TEST_CASE("triple psi reduces illegal turns for an admissible sequence") {
  const RSequence seq({3, 6, 9, 12, 15});
  const auto& tts = psi_structure();
  for (const char* s : {"Ae", "eA", "Dc"}) {
    const Word w = Word::parse(s);
    if (count_illegal_turns(w, tts) == 0) continue;
    CHECK(triple_psi_reduces(seq, 0, w));
  }
  CHECK_THROWS_AS(triple_psi_reduces(seq, 0, Word::parse("ba")), InputError);
  CHECK_THROWS_AS(triple_psi_reduces(RSequence({3, 5, 9, 12}), 0, Word::parse("Ae")), InputError);
  CHECK_THROWS_AS(triple_psi_reduces(seq, 3, Word::parse("Ae")), InputError);
}

namespace {

// Plain enumeration of every one-illegal-turn path, for comparison with the pruned search.
std::pair<int, std::size_t> brute_R(const Endomorphism& e, int max_len) {
  const auto tts = gates_from_map(e);
  const int n = e.rank();
  std::vector<std::vector<Word>> words(static_cast<std::size_t>(2 * n));
  for (int s = 0; s < 2 * n; ++s) {
    std::vector<Word> frontier{Word::letter(slot_direction(s, n))};
    while (!frontier.empty()) {
      std::vector<Word> next;
      for (const Word& w : frontier) {
        words[static_cast<std::size_t>(s)].push_back(w);
        if (static_cast<int>(w.size()) + 1 >= max_len) continue;
        for (int u = 0; u < 2 * n; ++u) {
          const Word v = w * Word::letter(slot_direction(u, n));
          if (v.size() == w.size() + 1 && count_illegal_turns(v, tts) == 0) next.push_back(v);
        }
      }
      frontier = std::move(next);
    }
  }
  int R = 0;
  std::size_t paths = 0;
  for (int s = 0; s < 2 * n; ++s) {
    for (int u = s + 1; u < 2 * n; ++u) {
      if (!tts.same_gate(slot_direction(s, n), slot_direction(u, n))) continue;
      for (const Word& a : words[static_cast<std::size_t>(s)]) {
        for (const Word& b : words[static_cast<std::size_t>(u)]) {
          if (static_cast<int>(a.size() + b.size()) > max_len) continue;
          ++paths;
          Word path = a.inverse() * b;
          int it = 0;
          while (count_illegal_turns(path, tts) > 0) {
            path = apply(e, path);
            ++it;
          }
          R = std::max(R, it);
        }
      }
    }
  }
  return {R, paths};
}

}  // namespace

TEST_CASE("pruned estimate_R agrees with plain enumeration") {
  for (const auto& e : {maps::vartheta(), power(maps::vartheta(), 2)}) {
    for (int len : {2, 4, 6, 7}) {
      const auto [R, paths] = brute_R(e, len);
      const auto est = estimate_R(e, len);
      CHECK(est.R == R);
      CHECK(est.paths == paths);
    }
  }
}
