#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "foldseq/endomorphism.hpp"
#include "foldseq/seqgen.hpp"
#include "foldseq/word.hpp"

namespace foldseq {

/// A direction at the rose vertex is named by the letter whose edge leaves along it:
/// x for the start of edge x, X for its end.
using Direction = Letter;

/// Df on the 2n directions.
class DirectionMap {
 public:
  DirectionMap() = default;
  DirectionMap(int rank, std::vector<Direction> images);

  int rank() const { return rank_; }
  Direction operator()(Direction d) const;
  /// D^k by iteration.
  DirectionMap iterate(int k) const;
  std::string str() const;

  friend bool operator==(const DirectionMap&, const DirectionMap&) = default;

 private:
  int rank_ = 0;
  std::vector<Direction> images_;  // indexed by direction_slot
};

/// Slot 0..2n-1: a..(n-th), then A..; the canonical direction order.
int direction_slot(Direction d, int rank);
Direction slot_direction(int slot, int rank);

/// Unordered pair of distinct directions, stored in slot order.
struct Turn {
  Direction first = 0;
  Direction second = 0;
  static Turn make(Direction x, Direction y, int rank);
  std::string str() const;
  friend bool operator==(const Turn&, const Turn&) = default;
};

/// Partition of the 2n directions into gates.
class TrainTrackStructure {
 public:
  TrainTrackStructure() = default;
  /// Validates: disjoint, covering, nonempty classes, at least two gates.
  static TrainTrackStructure from_gates(int rank, const std::vector<std::vector<Direction>>& gates);
  /// Text form "{a,C} {b,A} {c,B}".
  static TrainTrackStructure parse(std::string_view text, int rank);

  int rank() const { return rank_; }
  int gate_of(Direction d) const;
  bool same_gate(Direction x, Direction y) const { return gate_of(x) == gate_of(y); }
  bool is_illegal(const Turn& t) const { return same_gate(t.first, t.second); }
  std::size_t gate_count() const { return gates_.size(); }
  /// Gates in canonical order: members sorted by slot, gates by first member.
  const std::vector<std::vector<Direction>>& gates() const { return gates_; }
  std::string str() const;

  friend bool operator==(const TrainTrackStructure&, const TrainTrackStructure&) = default;

 private:
  int rank_ = 0;
  std::vector<std::vector<Direction>> gates_;
  std::vector<int> gate_index_;  // by slot
};

/// Df(x) = first letter of e(x), Df(X) = inverse of the last letter of e(x).
/// Throws InputError when an image is empty.
DirectionMap direction_map(const Endomorphism& e);

struct GateComputation {
  TrainTrackStructure structure;
  int stable_power = 0;  // first k with partition(D^k) = partition(D^{k+1})
};

/// x ~ y iff D^k x = D^k y for some k, iterated until the partition is stable.
GateComputation compute_gates(const Endomorphism& e);
TrainTrackStructure gates_from_map(const Endomorphism& e);

struct TrainTrackCertificate {
  bool ok = false;
  TrainTrackStructure structure;
  std::vector<std::string> violations;
};

/// Checks at least two gates, legal edge images and Df(legal) legal, against `tts`.
TrainTrackCertificate is_train_track(const Endomorphism& e, const TrainTrackStructure& tts);
/// Same, against the gates computed from e itself.
TrainTrackCertificate is_train_track(const Endomorphism& e);

/// Turns crossed by w (and the closing turn for a cyclic word) that lie in one gate.
std::size_t count_illegal_turns(const Word& w, const TrainTrackStructure& tts);
std::size_t count_illegal_turns(const CyclicWord& w, const TrainTrackStructure& tts);
/// Illegal turns of w in order of occurrence.
std::vector<Turn> illegal_turns(const Word& w, const TrainTrackStructure& tts);

struct TightenResult {
  Word image;
  std::size_t before = 0;
  std::size_t after = 0;
};

TightenResult map_and_tighten(const Endomorphism& e, const Word& w, const TrainTrackStructure& tts);

/// Gates of phi_r (r >= 3) and psi_r (r = 0 mod 3), computed once from phi_3 and psi_3.
const TrainTrackStructure& phi_structure();
const TrainTrackStructure& psi_structure();

/// True iff psi_{r_{j+3}} psi_{r_{j+2}} psi_{r_{j+1}} strictly lowers the illegal-turn count of w.
/// Needs w illegal, r_{j+1..j+3} = 0 mod 3 and increasing; InputError otherwise.
bool triple_psi_reduces(const RSequence& seq, std::size_t j, const Word& w);

/// Periodic indivisible Nielsen path: ends of the path may lie inside edges.
struct PeriodicINP {
  Word path;           // letters crossed, the first and last possibly partially
  int period = 0;      // smallest p <= max_period with [f^p(path)] = path
  Turn illegal_turn;
  std::size_t turn_position = 0;  // number of letters before the illegal turn
  double start_fraction = 0.0;    // part of the first letter covered, in PF length
  double end_fraction = 0.0;      // part of the last letter covered
  std::string to_json() const;    // {"path", "period", "illegal_turn", ...}
};

/// All periodic INPs with combinatorial length <= max_len and period <= max_period,
/// one per inversion pair. InputError if e is not a train track map or not primitive.
std::vector<PeriodicINP> find_periodic_inps(const Endomorphism& e, int max_period = 10, int max_len = 40);

struct REstimate {
  int R = 0;                  // max iterations needed to lose the illegal turn
  std::size_t paths = 0;      // paths examined
  Word worst;                 // a path attaining R
};

/// Exhaustive over one-illegal-turn paths with vertex endpoints and length <= max_len.
/// Throws LogicError if e has a periodic INP or a path keeps its illegal turn past the cap.
REstimate estimate_R(const Endomorphism& e, int max_len, int iteration_cap = 64);

}  // namespace foldseq
