#pragma once

#include <string>
#include <vector>

#include "foldseq/word.hpp"

namespace foldseq {

/// Folded core graph of a finitely generated subgroup, with basepoint 0.
///
/// Vertices are numbered 0..vertex_count()-1 in breadth-first order from the
/// basepoint, visiting outgoing labels a, A, b, B, ... so two graphs of the same
/// subgroup compare equal as values.
class FoldedGraph {
 public:
  static constexpr int kNone = -1;

  int rank() const { return rank_; }
  int vertex_count() const { return static_cast<int>(slots_.size()) / (2 * rank_); }
  std::size_t edge_count() const;
  const std::vector<Word>& generators() const { return generators_; }
  /// Target of the edge labeled x leaving v, or kNone.
  int target(int v, Letter x) const;

  /// One line "v --x--> w" per positively labeled edge, sorted.
  std::string dump() const;

  /// Equality of labeled based graphs; generating sets are ignored.
  friend bool operator==(const FoldedGraph& x, const FoldedGraph& y) {
    return x.rank_ == y.rank_ && x.slots_ == y.slots_;
  }

 private:
  friend FoldedGraph subgroup_graph(const std::vector<Word>& gens, int rank);
  int rank_ = kDefaultRank;
  std::vector<int> slots_;
  std::vector<Word> generators_;
};

FoldedGraph subgroup_graph(const std::vector<Word>& gens, int rank = kDefaultRank);
/// Membership by reading w from the basepoint.
bool contains(const FoldedGraph& g, const Word& w);
/// Mutual containment of the generating sets.
bool equal_subgroups(const FoldedGraph& g1, const FoldedGraph& g2);

}  // namespace foldseq
