#include "foldseq/stallings.hpp"

#include <algorithm>
#include <deque>
#include <utility>

#include "foldseq/errors.hpp"

namespace foldseq {

namespace {

int slot_of(Letter x, int rank) { return x > 0 ? generator_index(x) : rank + generator_index(x); }

// Mutable folding workspace: union-find over vertices, each root owning 2n slots.
class Folder {
 public:
  explicit Folder(int rank) : rank_(rank) { add_vertex(); }

  int add_vertex() {
    parent_.push_back(static_cast<int>(parent_.size()));
    slots_.emplace_back(static_cast<std::size_t>(2 * rank_), FoldedGraph::kNone);
    return static_cast<int>(parent_.size()) - 1;
  }

  int find(int v) {
    while (parent_[static_cast<std::size_t>(v)] != v) {
      auto& p = parent_[static_cast<std::size_t>(v)];
      p = parent_[static_cast<std::size_t>(p)];
      v = p;
    }
    return v;
  }

  void read_loop(const Word& w) {
    if (w.empty()) return;
    int v = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const bool last = k + 1 == w.size();
      const int next = last ? 0 : add_vertex();
      add_edge(v, w[k], next);
      v = next;
    }
  }

  void add_edge(int u, Letter x, int w) {
    set_slot(u, x, w);
    set_slot(w, inverse(x), u);
    drain();
  }

  // Canonical relabelling by BFS from the basepoint.
  std::vector<int> finish() {
    const int root = find(0);
    std::vector<int> order(parent_.size(), FoldedGraph::kNone);
    std::vector<int> queue{root};
    order[static_cast<std::size_t>(root)] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int v = queue[head];
      for (int idx = 0; idx < rank_; ++idx) {
        for (Letter x : {generator(idx), inverse(generator(idx))}) {
          const int t = target(v, x);
          if (t != FoldedGraph::kNone && order[static_cast<std::size_t>(t)] == FoldedGraph::kNone) {
            order[static_cast<std::size_t>(t)] = static_cast<int>(queue.size());
            queue.push_back(t);
          }
        }
      }
    }
    std::vector<int> out(queue.size() * static_cast<std::size_t>(2 * rank_), FoldedGraph::kNone);
    for (std::size_t n = 0; n < queue.size(); ++n) {
      for (int s = 0; s < 2 * rank_; ++s) {
        const int t = slots_[static_cast<std::size_t>(queue[n])][static_cast<std::size_t>(s)];
        if (t != FoldedGraph::kNone) {
          out[n * static_cast<std::size_t>(2 * rank_) + static_cast<std::size_t>(s)] =
              order[static_cast<std::size_t>(find(t))];
        }
      }
    }
    return out;
  }

 private:
  int target(int v, Letter x) {
    const int t = slots_[static_cast<std::size_t>(find(v))][static_cast<std::size_t>(slot_of(x, rank_))];
    return t == FoldedGraph::kNone ? t : find(t);
  }

  // Record v --x--> w; a clash with an existing x-edge queues the two targets for merging.
  void set_slot(int v, Letter x, int w) {
    v = find(v);
    int& s = slots_[static_cast<std::size_t>(v)][static_cast<std::size_t>(slot_of(x, rank_))];
    if (s == FoldedGraph::kNone) {
      s = w;
    } else if (find(s) != find(w)) {
      pending_.emplace_back(s, w);
    }
  }

  void drain() {
    while (!pending_.empty()) {
      auto [u, w] = pending_.front();
      pending_.pop_front();
      u = find(u);
      w = find(w);
      if (u == w) continue;
      if (w < u) std::swap(u, w);
      parent_[static_cast<std::size_t>(w)] = u;
      std::vector<int> moved = std::move(slots_[static_cast<std::size_t>(w)]);
      slots_[static_cast<std::size_t>(w)].clear();
      for (int s = 0; s < 2 * rank_; ++s) {
        const int t = moved[static_cast<std::size_t>(s)];
        if (t == FoldedGraph::kNone) continue;
        const Letter x = s < rank_ ? generator(s) : inverse(generator(s - rank_));
        set_slot(u, x, t);
      }
    }
  }

  int rank_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> slots_;
  std::deque<std::pair<int, int>> pending_;
};

// Repeatedly strip valence-one vertices other than the basepoint.
void trim_to_core(std::vector<int>& slots, int rank) {
  const int width = 2 * rank;
  const int n = static_cast<int>(slots.size()) / width;
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    for (int s = 0; s < width; ++s) degree[static_cast<std::size_t>(v)] += slots[static_cast<std::size_t>(v * width + s)] != FoldedGraph::kNone;
  }
  std::vector<int> stack;
  for (int v = 1; v < n; ++v) {
    if (degree[static_cast<std::size_t>(v)] == 1) stack.push_back(v);
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (degree[static_cast<std::size_t>(v)] != 1) continue;
    for (int s = 0; s < width; ++s) {
      int& t = slots[static_cast<std::size_t>(v * width + s)];
      if (t == FoldedGraph::kNone) continue;
      const int back = s < rank ? s + rank : s - rank;
      slots[static_cast<std::size_t>(t * width + back)] = FoldedGraph::kNone;
      degree[static_cast<std::size_t>(v)] = 0;
      if (--degree[static_cast<std::size_t>(t)] == 1 && t != 0) stack.push_back(t);
      t = FoldedGraph::kNone;
    }
  }
}

}  // namespace

FoldedGraph subgroup_graph(const std::vector<Word>& gens, int rank) {
  if (rank < 1 || rank > kMaxRank) throw InputError("rank out of range");
  Folder folder(rank);
  for (const Word& w : gens) {
    for (Letter x : w.letters()) {
      if (generator_index(x) >= rank) throw InputError("generator uses a letter outside the rank");
    }
    folder.read_loop(w);
  }
  std::vector<int> slots = folder.finish();
  trim_to_core(slots, rank);

  // Renumber again after trimming so the canonical BFS order survives.
  const int width = 2 * rank;
  const int n = static_cast<int>(slots.size()) / width;
  std::vector<int> order(static_cast<std::size_t>(n), FoldedGraph::kNone);
  std::vector<int> queue{0};
  order[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    for (int idx = 0; idx < rank; ++idx) {
      for (int s : {idx, idx + rank}) {
        const int t = slots[static_cast<std::size_t>(v * width + s)];
        if (t != FoldedGraph::kNone && order[static_cast<std::size_t>(t)] == FoldedGraph::kNone) {
          order[static_cast<std::size_t>(t)] = static_cast<int>(queue.size());
          queue.push_back(t);
        }
      }
    }
  }
  FoldedGraph g;
  g.rank_ = rank;
  g.slots_.assign(queue.size() * static_cast<std::size_t>(width), FoldedGraph::kNone);
  for (std::size_t k = 0; k < queue.size(); ++k) {
    for (int s = 0; s < width; ++s) {
      const int t = slots[static_cast<std::size_t>(queue[k] * width + s)];
      if (t != FoldedGraph::kNone) {
        g.slots_[k * static_cast<std::size_t>(width) + static_cast<std::size_t>(s)] = order[static_cast<std::size_t>(t)];
      }
    }
  }
  g.generators_ = gens;
  return g;
}

std::size_t FoldedGraph::edge_count() const {
  std::size_t n = 0;
  for (int v = 0; v < vertex_count(); ++v) {
    for (int idx = 0; idx < rank_; ++idx) n += target(v, generator(idx)) != kNone;
  }
  return n;
}

int FoldedGraph::target(int v, Letter x) const {
  if (generator_index(x) >= rank_) return kNone;
  return slots_[static_cast<std::size_t>(v * 2 * rank_ + slot_of(x, rank_))];
}

std::string FoldedGraph::dump() const {
  std::vector<std::string> lines;
  for (int v = 0; v < vertex_count(); ++v) {
    for (int idx = 0; idx < rank_; ++idx) {
      const int t = target(v, generator(idx));
      if (t == kNone) continue;
      lines.push_back(std::to_string(v) + " --" + letter_char(generator(idx)) + "--> " + std::to_string(t));
    }
  }
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

bool contains(const FoldedGraph& g, const Word& w) {
  int v = 0;
  for (Letter x : w.letters()) {
    v = g.target(v, x);
    if (v == FoldedGraph::kNone) return false;
  }
  return v == 0;
}

bool equal_subgroups(const FoldedGraph& g1, const FoldedGraph& g2) {
  const auto all_in = [](const FoldedGraph& g, const std::vector<Word>& gens) {
    return std::all_of(gens.begin(), gens.end(), [&](const Word& w) { return contains(g, w); });
  };
  return all_in(g1, g2.generators()) && all_in(g2, g1.generators());
}

}  // namespace foldseq
