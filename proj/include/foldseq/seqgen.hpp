#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace foldseq {

/// Parameter sequence r_1, r_2, ... (1-based access).
class RSequence {
 public:
  RSequence() = default;
  explicit RSequence(std::vector<std::int64_t> values) : values_(std::move(values)) {}

  std::int64_t operator()(std::size_t i) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::vector<std::int64_t>& values() const { return values_; }

  /// Sum r_first + ... + r_last over indices of the given parity (1-based, inclusive).
  std::int64_t sum(std::size_t first, std::size_t last, std::size_t step = 1) const;

  /// JSON integer array.
  std::string to_json() const;
  static RSequence from_json(std::string_view text);

  friend bool operator==(const RSequence&, const RSequence&) = default;

 private:
  std::vector<std::int64_t> values_;
};

struct Violation {
  std::size_t index = 0;
  std::string rule;  // "positive", "increasing", "mod7", "mod3", "gap"
  std::string message;
};

/// Smallest admissible sequence: r_i = 15 i (mod 21), r_1 >= r_min,
/// r_i >= r_{i-1} + max(i - 1, 1).
RSequence generate(std::size_t n, std::int64_t r_min);

/// Empty iff r_i > 0, strictly increasing, r_i = i (mod 7), r_i = 0 (mod 3)
/// and r_{i+1} - r_i >= i.
std::vector<Violation> validate(const RSequence& seq);

}  // namespace foldseq
