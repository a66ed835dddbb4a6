#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace foldseq {

/// Signed generator: +k is generator k (1-based), -k its inverse.
using Letter = std::int8_t;

inline constexpr int kMaxRank = 26;
inline constexpr int kDefaultRank = 7;

constexpr Letter inverse(Letter x) { return static_cast<Letter>(-x); }
/// 0-based generator index of a letter, ignoring orientation.
constexpr int generator_index(Letter x) { return (x > 0 ? x : -x) - 1; }
constexpr Letter generator(int index) { return static_cast<Letter>(index + 1); }

/// Lowercase for generators, uppercase for inverses ("A" = a^-1).
char letter_char(Letter x);
/// Throws InputError for characters outside the first `rank` letters.
Letter letter_from_char(char c, int rank = kDefaultRank);

/// Global cap on the length of any word produced by substitution.
std::size_t max_word_length();
void set_max_word_length(std::size_t cap);

/// RAII override of the word-length cap.
class WordLengthCap {
 public:
  explicit WordLengthCap(std::size_t cap);
  ~WordLengthCap();
  WordLengthCap(const WordLengthCap&) = delete;
  WordLengthCap& operator=(const WordLengthCap&) = delete;

 private:
  std::size_t saved_;
};

/// Freely reduced word in a free group.
class Word {
 public:
  Word() = default;

  /// Free reduction of an arbitrary letter sequence.
  static Word reduce(std::span<const Letter> raw);
  static Word parse(std::string_view text, int rank = kDefaultRank);
  static Word letter(Letter x) { return Word(std::vector<Letter>{x}); }

  std::span<const Letter> letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  Letter front() const { return letters_.front(); }
  Letter back() const { return letters_.back(); }

  Word inverse() const;
  Word operator*(const Word& rhs) const;
  /// Subword [pos, pos + len); always reduced.
  Word subword(std::size_t pos, std::size_t len) const;

  std::string str() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

  /// Appends `x` to an already reduced buffer, cancelling against the tail.
  static void push_reduced(std::vector<Letter>& buffer, Letter x) {
    if (!buffer.empty() && buffer.back() == foldseq::inverse(x)) {
      buffer.pop_back();
    } else {
      buffer.push_back(x);
    }
  }
  /// Wraps a buffer that the caller guarantees is freely reduced.
  static Word from_reduced(std::vector<Letter> buffer) { return Word(std::move(buffer)); }

 private:
  explicit Word(std::vector<Letter> reduced) : letters_(std::move(reduced)) {}
  std::vector<Letter> letters_;
};

/// Cyclically reduced representative of a conjugacy class.
class CyclicWord {
 public:
  CyclicWord() = default;
  const Word& word() const { return word_; }
  std::size_t size() const { return word_.size(); }
  bool empty() const { return word_.empty(); }
  std::string str() const { return word_.str(); }

  /// Lexicographically least rotation; identifies rotations of the same loop.
  CyclicWord canonical_rotation() const;
  CyclicWord inverse() const;

  friend bool operator==(const CyclicWord&, const CyclicWord&) = default;
  friend auto operator<=>(const CyclicWord&, const CyclicWord&) = default;

 private:
  friend CyclicWord cyclic_reduce(const Word& w);
  explicit CyclicWord(Word w) : word_(std::move(w)) {}
  Word word_;
};

CyclicWord cyclic_reduce(const Word& w);

/// Unsigned occurrence counts per generator (x and x^-1 both count).
std::vector<std::uint64_t> letter_counts(const Word& w, int rank = kDefaultRank);
/// Exponent sums reduced mod 2.
std::vector<std::uint8_t> abelianize_mod2(const Word& w, int rank = kDefaultRank);

}  // namespace foldseq
