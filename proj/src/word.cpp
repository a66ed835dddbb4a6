#include "foldseq/word.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>

#include "foldseq/errors.hpp"

namespace foldseq {

namespace {

std::atomic<std::size_t> g_max_word_length{10'000'000};

}  // namespace

char letter_char(Letter x) {
  const int idx = generator_index(x);
  return static_cast<char>(x > 0 ? 'a' + idx : 'A' + idx);
}

Letter letter_from_char(char c, int rank) {
  int idx = -1;
  bool inv = false;
  if (c >= 'a' && c <= 'z') {
    idx = c - 'a';
  } else if (c >= 'A' && c <= 'Z') {
    idx = c - 'A';
    inv = true;
  }
  if (idx < 0 || idx >= rank) {
    throw InputError(std::string("unknown letter '") + c + "' for rank " + std::to_string(rank));
  }
  const Letter x = generator(idx);
  return inv ? inverse(x) : x;
}

std::size_t max_word_length() { return g_max_word_length.load(std::memory_order_relaxed); }

void set_max_word_length(std::size_t cap) { g_max_word_length.store(cap, std::memory_order_relaxed); }

WordLengthCap::WordLengthCap(std::size_t cap) : saved_(max_word_length()) { set_max_word_length(cap); }

WordLengthCap::~WordLengthCap() { set_max_word_length(saved_); }

Word Word::reduce(std::span<const Letter> raw) {
  std::vector<Letter> out;
  out.reserve(raw.size());
  for (Letter x : raw) {
    if (x == 0) throw InputError("letter 0 is not a generator");
    push_reduced(out, x);
  }
  return Word(std::move(out));
}

Word Word::parse(std::string_view text, int rank) {
  if (rank < 1 || rank > kMaxRank) throw InputError("rank out of range");
  std::vector<Letter> raw;
  raw.reserve(text.size());
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    // "1" spells the identity element.
    if (c == '1') continue;
    raw.push_back(letter_from_char(c, rank));
  }
  return reduce(raw);
}

Word Word::inverse() const {
  std::vector<Letter> out(letters_.rbegin(), letters_.rend());
  for (Letter& x : out) x = foldseq::inverse(x);
  return Word(std::move(out));
}

Word Word::operator*(const Word& rhs) const {
  std::vector<Letter> out = letters_;
  for (Letter x : rhs.letters_) push_reduced(out, x);
  return Word(std::move(out));
}

Word Word::subword(std::size_t pos, std::size_t len) const {
  pos = std::min(pos, letters_.size());
  len = std::min(len, letters_.size() - pos);
  return Word(std::vector<Letter>(letters_.begin() + static_cast<std::ptrdiff_t>(pos),
                                  letters_.begin() + static_cast<std::ptrdiff_t>(pos + len)));
}

std::string Word::str() const {
  std::string s;
  s.reserve(letters_.size());
  for (Letter x : letters_) s.push_back(letter_char(x));
  return s;
}

CyclicWord cyclic_reduce(const Word& w) {
  auto letters = w.letters();
  std::size_t lo = 0;
  std::size_t hi = letters.size();
  while (hi - lo >= 2 && letters[lo] == inverse(letters[hi - 1])) {
    ++lo;
    --hi;
  }
  return CyclicWord(w.subword(lo, hi - lo));
}

CyclicWord CyclicWord::canonical_rotation() const {
  const auto letters = word_.letters();
  const std::size_t n = letters.size();
  if (n == 0) return *this;
  std::vector<Letter> best(letters.begin(), letters.end());
  std::vector<Letter> cand(n);
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t k = 0; k < n; ++k) cand[k] = letters[(s + k) % n];
    if (cand < best) best = cand;
  }
  return CyclicWord(Word::from_reduced(std::move(best)));
}

CyclicWord CyclicWord::inverse() const { return CyclicWord(word_.inverse()); }

std::vector<std::uint64_t> letter_counts(const Word& w, int rank) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(rank), 0);
  for (Letter x : w.letters()) {
    const int idx = generator_index(x);
    if (idx >= rank) throw InputError("letter outside rank in letter_counts");
    ++counts[static_cast<std::size_t>(idx)];
  }
  return counts;
}

std::vector<std::uint8_t> abelianize_mod2(const Word& w, int rank) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(rank), 0);
  for (Letter x : w.letters()) {
    const int idx = generator_index(x);
    if (idx >= rank) throw InputError("letter outside rank in abelianize_mod2");
    v[static_cast<std::size_t>(idx)] ^= 1U;
  }
  return v;
}

}  // namespace foldseq
