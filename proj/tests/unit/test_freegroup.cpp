#include <random>

#include "doctest.h"
#include "foldseq/endomorphism.hpp"
#include "foldseq/errors.hpp"
#include "foldseq/word.hpp"

using namespace foldseq;

namespace {

Word W(const char* s) { return Word::parse(s); }

// Naive stack-free reduction: repeatedly delete the first cancelling pair.
std::string naive_reduce(std::string s) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      const char x = s[k], y = s[k + 1];
      if (x != y && std::tolower(x) == std::tolower(y)) {
        s.erase(k, 2);
        changed = true;
        break;
      }
    }
  }
  return s;
}

std::string random_raw(std::mt19937_64& rng, std::size_t len, int rank = 7) {
  std::uniform_int_distribution<int> pick(0, 2 * rank - 1);
  std::string s;
  for (std::size_t k = 0; k < len; ++k) {
    const int v = pick(rng);
    s.push_back(static_cast<char>(v < rank ? 'a' + v : 'A' + (v - rank)));
  }
  return s;
}

}  // namespace

TEST_CASE("reduce") {
  CHECK(W("aAb").str() == "b");
  CHECK(W("BcCb").str().empty());
  CHECK(W("ca").str() == "ca");
  CHECK(W("1").empty());
  CHECK_THROWS_AS(W("ax"), InputError);
  CHECK_THROWS_AS(Word::parse("d", 3), InputError);
  const Letter bad[] = {1, 0};
  CHECK_THROWS_AS(Word::reduce(bad), InputError);
}

TEST_CASE("reduce agrees with naive cancellation") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    const std::string raw = random_raw(rng, 1 + t % 40);
    const Word w = W(raw.c_str());
    CHECK(w.str() == naive_reduce(raw));
    CHECK(W(w.str().c_str()) == w);
    CHECK(w.size() <= raw.size());
  }
}

TEST_CASE("cyclic_reduce") {
  CHECK(cyclic_reduce(W("abA")).str() == "b");
  CHECK(cyclic_reduce(W("abc")).str() == "abc");
  CHECK(cyclic_reduce(W("Cabc")).str() == "ab");
  CHECK(cyclic_reduce(Word{}).empty());
  CHECK(cyclic_reduce(W("bca")).canonical_rotation() == cyclic_reduce(W("abc")).canonical_rotation());
}

TEST_CASE("inverse and product") {
  const Word w = W("abCdE");
  CHECK(w.inverse().str() == "eDcBA");
  CHECK((w * w.inverse()).empty());
  CHECK((W("ab") * W("Bc")).str() == "ac");
}

TEST_CASE("apply and compose") {
  CHECK(apply(maps::phi(), W("a")).str() == "b");
  CHECK(power(maps::theta(), 3).image(0).str() == "ca");
  CHECK(apply(phi_r(3), W("a")).str() == "ge");
  CHECK(compose(maps::rho(), power(maps::phi(), 3)).image(0).str() == "ge");
  const Endomorphism id = Endomorphism::identity(7);
  CHECK(apply(id, W("abCdeF")) == W("abCdeF"));
  CHECK(compose(id, phi_r(4)) == phi_r(4));
  CHECK(compose(psi_r(3), phi_r(3)) == id);
  CHECK(compose(phi_r(3), psi_r(3)) == id);
  CHECK(apply(maps::phi(), W("A")).str() == "B");
}

TEST_CASE("build_family") {
  const Family f = build_family(3);
  CHECK(f.phi_r.image(3).str() == "a");
  CHECK(f.psi_r.image(4).str() == "Cba");
  CHECK(f.psi_r.image(0).str() == "d");
  CHECK(power(maps::vartheta(), 3).image(0).str() == "Cba");
  CHECK_THROWS_AS(build_family(0), InputError);
  CHECK_THROWS_AS(psi_r(-2), InputError);
}

TEST_CASE("psi_r inverts phi_r on every generator") {
  for (int r = 1; r <= 30; ++r) {
    const Family f = build_family(r);
    for (int k = 0; k < 7; ++k) {
      const Word x = Word::letter(generator(k));
      CHECK(apply(f.psi_r, apply(f.phi_r, x)) == x);
    }
  }
}

TEST_CASE("compose is associative on samples") {
  std::mt19937_64 rng(11);
  std::vector<Endomorphism> pool = {maps::phi(), maps::rho(), maps::phi_inverse(), phi_r(2), psi_r(3),
                                    maps::rho_inverse()};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int t = 0; t < 40; ++t) {
    const auto& x = pool[pick(rng)];
    const auto& y = pool[pick(rng)];
    const auto& z = pool[pick(rng)];
    CHECK(compose(compose(x, y), z) == compose(x, compose(y, z)));
  }
}

TEST_CASE("apply commutes with reduce") {
  std::mt19937_64 rng(3);
  const Endomorphism e = phi_r(5);
  for (int t = 0; t < 200; ++t) {
    const std::string raw = random_raw(rng, 20);
    // Substitute letter by letter without intermediate reduction, then reduce.
    std::string expanded;
    for (char c : raw) {
      const Letter x = letter_from_char(c);
      const Word img = x > 0 ? e.image(generator_index(x)) : e.image(generator_index(x)).inverse();
      expanded += img.str();
    }
    CHECK(apply(e, W(raw.c_str())).str() == naive_reduce(expanded));
  }
}

TEST_CASE("letter_counts and abelianize_mod2") {
  CHECK(letter_counts(W("Cba")) == std::vector<std::uint64_t>{1, 1, 1, 0, 0, 0, 0});
  CHECK(letter_counts(Word{}) == std::vector<std::uint64_t>(7, 0));
  CHECK(letter_counts(W("ge")) == std::vector<std::uint64_t>{0, 0, 0, 0, 1, 0, 1});
  CHECK(abelianize_mod2(W("aa")) == std::vector<std::uint8_t>(7, 0));
  CHECK(abelianize_mod2(W("aA")) == std::vector<std::uint8_t>(7, 0));
  CHECK(abelianize_mod2(W("Cba")) == std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0, 0});
}

TEST_CASE("endomorphism text round trip") {
  const Endomorphism e = psi_r(3);
  CHECK(Endomorphism::parse(e.str()) == e);
  CHECK_THROWS_AS(Endomorphism::parse("a -> b\n"), InputError);
  CHECK_THROWS_AS(Endomorphism::parse("a b\n"), InputError);
}

TEST_CASE("word length cap") {
  WordLengthCap cap(50);
  CHECK_THROWS_AS(phi_r(40), ResourceError);
}
