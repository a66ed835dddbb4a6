#include "foldseq/endomorphism.hpp"

#include <algorithm>
#include <sstream>

#include "foldseq/errors.hpp"

namespace foldseq {

Endomorphism::Endomorphism(std::vector<Word> images) : images_(std::move(images)) {
  if (images_.empty() || images_.size() > static_cast<std::size_t>(kMaxRank)) {
    throw InputError("endomorphism rank out of range");
  }
  const int n = rank();
  for (const Word& w : images_) {
    for (Letter x : w.letters()) {
      if (generator_index(x) >= n) throw InputError("image uses a letter outside the rank");
    }
  }
}

Endomorphism Endomorphism::identity(int rank) {
  std::vector<Word> images;
  images.reserve(static_cast<std::size_t>(rank));
  for (int k = 0; k < rank; ++k) images.push_back(Word::letter(generator(k)));
  return Endomorphism(std::move(images));
}

Endomorphism Endomorphism::parse(std::string_view text, int rank) {
  std::vector<Word> images(static_cast<std::size_t>(rank));
  std::vector<bool> seen(static_cast<std::size_t>(rank), false);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) throw InputError("expected 'x -> word' in line: " + line);
    const Word lhs = Word::parse(line.substr(0, arrow), rank);
    if (lhs.size() != 1 || lhs.front() < 0) throw InputError("left side must be a generator: " + line);
    const auto idx = static_cast<std::size_t>(generator_index(lhs.front()));
    if (seen[idx]) throw InputError("generator listed twice: " + line);
    seen[idx] = true;
    images[idx] = Word::parse(line.substr(arrow + 2), rank);
  }
  for (bool s : seen) {
    if (!s) throw InputError("endomorphism text does not define every generator");
  }
  return Endomorphism(std::move(images));
}

Endomorphism Endomorphism::from_images(std::string_view csv, int rank) {
  std::vector<Word> images;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const auto end = comma == std::string_view::npos ? csv.size() : comma;
    images.push_back(Word::parse(csv.substr(start, end - start), rank));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (static_cast<int>(images.size()) != rank) throw InputError("wrong number of images");
  return Endomorphism(std::move(images));
}

std::string Endomorphism::str() const {
  std::string out;
  for (int k = 0; k < rank(); ++k) {
    out += letter_char(generator(k));
    out += " -> ";
    out += image(k).empty() ? std::string("1") : image(k).str();
    out += '\n';
  }
  return out;
}

Word apply(const Endomorphism& e, const Word& w) {
  const std::size_t cap = max_word_length();
  std::vector<Letter> out;
  std::size_t expected = 0;
  for (Letter x : w.letters()) {
    if (generator_index(x) >= e.rank()) throw InputError("word letter outside endomorphism rank");
    expected += e.image(generator_index(x)).size();
  }
  out.reserve(std::min(expected, cap + 1));
  for (Letter x : w.letters()) {
    const Word& img = e.image(generator_index(x));
    const auto letters = img.letters();
    if (x > 0) {
      for (Letter y : letters) Word::push_reduced(out, y);
    } else {
      for (auto it = letters.rbegin(); it != letters.rend(); ++it) Word::push_reduced(out, inverse(*it));
    }
    if (out.size() > cap) {
      throw ResourceError("word length exceeds cap of " + std::to_string(cap) + " letters");
    }
  }
  return Word::from_reduced(std::move(out));
}

Endomorphism compose(const Endomorphism& outer, const Endomorphism& inner) {
  if (outer.rank() != inner.rank()) throw InputError("compose: rank mismatch");
  std::vector<Word> images;
  images.reserve(static_cast<std::size_t>(inner.rank()));
  for (const Word& w : inner.images()) images.push_back(apply(outer, w));
  return Endomorphism(std::move(images));
}

Word apply_iterated(const Endomorphism& e, int k, Word w) {
  if (k < 0) throw InputError("negative power");
  for (int i = 0; i < k; ++i) w = apply(e, w);
  return w;
}

Endomorphism power(const Endomorphism& e, int k) {
  if (k < 0) throw InputError("negative power");
  Endomorphism result = Endomorphism::identity(e.rank());
  for (int i = 0; i < k; ++i) result = compose(e, result);
  return result;
}

namespace maps {

Endomorphism theta() { return Endomorphism::from_images("b,c,ca", 3); }
Endomorphism vartheta() { return Endomorphism::from_images("Bc,a,b", 3); }
Endomorphism phi() { return Endomorphism::from_images("b,c,ca,d,e,f,g", 7); }
Endomorphism phi_inverse() { return Endomorphism::from_images("Bc,a,b,d,e,f,g", 7); }
Endomorphism rho() { return Endomorphism::from_images("e,f,g,a,b,c,d", 7); }
Endomorphism rho_inverse() { return Endomorphism::from_images("d,e,f,g,a,b,c", 7); }

}  // namespace maps

Endomorphism phi_r(int r) {
  if (r <= 0) throw InputError("phi_r requires r >= 1");
  return compose(maps::rho(), power(maps::phi(), r));
}

Endomorphism psi_r(int r) {
  if (r <= 0) throw InputError("psi_r requires r >= 1");
  return compose(power(maps::phi_inverse(), r), maps::rho_inverse());
}

Word apply_phi_r(int r, const Word& w) {
  if (r <= 0) throw InputError("phi_r requires r >= 1");
  return apply(maps::rho(), apply_iterated(maps::phi(), r, w));
}

Family build_family(int r) { return Family{r, phi_r(r), psi_r(r)}; }

}  // namespace foldseq
