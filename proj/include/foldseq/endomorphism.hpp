#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "foldseq/word.hpp"

namespace foldseq {

/// Substitution map sending each generator of a rose to a reduced word.
class Endomorphism {
 public:
  /// images[k] is the image of generator k; rank = images.size().
  explicit Endomorphism(std::vector<Word> images);

  static Endomorphism identity(int rank);
  /// Parses one "x -> word" line per generator, in any order; all must be present.
  static Endomorphism parse(std::string_view text, int rank = kDefaultRank);
  /// Shorthand "b,c,ca" listing the images of a, b, c, ... in order.
  static Endomorphism from_images(std::string_view csv, int rank);

  int rank() const { return static_cast<int>(images_.size()); }
  const Word& image(int generator_idx) const { return images_[static_cast<std::size_t>(generator_idx)]; }
  const std::vector<Word>& images() const { return images_; }

  /// Serialized form: rank lines "x -> word", empty image written as "1".
  std::string str() const;

  friend bool operator==(const Endomorphism&, const Endomorphism&) = default;

 private:
  std::vector<Word> images_;
};

/// e(w) followed by free reduction. Throws ResourceError past max_word_length().
Word apply(const Endomorphism& e, const Word& w);
/// (outer o inner)(x) = outer(inner(x)).
Endomorphism compose(const Endomorphism& outer, const Endomorphism& inner);
/// e^k(w) by k successive applications; never materialises e^k itself.
Word apply_iterated(const Endomorphism& e, int k, Word w);
/// e^k by iterated composition; k = 0 gives the identity.
Endomorphism power(const Endomorphism& e, int k);

/// The fixed maps of the construction.
namespace maps {

/// a -> b, b -> c, c -> ca on the 3-rose.
Endomorphism theta();
/// Inverse of theta: a -> Bc, b -> a, c -> b.
Endomorphism vartheta();
/// theta extended by the identity on d..g.
Endomorphism phi();
/// vartheta extended by the identity on d..g; inverse of phi().
Endomorphism phi_inverse();
/// Rotation by four: a->e, b->f, c->g, d->a, e->b, f->c, g->d.
Endomorphism rho();
Endomorphism rho_inverse();

}  // namespace maps

/// phi_r = rho o phi^r and its inverse psi_r = phi^-r o rho^-1.
struct Family {
  int r = 0;
  Endomorphism phi_r;
  Endomorphism psi_r;
};

/// Throws InputError for r <= 0.
Family build_family(int r);
Endomorphism phi_r(int r);
Endomorphism psi_r(int r);
/// phi_r(w) computed as rho(phi^r(w)) word by word, cheap when w avoids a, b, c.
Word apply_phi_r(int r, const Word& w);

}  // namespace foldseq
