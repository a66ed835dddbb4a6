#include "foldseq/seqgen.hpp"

#include <algorithm>

#include "foldseq/errors.hpp"
#include "json.hpp"

namespace foldseq {

std::int64_t RSequence::operator()(std::size_t i) const {
  if (i == 0 || i > values_.size()) {
    throw InputError("sequence index " + std::to_string(i) + " outside 1.." + std::to_string(values_.size()));
  }
  return values_[i - 1];
}

std::int64_t RSequence::sum(std::size_t first, std::size_t last, std::size_t step) const {
  std::int64_t s = 0;
  for (std::size_t i = first; i <= last; i += step) s += (*this)(i);
  return s;
}

std::string RSequence::to_json() const { return nlohmann::json(values_).dump(); }

RSequence RSequence::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("sequence is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw InputError("sequence must be a JSON array of integers");
  std::vector<std::int64_t> v;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw InputError("sequence must be a JSON array of integers");
    v.push_back(x.get<std::int64_t>());
  }
  return RSequence(std::move(v));
}

RSequence generate(std::size_t n, std::int64_t r_min) {
  if (n < 1) throw InputError("generate: n must be >= 1");
  if (r_min < 3) throw InputError("generate: r_min must be >= 3");
  std::vector<std::int64_t> v;
  v.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto ii = static_cast<std::int64_t>(i);
    const std::int64_t residue = (15 * ii) % 21;
    std::int64_t lo = r_min;
    if (i > 1) lo = std::max(lo, v.back() + std::max<std::int64_t>(ii - 1, 1));
    std::int64_t r = lo + ((residue - lo % 21) % 21 + 21) % 21;
    v.push_back(r);
  }
  return RSequence(std::move(v));
}

std::vector<Violation> validate(const RSequence& seq) {
  std::vector<Violation> out;
  const auto& v = seq.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::size_t i = k + 1;
    const auto ii = static_cast<std::int64_t>(i);
    const std::int64_t r = v[k];
    const std::string at = "r_" + std::to_string(i) + " = " + std::to_string(r);
    if (r <= 0) out.push_back({i, "positive", at + " is not positive"});
    if (((r - ii) % 7 + 7) % 7 != 0) out.push_back({i, "mod7", at + " is not " + std::to_string(ii % 7) + " mod 7"});
    if (r % 3 != 0) out.push_back({i, "mod3", at + " is not 0 mod 3"});
    if (k + 1 < v.size()) {
      const std::int64_t gap = v[k + 1] - r;
      if (gap <= 0) out.push_back({i, "increasing", "r_" + std::to_string(i + 1) + " <= " + at});
      if (gap < ii) {
        out.push_back({i, "gap", "r_" + std::to_string(i + 1) + " - r_" + std::to_string(i) + " = " +
                                     std::to_string(gap) + " < " + std::to_string(i)});
      }
    }
  }
  return out;
}

}  // namespace foldseq
