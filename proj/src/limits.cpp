#include "foldseq/limits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "foldseq/endomorphism.hpp"
#include "foldseq/errors.hpp"
#include "foldseq/traintrack.hpp"

namespace foldseq {

namespace {

double log_lambda_B() { return std::log(pf_B().eigenvalue); }
double log_lambda_C() { return std::log(pf_C().eigenvalue); }

double r_at(const RSequence& seq, std::size_t t) { return static_cast<double>(seq(t)); }

void require_index(const RSequence& seq, std::size_t last, const char* what) {
  if (last > seq.size()) {
    throw InputError(std::string(what) + " needs r_" + std::to_string(last) + " but the sequence has " +
                     std::to_string(seq.size()) + " terms");
  }
}

// log of a . (exp(s) m) for nonnegative a and m.
double log_pairing(const Eigen::VectorXd& a, const ScaledVector& v) {
  if (v.is_zero()) return -std::numeric_limits<double>::infinity();
  return v.log_scale() + std::log(a.dot(v.mantissa()));
}

Eigen::VectorXd e5() {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
  v(4) = 1.0;
  return v;
}

// N_r v / lambda_C^r.
ScaledVector normalized_N(std::int64_t r, const Eigen::VectorXd& v) {
  const ScaledVector nv = apply_N(r, ScaledVector(v));
  return ScaledVector(nv.mantissa(), nv.log_scale() - static_cast<double>(r) * log_lambda_C());
}

}  // namespace

Eigen::VectorXd projective_normalize(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw InputError("projective point has non-finite entries");
  const double scale = v.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw InputError("projective point of the zero vector");
  Eigen::VectorXd out = v;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    if (out(k) < -1e-12 * scale) throw InputError("projective point has a negative entry");
    out(k) = std::max(out(k), 0.0);
  }
  return out / out.sum();
}

double projective_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw InputError("projective points of different dimension");
  return (projective_normalize(u) - projective_normalize(v)).cwiseAbs().maxCoeff();
}

Eigen::VectorXd v_B_234() {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
  v.segment(1, 3) = pf_B().right;
  return projective_normalize(v);
}

Eigen::VectorXd v_B_567() {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
  v.segment(4, 3) = pf_B().right;
  return projective_normalize(v);
}

std::vector<Eigen::VectorXd> vertex_images(const RSequence& seq, std::size_t i, std::size_t j) {
  if (i < 1 || j < i) throw InputError("vertex_images needs 1 <= i <= j");
  require_index(seq, j, "vertex_images");
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < 7; ++k) {
    ScaledVector v = ScaledVector::basis(7, k);
    for (std::size_t t = j; t >= i; --t) v = apply_M(seq(t), v);
    out.push_back(v.direction());
  }
  return out;
}

SimplexEndpoints simplex_endpoints(const RSequence& seq, std::size_t i, double tol) {
  if (i < 1) throw InputError("simplex index starts at 1");
  require_index(seq, i + 2, "simplex_endpoints");
  const LimitResult yi = limit_Yi(seq, i);
  const LimitResult yn = limit_Yi(seq, i + 1);
  SimplexEndpoints out;
  out.converged = yi.converged && yn.converged;
  out.p = projective_normalize(yi.value.mantissa().col(0));
  const ScaledVector col(yn.value.mantissa().col(0), yn.value.log_scale());
  out.q = apply_M(seq(i), col).direction();
  out.separation = projective_distance(out.p, out.q);
  if (out.separation <= tol) {
    throw LogicError("p_" + std::to_string(i) + " and q_" + std::to_string(i) + " coincide");
  }
  return out;
}

CollapseTable simplex_collapse_table(const RSequence& seq, std::size_t i, std::size_t j_max, double eps) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  CollapseTable table;
  table.i = i;
  table.ends = simplex_endpoints(seq, i);
  j_max = std::min(j_max, seq.size());
  for (std::size_t j = i + 1; j <= j_max; ++j) {
    CollapseRow row;
    row.j = j;
    for (const Eigen::VectorXd& v : vertex_images(seq, i, j)) {
      row.to_p.push_back(projective_distance(v, table.ends.p));
      row.to_q.push_back(projective_distance(v, table.ends.q));
      row.max_min = std::max(row.max_min, std::min(row.to_p.back(), row.to_q.back()));
    }
    if (!table.first_within && row.max_min <= eps) table.first_within = j;
    table.rows.push_back(std::move(row));
  }
  return table;
}

ScaledVector length_vector(const RSequence& seq, const Eigen::VectorXd& l0, std::size_t i) {
  if (l0.size() != 7 || (l0.array() <= 0.0).any()) throw InputError("length vector must be 7 positive entries");
  require_index(seq, i, "length_vector");
  ScaledVector v(l0);
  for (std::size_t t = 1; t <= i; ++t) v = apply_M_transpose(seq(t), v);
  return v;
}

VolumeDecay volume_decay(const RSequence& seq, const Eigen::VectorXd& terminal, std::size_t i_max) {
  if (terminal.size() != 7 || (terminal.array() <= 0.0).any()) throw InputError("terminal lengths must be positive");
  require_index(seq, i_max, "volume_decay");
  std::vector<ScaledVector> lam(i_max + 1);
  lam[i_max] = ScaledVector(terminal);
  for (std::size_t i = i_max; i >= 1; --i) lam[i - 1] = apply_N_transpose(seq(i), lam[i]);
  VolumeDecay out;
  for (std::size_t i = 0; i <= i_max; ++i) {
    VolumeRow row;
    row.i = i;
    row.log_volume = lam[i].log_norm1();
    if (i >= 3) {
      row.ratio = std::exp(row.log_volume - out.rows[i - 3].log_volume);
      const ExactMatrix triple = matrix_N(seq(i)) * matrix_N(seq(i - 1)) * matrix_N(seq(i - 2));
      const BigInt mrs = triple.min_row_sum();
      row.min_row_sum = mrs.str();
      row.pass = row.ratio <= 0.5 * (1.0 + 1e-12) && mrs >= 2;
    }
    out.all_pass = out.all_pass && row.pass;
    out.rows.push_back(std::move(row));
  }
  return out;
}

double translation_length(const CyclicWord& w, const Eigen::VectorXd& lengths) {
  double total = 0.0;
  for (Letter x : w.word().letters()) {
    const int k = generator_index(x);
    if (k >= lengths.size()) throw InputError("word letter outside the length vector");
    total += lengths(k);
  }
  return total;
}

Eigen::VectorXd edge_vector(const CyclicWord& w, int rank) {
  const auto counts = letter_counts(w.word(), rank);
  Eigen::VectorXd v(rank);
  for (int k = 0; k < rank; ++k) v(k) = static_cast<double>(counts[static_cast<std::size_t>(k)]);
  return v;
}

std::vector<CyclicWord> enumerate_W3() {
  const TrainTrackStructure& tts = phi_structure();
  const int n = tts.rank();
  std::set<CyclicWord> found;
  std::vector<Letter> word;
  const auto consider = [&]() {
    const Word w = Word::reduce(word);
    if (w.size() != word.size()) return;
    const CyclicWord c = cyclic_reduce(w);
    if (c.size() != w.size()) return;
    if (count_illegal_turns(c, tts) == 0) found.insert(c.canonical_rotation());
  };
  for (int a = 0; a < 2 * n; ++a) {
    word = {slot_direction(a, n)};
    consider();
    for (int b = 0; b < 2 * n; ++b) {
      word = {slot_direction(a, n), slot_direction(b, n)};
      consider();
      for (int c = 0; c < 2 * n; ++c) {
        word = {slot_direction(a, n), slot_direction(b, n), slot_direction(c, n)};
        consider();
      }
    }
  }
  return {found.begin(), found.end()};
}

LegalityIndex legality_index(const RSequence& seq, const CyclicWord& x) {
  const TrainTrackStructure& tts = psi_structure();
  CyclicWord y = x;
  const std::size_t cap = 3 * count_illegal_turns(y, tts) + 9;
  std::size_t i = 0;
  while (count_illegal_turns(y, tts) > 0) {
    if (i >= cap) throw LogicError(x.str() + " stayed illegal for " + std::to_string(cap) + " folding steps");
    require_index(seq, i + 1, "legality_index");
    const std::int64_t r = seq(i + 1);
    if (r > std::numeric_limits<int>::max()) throw ResourceError("r too large");
    // psi_r = phi^-r o rho^-1, applied without building psi_r.
    const Word w = apply_iterated(maps::phi_inverse(), static_cast<int>(r), apply(maps::rho_inverse(), y.word()));
    y = cyclic_reduce(w);
    ++i;
  }
  return LegalityIndex{i, y, edge_vector(y)};
}

double log_c_stage(const RSequence& seq, std::size_t n) {
  require_index(seq, n, "log_c_stage");
  const std::size_t m = n / 2;
  double s = static_cast<double>(m) * (std::log(kappa_B()) + std::log(kappa_C()));
  for (std::size_t t = (n % 2 == 0 ? 2 : 1); t <= n; t += 2) s += r_at(seq, t) * (log_lambda_B() + log_lambda_C());
  return s;
}

std::pair<double, double> log_c_x(const RSequence& seq, std::size_t i_x) {
  require_index(seq, i_x, "log_c_x");
  const double lk = std::log(kappa_C());
  const std::size_t m = i_x / 2;
  double ce = 0.0;
  double co = 0.0;
  if (i_x % 2 == 0) {
    ce = static_cast<double>(m) * lk;
    co = static_cast<double>(m) * lk;
    for (std::size_t t = 2; t <= i_x; t += 2) ce += r_at(seq, t) * log_lambda_C();
    for (std::size_t t = 1; t + 1 <= i_x; t += 2) co += r_at(seq, t) * log_lambda_C();
  } else {
    ce = static_cast<double>(m + 1) * lk;
    co = static_cast<double>(m) * lk;
    for (std::size_t t = 2; t + 1 <= i_x; t += 2) ce += r_at(seq, t) * log_lambda_C();
    for (std::size_t t = 1; t <= i_x; t += 2) co += r_at(seq, t) * log_lambda_C();
  }
  return {ce, co};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> limit_lengths(const RSequence& seq, const Eigen::VectorXd& l0) {
  if (l0.size() != 7 || (l0.array() <= 0.0).any()) throw InputError("length vector must be 7 positive entries");
  const Eigen::MatrixXd y1 = limit_Yi(seq, 1).value.value();
  const Eigen::MatrixXd y2 = limit_Yi(seq, 2).value.value();
  const ScaledVector m1 = apply_M_transpose(seq(1), ScaledVector(l0));
  const Eigen::VectorXd lm = m1.mantissa() * std::exp(m1.log_scale() - r_at(seq, 1) * log_lambda_B());
  return {y1.transpose() * l0, y2.transpose() * lm};
}

namespace {

std::pair<double, double> log_tree_lengths_with(const RSequence& seq, const Eigen::VectorXd& le, const Eigen::VectorXd& lo,
                                                std::size_t i_x, const Eigen::VectorXd& v) {
  const Eigen::MatrixXd z1 = limit_Zi(seq, i_x + 1).value.value();
  const Eigen::MatrixXd z2 = limit_Zi(seq, i_x + 2).value.value();
  const ScaledVector nv = normalized_N(seq(i_x + 1), v);
  const ScaledVector direct(z1 * v);
  const ScaledVector folded(z2 * nv.mantissa(), nv.log_scale());
  const auto [ce, co] = log_c_x(seq, i_x);
  if (i_x % 2 == 0) return {log_pairing(le, direct) - ce, log_pairing(lo, folded) - co};
  return {log_pairing(le, folded) - ce, log_pairing(lo, direct) - co};
}

}  // namespace

std::pair<double, double> log_tree_lengths(const RSequence& seq, const Eigen::VectorXd& l0, std::size_t i_x,
                                           const Eigen::VectorXd& v) {
  const auto [le, lo] = limit_lengths(seq, l0);
  return log_tree_lengths_with(seq, le, lo, i_x, v);
}

TreeLengthPair tree_length_pair(const RSequence& seq, const Eigen::VectorXd& l0, const CyclicWord& x, std::size_t m_max) {
  if (l0.size() != 7 || (l0.array() <= 0.0).any()) throw InputError("length vector must be 7 positive entries");
  TreeLengthPair out;
  out.legal = legality_index(seq, x);
  const std::size_t ix = out.legal.i_x;
  require_index(seq, 2 * m_max + 1, "tree_length_pair");
  for (std::size_t n = ix; n <= 2 * m_max + 1; ++n) {
    ScaledVector u(out.legal.v_x);
    for (std::size_t t = ix + 1; t <= n; ++t) u = apply_N(seq(t), u);
    for (std::size_t t = n; t >= 1; --t) u = apply_M(seq(t), u);
    const StageValue sv{n, log_pairing(l0, u) - log_c_stage(seq, n)};
    (n % 2 == 0 ? out.even : out.odd).push_back(sv);
  }
  std::tie(out.log_limit_even, out.log_limit_odd) = log_tree_lengths(seq, l0, ix, out.legal.v_x);
  return out;
}

RatioExperiment ratio_experiment(const RSequence& seq, const Eigen::VectorXd& l0, std::size_t i_max) {
  if (i_max < 1) throw InputError("ratio experiment needs i_max >= 1");
  const auto [le, lo] = limit_lengths(seq, l0);
  RatioExperiment out;
  const double ln10 = std::log(10.0);
  for (std::size_t i = 1; i <= i_max; ++i) {
    RatioRow row;
    row.i = i;
    const auto [ae, ao] = log_tree_lengths_with(seq, le, lo, 2 * i, e5());
    const auto [be, bo] = log_tree_lengths_with(seq, le, lo, 2 * i + 1, e5());
    row.log10_alpha = (ao - ae) / ln10;
    row.log10_beta = (bo - be) / ln10;
    const auto [cae, cao] = log_c_x(seq, 2 * i);
    const auto [cbe, cbo] = log_c_x(seq, 2 * i + 1);
    row.log10_c_alpha = (cae - cao) / ln10;
    row.log10_c_beta = (cbe - cbo) / ln10;
    out.rows.push_back(row);
  }
  const Eigen::MatrixXd z = idempotent_Z().value();
  const Eigen::MatrixXd n_inf = limit_MN_infty().second.value();
  out.A = le.dot(z * n_inf * e5());
  out.B = lo.dot(z * n_inf * e5());
  out.vanishing = le.dot(z * e5());
  out.alpha_increasing = true;
  out.beta_decreasing = true;
  for (std::size_t k = 1; k < out.rows.size(); ++k) {
    out.alpha_increasing = out.alpha_increasing && out.rows[k].log10_alpha > out.rows[k - 1].log10_alpha;
    out.beta_decreasing = out.beta_decreasing && out.rows[k].log10_beta < out.rows[k - 1].log10_beta;
  }
  return out;
}

}  // namespace foldseq
