#include "foldseq/specmat.hpp"

#include <algorithm>
#include <functional>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "foldseq/errors.hpp"

namespace foldseq {

namespace bmp = boost::multiprecision;

namespace {

std::atomic<std::int64_t> g_max_exact_power{200'000};

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kMaxLogValue = 700.0;

}  // namespace

// ---------------------------------------------------------------- ExactMatrix

ExactMatrix::ExactMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
  if (rows < 0 || cols < 0) throw InputError("negative matrix dimension");
}

ExactMatrix::ExactMatrix(int rows, int cols, std::initializer_list<long long> row_major) : ExactMatrix(rows, cols) {
  if (row_major.size() != data_.size()) throw InputError("entry count does not match dimensions");
  std::size_t k = 0;
  for (long long x : row_major) data_[k++] = x;
}

ExactMatrix ExactMatrix::identity(int n) {
  ExactMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

ExactMatrix ExactMatrix::operator*(const ExactMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw InputError("matrix product dimension mismatch");
  ExactMatrix out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const BigInt& a = (*this)(i, k);
      if (a.is_zero()) continue;
      for (int j = 0; j < rhs.cols_; ++j) {
        const BigInt& b = rhs(k, j);
        if (!b.is_zero()) out(i, j) += a * b;
      }
    }
  }
  return out;
}

ExactMatrix ExactMatrix::operator+(const ExactMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw InputError("matrix sum dimension mismatch");
  ExactMatrix out = *this;
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] += rhs.data_[k];
  return out;
}

ExactMatrix ExactMatrix::transpose() const {
  ExactMatrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  }
  return out;
}

void ExactMatrix::set_block(int i, int j, const ExactMatrix& block) {
  if (i + block.rows_ > rows_ || j + block.cols_ > cols_) throw InputError("block does not fit");
  for (int a = 0; a < block.rows_; ++a) {
    for (int b = 0; b < block.cols_; ++b) (*this)(i + a, j + b) = block(a, b);
  }
}

ExactMatrix ExactMatrix::block(int i, int j, int rows, int cols) const {
  if (i + rows > rows_ || j + cols > cols_) throw InputError("block out of range");
  ExactMatrix out(rows, cols);
  for (int a = 0; a < rows; ++a) {
    for (int b = 0; b < cols; ++b) out(a, b) = (*this)(i + a, j + b);
  }
  return out;
}

bool ExactMatrix::nonnegative() const {
  return std::all_of(data_.begin(), data_.end(), [](const BigInt& x) { return x.sign() >= 0; });
}

bool ExactMatrix::positive() const {
  return std::all_of(data_.begin(), data_.end(), [](const BigInt& x) { return x.sign() > 0; });
}

BigInt ExactMatrix::min_row_sum() const {
  BigInt best;
  for (int i = 0; i < rows_; ++i) {
    BigInt s = 0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j);
    if (i == 0 || s < best) best = s;
  }
  return best;
}

std::vector<std::uint8_t> ExactMatrix::mod2() const {
  std::vector<std::uint8_t> out(data_.size());
  for (std::size_t k = 0; k < data_.size(); ++k) out[k] = bmp::bit_test(bmp::abs(data_[k]), 0) ? 1 : 0;
  return out;
}

double ExactMatrix::log_max_entry() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const BigInt& x : data_) {
    if (!x.is_zero()) best = std::max(best, log_bigint(bmp::abs(x)));
  }
  return best;
}

Eigen::MatrixXd ExactMatrix::to_double(double log_shift) const {
  Eigen::MatrixXd out(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out(i, j) = bigint_to_double((*this)(i, j), log_shift);
  }
  return out;
}

std::string ExactMatrix::str() const {
  std::ostringstream os;
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) os << (j ? " " : "") << (*this)(i, j);
    os << '\n';
  }
  return os.str();
}

std::int64_t max_exact_power() { return g_max_exact_power.load(std::memory_order_relaxed); }
void set_max_exact_power(std::int64_t cap) { g_max_exact_power.store(cap, std::memory_order_relaxed); }

ExactMatrix power(const ExactMatrix& m, std::int64_t k) {
  if (m.rows() != m.cols()) throw InputError("power of a non-square matrix");
  if (k < 0) throw InputError("negative matrix power");
  if (k > max_exact_power()) {
    throw ResourceError("exponent " + std::to_string(k) + " exceeds exact-stage cap " + std::to_string(max_exact_power()));
  }
  ExactMatrix result = ExactMatrix::identity(m.rows());
  ExactMatrix base = m;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

double log_bigint(const BigInt& x) {
  if (x.sign() <= 0) throw InputError("log of a non-positive integer");
  const std::size_t top = bmp::msb(x);
  const std::size_t shift = top > 60 ? top - 60 : 0;
  const BigInt y = x >> shift;
  return std::log(y.convert_to<double>()) + static_cast<double>(shift) * kLn2;
}

double bigint_to_double(const BigInt& x, double log_shift) {
  if (x.is_zero()) return 0.0;
  const BigInt ax = bmp::abs(x);
  const std::size_t top = bmp::msb(ax);
  const std::size_t shift = top > 60 ? top - 60 : 0;
  const double y = BigInt(ax >> shift).convert_to<double>();
  const double v = y * std::exp(static_cast<double>(shift) * kLn2 - log_shift);
  return x.sign() < 0 ? -v : v;
}

ExactMatrix transition_matrix(const Endomorphism& e) {
  const int n = e.rank();
  ExactMatrix m(n, n);
  for (int j = 0; j < n; ++j) {
    const auto counts = letter_counts(e.image(j), n);
    for (int i = 0; i < n; ++i) m(i, j) = counts[static_cast<std::size_t>(i)];
  }
  return m;
}

ExactMatrix abelianization(const Endomorphism& e) {
  const int n = e.rank();
  ExactMatrix m(n, n);
  for (int j = 0; j < n; ++j) {
    for (Letter x : e.image(j).letters()) m(generator_index(x), j) += x > 0 ? 1 : -1;
  }
  return m;
}

BigInt determinant(const ExactMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("determinant of a non-square matrix");
  const int n = m.rows();
  if (n == 0) return 1;
  ExactMatrix a = m;
  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (a(k, k).is_zero()) {
      int p = k + 1;
      while (p < n && a(p, k).is_zero()) ++p;
      if (p == n) return 0;
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

ExactMatrix matrix_B() { return ExactMatrix(3, 3, {0, 0, 1, 1, 0, 0, 0, 1, 1}); }
ExactMatrix matrix_C() { return ExactMatrix(3, 3, {0, 1, 0, 1, 0, 1, 1, 0, 0}); }

ExactMatrix matrix_M(std::int64_t r) {
  if (r < 1) throw InputError("M_r requires r >= 1");
  ExactMatrix m(7, 7);
  m.set_block(0, 3, ExactMatrix::identity(4));
  m.set_block(4, 0, power(matrix_B(), r));
  return m;
}

ExactMatrix matrix_N(std::int64_t r) {
  if (r < 1) throw InputError("N_r requires r >= 1");
  ExactMatrix m(7, 7);
  m.set_block(0, 4, power(matrix_C(), r));
  m.set_block(3, 0, ExactMatrix::identity(4));
  return m;
}

// ---------------------------------------------------------------- ScaledMatrix

double op_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

ScaledMatrix::ScaledMatrix(Eigen::MatrixXd value, double log_scale) : mantissa_(std::move(value)), log_scale_(log_scale) {
  normalize();
}

ScaledMatrix ScaledMatrix::from_exact(const ExactMatrix& m, double log_scale) {
  const double top = m.log_max_entry();
  if (!std::isfinite(top)) return ScaledMatrix(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  return ScaledMatrix(m.to_double(top), top + log_scale);
}

void ScaledMatrix::normalize() {
  if (!mantissa_.allFinite() || !std::isfinite(log_scale_)) throw NumericError("non-finite matrix entry");
  const double top = mantissa_.size() ? mantissa_.cwiseAbs().maxCoeff() : 0.0;
  if (top == 0.0) {
    zero_ = true;
    log_scale_ = 0.0;
    return;
  }
  zero_ = false;
  mantissa_ /= top;
  log_scale_ += std::log(top);
}

Eigen::MatrixXd ScaledMatrix::value() const {
  if (zero_) return mantissa_;
  if (log_scale_ > kMaxLogValue) throw NumericError("matrix value overflows double range");
  return mantissa_ * std::exp(log_scale_);
}

ScaledMatrix ScaledMatrix::operator*(const ScaledMatrix& rhs) const {
  if (cols() != rhs.rows()) throw InputError("scaled product dimension mismatch");
  if (zero_ || rhs.zero_) return ScaledMatrix(Eigen::MatrixXd::Zero(rows(), rhs.cols()));
  return ScaledMatrix(mantissa_ * rhs.mantissa_, log_scale_ + rhs.log_scale_);
}

ScaledMatrix ScaledMatrix::operator+(const ScaledMatrix& rhs) const {
  if (rows() != rhs.rows() || cols() != rhs.cols()) throw InputError("scaled sum dimension mismatch");
  if (zero_) return rhs;
  if (rhs.zero_) return *this;
  const double top = std::max(log_scale_, rhs.log_scale_);
  return ScaledMatrix(mantissa_ * std::exp(log_scale_ - top) + rhs.mantissa_ * std::exp(rhs.log_scale_ - top), top);
}

ScaledMatrix ScaledMatrix::operator-(const ScaledMatrix& rhs) const { return *this + rhs.negated(); }

ScaledMatrix ScaledMatrix::scaled(double log_factor) const {
  ScaledMatrix out = *this;
  if (!zero_) out.log_scale_ += log_factor;
  return out;
}

ScaledMatrix ScaledMatrix::negated() const {
  ScaledMatrix out = *this;
  out.mantissa_ = -out.mantissa_;
  return out;
}

ScaledMatrix ScaledMatrix::transpose() const {
  ScaledMatrix out = *this;
  out.mantissa_.transposeInPlace();
  return out;
}

double ScaledMatrix::log_norm() const {
  if (zero_) return -std::numeric_limits<double>::infinity();
  return std::log(op_norm(mantissa_)) + log_scale_;
}

double ScaledMatrix::norm() const {
  const double l = log_norm();
  if (l > kMaxLogValue) throw NumericError("norm overflows double range");
  return std::exp(l);
}

// ---------------------------------------------------------------- ScaledVector

ScaledVector::ScaledVector(Eigen::VectorXd value, double log_scale) : mantissa_(std::move(value)), log_scale_(log_scale) {
  normalize();
}

ScaledVector ScaledVector::basis(int dim, int k) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v(k) = 1.0;
  return ScaledVector(v);
}

void ScaledVector::normalize() {
  if (!mantissa_.allFinite() || !std::isfinite(log_scale_)) throw NumericError("non-finite vector entry");
  const double top = mantissa_.size() ? mantissa_.cwiseAbs().maxCoeff() : 0.0;
  if (top == 0.0) {
    zero_ = true;
    log_scale_ = 0.0;
    return;
  }
  zero_ = false;
  mantissa_ /= top;
  log_scale_ += std::log(top);
}

Eigen::VectorXd ScaledVector::value() const {
  if (zero_) return mantissa_;
  if (log_scale_ > kMaxLogValue) throw NumericError("vector value overflows double range");
  return mantissa_ * std::exp(log_scale_);
}

double ScaledVector::log_norm1() const {
  if (zero_) return -std::numeric_limits<double>::infinity();
  return std::log(mantissa_.cwiseAbs().sum()) + log_scale_;
}

Eigen::VectorXd ScaledVector::direction() const {
  if (zero_) throw InputError("direction of the zero vector");
  return mantissa_ / mantissa_.cwiseAbs().sum();
}

double ScaledVector::log_dot(const ScaledVector& other) const {
  if (zero_ || other.zero_) return -std::numeric_limits<double>::infinity();
  const double d = mantissa_.dot(other.mantissa_);
  if (d <= 0.0) throw NumericError("log_dot of a non-positive inner product");
  return std::log(d) + log_scale_ + other.log_scale_;
}

ScaledVector ScaledVector::apply(const ScaledMatrix& m) const {
  if (m.cols() != size()) throw InputError("scaled apply dimension mismatch");
  if (zero_ || m.is_zero()) return ScaledVector(Eigen::VectorXd::Zero(m.rows()));
  return ScaledVector(m.mantissa() * mantissa_, m.log_scale() + log_scale_);
}

namespace {

// Joins two pieces with their own log scales into one 7-vector.
ScaledVector join(const Eigen::VectorXd& a, double log_a, int at_a, const Eigen::VectorXd& b, double log_b, int at_b) {
  const bool za = a.cwiseAbs().maxCoeff() == 0.0;
  const bool zb = b.cwiseAbs().maxCoeff() == 0.0;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(7);
  if (za && zb) return ScaledVector(out);
  const double top = za ? log_b : (zb ? log_a : std::max(log_a, log_b));
  if (!za) out.segment(at_a, a.size()) = a * std::exp(log_a - top);
  if (!zb) out.segment(at_b, b.size()) = b * std::exp(log_b - top);
  return ScaledVector(out, top);
}

void require7(const ScaledVector& v) {
  if (v.size() != 7) throw InputError("block maps act on 7-vectors");
}

}  // namespace

ScaledVector apply_M(std::int64_t r, const ScaledVector& v) {
  require7(v);
  const Eigen::VectorXd& x = v.mantissa();
  const double lr = static_cast<double>(r) * std::log(pf_B().eigenvalue);
  return join(x.segment(3, 4), v.log_scale(), 0, normalized_B_power(r) * x.segment(0, 3), v.log_scale() + lr, 4);
}

ScaledVector apply_M_transpose(std::int64_t r, const ScaledVector& v) {
  require7(v);
  const Eigen::VectorXd& x = v.mantissa();
  const double lr = static_cast<double>(r) * std::log(pf_B().eigenvalue);
  return join(normalized_B_power(r).transpose() * x.segment(4, 3), v.log_scale() + lr, 0, x.segment(0, 4), v.log_scale(), 3);
}

ScaledVector apply_N(std::int64_t r, const ScaledVector& v) {
  require7(v);
  const Eigen::VectorXd& x = v.mantissa();
  const double lr = static_cast<double>(r) * std::log(pf_C().eigenvalue);
  return join(normalized_C_power(r) * x.segment(4, 3), v.log_scale() + lr, 0, x.segment(0, 4), v.log_scale(), 3);
}

ScaledVector apply_N_transpose(std::int64_t r, const ScaledVector& v) {
  require7(v);
  const Eigen::VectorXd& x = v.mantissa();
  const double lr = static_cast<double>(r) * std::log(pf_C().eigenvalue);
  return join(x.segment(3, 4), v.log_scale(), 0, normalized_C_power(r).transpose() * x.segment(0, 3), v.log_scale() + lr, 4);
}

// ---------------------------------------------------------------- Perron-Frobenius

std::optional<int> primitivity_exponent(const ExactMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InputError("primitivity needs a non-empty square matrix");
  if (!m.nonnegative()) return std::nullopt;
  const int n = m.rows();
  const int bound = std::max(2 * n, (n - 1) * (n - 1) + 1);
  std::vector<std::uint8_t> pattern(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pattern[static_cast<std::size_t>(i * n + j)] = m(i, j).is_zero() ? 0 : 1;
  }
  std::vector<std::uint8_t> acc = pattern;
  for (int k = 1; k <= bound; ++k) {
    if (std::all_of(acc.begin(), acc.end(), [](std::uint8_t x) { return x != 0; })) return k;
    std::vector<std::uint8_t> next(acc.size(), 0);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < n; ++l) {
        if (!acc[static_cast<std::size_t>(i * n + l)]) continue;
        for (int j = 0; j < n; ++j) next[static_cast<std::size_t>(i * n + j)] |= pattern[static_cast<std::size_t>(l * n + j)];
      }
    }
    acc = std::move(next);
  }
  return std::nullopt;
}

namespace {

// Normalized power iteration; returns (eigenvalue, vector, iterations).
std::tuple<double, Eigen::VectorXd, int> power_iteration(const Eigen::MatrixXd& a, double tol) {
  const auto n = a.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double lambda = 0.0;
  for (int it = 1; it <= 10'000; ++it) {
    Eigen::VectorXd w = a * v;
    const double next = w.sum();
    if (!(next > 0.0)) throw NumericError("power iteration collapsed to zero");
    w /= next;
    const double moved = (w - v).lpNorm<1>();
    v = std::move(w);
    // A single coincidence of two estimates is not convergence; the vector must also settle.
    if (it > 1 && std::abs(next - lambda) < tol && moved < tol) return {next, v, it};
    lambda = next;
  }
  throw NumericError("power iteration did not converge within 10^4 steps");
}

}  // namespace

PFData pf_eigen(const ExactMatrix& m, double tol) {
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  if (!primitivity_exponent(m)) throw InputError("matrix is not primitive");
  const double top = m.log_max_entry();
  const Eigen::MatrixXd a = m.to_double(top);
  auto [lr, right, itr] = power_iteration(a, tol);
  auto [ll, left, itl] = power_iteration(a.transpose(), tol);
  PFData pf;
  // Two-sided quotient: error is quadratic in the eigenvector errors.
  const double two_sided = left.dot(a * right) / left.dot(right);
  if (!(std::abs(two_sided - 0.5 * (lr + ll)) < 1e3 * tol)) throw NumericError("eigenvalue estimates disagree");
  pf.eigenvalue = two_sided * std::exp(top);
  pf.right = right;
  pf.left = left;
  pf.projector = right * left.transpose() / left.dot(right);
  pf.iterations = std::max(itr, itl);
  return pf;
}

const PFData& pf_B() {
  static const PFData pf = pf_eigen(matrix_B());
  return pf;
}

const PFData& pf_C() {
  static const PFData pf = pf_eigen(matrix_C());
  return pf;
}

double kappa(const PFData& pf, KappaShape shape) {
  const Eigen::MatrixXd& p = pf.projector;
  if (p.rows() != 3 || p.cols() != 3) throw InputError("kappa is defined for 3x3 matrices");
  const double k = shape == KappaShape::B ? p(0, 1) + p(1, 2) : p(1, 0) + p(2, 1);
  if (!std::isfinite(k) || k <= 0.0) throw NumericError("degenerate projector: kappa is not positive");
  return k;
}

double kappa(const ExactMatrix& m, KappaShape shape) { return kappa(pf_eigen(m), shape); }

double kappa_B() {
  static const double k = kappa(pf_B(), KappaShape::B);
  return k;
}

double kappa_C() {
  static const double k = kappa(pf_C(), KappaShape::C);
  return k;
}

namespace {

// Past this exponent the subdominant part of m^r / lambda^r is below 1e-17 and the projector is exact.
std::int64_t spectral_cutoff(const ExactMatrix& m, double lambda) {
  const Eigen::EigenSolver<Eigen::MatrixXd> es(m.to_double());
  std::vector<double> mods;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) mods.push_back(std::abs(es.eigenvalues()(k)));
  std::sort(mods.begin(), mods.end(), std::greater<>());
  const double ratio = mods.size() > 1 ? mods[1] / lambda : 0.0;
  if (ratio <= 0.0) return 1;
  return static_cast<std::int64_t>(std::ceil(std::log(1e-17) / std::log(ratio)));
}

struct PowerCache {
  std::map<std::int64_t, Eigen::Matrix3d> entries;
  std::mutex mu;
};

Eigen::Matrix3d normalized_power(const ExactMatrix& base, const PFData& pf, std::int64_t cutoff, std::int64_t r,
                                 PowerCache& cache) {
  if (r < 0) throw InputError("negative power");
  // Exact conversion carries a relative error of order r * 1e-16 from the scale r log(lambda).
  if (r >= cutoff) return pf.projector;
  std::lock_guard<std::mutex> lock(cache.mu);
  auto it = cache.entries.find(r);
  if (it != cache.entries.end()) return it->second;
  const Eigen::Matrix3d out = power(base, r).to_double(static_cast<double>(r) * std::log(pf.eigenvalue));
  cache.entries.emplace(r, out);
  return out;
}

}  // namespace

Eigen::Matrix3d normalized_B_power(std::int64_t r) {
  static const std::int64_t cutoff = spectral_cutoff(matrix_B(), pf_B().eigenvalue);
  static PowerCache cache;
  return normalized_power(matrix_B(), pf_B(), cutoff, r, cache);
}

Eigen::Matrix3d normalized_C_power(std::int64_t r) {
  static const std::int64_t cutoff = spectral_cutoff(matrix_C(), pf_C().eigenvalue);
  static PowerCache cache;
  return normalized_power(matrix_C(), pf_C(), cutoff, r, cache);
}

namespace {

double exp_or_zero(double x) { return x < -745.0 ? 0.0 : std::exp(x); }

}  // namespace

// Assembled from normalized blocks so that the scale never involves lambda^r for large r.
ScaledMatrix pair_product_P(std::int64_t r_i, std::int64_t r_next) {
  if (r_i < 1 || r_next < 1) throw InputError("pair product needs r >= 1");
  if (std::max(r_i, r_next) > max_exact_power()) throw ResourceError("exponent exceeds exact-stage cap");
  const double ll = std::log(pf_B().eigenvalue);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(7, 7);
  m(0, 6) = exp_or_zero(-static_cast<double>(r_next) * ll);
  m.block(1, 0, 3, 3) = normalized_B_power(r_next);
  m.block(4, 3, 3, 3) = normalized_B_power(r_i) * exp_or_zero(static_cast<double>(r_i - r_next) * ll);
  return ScaledMatrix(m, -std::log(kappa_B()));
}

ScaledMatrix pair_product_Q(std::int64_t r_i, std::int64_t r_next) {
  if (r_i < 1 || r_next < 1) throw InputError("pair product needs r >= 1");
  if (std::max(r_i, r_next) > max_exact_power()) throw ResourceError("exponent exceeds exact-stage cap");
  const double ll = std::log(pf_C().eigenvalue);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(7, 7);
  m(6, 0) = exp_or_zero(-static_cast<double>(r_next) * ll);
  m.block(0, 1, 3, 3) = normalized_C_power(r_next);
  m.block(3, 4, 3, 3) = normalized_C_power(r_i) * exp_or_zero(static_cast<double>(r_i - r_next) * ll);
  return ScaledMatrix(m, -std::log(kappa_C()));
}

ScaledMatrix idempotent_Y() {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(7, 7);
  y.block(1, 0, 3, 3) = pf_B().projector / kappa_B();
  return ScaledMatrix(y);
}

ScaledMatrix idempotent_Z() {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(7, 7);
  z.block(0, 1, 3, 3) = pf_C().projector / kappa_C();
  return ScaledMatrix(z);
}

std::pair<ScaledMatrix, ScaledMatrix> limit_MN_infty() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(7, 7);
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(7, 7);
  m.block(4, 0, 3, 3) = pf_B().projector;
  n.block(0, 4, 3, 3) = pf_C().projector;
  return {ScaledMatrix(m), ScaledMatrix(n)};
}

namespace {

template <class Factor, class Step>
LimitResult iterate_limit(const RSequence& seq, std::size_t i, std::size_t m_max, double tol, Factor factor, Step step) {
  if (i < 1 || i + 1 > seq.size()) throw InputError("limit index needs r_i and r_{i+1} in the sequence");
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  LimitResult res;
  res.value = factor(seq(i), seq(i + 1));
  res.terms = 1;
  res.achieved_delta = std::numeric_limits<double>::infinity();
  for (std::size_t j = i + 2; j + 1 <= seq.size() && res.terms < m_max; j += 2) {
    ScaledMatrix next = step(res.value, factor(seq(j), seq(j + 1)));
    const double scale = std::max(1.0, next.norm());
    res.achieved_delta = (next - res.value).norm() / scale;
    res.value = std::move(next);
    ++res.terms;
    if (res.achieved_delta < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace

LimitResult limit_Yi(const RSequence& seq, std::size_t i, std::size_t m_max, double tol) {
  return iterate_limit(seq, i, m_max, tol, pair_product_P,
                       [](const ScaledMatrix& acc, const ScaledMatrix& f) { return acc * f; });
}

LimitResult limit_Zi(const RSequence& seq, std::size_t i, std::size_t m_max, double tol) {
  return iterate_limit(seq, i, m_max, tol, pair_product_Q,
                       [](const ScaledMatrix& acc, const ScaledMatrix& f) { return f * acc; });
}

namespace {

// Kernel of a rank-one-on-a-block idempotent: ratios of the three live columns, plus dead columns.
std::vector<Eigen::VectorXd> rank_one_kernel(const Eigen::MatrixXd& m, int first_col) {
  std::vector<Eigen::VectorXd> out;
  Eigen::Index row = 0;
  m.col(first_col).cwiseAbs().maxCoeff(&row);
  for (int c : {first_col + 1, first_col + 2}) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m.cols());
    v(c) = m(row, first_col) / m(row, c);
    v(first_col) = -1.0;
    out.push_back(v);
  }
  for (int c = 0; c < m.cols(); ++c) {
    if (c < first_col || c > first_col + 2) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(m.cols());
      v(c) = 1.0;
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> kernel_vectors_Y() { return rank_one_kernel(idempotent_Y().value(), 0); }
std::vector<Eigen::VectorXd> kernel_vectors_Z() { return rank_one_kernel(idempotent_Z().value(), 1); }

ConvergenceReport verify_convergence_lemma(const Eigen::MatrixXd& Y, const std::vector<Eigen::VectorXd>& kernel,
                                           double eps, std::size_t trials, std::uint64_t seed, double kernel_tol,
                                           bool zero_perturbation) {
  if (Y.rows() != Y.cols()) throw InputError("Y must be square");
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  ConvergenceReport rep;
  rep.eps = eps;
  rep.seed = seed;
  rep.norm_Y = op_norm(Y);
  rep.precondition = eps * rep.norm_Y <= 0.5;
  if (!rep.precondition) throw InputError("convergence lemma needs eps * ||Y|| <= 1/2");
  const double bound = 2.0 * eps * (rep.norm_Y + rep.norm_Y * rep.norm_Y);
  const auto n = Y.rows();
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n);
    ConvergenceTrial tr;
    tr.trial = t;
    double target = eps;
    for (int i = 1; i <= 200; ++i) {
      target *= 0.5;
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
      if (!zero_perturbation) {
        for (Eigen::Index a = 0; a < n; ++a) {
          for (Eigen::Index b = 0; b < n; ++b) d(a, b) = unif(rng);
        }
        d *= target / op_norm(d);
      }
      Eigen::MatrixXd next = x * (Y + d);
      const double step = op_norm(next - x);
      x = std::move(next);
      tr.terms = static_cast<std::size_t>(i);
      if (i > 1 && step <= 1e-17 * std::max(1.0, op_norm(x)) && target < 1e-17) break;
    }
    tr.distance = op_norm(x - Y);
    tr.bound = bound;
    for (const Eigen::VectorXd& v : kernel) tr.kernel_max = std::max(tr.kernel_max, (x * v).lpNorm<1>() / v.lpNorm<1>());
    tr.pass = tr.distance <= bound && tr.kernel_max <= kernel_tol;
    rep.worst_ratio = std::max(rep.worst_ratio, tr.distance / bound);
    rep.worst_kernel = std::max(rep.worst_kernel, tr.kernel_max);
    if (!tr.pass) ++rep.failures;
    rep.trials.push_back(tr);
  }
  return rep;
}

}  // namespace foldseq
