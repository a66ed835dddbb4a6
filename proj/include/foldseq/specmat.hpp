#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "foldseq/endomorphism.hpp"
#include "foldseq/seqgen.hpp"

namespace foldseq {

using BigInt = boost::multiprecision::cpp_int;

/// Dense matrix of arbitrary-precision integers.
class ExactMatrix {
 public:
  ExactMatrix() = default;
  ExactMatrix(int rows, int cols);
  ExactMatrix(int rows, int cols, std::initializer_list<long long> row_major);

  static ExactMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  BigInt& operator()(int i, int j) { return data_[index(i, j)]; }
  const BigInt& operator()(int i, int j) const { return data_[index(i, j)]; }

  ExactMatrix operator*(const ExactMatrix& rhs) const;
  ExactMatrix operator+(const ExactMatrix& rhs) const;
  ExactMatrix transpose() const;
  /// Copies `block` with its top-left corner at (i, j).
  void set_block(int i, int j, const ExactMatrix& block);
  ExactMatrix block(int i, int j, int rows, int cols) const;

  bool nonnegative() const;
  bool positive() const;
  BigInt min_row_sum() const;
  /// Entries reduced mod 2, row-major.
  std::vector<std::uint8_t> mod2() const;
  /// Natural log of the largest entry, or -inf for the zero matrix.
  double log_max_entry() const;
  /// entry * exp(-log_shift) as doubles.
  Eigen::MatrixXd to_double(double log_shift = 0.0) const;

  std::string str() const;

  friend bool operator==(const ExactMatrix&, const ExactMatrix&) = default;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j); }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<BigInt> data_;
};

/// m^k by repeated squaring. Throws ResourceError when k exceeds max_exact_power().
ExactMatrix power(const ExactMatrix& m, std::int64_t k);

/// Cap on exponents in the exact stage (default 200000).
std::int64_t max_exact_power();
void set_max_exact_power(std::int64_t cap);

/// Natural log of a positive big integer, accurate to double precision.
double log_bigint(const BigInt& x);
/// x * exp(-log_shift) as a double, without overflow of the intermediate.
double bigint_to_double(const BigInt& x, double log_shift = 0.0);

/// Column j holds the letter counts of the image of generator j.
ExactMatrix transition_matrix(const Endomorphism& e);

/// Signed exponent sums: column j is the abelianized image of generator j.
ExactMatrix abelianization(const Endomorphism& e);
/// Fraction-free Bareiss elimination.
BigInt determinant(const ExactMatrix& m);

ExactMatrix matrix_B();
ExactMatrix matrix_C();
/// Block formulas [[0, I4], [B^r, 0]] and [[0, C^r], [I4, 0]].
ExactMatrix matrix_M(std::int64_t r);
ExactMatrix matrix_N(std::int64_t r);

/// Floating matrix times exp(log_scale); the mantissa has max |entry| 1 unless zero.
class ScaledMatrix {
 public:
  ScaledMatrix() = default;
  explicit ScaledMatrix(Eigen::MatrixXd value, double log_scale = 0.0);
  static ScaledMatrix from_exact(const ExactMatrix& m, double log_scale = 0.0);

  const Eigen::MatrixXd& mantissa() const { return mantissa_; }
  double log_scale() const { return log_scale_; }
  int rows() const { return static_cast<int>(mantissa_.rows()); }
  int cols() const { return static_cast<int>(mantissa_.cols()); }
  bool is_zero() const { return zero_; }

  /// mantissa * exp(log_scale); throws NumericError when that overflows.
  Eigen::MatrixXd value() const;
  ScaledMatrix operator*(const ScaledMatrix& rhs) const;
  ScaledMatrix operator+(const ScaledMatrix& rhs) const;
  ScaledMatrix operator-(const ScaledMatrix& rhs) const;
  ScaledMatrix scaled(double log_factor) const;
  ScaledMatrix negated() const;
  ScaledMatrix transpose() const;

  /// log of the l1-induced operator norm (max absolute column sum).
  double log_norm() const;
  double norm() const;

 private:
  void normalize();
  Eigen::MatrixXd mantissa_;
  double log_scale_ = 0.0;
  bool zero_ = true;
};

/// l1-induced operator norm.
double op_norm(const Eigen::MatrixXd& m);

/// Vector times exp(log_scale), mantissa with max |entry| 1.
class ScaledVector {
 public:
  ScaledVector() = default;
  explicit ScaledVector(Eigen::VectorXd value, double log_scale = 0.0);
  static ScaledVector basis(int dim, int k);

  const Eigen::VectorXd& mantissa() const { return mantissa_; }
  double log_scale() const { return log_scale_; }
  int size() const { return static_cast<int>(mantissa_.size()); }
  bool is_zero() const { return zero_; }
  Eigen::VectorXd value() const;
  /// log of the l1 norm.
  double log_norm1() const;
  /// Unit l1 representative.
  Eigen::VectorXd direction() const;
  double log_dot(const ScaledVector& other) const;

  ScaledVector apply(const ScaledMatrix& m) const;

 private:
  void normalize();
  Eigen::VectorXd mantissa_;
  double log_scale_ = 0.0;
  bool zero_ = true;
};

/// Block-aware exact-scale application of M_r, N_r and their transposes.
ScaledVector apply_M(std::int64_t r, const ScaledVector& v);
ScaledVector apply_M_transpose(std::int64_t r, const ScaledVector& v);
ScaledVector apply_N(std::int64_t r, const ScaledVector& v);
ScaledVector apply_N_transpose(std::int64_t r, const ScaledVector& v);

/// Perron-Frobenius data of a primitive matrix.
struct PFData {
  double eigenvalue = 0.0;
  Eigen::VectorXd right;      // l1-normalized, positive
  Eigen::VectorXd left;       // l1-normalized, positive
  Eigen::MatrixXd projector;  // lim m^s / eigenvalue^s
  int iterations = 0;
};

/// Smallest k <= bound with m^k entrywise positive, or nullopt.
std::optional<int> primitivity_exponent(const ExactMatrix& m);
/// Power iteration until successive eigenvalue estimates differ by < tol (cap 10^4 steps).
PFData pf_eigen(const ExactMatrix& m, double tol = 1e-13);

/// Cached data for B and C.
const PFData& pf_B();
const PFData& pf_C();

/// Which corner of the 7x7 product the 3x3 limit occupies.
enum class KappaShape { B, C };
/// Scalar making the limiting 7x7 product idempotent.
double kappa(const PFData& pf, KappaShape shape);
double kappa(const ExactMatrix& m, KappaShape shape);
double kappa_B();
double kappa_C();

/// B^r / lambda_B^r and C^r / lambda_C^r. Exact below the exponent where the
/// subdominant part drops under 1e-17, the projector above it.
Eigen::Matrix3d normalized_B_power(std::int64_t r);
Eigen::Matrix3d normalized_C_power(std::int64_t r);

/// P_i = M_{r_i} M_{r_next} / (kappa_B lambda_B^{r_next}), built block by block
/// from normalized powers. Throws ResourceError past max_exact_power().
ScaledMatrix pair_product_P(std::int64_t r_i, std::int64_t r_next);
/// Q_i = N_{r_next} N_{r_i} / (kappa_C lambda_C^{r_next}).
ScaledMatrix pair_product_Q(std::int64_t r_i, std::int64_t r_next);

ScaledMatrix idempotent_Y();
ScaledMatrix idempotent_Z();
/// M_inf = lim M_r / lambda_B^r and N_inf = lim N_r / lambda_C^r.
std::pair<ScaledMatrix, ScaledMatrix> limit_MN_infty();

struct LimitResult {
  ScaledMatrix value;
  double achieved_delta = 0.0;  // norm of the last increment
  std::size_t terms = 0;
  bool converged = false;
};

/// Y_i = lim P_i P_{i+2} ... P_{i+2k}.
LimitResult limit_Yi(const RSequence& seq, std::size_t i, std::size_t m_max = 400, double tol = 1e-13);
/// Z_i = lim ... Q_{i+2} Q_i.
LimitResult limit_Zi(const RSequence& seq, std::size_t i, std::size_t m_max = 400, double tol = 1e-13);

/// Kernel basis of Y used by the checks: s e2 - e1, t e3 - e1, e4..e7.
std::vector<Eigen::VectorXd> kernel_vectors_Y();
std::vector<Eigen::VectorXd> kernel_vectors_Z();

struct ConvergenceTrial {
  std::uint64_t trial = 0;
  std::size_t terms = 0;
  double distance = 0.0;     // ||X - Y||
  double bound = 0.0;        // 2 eps (||Y|| + ||Y||^2)
  double kernel_max = 0.0;   // max ||X v|| over kernel vectors
  bool pass = false;
};

struct ConvergenceReport {
  double eps = 0.0;
  std::uint64_t seed = 0;
  double norm_Y = 0.0;
  bool precondition = false;  // eps ||Y|| <= 1/2
  std::vector<ConvergenceTrial> trials;
  std::size_t failures = 0;
  double worst_ratio = 0.0;   // max distance / bound
  double worst_kernel = 0.0;
};

/// Random products prod (Y + Delta_i) with ||Delta_i|| = eps / 2^i exactly.
/// `kernel` vectors are checked against the limit; `zero_perturbation` forces Delta_i = 0.
ConvergenceReport verify_convergence_lemma(const Eigen::MatrixXd& Y, const std::vector<Eigen::VectorXd>& kernel,
                                           double eps, std::size_t trials, std::uint64_t seed,
                                           double kernel_tol = 1e-8, bool zero_perturbation = false);

}  // namespace foldseq
