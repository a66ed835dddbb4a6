#include <chrono>
#include <cmath>

#include "doctest.h"
#include "foldseq/endomorphism.hpp"
#include "foldseq/errors.hpp"
#include "foldseq/seqgen.hpp"
#include "foldseq/specmat.hpp"

using namespace foldseq;

namespace {

double bisect(double (*f)(double), double lo, double hi) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double char_B(double x) { return x * x * x - x * x - 1.0; }
double char_C(double x) { return x * x * x - x - 1.0; }

// Oracle for kappa: trace of the unnormalized limit lim M_r M_s / lambda^s, which is kappa Y.
double kappa_trace_oracle_B() {
  const double lam = bisect(char_B, 1.0, 2.0);
  const Eigen::MatrixXd k = (matrix_M(300) * matrix_M(600)).to_double(600 * std::log(lam));
  return k.trace();
}

double kappa_trace_oracle_C() {
  const double lam = bisect(char_C, 1.0, 2.0);
  const Eigen::MatrixXd k = (matrix_N(600) * matrix_N(300)).to_double(600 * std::log(lam));
  return k.trace();
}

}  // namespace

TEST_CASE("transition matrices of theta and vartheta") {
  CHECK(transition_matrix(maps::theta()) == matrix_B());
  CHECK(transition_matrix(maps::vartheta()) == matrix_C());
  CHECK(matrix_B() == ExactMatrix(3, 3, {0, 0, 1, 1, 0, 0, 0, 1, 1}));
  CHECK(matrix_C() == ExactMatrix(3, 3, {0, 1, 0, 1, 0, 1, 1, 0, 0}));
}

TEST_CASE("block forms of M_r and N_r") {
  for (int r : {1, 2, 3, 4, 5, 15, 30}) {
    CAPTURE(r);
    const Family f = build_family(r);
    CHECK(transition_matrix(f.phi_r) == matrix_M(r));
    CHECK(transition_matrix(f.psi_r) == matrix_N(r));
    CHECK(matrix_M(r).block(4, 0, 3, 3) == power(matrix_B(), r));
    CHECK(matrix_N(r).block(0, 4, 3, 3) == power(matrix_C(), r));
  }
  CHECK_THROWS_AS(matrix_M(0), InputError);
}

TEST_CASE("abelianized maps are invertible over the integers") {
  for (int r : {1, 3, 6, 15}) {
    const Family f = build_family(r);
    const BigInt d1 = determinant(abelianization(f.phi_r));
    const BigInt d2 = determinant(abelianization(f.psi_r));
    CHECK((d1 == 1 || d1 == -1));
    CHECK((d2 == 1 || d2 == -1));
    CHECK(abelianization(f.phi_r) * abelianization(f.psi_r) == ExactMatrix::identity(7));
  }
  CHECK(determinant(ExactMatrix(2, 2, {0, 1, 1, 0})) == -1);
  CHECK(determinant(ExactMatrix(3, 3, {2, 0, 1, 1, 3, 2, 1, 1, 2})) == 6);
}

TEST_CASE("exact power and big integer conversion") {
  CHECK(power(matrix_B(), 0) == ExactMatrix::identity(3));
  CHECK(power(matrix_B(), 7) == power(matrix_B(), 3) * power(matrix_B(), 4));
  const BigInt big = BigInt(1) << 3000;
  CHECK(log_bigint(big) == doctest::Approx(3000 * std::log(2.0)).epsilon(1e-14));
  CHECK(bigint_to_double(big, 3000 * std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bigint_to_double(BigInt(-12345)) == -12345.0);
  const std::int64_t saved = max_exact_power();
  set_max_exact_power(10);
  CHECK_THROWS_AS(power(matrix_B(), 11), ResourceError);
  set_max_exact_power(saved);
}

TEST_CASE("Perron-Frobenius data") {
  const double lb = bisect(char_B, 1.0, 2.0);
  const double lc = bisect(char_C, 1.0, 2.0);
  CHECK(pf_B().eigenvalue == doctest::Approx(lb).epsilon(1e-12));
  CHECK(pf_C().eigenvalue == doctest::Approx(lc).epsilon(1e-12));
  CHECK(pf_B().eigenvalue == doctest::Approx(1.4656).epsilon(1e-4));
  const Eigen::MatrixXd B = matrix_B().to_double();
  CHECK((B * pf_B().right - lb * pf_B().right).lpNorm<1>() < 1e-12);
  CHECK((B.transpose() * pf_B().left - lb * pf_B().left).lpNorm<1>() < 1e-12);
  const Eigen::MatrixXd& P = pf_B().projector;
  CHECK(op_norm(P * P - P) < 1e-12);
  // The projector is the limit of normalized powers.
  CHECK(op_norm(normalized_B_power(400) - P) < 1e-10);
  CHECK(op_norm(normalized_C_power(400) - pf_C().projector) < 1e-10);

  const PFData two = pf_eigen(ExactMatrix(1, 1, {2}));
  CHECK(two.eigenvalue == doctest::Approx(2.0));
  CHECK(two.right(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pf_eigen(ExactMatrix(2, 2, {0, 1, 1, 0})), InputError);
  for (const ExactMatrix& m : {matrix_B(), matrix_C()}) {
    const int k = primitivity_exponent(m).value();
    CHECK(power(m, k).positive());
    CHECK(!power(m, k - 1).positive());
  }
}

TEST_CASE("kappa") {
  CHECK(kappa_B() == doctest::Approx(kappa_trace_oracle_B()).epsilon(1e-9));
  CHECK(kappa_C() == doctest::Approx(kappa_trace_oracle_C()).epsilon(1e-9));
  CHECK(kappa_B() > 0.0);
  CHECK(kappa_C() > 0.0);
  // Scaling the matrix does not move the projector.
  ExactMatrix twoB = matrix_B() + matrix_B();
  CHECK(kappa(twoB, KappaShape::B) == doctest::Approx(kappa_B()).epsilon(1e-11));
  // Shape-specific formulas agree with the trace of the embedded 7x7 limit.
  CHECK(kappa_B() == doctest::Approx((pf_B().projector(0, 1) + pf_B().projector(1, 2))));
}

TEST_CASE("idempotents") {
  const Eigen::MatrixXd Y = idempotent_Y().value();
  const Eigen::MatrixXd Z = idempotent_Z().value();
  CHECK(op_norm(Y * Y - Y) <= 1e-10);
  CHECK(op_norm(Z * Z - Z) <= 1e-10);
  CHECK(Y.rightCols(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Y.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Z.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Z.rightCols(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Y.trace() == doctest::Approx(1.0));
  CHECK(Z.trace() == doctest::Approx(1.0));
  for (const auto& v : kernel_vectors_Y()) CHECK((Y * v).lpNorm<1>() < 1e-12);
  for (const auto& v : kernel_vectors_Z()) CHECK((Z * v).lpNorm<1>() < 1e-12);
  CHECK(kernel_vectors_Y().size() == 6);
}

TEST_CASE("limits of normalized M_r and N_r") {
  const auto [Minf, Ninf] = limit_MN_infty();
  const Eigen::MatrixXd M = Minf.value();
  const Eigen::MatrixXd N = Ninf.value();
  const Eigen::MatrixXd Y = idempotent_Y().value();
  const Eigen::MatrixXd Z = idempotent_Z().value();
  // Direct limit M_r / lambda^r at large r.
  const double lb = pf_B().eigenvalue;
  CHECK(op_norm(matrix_M(500).to_double(500 * std::log(lb)) - M) < 1e-9);

  const Eigen::MatrixXd MY = M * Y;
  CHECK(MY.topRows(4).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(MY.rightCols(4).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::Vector3d y = MY.block(4, 0, 3, 1);
  CHECK((matrix_B().to_double() * y - lb * y).norm() < 1e-12);
  CHECK((MY.col(1) - MY.col(1)(4) / MY.col(0)(4) * MY.col(0)).norm() < 1e-14);

  const Eigen::MatrixXd ZN = Z * N;
  CHECK(ZN.leftCols(4).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(ZN.bottomRows(4).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::Vector3d z = ZN.block(0, 4, 3, 1);
  CHECK((matrix_C().to_double() * z - pf_C().eigenvalue * z).norm() < 1e-12);

  const Eigen::VectorXd ye = Y.col(0);
  const Eigen::VectorXd mye = MY.col(0);
  CHECK(ye.cwiseProduct(mye).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ye.norm() > 0.1);
  CHECK(mye.norm() > 0.1);
}

TEST_CASE("pair products") {
  const double lb = pf_B().eigenvalue;
  const Eigen::MatrixXd P = pair_product_P(3, 5).value() * kappa_B() * std::pow(lb, 5);
  const Eigen::MatrixXd B5 = power(matrix_B(), 5).to_double();
  CHECK((P.block(1, 0, 3, 3) - B5).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(P(0, 6) == doctest::Approx(1.0));
  const Eigen::MatrixXd Q = pair_product_Q(3, 5).value() * kappa_C() * std::pow(pf_C().eigenvalue, 5);
  const Eigen::MatrixXd C5 = power(matrix_C(), 5).to_double();
  CHECK((Q.block(0, 1, 3, 3) - C5).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(Q(6, 0) == doctest::Approx(1.0));

  const RSequence seq = generate(40, 15);
  const Eigen::MatrixXd Y = idempotent_Y().value();
  const Eigen::MatrixXd Z = idempotent_Z().value();
  const double nY = op_norm(Y);
  double prev_q = 1e9;
  double first_q = 0.0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    CAPTURE(i);
    const double gap = std::pow(lb, static_cast<double>(seq(i) - seq(i + 1)));
    const double d = op_norm(pair_product_P(seq(i), seq(i + 1)).value() - Y);
    // The deviation tracks ||Y|| lambda^{r_i - r_{i+1}}, which exceeds the bare lambda power.
    CHECK(d <= 1.001 * nY * gap);
    CHECK(d > gap);
    const double dq = op_norm(pair_product_Q(seq(i), seq(i + 1)).value() - Z);
    if (i > 16) CHECK(dq <= prev_q * (1.0 + 1e-9));
    if (i == 17) first_q = dq;
    prev_q = dq;
  }
  CHECK(prev_q < 1e-2 * first_q);
}

TEST_CASE("scaled arithmetic") {
  const ScaledMatrix a = pair_product_P(30, 45);
  const ScaledMatrix b = ScaledMatrix::from_exact(matrix_M(200));
  const ScaledMatrix c = ScaledMatrix::from_exact(matrix_N(90), -3.0);
  const ScaledMatrix l = (a * b) * c;
  const ScaledMatrix r = a * (b * c);
  CHECK((l.mantissa() - r.mantissa()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(l.log_scale() - r.log_scale()) < 1e-9);
  CHECK(b.mantissa().cwiseAbs().maxCoeff() == 1.0);
  CHECK(b.log_scale() == doctest::Approx(log_bigint(power(matrix_B(), 200)(2, 2))).epsilon(1e-12));
  // Block application matches dense scaled products.
  ScaledVector v(Eigen::VectorXd::LinSpaced(7, 1.0, 7.0));
  const ScaledVector w1 = apply_M(40, apply_N(25, v));
  const ScaledVector w2 = v.apply(ScaledMatrix::from_exact(matrix_M(40) * matrix_N(25)));
  CHECK((w1.mantissa() - w2.mantissa()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(w1.log_scale() == doctest::Approx(w2.log_scale()).epsilon(1e-12));
  const ScaledVector t1 = apply_M_transpose(40, apply_N_transpose(25, v));
  const ScaledVector t2 = v.apply(ScaledMatrix::from_exact((matrix_N(25) * matrix_M(40)).transpose()));
  CHECK((t1.mantissa() - t2.mantissa()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(t1.log_scale() == doctest::Approx(t2.log_scale()).epsilon(1e-12));
  // Huge exponents stay finite in log form.
  const ScaledVector big = apply_M(5000, ScaledVector::basis(7, 0));
  CHECK(big.log_scale() > 1000.0);
  CHECK_THROWS_AS(big.value(), NumericError);
}

TEST_CASE("limits Y_i and Z_i") {
  const RSequence seq = generate(140, 15);
  const Eigen::MatrixXd Y = idempotent_Y().value();
  const double nY = op_norm(Y);
  for (std::size_t i : {1U, 2U, 5U, 20U}) {
    CAPTURE(i);
    const LimitResult res = limit_Yi(seq, i, 400, 1e-13);
    CHECK(res.converged);
    const Eigen::MatrixXd Yi = res.value.value();
    for (const auto& v : kernel_vectors_Y()) CHECK((Yi * v).lpNorm<1>() <= 1e-8);
    const Eigen::VectorXd c1 = Yi.col(0);
    for (int k : {1, 2}) {
      const double ratio = Yi.col(k).dot(c1) / c1.squaredNorm();
      CHECK(ratio > 0.0);
      CHECK((Yi.col(k) - ratio * c1).lpNorm<1>() < 1e-10);
    }
    if (i >= 20) CHECK(op_norm(Yi - Y) <= (2.0 / std::pow(2.0, i)) * (nY + nY * nY) + 1.0);
  }
  const LimitResult z20 = limit_Zi(seq, 20);
  const LimitResult z60 = limit_Zi(seq, 60);
  CHECK(z20.converged);
  CHECK(z60.converged);
  const Eigen::MatrixXd Z = idempotent_Z().value();
  CHECK(op_norm(z60.value.value() - Z) < op_norm(z20.value.value() - Z));
  CHECK(op_norm(z60.value.value() - Z) < 1e-8);
  const LimitResult short_run = limit_Yi(generate(6, 15), 1, 400, 1e-13);
  CHECK(!short_run.converged);
  CHECK(short_run.terms == 3);
}

TEST_CASE("convergence lemma verifier") {
  const Eigen::MatrixXd Y = idempotent_Y().value();
  const auto kernel = kernel_vectors_Y();
  const ConvergenceReport zero = verify_convergence_lemma(Y, kernel, 0.1, 3, 1, 1e-8, true);
  for (const auto& t : zero.trials) CHECK(t.distance < 1e-14);
  const ConvergenceReport rep = verify_convergence_lemma(Y, kernel, 0.1, 200, 42);
  CHECK(rep.precondition);
  CHECK(rep.failures == 0);
  CHECK(rep.worst_kernel <= 1e-8);
  CHECK(rep.worst_ratio < 1.0);
  const ConvergenceReport again = verify_convergence_lemma(Y, kernel, 0.1, 5, 42);
  for (std::size_t k = 0; k < 5; ++k) CHECK(again.trials[k].distance == rep.trials[k].distance);
  CHECK_THROWS_AS(verify_convergence_lemma(Y, kernel, 1.0, 1, 0), InputError);
}
