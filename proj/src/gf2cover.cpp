#include "foldseq/gf2cover.hpp"

#include <algorithm>
#include <bitset>
#include <future>

#include "foldseq/endomorphism.hpp"
#include "foldseq/errors.hpp"

namespace foldseq {

namespace {

constexpr int kMaxGF2 = 32;

}  // namespace

GF2Matrix::GF2Matrix(std::initializer_list<std::initializer_list<int>> rows) : GF2Matrix(static_cast<int>(rows.size())) {
  int i = 0;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n_) throw InputError("GF2Matrix must be square");
    int j = 0;
    for (int v : r) set(i, j++, (v & 1) != 0);
    ++i;
  }
}

GF2Matrix GF2Matrix::identity(int n) {
  if (n < 0 || n > kMaxGF2) throw InputError("GF2Matrix size out of range");
  GF2Matrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

GF2Matrix GF2Matrix::from_exact(const ExactMatrix& e) {
  if (e.rows() != e.cols() || e.rows() > kMaxGF2) throw InputError("GF2Matrix needs a small square matrix");
  const auto bits = e.mod2();
  GF2Matrix m(e.rows());
  for (int i = 0; i < e.rows(); ++i) {
    for (int j = 0; j < e.cols(); ++j) m.set(i, j, bits[static_cast<std::size_t>(i * e.cols() + j)] != 0);
  }
  return m;
}

void GF2Matrix::set(int i, int j, bool v) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw InputError("GF2Matrix index out of range");
  auto& r = rows_[static_cast<std::size_t>(i)];
  r = v ? (r | (1U << j)) : (r & ~(1U << j));
}

std::uint32_t GF2Matrix::apply(std::uint32_t v) const {
  std::uint32_t out = 0;
  for (int i = 0; i < n_; ++i) {
    if (std::bitset<32>(rows_[static_cast<std::size_t>(i)] & v).count() & 1U) out |= 1U << i;
  }
  return out;
}

GF2Matrix GF2Matrix::operator*(const GF2Matrix& rhs) const {
  if (n_ != rhs.n_) throw InputError("GF2Matrix size mismatch");
  GF2Matrix out(n_);
  for (int i = 0; i < n_; ++i) {
    std::uint32_t acc = 0;
    for (int k = 0; k < n_; ++k) {
      if (get(i, k)) acc ^= rhs.rows_[static_cast<std::size_t>(k)];
    }
    out.rows_[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

void GF2Matrix::set_block(int r0, int c0, const GF2Matrix& block) {
  for (int i = 0; i < block.size(); ++i) {
    for (int j = 0; j < block.size(); ++j) set(r0 + i, c0 + j, block.get(i, j));
  }
}

std::string GF2Matrix::str() const {
  std::string out;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) out += get(i, j) ? '1' : '0';
    out += '\n';
  }
  return out;
}

GF2Matrix gf2_power(const GF2Matrix& m, int k) {
  if (k < 0) throw InputError("negative power");
  GF2Matrix out = GF2Matrix::identity(m.size());
  for (int i = 0; i < k; ++i) out = out * m;
  return out;
}

GF2Matrix gf2_B() { return GF2Matrix::from_exact(matrix_B()); }

GF2Matrix gf2_M(int j) {
  GF2Matrix m(7);
  m.set_block(0, 3, GF2Matrix::identity(4));
  const GF2Matrix b = gf2_power(gf2_B(), j);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m.set(4 + r, c, b.get(r, c));
  }
  return m;
}

std::vector<std::uint32_t> gf2_V0() {
  std::vector<std::uint32_t> v;
  for (std::uint32_t bits = 0; bits < 8; ++bits) v.push_back(bits << 3);
  return v;
}

int b_period(int limit) {
  const GF2Matrix b = gf2_B();
  const GF2Matrix id = GF2Matrix::identity(3);
  GF2Matrix p = b;
  for (int k = 1; k <= limit; ++k) {
    if (p == id) return k;
    p = p * b;
  }
  return 0;
}

bool b_period_check() { return b_period() == 7; }

CoverageResult coverage(int i, int cap, CoverageLift lift) {
  if (i < 0 || cap <= i) throw InputError("coverage needs 0 <= i < cap");
  const auto mbar = [lift](int j) {
    if (lift == CoverageLift::BlockPower) return gf2_M(j);
    return GF2Matrix::from_exact(transition_matrix(phi_r(7 + j % 7)));
  };
  const std::vector<std::uint32_t> v0 = gf2_V0();
  std::bitset<128> seen;
  for (std::uint32_t v : v0) seen.set(v);
  GF2Matrix p = GF2Matrix::identity(7);
  CoverageResult res;
  res.residue = i;
  for (int j = i; j < cap; ++j) {
    p = p * mbar(j);
    for (std::uint32_t v : v0) seen.set(p.apply(v));
    res.j = j;
    if (seen.all()) {
      res.covered = true;
      break;
    }
  }
  res.reached = seen.count();
  return res;
}

int coverage_index(int i, int cap) {
  const CoverageResult res = coverage(i, cap);
  if (!res.covered) {
    throw LogicError("residue " + std::to_string(i) + " reached only " + std::to_string(res.reached) +
                     " vectors before the cap");
  }
  return res.j;
}

int consecutive_window(int cap) {
  std::vector<std::future<int>> jobs;
  for (int i = 0; i < 7; ++i) jobs.push_back(std::async(std::launch::async, coverage_index, i, cap));
  int worst = 0;
  for (auto& job : jobs) worst = std::max(worst, job.get());
  return 2 + worst;
}

std::string coverage_listing(int cap) {
  std::string out;
  for (int i = 0; i < 7; ++i) {
    const CoverageResult res = coverage(i, cap);
    out += std::to_string(i) + " " + std::to_string(res.j) + "\n";
  }
  return out;
}

}  // namespace foldseq
