#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "foldseq/specmat.hpp"

namespace foldseq {

/// Square matrix over GF(2), one bitmask per row; bit k of a vector is coordinate k.
class GF2Matrix {
 public:
  GF2Matrix() = default;
  explicit GF2Matrix(int n) : n_(n), rows_(static_cast<std::size_t>(n), 0) {}
  GF2Matrix(std::initializer_list<std::initializer_list<int>> rows);

  static GF2Matrix identity(int n);
  /// Entrywise reduction of a nonnegative square integer matrix.
  static GF2Matrix from_exact(const ExactMatrix& m);

  int size() const { return n_; }
  bool get(int i, int j) const { return (rows_[static_cast<std::size_t>(i)] >> j) & 1U; }
  void set(int i, int j, bool v);
  std::uint32_t row(int i) const { return rows_[static_cast<std::size_t>(i)]; }

  GF2Matrix operator*(const GF2Matrix& rhs) const;
  std::uint32_t apply(std::uint32_t v) const;
  /// Copies `block` into rows [r0, ..) and columns [c0, ..).
  void set_block(int r0, int c0, const GF2Matrix& block);
  std::string str() const;

  friend bool operator==(const GF2Matrix&, const GF2Matrix&) = default;

 private:
  int n_ = 0;
  std::vector<std::uint32_t> rows_;
};

GF2Matrix gf2_power(const GF2Matrix& m, int k);

/// B reduced mod 2.
GF2Matrix gf2_B();
/// 7x7 block matrix [[0, I4], [B^j, 0]] over GF(2).
GF2Matrix gf2_M(int j);
/// The 8 vectors (0,0,0,x,y,z,0).
std::vector<std::uint32_t> gf2_V0();

/// B^7 = I mod 2 and no smaller positive power is the identity.
bool b_period_check();
/// Smallest k >= 1 with B^k = I mod 2, or 0 if none up to `limit`.
int b_period(int limit = 64);

struct CoverageResult {
  int residue = 0;
  int j = 0;                 // absolute loop index at which coverage completed (or cap - 1)
  bool covered = false;
  std::size_t reached = 0;   // size of the vector set at exit
};

enum class CoverageLift {
  BlockPower,  // B^j blocks as in the hand computation
  Family,      // transition_matrix(phi_r) mod 2 with r = j mod 7, r >= 1
};

/// Products Mbar_i, Mbar_i Mbar_{i+1}, ... applied to V0 until all 2^7 vectors appear.
CoverageResult coverage(int i, int cap = 200, CoverageLift lift = CoverageLift::BlockPower);
/// coverage(i, cap).j; LogicError if the cap is reached first.
int coverage_index(int i, int cap = 200);
/// 2 + max over residues 0..6 of coverage_index.
int consecutive_window(int cap = 200);
/// One "i j" line per residue.
std::string coverage_listing(int cap = 200);

}  // namespace foldseq
