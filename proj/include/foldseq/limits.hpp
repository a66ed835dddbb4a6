#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "foldseq/seqgen.hpp"
#include "foldseq/specmat.hpp"
#include "foldseq/word.hpp"

namespace foldseq {

/// l1-normalized nonnegative vector; InputError for zero, negative or non-finite input.
Eigen::VectorXd projective_normalize(const Eigen::VectorXd& v);
/// l-infinity distance between l1-normalized representatives.
double projective_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// [v_B] placed in coordinates 2,3,4 and 5,6,7 (1-based).
Eigen::VectorXd v_B_234();
Eigen::VectorXd v_B_567();

/// [M_ij e_k] for k = 1..7 with M_ij = M_{r_i} ... M_{r_j}; needs 1 <= i <= j <= |seq|.
std::vector<Eigen::VectorXd> vertex_images(const RSequence& seq, std::size_t i, std::size_t j);

struct SimplexEndpoints {
  Eigen::VectorXd p;          // [Y_i e1]
  Eigen::VectorXd q;          // [M_{r_i} Y_{i+1} e1]
  double separation = 0.0;    // d(p, q)
  bool converged = false;     // both Y_i and Y_{i+1} reached tolerance
};

/// LogicError if p and q are within tol of each other.
SimplexEndpoints simplex_endpoints(const RSequence& seq, std::size_t i, double tol = 1e-9);

struct CollapseRow {
  std::size_t j = 0;
  std::vector<double> to_p;   // d([M_ij e_k], p) per k
  std::vector<double> to_q;
  double max_min = 0.0;       // max over k of min(to_p, to_q)
};

struct CollapseTable {
  std::size_t i = 0;
  SimplexEndpoints ends;
  std::vector<CollapseRow> rows;
  std::optional<std::size_t> first_within;  // first j with max_min <= eps
};

CollapseTable simplex_collapse_table(const RSequence& seq, std::size_t i, std::size_t j_max, double eps);

/// l_i = M_{r_i}^T ... M_{r_1}^T l0; i = 0 gives l0.
ScaledVector length_vector(const RSequence& seq, const Eigen::VectorXd& l0, std::size_t i);

struct VolumeRow {
  std::size_t i = 0;
  double log_volume = 0.0;
  double ratio = 0.0;          // vol_i / vol_{i-3}; 0 for i < 3
  std::string min_row_sum;     // exact min row sum of N_{r_i} N_{r_{i-1}} N_{r_{i-2}}, empty for i < 3
  bool pass = true;
};

struct VolumeDecay {
  std::vector<VolumeRow> rows;
  bool all_pass = true;
};

/// Pulls the terminal length vector at index i_max back by lambda_{i-1} = N_{r_i}^T lambda_i
/// and tabulates volumes with the exact halving certificate.
VolumeDecay volume_decay(const RSequence& seq, const Eigen::VectorXd& terminal, std::size_t i_max);

/// Sum of edge lengths along w.
double translation_length(const CyclicWord& w, const Eigen::VectorXd& lengths);
/// Letter-count vector of w as doubles.
Eigen::VectorXd edge_vector(const CyclicWord& w, int rank = kDefaultRank);

/// Legal cyclic words of length <= 3 in the phi structure, one per rotation class.
std::vector<CyclicWord> enumerate_W3();

struct LegalityIndex {
  std::size_t i_x = 0;
  CyclicWord word;             // x in the edges of tau'_{i_x}
  Eigen::VectorXd v_x;
};

/// Smallest i with psi_{r_i} ... psi_{r_1}(x) legal in the psi structure.
/// LogicError when the cap 3 * (initial illegal turns) + 9 is exhausted.
LegalityIndex legality_index(const RSequence& seq, const CyclicWord& x);

struct StageValue {
  std::size_t stage = 0;
  double log_value = 0.0;      // log of ||x|| at (tau_n, l_n / c_n)
};

struct TreeLengthPair {
  LegalityIndex legal;
  std::vector<StageValue> even;  // n = 2m for each requested m
  std::vector<StageValue> odd;   // n = 2m + 1
  double log_limit_even = 0.0;   // closed form with Z-approximants
  double log_limit_odd = 0.0;
};

/// Stage values up to m_max directly from the M and N products, and the closed-form limits.
TreeLengthPair tree_length_pair(const RSequence& seq, const Eigen::VectorXd& l0, const CyclicWord& x, std::size_t m_max);

/// log c_n and log of the c_x constants for a legality index.
double log_c_stage(const RSequence& seq, std::size_t n);
std::pair<double, double> log_c_x(const RSequence& seq, std::size_t i_x);

/// l_e^T = l^T Y_1 and l_o^T = l^T (M_{r_1} / lambda_B^{r_1}) Y_2.
std::pair<Eigen::VectorXd, Eigen::VectorXd> limit_lengths(const RSequence& seq, const Eigen::VectorXd& l0);

/// log ||x||_{T_e}, log ||x||_{T_o} for x legal at i_x with vector v.
std::pair<double, double> log_tree_lengths(const RSequence& seq, const Eigen::VectorXd& l0, std::size_t i_x,
                                           const Eigen::VectorXd& v);

struct RatioRow {
  std::size_t i = 0;
  double log10_alpha = 0.0;    // log10 ||alpha_i||_{T_o} / ||alpha_i||_{T_e}
  double log10_beta = 0.0;
  double log10_c_alpha = 0.0;  // log10 c^e / c^o for alpha_i
  double log10_c_beta = 0.0;
};

struct RatioExperiment {
  std::vector<RatioRow> rows;
  double A = 0.0;              // l_e^T Z N_inf e5
  double B = 0.0;              // l_o^T Z N_inf e5
  double vanishing = 0.0;      // l_e^T Z e5
  bool alpha_increasing = false;
  bool beta_decreasing = false;
};

/// alpha_i = Phi_{2i}(e), beta_i = Phi_{2i+1}(e) for i = 1..i_max.
RatioExperiment ratio_experiment(const RSequence& seq, const Eigen::VectorXd& l0, std::size_t i_max);

}  // namespace foldseq
