#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foldseq/report.hpp"
#include "foldseq/seqgen.hpp"

namespace foldseq {

/// Inputs to one experiment. Unset optionals take the experiment's own default.
struct ExperimentConfig {
  std::string experiment;
  std::optional<RSequence> seq;                             // explicit sequence
  std::optional<std::pair<std::size_t, std::int64_t>> gen;  // (n, r_min) for seqgen::generate
  std::optional<double> tol;
  std::optional<double> eps;
  std::uint64_t seed = 1;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> i_max;
  std::optional<std::size_t> j_max;
  std::optional<std::size_t> m_max;
  std::optional<int> max_period;
  std::optional<int> max_len;
  std::string out;  // output directory, empty for none

  /// Flat "key = value" lines; '#' starts a comment; seq takes a JSON array, gen "n,rmin".
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);
  /// InputError for non-positive tolerances or an unknown experiment.
  void validate() const;
  /// Sequence from seq, else gen, else `fallback`.
  RSequence sequence(const RSequence& fallback) const;
};

const std::vector<std::string>& experiment_names();

/// Runs one experiment; the report's timestamp is left empty.
Report run(const std::string& name, const ExperimentConfig& cfg);

/// Writes <out>/<experiment>.json and <out>/<experiment>.csv; returns the JSON path.
std::string write_report(const Report& report, const std::string& out_dir, bool with_timestamp = true);

/// UTC time in ISO 8601.
std::string utc_timestamp();

}  // namespace foldseq
