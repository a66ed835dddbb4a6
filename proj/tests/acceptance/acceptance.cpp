// One line per acceptance criterion. Exit status is nonzero when a criterion fails,
// except criterion 6, which is known to be unattainable and must fail.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "foldseq/experiments.hpp"
#include "foldseq/gf2cover.hpp"
#include "foldseq/report.hpp"

using namespace foldseq;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr double kCollapseEps = 1e-6;
constexpr double kCrudeSlack = 1e-9;
constexpr double kVanishTol = 1e-8;
constexpr std::size_t kTrials = 1000;
const std::set<int> kUnattainable = {6};

struct Timed {
  Report report;
  double seconds = 0.0;
};

Timed timed_run(const std::string& name, const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Report r = run(name, cfg);
  return {std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

const Assertion* find(const Report& r, const std::string& name) {
  for (const Assertion& a : r.assertions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

bool all_pass(const Report& r, const std::vector<std::string>& names, std::string& detail) {
  bool ok = true;
  for (const std::string& n : names) {
    const Assertion* a = find(r, n);
    if (!a) {
      detail += " missing:" + n;
      ok = false;
    } else if (!a->pass) {
      detail += " failed:" + n + " " + a->details.dump();
      ok = false;
    }
  }
  return ok;
}

}  // namespace

int main() {
  ExperimentConfig base;
  base.seed = kSeed;

  ExperimentConfig simplex_cfg = base;
  simplex_cfg.eps = kCollapseEps;
  simplex_cfg.j_max = 14;
  simplex_cfg.i_max = 12;

  ExperimentConfig volume_cfg = base;
  volume_cfg.i_max = 30;

  ExperimentConfig ratio_cfg = base;
  ratio_cfg.i_max = 12;
  ratio_cfg.tol = kVanishTol;

  ExperimentConfig conv_cfg = base;
  conv_cfg.i_max = 12;  // (15, 30, ..., 180)
  conv_cfg.tol = kCrudeSlack;
  conv_cfg.trials = kTrials;

  ExperimentConfig inp_cfg = base;
  inp_cfg.max_period = 10;
  inp_cfg.max_len = 40;

  const Timed tt = timed_run("tt-check", base);
  const Timed inp = timed_run("inp", inp_cfg);
  const auto g0 = std::chrono::steady_clock::now();
  const std::string listing = coverage_listing();
  const Timed gf2 = timed_run("gf2", base);
  const double gf2_seconds = gf2.seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - g0).count();
  const Timed factors = timed_run("factors", base);
  const Timed conv = timed_run("convergence", conv_cfg);
  const Timed simplex = timed_run("simplex", simplex_cfg);
  const Timed volume = timed_run("volume", volume_cfg);
  const Timed ratio = timed_run("ratio", ratio_cfg);

  struct Line {
    int id;
    std::string name;
    double budget;
    std::function<bool(std::string&, double&)> check;
  };

  const std::vector<Line> lines = {
      {1, "transition fidelity", 1.0,
       [&](std::string& d, double& s) {
         s = tt.seconds;
         return all_pass(tt.report, {"transition matrix of theta", "transition matrix of vartheta", "block forms of M_r and N_r"}, d);
       }},
      {2, "train track certification", 1.0,
       [&](std::string& d, double& s) {
         s = tt.seconds;
         return all_pass(tt.report, {"phi_r train track gates", "psi_r train track gates", "direction maps have period three"}, d);
       }},
      {3, "INP search", 60.0,
       [&](std::string& d, double& s) {
         s = inp.seconds;
         const bool ok = all_pass(inp.report, {"vartheta has no periodic INPs", "theta has a periodic Nielsen path"}, d);
         d += " theta_inps=" + find(inp.report, "theta has a periodic Nielsen path")->details["found"].dump();
         return ok;
       }},
      {4, "GF(2) coverage", 5.0,
       [&](std::string& d, double& s) {
         s = gf2_seconds;
         const std::string expected = "0 107\n1 107\n2 107\n3 107\n4 107\n5 107\n6 107\n";
         const bool same = listing == expected;
         if (!same) d += " listing differs";
         return all_pass(gf2.report, {"B has order 7 mod 2", "coverage index 107 for every residue"}, d) && same;
       }},
      {5, "free-factor identities", 10.0,
       [&](std::string& d, double& s) {
         s = factors.seconds;
         d += " triples=" + std::to_string(factors.report.rows.size());
         return all_pass(factors.report, {"free factor identities"}, d) && factors.report.rows.size() >= 3;
       }},
      {6, "error-bound lemma", 10.0,
       [&](std::string& d, double& s) {
         s = conv.seconds;
         const Assertion* a = find(conv.report, "error bound holds from some index on");
         const Assertion* b = find(conv.report, "crude pair-product bound");
         d += " eventual=" + a->details.dump() + " crude=" + b->details.dump();
         return a->pass && b->pass;
       }},
      {7, "simplex collapse", 60.0,
       [&](std::string& d, double& s) {
         s = simplex.seconds;
         return all_pass(simplex.report,
                         {"vertex images collapse onto two points", "endpoints are distinct",
                          "endpoints converge to the eigenvector pair"},
                         d);
       }},
      {8, "idempotent checks", 5.0,
       [&](std::string& d, double& s) {
         s = conv.seconds;
         return all_pass(conv.report, {"Y and Z are idempotent", "kernel of Y lies in the kernel of Y_i"}, d);
       }},
      {9, "volume decay", 10.0,
       [&](std::string& d, double& s) {
         s = volume.seconds;
         return all_pass(volume.report, {"volume at most halves every three steps", "integer halving certificate"}, d);
       }},
      {10, "ratio divergence", 120.0,
       [&](std::string& d, double& s) {
         s = ratio.seconds;
         return all_pass(ratio.report,
                         {"alpha ratios increase past 10^3", "beta ratios decrease below 10^-3", "supporting limits",
                          "ratio trends independent of l0"},
                         d);
       }},
      {11, "convergence lemma", 60.0,
       [&](std::string& d, double& s) {
         s = conv.seconds;
         return all_pass(conv.report,
                         {"random perturbed products converge near Y (eps 0.05)",
                          "random perturbed products converge near Y (eps 0.1)"},
                         d);
       }},
      {12, "determinism", 1e9,
       [&](std::string& d, double& s) {
         const auto t0 = std::chrono::steady_clock::now();
         const auto dir = std::filesystem::temp_directory_path() / "foldseq_acceptance";
         bool ok = true;
         for (const std::string& name : experiment_names()) {
           ExperimentConfig cfg = base;
           if (name == "convergence") cfg.trials = 50;
           const Report a = run(name, cfg);
           Report b = run(name, cfg);
           b.timestamp = utc_timestamp();
           const std::string pa = write_report(a, (dir / "a").string(), false);
           const std::string pb = write_report(b, (dir / "b").string(), true);
           if (a.json_text(false) != b.json_text(false) || !diff_golden(pa, pb)) {
             d += " differs:" + name;
             ok = false;
           }
         }
         s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
         return ok;
       }},
  };

  int unexpected = 0;
  for (const Line& l : lines) {
    std::string detail;
    double seconds = 0.0;
    bool pass = false;
    try {
      pass = l.check(detail, seconds);
    } catch (const std::exception& e) {
      detail += std::string(" exception: ") + e.what();
    }
    const bool in_budget = seconds < l.budget;
    if (!in_budget) detail += " over budget";
    pass = pass && in_budget;
    const bool known = kUnattainable.count(l.id) > 0;
    std::printf("criterion %2d %-26s %s  %.3fs%s%s\n", l.id, l.name.c_str(), pass ? "PASS" : "FAIL", seconds,
                known ? "  [known unattainable]" : "", detail.c_str());
    if (pass == known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
