#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "foldseq/errors.hpp"
#include "foldseq/experiments.hpp"

using namespace foldseq;

namespace {

struct Options {
  std::string config;
  std::string seq_file;
  std::string gen;
  std::optional<double> tol;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> i_max;
  std::optional<std::size_t> j_max;
  std::optional<std::size_t> m_max;
  std::optional<int> max_period;
  std::optional<int> max_len;
  std::string out;
  bool no_timestamp = false;
};

void add_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "flat key = value config file")->check(CLI::ExistingFile);
  auto* seq = sub->add_option("--seq", o.seq_file, "file holding a JSON integer array")->check(CLI::ExistingFile);
  sub->add_option("--gen", o.gen, "generate a sequence: n,rmin")->excludes(seq);
  sub->add_option("--tol", o.tol, "tolerance");
  sub->add_option("--eps", o.eps, "epsilon");
  sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--trials", o.trials, "random trials");
  sub->add_option("--i-max", o.i_max, "largest index");
  sub->add_option("--j-max", o.j_max, "inner index cap or span");
  sub->add_option("--m-max", o.m_max, "stage count");
  sub->add_option("--max-period", o.max_period, "INP period bound");
  sub->add_option("--max-len", o.max_len, "path length bound");
  sub->add_option("--out", o.out, "output directory");
  sub->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp field");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig build_config(const std::string& name, const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config);
  if (!cfg.experiment.empty() && cfg.experiment != name) {
    throw InputError("config is for experiment '" + cfg.experiment + "'");
  }
  cfg.experiment = name;
  if (!o.seq_file.empty()) {
    cfg.seq = RSequence::from_json(read_file(o.seq_file));
    cfg.gen.reset();
  }
  if (!o.gen.empty()) {
    cfg.gen = ExperimentConfig::parse("gen = " + o.gen).gen;
    cfg.seq.reset();
  }
  if (o.tol) cfg.tol = o.tol;
  if (o.eps) cfg.eps = o.eps;
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = o.trials;
  if (o.i_max) cfg.i_max = o.i_max;
  if (o.j_max) cfg.j_max = o.j_max;
  if (o.m_max) cfg.m_max = o.m_max;
  if (o.max_period) cfg.max_period = o.max_period;
  if (o.max_len) cfg.max_len = o.max_len;
  if (!o.out.empty()) cfg.out = o.out;
  if (cfg.out.empty()) cfg.out = "reports";
  return cfg;
}

int run_experiment(const std::string& name, const Options& o) {
  const ExperimentConfig cfg = build_config(name, o);
  Report rep = run(name, cfg);
  if (!o.no_timestamp) rep.timestamp = utc_timestamp();
  const std::string path = write_report(rep, cfg.out, !o.no_timestamp);
  if (name == "gf2") {
    std::cout << rep.params["listing"].get<std::string>();
  } else if (name == "gen-seq") {
    std::cout << rep.params["seq"].dump() << '\n';
  }
  for (const Assertion& a : rep.assertions) {
    std::cerr << (a.pass ? "PASS  " : "FAIL  ") << a.name << '\n';
  }
  std::cerr << "report: " << path << '\n';
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on folding sequences of free group automorphisms"};
  app.require_subcommand(1);
  Options opts;
  for (const std::string& name : experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    add_options(sub, opts);
  }
  std::string report_path;
  std::string golden_path;
  CLI::App* diff = app.add_subcommand("diff", "compare a report with a golden file, ignoring timestamp and versions");
  diff->add_option("report", report_path)->required()->check(CLI::ExistingFile);
  diff->add_option("golden", golden_path)->required()->check(CLI::ExistingFile);
  app.add_subcommand("list", "print the experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "list") {
      for (const std::string& n : experiment_names()) std::cout << n << '\n';
      return 0;
    }
    if (name == "diff") {
      std::vector<std::string> differences;
      const bool same = diff_golden(report_path, golden_path, &differences);
      for (const std::string& d : differences) std::cout << d << '\n';
      return same ? 0 : 1;
    }
    return run_experiment(name, opts);
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
