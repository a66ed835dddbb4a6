#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "foldseq/endomorphism.hpp"
#include "foldseq/errors.hpp"
#include "foldseq/experiments.hpp"
#include "foldseq/gf2cover.hpp"
#include "foldseq/seqgen.hpp"
#include "foldseq/specmat.hpp"
#include "foldseq/stallings.hpp"
#include "foldseq/traintrack.hpp"

namespace py = pybind11;
using namespace foldseq;

namespace {

// Exact entries go through strings so Python receives arbitrary-size ints.
py::list exact_to_list(const ExactMatrix& m) {
  py::list rows;
  py::object to_int = py::module_::import("builtins").attr("int");
  for (int i = 0; i < m.rows(); ++i) {
    py::list row;
    for (int j = 0; j < m.cols(); ++j) row.append(to_int(m(i, j).str()));
    rows.append(row);
  }
  return rows;
}

std::vector<Word> parse_words(const std::vector<std::string>& ws, int rank) {
  std::vector<Word> out;
  for (const auto& w : ws) out.push_back(Word::parse(w, rank));
  return out;
}

Endomorphism named_map(const std::string& name, int r) {
  if (name == "theta") return maps::theta();
  if (name == "vartheta") return maps::vartheta();
  if (name == "phi") return maps::phi();
  if (name == "rho") return maps::rho();
  if (name == "phi_r") return phi_r(r);
  if (name == "psi_r") return psi_r(r);
  throw InputError("unknown map: " + name);
}

}  // namespace

PYBIND11_MODULE(_foldseq, m) {
  m.doc() = "Free group maps, train tracks and matrix limits for folding sequences";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<LogicError>(m, "LogicError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("reduce", [](const std::string& w, int rank) { return Word::parse(w, rank).str(); }, py::arg("word"),
        py::arg("rank") = kDefaultRank);
  m.def("cyclic_reduce", [](const std::string& w, int rank) { return cyclic_reduce(Word::parse(w, rank)).word().str(); },
        py::arg("word"), py::arg("rank") = kDefaultRank);

  py::class_<Endomorphism>(m, "Endomorphism")
      .def_static("from_images", &Endomorphism::from_images, py::arg("images"), py::arg("rank"))
      .def_static("parse", &Endomorphism::parse, py::arg("text"), py::arg("rank") = kDefaultRank)
      .def_static("named", &named_map, py::arg("name"), py::arg("r") = 1)
      .def_property_readonly("rank", &Endomorphism::rank)
      .def("images", [](const Endomorphism& e) {
        std::vector<std::string> out;
        for (const Word& w : e.images()) out.push_back(w.str());
        return out;
      })
      .def("__call__", [](const Endomorphism& e, const std::string& w) { return apply(e, Word::parse(w, e.rank())).str(); })
      .def("__matmul__", [](const Endomorphism& a, const Endomorphism& b) { return compose(a, b); })
      .def("__pow__", [](const Endomorphism& e, int k) { return power(e, k); })
      .def("__eq__", [](const Endomorphism& a, const Endomorphism& b) { return a == b; })
      .def("__str__", &Endomorphism::str);

  m.def("phi_r", &phi_r, py::arg("r"));
  m.def("psi_r", &psi_r, py::arg("r"));
  m.def("transition_matrix", [](const Endomorphism& e) { return exact_to_list(transition_matrix(e)); });
  m.def("matrix_M", [](std::int64_t r) { return exact_to_list(matrix_M(r)); });
  m.def("matrix_N", [](std::int64_t r) { return exact_to_list(matrix_N(r)); });
  m.def("lambda_B", [] { return pf_B().eigenvalue; });
  m.def("lambda_C", [] { return pf_C().eigenvalue; });
  m.def("kappa_B", &kappa_B);
  m.def("kappa_C", &kappa_C);

  m.def("gates", [](const Endomorphism& e) { return gates_from_map(e).str(); });
  m.def(
      "is_train_track",
      [](const Endomorphism& e, const std::string& gates) {
        const TrainTrackCertificate c =
            gates.empty() ? is_train_track(e) : is_train_track(e, TrainTrackStructure::parse(gates, e.rank()));
        return py::make_tuple(c.ok, c.violations);
      },
      py::arg("map"), py::arg("gates") = "");
  m.def("count_illegal_turns",
        [](const std::string& w, const std::string& gates, int rank) {
          return count_illegal_turns(Word::parse(w, rank), TrainTrackStructure::parse(gates, rank));
        },
        py::arg("word"), py::arg("gates"), py::arg("rank") = kDefaultRank);
  m.def("find_periodic_inps",
        [](const Endomorphism& e, int max_period, int max_len) {
          std::vector<std::string> out;
          for (const PeriodicINP& p : find_periodic_inps(e, max_period, max_len)) out.push_back(p.to_json());
          return out;
        },
        py::arg("map"), py::arg("max_period") = 10, py::arg("max_len") = 40);
  m.def("estimate_R",
        [](const Endomorphism& e, int max_len) {
          const REstimate r = estimate_R(e, max_len);
          return py::make_tuple(r.R, r.paths, r.worst.str());
        },
        py::arg("map"), py::arg("max_len"));

  m.def("contains",
        [](const std::vector<std::string>& gens, const std::string& w, int rank) {
          return contains(subgroup_graph(parse_words(gens, rank), rank), Word::parse(w, rank));
        },
        py::arg("generators"), py::arg("word"), py::arg("rank") = kDefaultRank);
  m.def("equal_subgroups",
        [](const std::vector<std::string>& g1, const std::vector<std::string>& g2, int rank) {
          return equal_subgroups(subgroup_graph(parse_words(g1, rank), rank), subgroup_graph(parse_words(g2, rank), rank));
        },
        py::arg("gens1"), py::arg("gens2"), py::arg("rank") = kDefaultRank);

  m.def("b_period", &b_period, py::arg("limit") = 64);
  m.def("coverage_index", &coverage_index, py::arg("i"), py::arg("cap") = 200);
  m.def("coverage_listing", &coverage_listing, py::arg("cap") = 200);

  m.def("generate", [](std::size_t n, std::int64_t r_min) { return generate(n, r_min).values(); }, py::arg("n"),
        py::arg("r_min"));
  m.def("validate",
        [](const std::vector<std::int64_t>& seq) {
          std::vector<py::tuple> out;
          for (const Violation& v : validate(RSequence(seq))) out.push_back(py::make_tuple(v.index, v.rule, v.message));
          return out;
        },
        py::arg("seq"));

  m.def("experiment_names", &experiment_names);
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& config) {
        ExperimentConfig cfg = ExperimentConfig::parse(config);
        return run(name, cfg).json_text(false);
      },
      py::arg("name"), py::arg("config") = "");
  m.def("diff_golden",
        [](const std::string& a, const std::string& b) {
          std::vector<std::string> d;
          const bool same = diff_golden(a, b, &d);
          return py::make_tuple(same, d);
        },
        py::arg("report"), py::arg("golden"));
}
