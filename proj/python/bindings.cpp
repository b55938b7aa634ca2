#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mscluster/corpus.hpp"
#include "mscluster/diffusion.hpp"
#include "mscluster/evalmetrics.hpp"
#include "mscluster/louvain.hpp"
#include "mscluster/pipeline.hpp"
#include "mscluster/scan.hpp"
#include "mscluster/simgraph.hpp"
#include "mscluster/vectors.hpp"

namespace py = pybind11;
using namespace mscluster;

namespace {

VectorSet dense_vectors(const Eigen::MatrixXd& x, std::vector<std::string> ids) {
    if (ids.empty()) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) ids.push_back(std::to_string(i));
    }
    return VectorSet(std::move(ids), x, VectorProvenance::imported);
}

// Accepts a Partition or any sequence of hashable labels.
Partition as_partition(const py::handle& obj) {
    if (py::isinstance<Partition>(obj)) return obj.cast<Partition>();
    std::vector<std::string> labels;
    for (const auto& item : obj) labels.push_back(py::str(item).cast<std::string>());
    return make_labelling(labels).partition;
}

py::dict level_dict(const RobustLevel& l) {
    py::dict d;
    d["index"] = l.index;
    d["t"] = l.t;
    d["num_clusters"] = l.num_clusters;
    d["stability"] = l.stability;
    d["vi_ensemble"] = l.vi_ensemble;
    d["plateau_begin"] = l.plateau_begin;
    d["plateau_end"] = l.plateau_end;
    d["plateau_decades"] = l.plateau_decades;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multiscale document clustering with Markov Stability";
    m.attr("__version__") = "0.1.0";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const ParseError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        }
    });

    py::class_<Document>(m, "Document")
        .def(py::init<>())
        .def_readwrite("id", &Document::id)
        .def_readwrite("raw_text", &Document::raw_text)
        .def_readwrite("tokens", &Document::tokens)
        .def_readwrite("category", &Document::category)
        .def("__repr__", [](const Document& d) { return "<Document " + d.id + ">"; });

    py::class_<StopWords>(m, "StopWords")
        .def_static("builtin", &StopWords::builtin, py::return_value_policy::copy)
        .def_static("from_words", [](const std::vector<std::string>& w) { return StopWords::from_words(w); })
        .def_static("load", &StopWords::load)
        .def("__contains__", &StopWords::contains)
        .def_property_readonly("version", &StopWords::version)
        .def_property_readonly("words", [](const StopWords& s) {
            return std::vector<std::string>(s.words().begin(), s.words().end());
        });

    m.def("tokenize", &tokenize, py::arg("text"));
    m.def(
        "preprocess",
        [](const std::string& text, const StopWords* sw) { return preprocess(text, sw ? *sw : StopWords::builtin()); },
        py::arg("text"), py::arg("stopwords") = nullptr);
    m.def(
        "ingest",
        [](const std::string& jsonl, const StopWords* sw) {
            std::istringstream in(jsonl);
            return ingest(in, sw ? *sw : StopWords::builtin()).documents;
        },
        py::arg("jsonl"), py::arg("stopwords") = nullptr, "Parse JSONL text into preprocessed documents");
    m.def(
        "ingest_file",
        [](const std::filesystem::path& path, const StopWords* sw) {
            return ingest_file(path, sw ? *sw : StopWords::builtin()).documents;
        },
        py::arg("path"), py::arg("stopwords") = nullptr);

    m.def(
        "tfidf",
        [](const std::vector<Document>& docs) {
            const VectorSet vs = tfidf_vectorize(docs);
            return py::make_tuple(vs.vocabulary, vs.to_dense());
        },
        py::arg("documents"), "TF-iDF matrix (documents x vocabulary) and its vocabulary");

    m.def(
        "cosine_similarity",
        [](const Eigen::MatrixXd& x) {
            const SimilarityMatrix sm = cosine_similarity_matrix(dense_vectors(x, {}));
            return py::make_tuple(sm.similarity, sm.max_distance);
        },
        py::arg("vectors"), "Normalised similarity matrix and the maximum cosine distance");

    m.def(
        "build_mst_knn",
        [](const Eigen::MatrixXd& x, std::size_t k) {
            const SimilarityGraph g = build_mst_knn(cosine_similarity_matrix(dense_vectors(x, {})), k);
            py::list edges;
            for (const auto& e : g.edges()) edges.append(py::make_tuple(e.u, e.v, e.weight, to_string(e.source)));
            return py::make_tuple(g.dense_adjacency(), edges);
        },
        py::arg("vectors"), py::arg("k"), "MST-kNN graph: dense adjacency and (u, v, weight, source) edges");

    py::class_<Partition>(m, "Partition")
        .def(py::init<const std::vector<int>&>(), py::arg("labels"))
        .def_static("singletons", &Partition::singletons)
        .def_static("all_in_one", &Partition::all_in_one)
        .def_property_readonly("assignment", &Partition::assignment)
        .def_property_readonly("num_clusters", &Partition::num_clusters)
        .def_property_readonly("sizes", &Partition::cluster_sizes)
        .def_readwrite("markov_time", &Partition::markov_time)
        .def_readwrite("stability", &Partition::stability)
        .def("__len__", &Partition::size)
        .def("__getitem__", [](const Partition& p, std::size_t i) {
            if (i >= p.size()) throw py::index_error();
            return p[i];
        })
        .def("__eq__", &Partition::operator==)
        .def("__repr__", [](const Partition& p) {
            return "<Partition N=" + std::to_string(p.size()) + " C=" + std::to_string(p.num_clusters()) + ">";
        });

    py::class_<DiffusionOperator>(m, "DiffusionOperator")
        .def(py::init([](const Eigen::MatrixXd& a, const std::string& method) {
                 OperatorOptions o;
                 if (method == "spectral") o.method = KernelMethod::spectral;
                 else if (method == "action") o.method = KernelMethod::action;
                 else if (method != "auto") throw ValidationError("method must be auto, spectral or action");
                 return DiffusionOperator(Eigen::SparseMatrix<double>(a.sparseView()), o);
             }),
             py::arg("adjacency"), py::arg("method") = "auto")
        .def("__len__", &DiffusionOperator::size)
        .def_property_readonly("stationary", &DiffusionOperator::stationary)
        .def_property_readonly("eigenvalues", &DiffusionOperator::eigenvalues)
        .def("transition_matrix", &DiffusionOperator::transition_matrix, py::arg("t"))
        .def("quality_matrix", &DiffusionOperator::quality_matrix, py::arg("t"))
        .def("clustered_autocovariance", &DiffusionOperator::clustered_autocovariance, py::arg("partition"), py::arg("t"))
        .def("stability", &DiffusionOperator::stability, py::arg("partition"), py::arg("t"));

    m.def(
        "louvain",
        [](const DiffusionOperator& op, double t, std::uint64_t seed) { return louvain_optimize(op, t, seed); },
        py::arg("op"), py::arg("t"), py::arg("seed") = 0);

    m.def("log_time_grid", &log_time_grid, py::arg("t_min"), py::arg("t_max"), py::arg("points"));

    py::class_<ScanResult>(m, "ScanResult")
        .def_property_readonly("times", &ScanResult::times)
        .def_property_readonly("partitions", [](const ScanResult& sr) {
            std::vector<Partition> out;
            for (const auto& p : sr.points) out.push_back(p.optimum);
            return out;
        })
        .def_property_readonly("stability", [](const ScanResult& sr) {
            std::vector<double> out;
            for (const auto& p : sr.points) out.push_back(p.stability);
            return out;
        })
        .def_property_readonly("vi_ensemble", [](const ScanResult& sr) {
            std::vector<double> out;
            for (const auto& p : sr.points) out.push_back(p.vi_ensemble);
            return out;
        })
        .def_property_readonly("num_clusters", [](const ScanResult& sr) {
            std::vector<int> out;
            for (const auto& p : sr.points) out.push_back(p.optimum.num_clusters());
            return out;
        })
        .def_readonly("vi_matrix", &ScanResult::vi_matrix)
        .def("__len__", &ScanResult::size)
        .def(
            "save", [](const ScanResult& sr, const std::filesystem::path& dir) { save_scan(sr, dir); }, py::arg("dir"));

    m.def(
        "scan",
        [](const DiffusionOperator& op, std::vector<double> times, std::size_t runs, std::size_t top_m,
           std::uint64_t seed, unsigned threads) {
            ScanOptions o;
            o.times = std::move(times);
            o.runs = runs;
            o.top_m = top_m;
            o.seed = seed;
            o.threads = threads;
            py::gil_scoped_release release;
            return scan(op, o);
        },
        py::arg("op"), py::arg("times"), py::arg("runs") = 500, py::arg("top_m") = 50, py::arg("seed") = 0,
        py::arg("threads") = 0);
    m.def("load_scan", &load_scan, py::arg("dir"));

    m.def(
        "select_robust",
        [](const ScanResult& sr, std::optional<double> eps, double span, double quantile) {
            SelectOptions o;
            o.plateau_eps = eps;
            o.min_plateau_decades = span;
            o.vi_dip_quantile = quantile;
            py::list out;
            for (const auto& l : select_robust(sr, o)) out.append(level_dict(l));
            return out;
        },
        py::arg("scan"), py::arg("plateau_eps") = py::none(), py::arg("plateau_span") = 0.5,
        py::arg("vi_quantile") = 0.5);

    m.def(
        "variation_of_information",
        [](const py::object& a, const py::object& b) {
            const auto v = variation_of_information(as_partition(a), as_partition(b));
            return py::make_tuple(v.vi, v.normalized);
        },
        py::arg("a"), py::arg("b"), "VI (natural log) and VI / log N");
    m.def(
        "nmi", [](const py::object& a, const py::object& b) { return nmi(as_partition(a), as_partition(b)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "zscore_contingency",
        [](const py::object& a, const py::object& b) {
            const Contingency c = zscore_contingency(as_partition(a), as_partition(b));
            py::dict d;
            d["counts"] = c.counts;
            d["expected"] = c.expected;
            d["z"] = c.z;
            d["zero_variance"] = Eigen::MatrixXi(c.zero_variance.cast<int>());
            return d;
        },
        py::arg("clusters"), py::arg("labels"));
    m.def(
        "partition_pmi",
        [](const Partition& p, const std::vector<Document>& docs, std::size_t top) {
            const WordStats stats(docs);
            return partition_pmi(p, docs, stats, top);
        },
        py::arg("partition"), py::arg("documents"), py::arg("top_words") = 10);

    m.def(
        "sankey",
        [](const std::vector<Partition>& levels, const std::optional<std::vector<std::string>>& labels) {
            std::optional<Labelling> lab;
            if (labels) lab = make_labelling(*labels);
            return sankey_json(export_sankey(levels, {}, lab ? &*lab : nullptr));
        },
        py::arg("levels"), py::arg("labels") = py::none(), "Sankey flow table as JSON text");

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& config, const std::map<std::string, std::string>& overrides) {
            PipelineConfig cfg = load_config(config);
            for (const auto& [k, v] : overrides) cfg.set(k, v, std::filesystem::current_path());
            std::vector<StageStatus> status;
            {
                py::gil_scoped_release release;
                status = run_pipeline(cfg);
            }
            py::list out;
            for (const auto& s : status) out.append(py::make_tuple(s.name, s.skipped));
            return out;
        },
        py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{},
        "Run the full pipeline; returns (stage, skipped) pairs");
}
