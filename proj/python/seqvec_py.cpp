#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "seqvec/align.hpp"
#include "seqvec/classify.hpp"
#include "seqvec/embedding.hpp"
#include "seqvec/error.hpp"
#include "seqvec/io.hpp"
#include "seqvec/knn.hpp"
#include "seqvec/sequences.hpp"
#include "seqvec/tokenizer.hpp"

namespace py = pybind11;
using namespace seqvec;

namespace {

template <class T>
py::array_t<T> to_numpy(const Matrix<T>& m) {
  py::array_t<T> out({m.rows(), m.cols()});
  auto buf = out.template mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) buf(r, c) = m(r, c);
  return out;
}

Matrix<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ConfigError("expected a 2-D array");
  Matrix<double> m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  auto buf = a.unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = buf(r, c);
  return m;
}

py::dict summary_dict(const Summary& s) {
  py::dict d;
  d["mean"] = s.mean;
  d["std"] = s.std;
  d["n"] = s.n;
  return d;
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["specificity"] = summary_dict(r.specificity);
  d["sensitivity"] = summary_dict(r.sensitivity);
  d["accuracy"] = summary_dict(r.accuracy);
  d["precision"] = summary_dict(r.precision);
  d["folds"] = r.folds;
  d["warnings"] = r.warnings;
  return d;
}

LabeledDataset make_dataset(const std::vector<std::string>& ids, const py::array_t<double>& vectors,
                            const std::map<std::string, std::string>& labels) {
  return LabeledDataset::from_vectors(ids, from_numpy(vectors), labels);
}

}  // namespace

PYBIND11_MODULE(_seqvec, m) {
  m.doc() = "Sequence embeddings over kmer tokens with kNN, SVM and alignment evaluation";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SequenceRecord>(m, "SequenceRecord")
      .def(py::init([](std::string id, std::string residues, std::optional<std::string> family) {
             return SequenceRecord{std::move(id), "", std::move(residues), std::move(family)};
           }),
           py::arg("id"), py::arg("residues"), py::arg("family") = py::none())
      .def_readwrite("id", &SequenceRecord::id)
      .def_readwrite("description", &SequenceRecord::description)
      .def_readwrite("residues", &SequenceRecord::residues)
      .def_readwrite("family", &SequenceRecord::family)
      .def("__repr__", [](const SequenceRecord& r) { return "<SequenceRecord " + r.id + ">"; });

  m.def(
      "parse_fasta",
      [](const std::string& text, const std::string& alphabet, bool replace) {
        return parse_fasta(text, Alphabet::named(alphabet), replace ? CharPolicy::Replace : CharPolicy::Strict);
      },
      py::arg("text"), py::arg("alphabet") = "protein", py::arg("replace") = false);
  m.def(
      "load_family_labels", [](const std::string& text) { return load_family_labels(text).by_id; },
      py::arg("text"));

  m.def("kmers_overlapping", &kmers_overlapping, py::arg("residues"), py::arg("k"));
  m.def("kmers_nonoverlapping", &kmers_nonoverlapping, py::arg("residues"), py::arg("k"));

  py::class_<Corpus>(m, "Corpus")
      .def_property_readonly("k", [](const Corpus& c) { return c.config.k; })
      .def_property_readonly("mode", [](const Corpus& c) { return std::string(to_string(c.config.mode)); })
      .def_property_readonly("vocabulary", [](const Corpus& c) {
        return std::vector<std::string>(c.vocab.tokens().begin(), c.vocab.tokens().end());
      })
      .def_property_readonly("counts", [](const Corpus& c) {
        return std::vector<std::uint64_t>(c.vocab.counts().begin(), c.vocab.counts().end());
      })
      .def_readonly("sequence_ids", &Corpus::sequence_ids)
      .def_readonly("skipped", &Corpus::skipped)
      .def_property_readonly("documents", [](const Corpus& c) {
        py::list out;
        for (const auto& d : c.docs) out.append(py::make_tuple(d.doc_tag, d.phase, d.tokens));
        return out;
      });

  m.def(
      "build_corpus",
      [](const std::vector<SequenceRecord>& records, std::size_t k, const std::string& mode, std::uint64_t min_count) {
        return build_corpus(records, TokenizerConfig{k, parse_token_mode(mode)}, min_count);
      },
      py::arg("records"), py::arg("k") = 3, py::arg("mode") = "nonoverlap", py::arg("min_count") = 1);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](const std::string& arch, std::size_t dim, std::size_t window, const std::string& objective,
                       std::size_t negatives, double subsample, std::size_t epochs, double alpha,
                       std::uint64_t seed, std::size_t workers) {
             TrainConfig c;
             c.architecture = parse_architecture(arch);
             c.dim = dim;
             c.window = window;
             if (objective == "hs")
               c.objective = ObjectiveKind::HierarchicalSoftmax;
             else if (objective != "ns")
               throw ConfigError("objective must be 'ns' or 'hs'");
             c.negatives = negatives;
             c.subsample = subsample;
             c.epochs = epochs;
             c.alpha0 = alpha;
             c.alpha_min = alpha / 10000.0;
             c.seed = seed;
             c.workers = workers;
             c.validate();
             return c;
           }),
           py::arg("arch") = "dm", py::arg("dim") = 250, py::arg("window") = 5, py::arg("objective") = "ns",
           py::arg("negatives") = 5, py::arg("subsample") = 0.0, py::arg("epochs") = 20, py::arg("alpha") = 0.025,
           py::arg("seed") = 1, py::arg("workers") = 1)
      .def_property_readonly("arch", [](const TrainConfig& c) { return std::string(to_string(c.architecture)); })
      .def_readonly("dim", &TrainConfig::dim)
      .def_readonly("window", &TrainConfig::window)
      .def_readonly("epochs", &TrainConfig::epochs)
      .def_readonly("seed", &TrainConfig::seed);

  py::class_<EmbeddingModel>(m, "Model")
      .def_readonly("config", &EmbeddingModel::config)
      .def_readonly("doc_ids", &EmbeddingModel::doc_ids)
      .def_property_readonly("doc_vectors", [](const EmbeddingModel& mo) { return to_numpy(mo.docs); })
      .def_property_readonly("word_vectors", [](const EmbeddingModel& mo) { return to_numpy(mo.words); })
      .def(
          "infer",
          [](const EmbeddingModel& mo, const std::string& residues, std::optional<std::size_t> epochs,
             std::uint64_t seed) {
            std::vector<std::vector<TokenId>> phases;
            for (const auto& kmers : tokenize(residues, mo.tokenizer)) phases.push_back(encode(mo.vocab, kmers));
            InferOptions o;
            o.epochs = epochs;
            o.seed = seed;
            const auto v = infer_doc(mo, phases, o);
            return py::array_t<float>(static_cast<py::ssize_t>(v.size()), v.data());
          },
          py::arg("residues"), py::arg("epochs") = py::none(), py::arg("seed") = 1)
      .def("loss", [](const EmbeddingModel& mo, const Corpus& c, std::uint64_t probe_seed) {
        return loss_estimate(mo, c.docs, probe_seed);
      }, py::arg("corpus"), py::arg("probe_seed") = 1)
      .def("save", [](const EmbeddingModel& mo, const std::filesystem::path& p) { save_model(p, mo); })
      .def("to_bytes", [](const EmbeddingModel& mo) { return py::bytes(serialize_model(mo)); })
      .def_static("load", &load_model)
      .def_static("from_bytes", [](const py::bytes& b) { return deserialize_model(std::string(b)); })
      .def("__eq__", [](const EmbeddingModel& a, const EmbeddingModel& b) { return a == b; });

  m.def(
      "train",
      [](const Corpus& corpus, const TrainConfig& cfg) {
        py::gil_scoped_release release;
        EmbeddingModel model = init_model(corpus, cfg);
        train(model, corpus.docs);
        return model;
      },
      py::arg("corpus"), py::arg("config"));

  m.def(
      "neighbors",
      [](const std::vector<std::string>& ids, const py::array_t<double>& vectors, const std::vector<double>& query,
         std::size_t k, const std::string& metric, std::optional<std::string> exclude) {
        const VectorIndex index(ids, from_numpy(vectors), parse_metric(metric));
        std::optional<std::string_view> ex;
        if (exclude) ex = *exclude;
        py::list out;
        for (const auto& r : neighbors(index, query, k, ex)) out.append(py::make_tuple(r.id, r.score));
        return out;
      },
      py::arg("ids"), py::arg("vectors"), py::arg("query"), py::arg("k"), py::arg("metric") = "euclidean",
      py::arg("exclude") = py::none());

  m.def(
      "knn_cross_validate",
      [](const std::vector<std::string>& ids, const py::array_t<double>& vectors,
         const std::map<std::string, std::string>& labels, std::size_t folds, const std::vector<std::size_t>& ks,
         std::uint64_t seed, const std::string& metric) {
        auto data = make_dataset(ids, vectors, labels);
        const VectorIndex index(data.ids, std::move(data.features), parse_metric(metric), data.labels);
        const auto rep = knn_cross_validate(index, folds, ks, seed);
        py::dict out;
        for (const auto& r : rep.results) out[py::int_(r.k)] = summary_dict(r.accuracy);
        return out;
      },
      py::arg("ids"), py::arg("vectors"), py::arg("labels"), py::arg("folds") = 10,
      py::arg("ks") = std::vector<std::size_t>{1, 3, 5, 10}, py::arg("seed") = 1, py::arg("metric") = "euclidean");

  m.def(
      "metrics_from_counts",
      [](std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
        const auto r = metrics_from_counts({tp, tn, fp, fn});
        py::dict d;
        d["specificity"] = r.specificity;
        d["sensitivity"] = r.sensitivity;
        d["accuracy"] = r.accuracy;
        d["precision"] = r.precision;
        return d;
      },
      py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));

  m.def(
      "binary_family_protocol",
      [](const std::vector<std::string>& ids, const py::array_t<double>& vectors,
         const std::map<std::string, std::string>& labels, const std::string& family, std::size_t folds,
         std::uint64_t seed, double C) {
        ProtocolOptions o;
        o.folds = folds;
        o.seed = seed;
        o.svm.C = C;
        return report_dict(binary_family_protocol(make_dataset(ids, vectors, labels), family, o));
      },
      py::arg("ids"), py::arg("vectors"), py::arg("labels"), py::arg("family"), py::arg("folds") = 10,
      py::arg("seed") = 1, py::arg("C") = 1.0);

  m.def(
      "multiclass_protocol",
      [](const std::vector<std::string>& ids, const py::array_t<double>& vectors,
         const std::map<std::string, std::string>& labels, std::size_t top_n, std::size_t folds, std::uint64_t seed,
         double C) {
        ProtocolOptions o;
        o.folds = folds;
        o.seed = seed;
        o.svm.C = C;
        const auto rep = multiclass_protocol(make_dataset(ids, vectors, labels), top_n, o);
        auto d = report_dict(rep.metrics);
        d["classes"] = rep.classes;
        return d;
      },
      py::arg("ids"), py::arg("vectors"), py::arg("labels"), py::arg("top_n") = 25, py::arg("folds") = 10,
      py::arg("seed") = 1, py::arg("C") = 1.0);

  m.def(
      "smith_waterman",
      [](const std::string& a, const std::string& b, int gap_open, int gap_extend,
         std::optional<std::string> matrix_text) {
        AlignParams p;
        if (matrix_text) p.substitution = load_substitution_matrix(*matrix_text);
        p.gap_open = gap_open;
        p.gap_extend = gap_extend;
        p.validate();
        return smith_waterman(a, b, p);
      },
      py::arg("a"), py::arg("b"), py::arg("gap_open") = -11, py::arg("gap_extend") = -1,
      py::arg("matrix") = py::none());

  m.def(
      "align_classify",
      [](const std::vector<SequenceRecord>& db, const SequenceRecord& query, std::size_t k, int gap_open,
         int gap_extend) {
        AlignParams p;
        p.gap_open = gap_open;
        p.gap_extend = gap_extend;
        p.validate();
        std::map<std::string, std::string> labels;
        for (const auto& r : db)
          if (r.family) labels[r.id] = *r.family;
        return align_classify(db, labels, query, k, p);
      },
      py::arg("db"), py::arg("query"), py::arg("k") = 5, py::arg("gap_open") = -11, py::arg("gap_extend") = -1);
}
