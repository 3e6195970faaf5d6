// seqvec command-line driver.
//
// Exit codes: 0 success, 1 data errors, 2 usage or configuration errors.

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seqvec/align.hpp"
#include "seqvec/classify.hpp"
#include "seqvec/embedding.hpp"
#include "seqvec/error.hpp"
#include "seqvec/io.hpp"
#include "seqvec/knn.hpp"
#include "seqvec/report.hpp"
#include "seqvec/sequences.hpp"
#include "seqvec/tokenizer.hpp"

namespace {

using namespace seqvec;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("SEQVEC_SEED");
  if (env == nullptr || *env == '\0') return 1;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("SEQVEC_SEED is not an unsigned integer: '" + std::string(text) + "'");
  return seed;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

// Writes to `path`, or to stdout when the path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  fn(out);
  out.flush();
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::vector<SequenceRecord> read_fasta_file(const std::string& path, const std::string& alphabet, bool replace) {
  auto in = open_input(path);
  return parse_fasta(in, Alphabet::named(alphabet), replace ? CharPolicy::Replace : CharPolicy::Strict);
}

FamilyLabels read_labels(const std::string& path) {
  auto in = open_input(path);
  auto labels = load_family_labels(in);
  if (labels.duplicates > 0)
    std::cerr << "warning: " << labels.duplicates << " duplicate label lines; later entries kept\n";
  return labels;
}

VectorTable read_vector_file(const std::string& path) {
  auto in = open_input(path);
  return read_vectors(in);
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct ObjectiveFlag {
  ObjectiveKind kind = ObjectiveKind::NegativeSampling;
  std::size_t negatives = 5;
};

ObjectiveFlag parse_objective(const std::string& text) {
  if (text == "hs") return {ObjectiveKind::HierarchicalSoftmax, 0};
  if (text == "ns") return {};
  if (text.starts_with("ns:")) {
    ObjectiveFlag f;
    const std::string_view n(text.data() + 3, text.size() - 3);
    const auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), f.negatives);
    if (ec == std::errc() && ptr == n.data() + n.size()) return f;
  }
  throw ConfigError("objective must be 'hs' or 'ns:<negatives>', got '" + text + "'");
}

// ---------------------------------------------------------------- tokenize

struct TokenizeArgs {
  std::string input, output, alphabet = "protein", mode = "nonoverlap";
  std::size_t k = 3;
  std::uint64_t min_count = 1;
  bool replace = false;
};

void cmd_tokenize(const TokenizeArgs& a) {
  TokenizerConfig cfg{a.k, parse_token_mode(a.mode)};
  cfg.validate();
  if (a.min_count == 0) throw ConfigError("--min-count must be at least 1");
  const auto records = read_fasta_file(a.input, a.alphabet, a.replace);
  const Corpus corpus = build_corpus(records, cfg, a.min_count);
  for (const auto& id : corpus.skipped) std::cerr << "warning: skipped sequence '" << id << "'\n";
  with_output(a.output, [&](std::ostream& out) { write_corpus(out, corpus); });
  std::cerr << "vocabulary\t" << corpus.vocab.size() << "\ndocuments\t" << corpus.docs.size() << "\nsequences\t"
            << corpus.num_sequences() << "\ndropped\t" << corpus.skipped.size() << '\n';
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string corpus, output, arch = "dm", objective = "ns:5";
  std::size_t dim = 250, window = 5, epochs = 20, workers = 1;
  double subsample = 0.0, alpha = 0.025;
  std::optional<double> alpha_min;
  std::optional<std::uint64_t> seed;
};

void cmd_train(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.architecture = parse_architecture(a.arch);
  cfg.dim = a.dim;
  cfg.window = a.window;
  const auto obj = parse_objective(a.objective);
  cfg.objective = obj.kind;
  cfg.negatives = obj.negatives;
  cfg.subsample = a.subsample;
  cfg.epochs = a.epochs;
  cfg.alpha0 = a.alpha;
  cfg.alpha_min = a.alpha_min.value_or(a.alpha / 10000.0);
  cfg.seed = resolve_seed(a.seed);
  cfg.workers = a.workers;
  cfg.validate();

  auto in = open_input(a.corpus);
  const Corpus corpus = read_corpus(in);
  EmbeddingModel model = init_model(corpus, cfg);
  const std::uint64_t probe = derive_seed(cfg.seed, 0x70726f6265ULL);
  const double initial = loss_estimate(model, corpus.docs, probe);
  train(model, corpus.docs);
  const double final_loss = loss_estimate(model, corpus.docs, probe);
  save_model(a.output, model);
  std::cout << "initial_loss\t" << initial << "\nfinal_loss\t" << final_loss << '\n';
}

// ----------------------------------------------------------------- vectors

void cmd_vectors(const std::string& model_path, const std::string& output) {
  const EmbeddingModel model = load_model(model_path);
  with_output(output, [&](std::ostream& out) { write_vectors(out, model.doc_ids, model.docs); });
}

// ------------------------------------------------------------------- infer

struct InferArgs {
  std::string model, input, output, alphabet = "protein";
  std::optional<std::size_t> epochs;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  bool replace = false;
};

void cmd_infer(const InferArgs& a) {
  const EmbeddingModel model = load_model(a.model);
  const auto records = read_fasta_file(a.input, a.alphabet, a.replace);
  InferOptions opts;
  opts.epochs = a.epochs;
  opts.alpha0 = a.alpha;
  opts.seed = resolve_seed(a.seed);

  std::vector<std::string> ids;
  Matrix<float> vectors(0, model.dim());
  for (const auto& rec : records) {
    if (rec.residues.size() < model.tokenizer.min_length()) {
      std::cerr << "warning: sequence '" << rec.id << "' is too short; skipped\n";
      continue;
    }
    std::vector<std::vector<TokenId>> phases;
    for (const auto& kmers : tokenize(rec.residues, model.tokenizer)) phases.push_back(encode(model.vocab, kmers));
    try {
      const auto v = infer_doc(model, phases, opts);
      vectors.append_row(v);
      ids.push_back(rec.id);
    } catch (const DataError& e) {
      std::cerr << "warning: sequence '" << rec.id << "': " << e.what() << "; skipped\n";
    }
  }
  if (ids.empty()) throw DataError("no sequence could be inferred");
  with_output(a.output, [&](std::ostream& out) { write_vectors(out, ids, vectors); });
}

// ---------------------------------------------------------------- knn-eval

struct KnnArgs {
  std::string vectors, labels, output, metric = "euclidean";
  std::size_t folds = 10;
  std::vector<std::size_t> k_values{1, 3, 5, 10};
  std::optional<std::uint64_t> seed;
};

void cmd_knn_eval(const KnnArgs& a) {
  const Metric metric = parse_metric(a.metric);
  for (auto k : a.k_values)
    if (k == 0) throw ConfigError("--k values must be at least 1");
  const auto table = read_vector_file(a.vectors);
  const auto labels = read_labels(a.labels);
  auto data = LabeledDataset::from_vectors(table.ids, to_double(table.vectors), labels.by_id);
  if (data.size() < table.ids.size())
    std::cerr << "warning: " << table.ids.size() - data.size() << " vectors have no label and were ignored\n";
  const VectorIndex index(data.ids, std::move(data.features), metric, data.labels);
  const auto report = knn_cross_validate(index, a.folds, a.k_values, resolve_seed(a.seed));
  warn_all(report.warnings);
  with_output(a.output, [&](std::ostream& out) { write_knn_report(out, report); });
}

// ---------------------------------------------------------------- svm-eval

struct SvmArgs {
  std::string vectors, labels, output, mode = "binary";
  std::optional<std::size_t> top_n;
  double C = 1.0;
  std::size_t folds = 10, epochs = 20;
  std::optional<std::uint64_t> seed;
};

void cmd_svm_eval(const SvmArgs& a) {
  if (a.mode != "binary" && a.mode != "multiclass")
    throw ConfigError("--mode must be binary or multiclass, got '" + a.mode + "'");
  if (!(a.C > 0.0)) throw ConfigError("--C must be positive");
  if (a.folds < 2) throw ConfigError("--folds must be at least 2");
  const auto table = read_vector_file(a.vectors);
  const auto labels = read_labels(a.labels);
  const auto data = LabeledDataset::from_vectors(table.ids, to_double(table.vectors), labels.by_id);

  ProtocolOptions opts;
  opts.folds = a.folds;
  opts.seed = resolve_seed(a.seed);
  opts.svm.C = a.C;
  opts.svm.epochs = a.epochs;

  if (a.mode == "multiclass") {
    const auto report = multiclass_protocol(data, a.top_n.value_or(25), opts);
    warn_all(report.metrics.warnings);
    with_output(a.output, [&](std::ostream& out) { write_multiclass_report(out, report); });
    return;
  }

  std::vector<std::pair<std::string, MetricsReport>> rows;
  std::vector<std::size_t> sizes;
  const std::size_t limit = a.top_n.value_or(std::numeric_limits<std::size_t>::max());
  for (const auto& [family, size] : families_by_size(data.labels)) {
    if (rows.size() >= limit) break;
    if (size < kMinBinaryFamilySize || data.size() - size < size) continue;
    auto report = binary_family_protocol(data, family, opts);
    for (const auto& w : report.warnings) std::cerr << "warning: " << family << ": " << w << '\n';
    rows.emplace_back(family, std::move(report));
    sizes.push_back(size);
  }
  if (rows.empty()) throw DataError("no family has at least " + std::to_string(kMinBinaryFamilySize) +
                                    " members and a large enough negative pool");
  with_output(a.output, [&](std::ostream& out) { write_binary_report(out, rows, sizes); });
}

// --------------------------------------------------------------- align-knn

struct AlignArgs {
  std::string db, labels, query, output, matrix = "blosum62", alphabet = "protein";
  std::size_t k = 5, workers = 0;
  int gap_open = -11, gap_extend = -1;
  bool replace = false;
};

void cmd_align_knn(const AlignArgs& a) {
  if (a.k == 0) throw ConfigError("--k must be at least 1");
  AlignParams params;
  if (a.matrix != "blosum62") {
    auto in = open_input(a.matrix);
    params.substitution = load_substitution_matrix(in);
  }
  params.gap_open = a.gap_open;
  params.gap_extend = a.gap_extend;
  params.validate();

  const auto db = read_fasta_file(a.db, a.alphabet, a.replace);
  const auto queries = read_fasta_file(a.query, a.alphabet, a.replace);
  const auto labels = read_labels(a.labels);
  for (const auto& rec : db)
    if (!labels.by_id.contains(rec.id)) throw DataError("database sequence '" + rec.id + "' has no family label");

  with_output(a.output, [&](std::ostream& out) {
    out << "Query\tPredicted\tFamily\n";
    for (const auto& q : queries) {
      const auto predicted = align_classify(db, labels.by_id, q, a.k, params, a.workers);
      const auto it = labels.by_id.find(q.id);
      out << q.id << '\t' << predicted << '\t' << (it != labels.by_id.end() ? it->second : "NA") << '\n';
    }
  });
}

int run(int argc, char** argv) {
  CLI::App app{"seqvec: sequence embeddings and family classification"};
  app.require_subcommand(1);

  TokenizeArgs tok;
  auto* c_tok = app.add_subcommand("tokenize", "FASTA to kmer-token corpus");
  c_tok->add_option("--input", tok.input, "FASTA file")->required();
  c_tok->add_option("--alphabet", tok.alphabet, "protein or dna")->capture_default_str();
  c_tok->add_option("--k", tok.k, "kmer length")->capture_default_str();
  c_tok->add_option("--mode", tok.mode, "overlap or nonoverlap")->capture_default_str();
  c_tok->add_option("--min-count", tok.min_count, "drop kmers seen fewer times")->capture_default_str();
  c_tok->add_flag("--replace", tok.replace, "map unknown residues to X instead of failing");
  c_tok->add_option("--output", tok.output, "corpus file (stdout if omitted)");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train an embedding model on a corpus");
  c_train->add_option("--corpus", tr.corpus, "tokenized corpus")->required();
  c_train->add_option("--arch", tr.arch, "dm, dbow, cbow or sg")->capture_default_str();
  c_train->add_option("--dim", tr.dim)->capture_default_str();
  c_train->add_option("--window", tr.window)->capture_default_str();
  c_train->add_option("--objective", tr.objective, "ns:<negatives> or hs")->capture_default_str();
  c_train->add_option("--subsample", tr.subsample, "0 disables")->capture_default_str();
  c_train->add_option("--epochs", tr.epochs)->capture_default_str();
  c_train->add_option("--alpha", tr.alpha, "initial learning rate")->capture_default_str();
  c_train->add_option("--alpha-min", tr.alpha_min, "final learning rate (default alpha/10000)");
  c_train->add_option("--seed", tr.seed, "random seed (env SEQVEC_SEED, else 1)");
  c_train->add_option("--workers", tr.workers)->capture_default_str();
  c_train->add_option("--output", tr.output, "model file")->required();

  std::string vec_model, vec_output;
  auto* c_vec = app.add_subcommand("vectors", "export document vectors as text");
  c_vec->add_option("--model", vec_model)->required();
  c_vec->add_option("--output", vec_output, "vector file (stdout if omitted)");

  InferArgs inf;
  auto* c_inf = app.add_subcommand("infer", "infer vectors for new sequences");
  c_inf->add_option("--model", inf.model)->required();
  c_inf->add_option("--input", inf.input, "FASTA file")->required();
  c_inf->add_option("--alphabet", inf.alphabet)->capture_default_str();
  c_inf->add_flag("--replace", inf.replace);
  c_inf->add_option("--epochs", inf.epochs, "default twice the training epochs");
  c_inf->add_option("--alpha", inf.alpha, "default the training alpha");
  c_inf->add_option("--seed", inf.seed);
  c_inf->add_option("--output", inf.output, "vector file (stdout if omitted)");

  KnnArgs knn;
  auto* c_knn = app.add_subcommand("knn-eval", "cross-validated kNN family prediction");
  c_knn->add_option("--vectors", knn.vectors)->required();
  c_knn->add_option("--labels", knn.labels)->required();
  c_knn->add_option("--folds", knn.folds)->capture_default_str();
  c_knn->add_option("--k", knn.k_values, "comma-separated")->delimiter(',')->capture_default_str();
  c_knn->add_option("--metric", knn.metric, "euclidean or cosine")->capture_default_str();
  c_knn->add_option("--seed", knn.seed);
  c_knn->add_option("--output", knn.output, "TSV report (stdout if omitted)");

  SvmArgs svm;
  auto* c_svm = app.add_subcommand("svm-eval", "cross-validated linear SVM family classification");
  c_svm->add_option("--vectors", svm.vectors)->required();
  c_svm->add_option("--labels", svm.labels)->required();
  c_svm->add_option("--mode", svm.mode, "binary or multiclass")->capture_default_str();
  c_svm->add_option("--top-n", svm.top_n, "largest families to evaluate (multiclass default 25)");
  c_svm->add_option("--C", svm.C)->capture_default_str();
  c_svm->add_option("--epochs", svm.epochs, "SGD passes")->capture_default_str();
  c_svm->add_option("--folds", svm.folds)->capture_default_str();
  c_svm->add_option("--seed", svm.seed);
  c_svm->add_option("--output", svm.output, "TSV report (stdout if omitted)");

  AlignArgs al;
  auto* c_al = app.add_subcommand("align-knn", "Smith-Waterman top-k family prediction");
  c_al->add_option("--db", al.db, "labelled database FASTA")->required();
  c_al->add_option("--labels", al.labels)->required();
  c_al->add_option("--query", al.query, "query FASTA")->required();
  c_al->add_option("--k", al.k)->capture_default_str();
  c_al->add_option("--matrix", al.matrix, "blosum62 or an NCBI matrix file")->capture_default_str();
  c_al->add_option("--gap-open", al.gap_open)->capture_default_str();
  c_al->add_option("--gap-extend", al.gap_extend)->capture_default_str();
  c_al->add_option("--workers", al.workers, "0 uses every core")->capture_default_str();
  c_al->add_option("--alphabet", al.alphabet)->capture_default_str();
  c_al->add_flag("--replace", al.replace);
  c_al->add_option("--output", al.output, "TSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*c_tok) cmd_tokenize(tok);
  else if (*c_train) cmd_train(tr);
  else if (*c_vec) cmd_vectors(vec_model, vec_output);
  else if (*c_inf) cmd_infer(inf);
  else if (*c_knn) cmd_knn_eval(knn);
  else if (*c_svm) cmd_svm_eval(svm);
  else if (*c_al) cmd_align_knn(al);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const seqvec::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
