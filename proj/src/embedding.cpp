#include "seqvec/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "seqvec/error.hpp"

namespace seqvec {

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kWorkerStream = 0x574f524bULL;

void fill_uniform(Matrix<float>& m, std::size_t dim, Rng& rng) {
  const double half = 0.5 / static_cast<double>(dim);
  for (auto& v : m.values()) v = static_cast<float>((rng.uniform() * 2.0 - 1.0) * half);
}

float learning_rate(const TrainConfig& cfg, double progress) {
  progress = std::clamp(progress, 0.0, 1.0);
  return static_cast<float>(cfg.alpha0 - (cfg.alpha0 - cfg.alpha_min) * progress);
}

std::size_t draw_window(Architecture arch, std::size_t window, Rng& rng) {
  return uses_window(arch) ? 1 + static_cast<std::size_t>(rng.below(window)) : 0;
}

// D rows of word-level models: mean word vector of every token of the sequence.
void fill_doc_means(EmbeddingModel& model, std::span<const TokenizedDoc> docs) {
  const std::size_t d = model.dim();
  std::vector<double> sums(model.docs.rows() * d, 0.0);
  std::vector<std::size_t> counts(model.docs.rows(), 0);
  for (const auto& doc : docs) {
    for (TokenId t : doc.tokens) {
      auto w = model.words.row(t);
      for (std::size_t i = 0; i < d; ++i) sums[doc.doc_tag * d + i] += w[i];
    }
    counts[doc.doc_tag] += doc.tokens.size();
  }
  for (std::size_t r = 0; r < model.docs.rows(); ++r) {
    if (counts[r] == 0) continue;
    auto row = model.docs.row(r);
    for (std::size_t i = 0; i < d; ++i) row[i] = static_cast<float>(sums[r * d + i] / static_cast<double>(counts[r]));
  }
}

}  // namespace

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::CBOW:
      return "cbow";
    case Architecture::SkipGram:
      return "sg";
    case Architecture::DM:
      return "dm";
    case Architecture::DBOW:
      return "dbow";
  }
  return "?";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "dm") return Architecture::DM;
  if (text == "dbow") return Architecture::DBOW;
  if (text == "cbow") return Architecture::CBOW;
  if (text == "sg" || text == "skipgram") return Architecture::SkipGram;
  throw ConfigError("unknown architecture '" + std::string(text) + "' (expected dm, dbow, cbow or sg)");
}

void TrainConfig::validate() const {
  if (dim == 0) throw ConfigError("dimension must be at least 1");
  if (window == 0) throw ConfigError("window must be at least 1");
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (objective == ObjectiveKind::NegativeSampling && negatives == 0)
    throw ConfigError("negative sampling needs at least one negative");
  if (!(alpha0 > 0.0) || alpha0 > 1.0) throw ConfigError("alpha0 must lie in (0, 1]");
  if (!(alpha_min >= 0.0) || !(alpha_min < alpha0)) throw ConfigError("alpha_min must satisfy 0 <= alpha_min < alpha0");
  if (!(subsample >= 0.0)) throw ConfigError("subsample threshold must be non-negative");
}

void EmbeddingModel::check_shapes() const {
  const std::size_t d = config.dim;
  const std::size_t v = vocab.size();
  const std::size_t out_rows = config.objective == ObjectiveKind::NegativeSampling ? v : v - 1;
  if (docs.rows() != doc_ids.size() || docs.cols() != d) throw DataError("document matrix shape mismatch");
  if (words.rows() != v || words.cols() != d) throw DataError("word matrix shape mismatch");
  if (outputs.rows() != out_rows || outputs.cols() != d) throw DataError("output matrix shape mismatch");
}

EmbeddingModel init_model(Vocabulary vocab, std::size_t n_docs, const TrainConfig& cfg) {
  cfg.validate();
  if (vocab.size() == 0) throw DataError("cannot initialise a model over an empty vocabulary");
  if (n_docs == 0) throw DataError("cannot initialise a model without documents");
  if (cfg.objective == ObjectiveKind::HierarchicalSoftmax) {
    if (vocab.size() < 2) throw DataError("hierarchical softmax needs at least two tokens");
    vocab.ensure_huffman();
  }

  EmbeddingModel model;
  model.config = cfg;
  const std::size_t d = cfg.dim;
  const std::size_t out_rows = cfg.objective == ObjectiveKind::NegativeSampling ? vocab.size() : vocab.size() - 1;
  model.docs = Matrix<float>(n_docs, d);
  model.words = Matrix<float>(vocab.size(), d);
  model.outputs = Matrix<float>(out_rows, d);
  model.doc_ids.reserve(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) model.doc_ids.push_back(std::to_string(i));
  model.vocab = std::move(vocab);

  Rng rng(cfg.seed);
  fill_uniform(model.docs, d, rng);
  fill_uniform(model.words, d, rng);
  return model;
}

EmbeddingModel init_model(const Corpus& corpus, const TrainConfig& cfg) {
  EmbeddingModel model = init_model(corpus.vocab, corpus.num_sequences(), cfg);
  model.doc_ids = corpus.sequence_ids;
  model.tokenizer = corpus.config;
  return model;
}

void train(EmbeddingModel& model, std::span<const TokenizedDoc> docs, const TrainHooks& hooks) {
  const TrainConfig& cfg = model.config;
  cfg.validate();
  if (docs.empty()) throw DataError("cannot train on an empty document list");
  model.check_shapes();
  if (cfg.objective == ObjectiveKind::HierarchicalSoftmax) model.vocab.ensure_huffman();
  for (const auto& doc : docs) {
    if (doc.doc_tag >= model.num_docs()) throw DataError("document tag out of range");
    for (TokenId t : doc.tokens)
      if (t >= model.vocab.size()) throw DataError("token id out of vocabulary range");
  }

  const TargetEncoder encoder(model.vocab, cfg.objective, cfg.negatives);
  const Parameters<float> params = model.parameters();
  const Architecture arch = cfg.architecture;
  // DBOW trains document vectors only; word-level architectures have no
  // document vectors during training.
  const UpdateMask mask{uses_doc_vectors(arch), arch != Architecture::DBOW, true};

  std::size_t corpus_tokens = 0;
  for (const auto& doc : docs) corpus_tokens += doc.tokens.size();
  const double scheduled = static_cast<double>(corpus_tokens) * static_cast<double>(cfg.epochs);

  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::atomic<std::size_t> processed{0};
  const std::size_t workers = std::min(cfg.workers, docs.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream, epoch));
    shuffle_rng.shuffle(std::span(order));

    auto run_shard = [&](std::size_t worker) {
      Rng rng(derive_seed(cfg.seed, kWorkerStream + worker, epoch));
      StepWorkspace<float> ws;
      std::vector<TokenId> filtered;
      const std::size_t begin = order.size() * worker / workers;
      const std::size_t end = order.size() * (worker + 1) / workers;
      for (std::size_t i = begin; i < end; ++i) {
        const TokenizedDoc& doc = docs[order[i]];
        std::span<const TokenId> tokens = doc.tokens;
        if (cfg.subsample > 0.0) {
          filtered = subsample_filter(doc.tokens, model.vocab, cfg.subsample, rng);
          tokens = filtered;
        }
        const std::size_t base = processed.fetch_add(doc.tokens.size(), std::memory_order_relaxed);
        for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
          const float lr = learning_rate(cfg, static_cast<double>(base + pos) / scheduled);
          const std::size_t window = draw_window(arch, cfg.window, rng);
          train_position<float>(arch, params, mask, tokens, doc.doc_tag, pos, window, encoder, rng, lr, ws);
        }
      }
    };

    if (workers == 1) {
      run_shard(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_shard, w);
    }

    if (!model.all_finite())
      throw DataError("training diverged: non-finite parameters after epoch " + std::to_string(epoch + 1));
    if (hooks.on_epoch) hooks.on_epoch(epoch + 1, model);
  }

  if (!uses_doc_vectors(arch)) fill_doc_means(model, docs);
}

std::vector<float> infer_doc(const EmbeddingModel& model, std::span<const std::vector<TokenId>> phases,
                             const InferOptions& options) {
  const TrainConfig& cfg = model.config;
  const std::size_t d = model.dim();
  std::vector<std::vector<TokenId>> known(phases.size());
  std::size_t total = 0;
  for (std::size_t p = 0; p < phases.size(); ++p) {
    for (TokenId t : phases[p])
      if (t < model.vocab.size()) known[p].push_back(t);
    total += known[p].size();
  }
  if (total == 0) throw DataError("cannot infer a vector: every token is out of vocabulary");

  std::vector<float> vec(d, 0.0f);
  if (!uses_doc_vectors(cfg.architecture)) {
    std::vector<double> sum(d, 0.0);
    for (const auto& phase : known)
      for (TokenId t : phase) {
        auto w = model.words.row(t);
        for (std::size_t i = 0; i < d; ++i) sum[i] += w[i];
      }
    for (std::size_t i = 0; i < d; ++i) vec[i] = static_cast<float>(sum[i] / static_cast<double>(total));
    return vec;
  }

  const std::size_t epochs = options.epochs.value_or(2 * cfg.epochs);
  TrainConfig schedule = cfg;
  schedule.alpha0 = options.alpha0.value_or(cfg.alpha0);
  schedule.alpha_min = std::min(cfg.alpha_min, schedule.alpha0 / 10000.0);

  Rng rng(options.seed);
  Matrix<float> doc(1, d);
  fill_uniform(doc, d, rng);

  // W and O are only read: the mask below limits writes to the private row.
  Parameters<float> params{&doc, const_cast<Matrix<float>*>(&model.words), const_cast<Matrix<float>*>(&model.outputs)};
  const UpdateMask mask{true, false, false};
  const TargetEncoder encoder(model.vocab, cfg.objective, cfg.negatives);
  StepWorkspace<float> ws;
  const double scheduled = static_cast<double>(total) * static_cast<double>(epochs);
  std::size_t processed = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (const auto& tokens : known) {
      for (std::size_t pos = 0; pos < tokens.size(); ++pos, ++processed) {
        const float lr = learning_rate(schedule, static_cast<double>(processed) / scheduled);
        const std::size_t window = draw_window(cfg.architecture, cfg.window, rng);
        train_position<float>(cfg.architecture, params, mask, tokens, 0, pos, window, encoder, rng, lr, ws);
      }
    }
  }
  auto row = doc.row(0);
  vec.assign(row.begin(), row.end());
  return vec;
}

std::vector<float> infer_doc(const EmbeddingModel& model, std::span<const TokenId> tokens,
                             const InferOptions& options) {
  const std::vector<std::vector<TokenId>> phases{std::vector<TokenId>(tokens.begin(), tokens.end())};
  return infer_doc(model, std::span(phases), options);
}

double loss_estimate(const EmbeddingModel& model, std::span<const TokenizedDoc> docs, std::uint64_t probe_seed) {
  const TrainConfig& cfg = model.config;
  // Evaluation only: an empty mask and zero learning rate never write.
  auto& mutable_model = const_cast<EmbeddingModel&>(model);
  const Parameters<float> params = mutable_model.parameters();
  const TargetEncoder encoder(model.vocab, cfg.objective, cfg.negatives);
  Rng rng(probe_seed);
  StepWorkspace<float> ws;
  StepResult total;
  for (const auto& doc : docs) {
    for (std::size_t pos = 0; pos < doc.tokens.size(); ++pos) {
      const std::size_t window = draw_window(cfg.architecture, cfg.window, rng);
      total += train_position<float>(cfg.architecture, params, UpdateMask::none(), doc.tokens, doc.doc_tag, pos,
                                     window, encoder, rng, 0.0f, ws);
    }
  }
  return total.predictions == 0 ? 0.0 : total.loss / static_cast<double>(total.predictions);
}

}  // namespace seqvec
