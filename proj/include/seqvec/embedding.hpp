#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqvec/matrix.hpp"
#include "seqvec/objective.hpp"
#include "seqvec/tokenizer.hpp"

namespace seqvec {

struct TrainConfig {
  Architecture architecture = Architecture::DM;
  std::size_t dim = 250;
  std::size_t window = 5;
  ObjectiveKind objective = ObjectiveKind::NegativeSampling;
  std::size_t negatives = 5;
  /// Subsampling threshold; 0 disables subsampling.
  double subsample = 0.0;
  std::size_t epochs = 20;
  double alpha0 = 0.025;
  double alpha_min = 0.025 / 10000.0;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Document matrix (one row per sequence), input word matrix and output
/// matrix (V rows for negative sampling, V-1 inner nodes for hierarchical
/// softmax), plus everything needed to tokenize and infer new sequences.
struct EmbeddingModel {
  TrainConfig config;
  TokenizerConfig tokenizer;
  Vocabulary vocab;
  std::vector<std::string> doc_ids;
  Matrix<float> docs;
  Matrix<float> words;
  Matrix<float> outputs;

  std::size_t dim() const noexcept { return config.dim; }
  std::size_t num_docs() const noexcept { return docs.rows(); }
  bool all_finite() const { return docs.all_finite() && words.all_finite() && outputs.all_finite(); }

  /// Throws DataError when matrix shapes disagree with vocab/docs/objective.
  void check_shapes() const;

  Parameters<float> parameters() { return {&docs, &words, &outputs}; }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

/// D and W uniform in [-0.5/d, 0.5/d] (D first, then W) from cfg.seed; O zero.
EmbeddingModel init_model(Vocabulary vocab, std::size_t n_docs, const TrainConfig& cfg);
/// Same, taking vocabulary, sequence ids and tokenizer settings from a corpus.
EmbeddingModel init_model(const Corpus& corpus, const TrainConfig& cfg);

struct TrainHooks {
  /// Called after each epoch with the 1-based epoch number.
  std::function<void(std::size_t epoch, const EmbeddingModel&)> on_epoch;
};

/// Runs model.config.epochs passes of SGD over `docs`. The learning rate decays
/// linearly from alpha0 to alpha_min over epochs * (total tokens); document
/// order is reshuffled each epoch. With workers > 1 the shards update the
/// shared matrices without locking.
///
/// CBOW and SkipGram never touch D while training; afterwards each D row is set
/// to the mean word vector of that sequence's tokens.
void train(EmbeddingModel& model, std::span<const TokenizedDoc> docs, const TrainHooks& hooks = {});

struct InferOptions {
  /// Defaults to 2 * training epochs.
  std::optional<std::size_t> epochs;
  /// Defaults to the training alpha0.
  std::optional<double> alpha0;
  std::uint64_t seed = 1;
};

/// Learns a vector for an unseen sequence given its token documents (one per
/// phase), with W and O frozen. Ids outside the vocabulary are dropped. For
/// CBOW/SkipGram models this is the mean word vector of the tokens.
std::vector<float> infer_doc(const EmbeddingModel& model, std::span<const std::vector<TokenId>> phases,
                             const InferOptions& options = {});
std::vector<float> infer_doc(const EmbeddingModel& model, std::span<const TokenId> tokens,
                             const InferOptions& options = {});

/// Mean loss per prediction from replaying the architecture steps over `docs`
/// (in the given order) without updating anything. Windows and negatives are
/// drawn from `probe_seed`.
double loss_estimate(const EmbeddingModel& model, std::span<const TokenizedDoc> docs, std::uint64_t probe_seed);

}  // namespace seqvec
