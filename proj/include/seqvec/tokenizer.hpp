#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqvec/random.hpp"
#include "seqvec/sequences.hpp"

namespace seqvec {

using TokenId = std::uint32_t;

enum class TokenMode : std::uint8_t { NonOverlapping = 0, Overlapping = 1 };

std::string_view to_string(TokenMode mode);
/// Accepts "nonoverlap"/"nonoverlapping" and "overlap"/"overlapping".
TokenMode parse_token_mode(std::string_view text);

struct TokenizerConfig {
  std::size_t k = 3;
  TokenMode mode = TokenMode::NonOverlapping;

  /// Shortest sequence for which every document of this mode is non-empty.
  std::size_t min_length() const noexcept { return mode == TokenMode::Overlapping ? k : 2 * k - 1; }
  void validate() const;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

/// One document: a phase reading (non-overlapping) or the full stride-1
/// reading (overlapping, phase 0) of the sequence with index `doc_tag`.
struct TokenizedDoc {
  std::uint32_t doc_tag = 0;
  std::uint32_t phase = 0;
  std::vector<TokenId> tokens;

  friend bool operator==(const TokenizedDoc&, const TokenizedDoc&) = default;
};

/// Huffman code of one token: `bits[i]` is the branch taken at inner node
/// `path[i]`, root first. Inner nodes are numbered [0, V-1), root last.
struct HuffmanCode {
  std::vector<std::uint8_t> bits;
  std::vector<std::uint32_t> path;

  friend bool operator==(const HuffmanCode&, const HuffmanCode&) = default;
};

/// Binary Huffman tree over `counts`. Equal weights are merged lower token id
/// first; inner nodes rank after every leaf and among themselves by creation.
std::vector<HuffmanCode> build_huffman(std::span<const std::uint64_t> counts);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Token strings in id order with parallel counts. Every count must be at
  /// least `min_count`.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts, std::uint64_t min_count = 1);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint64_t count(TokenId id) const { return counts_.at(id); }
  std::span<const std::string> tokens() const noexcept { return tokens_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t min_count() const noexcept { return min_count_; }
  double frequency(TokenId id) const { return static_cast<double>(count(id)) / static_cast<double>(total_); }

  std::optional<TokenId> find(std::string_view token) const;

  /// Cumulative distribution proportional to count^0.75; the last entry is 1.
  std::span<const double> sampling_table() const noexcept { return sampling_; }
  /// Draws a token from the count^0.75 distribution.
  TokenId sample(Rng& rng) const;

  const std::optional<std::vector<HuffmanCode>>& huffman() const noexcept { return huffman_; }
  /// Builds Huffman codes if absent. Requires at least two tokens.
  void ensure_huffman();

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_ && a.min_count_ == b.min_count_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::uint64_t min_count_ = 1;
  std::vector<double> sampling_;
  std::optional<std::vector<HuffmanCode>> huffman_;
  std::unordered_map<std::string, TokenId> index_;
};

std::vector<std::string> kmers_overlapping(std::string_view residues, std::size_t k);
/// k phase readings; phase p tiles residues[p..] with disjoint kmers.
std::vector<std::vector<std::string>> kmers_nonoverlapping(std::string_view residues, std::size_t k);
/// Documents for one sequence under `cfg` (one list for overlapping mode).
std::vector<std::vector<std::string>> tokenize(std::string_view residues, const TokenizerConfig& cfg);

struct Corpus {
  TokenizerConfig config;
  std::vector<TokenizedDoc> docs;
  Vocabulary vocab;
  /// Sequence id per doc_tag.
  std::vector<std::string> sequence_ids;
  /// Ids of sequences dropped for being too short or losing every token.
  std::vector<std::string> skipped;

  std::size_t num_sequences() const noexcept { return sequence_ids.size(); }
};

/// Tokenizes every record and builds the vocabulary. Token ids follow first
/// appearance; tokens seen fewer than `min_count` times are removed from the
/// vocabulary and from the documents.
Corpus build_corpus(std::span<const SequenceRecord> records, const TokenizerConfig& cfg, std::uint64_t min_count = 1);

/// Rebuilds a corpus from already-tokenized documents (kmer strings).
struct RawDoc {
  std::uint32_t doc_tag = 0;
  std::uint32_t phase = 0;
  std::vector<std::string> kmers;
};
Corpus corpus_from_documents(std::span<const RawDoc> docs, std::vector<std::string> sequence_ids,
                             const TokenizerConfig& cfg, std::uint64_t min_count = 1);

/// Maps kmers to ids, dropping kmers absent from the vocabulary.
std::vector<TokenId> encode(const Vocabulary& vocab, std::span<const std::string> kmers);

/// Frequent-token subsampling: a token of corpus frequency f survives with
/// probability min(1, sqrt(t/f) + t/f).
std::vector<TokenId> subsample_filter(std::span<const TokenId> tokens, const Vocabulary& vocab, double t, Rng& rng);

}  // namespace seqvec
