#include "seqvec/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "seqvec/error.hpp"

namespace seqvec {

std::string_view to_string(TokenMode mode) {
  return mode == TokenMode::Overlapping ? "overlapping" : "nonoverlapping";
}

TokenMode parse_token_mode(std::string_view text) {
  if (text == "overlap" || text == "overlapping") return TokenMode::Overlapping;
  if (text == "nonoverlap" || text == "nonoverlapping") return TokenMode::NonOverlapping;
  throw ConfigError("unknown tokenizer mode '" + std::string(text) + "' (expected overlap or nonoverlap)");
}

void TokenizerConfig::validate() const {
  if (k == 0) throw ConfigError("kmer length k must be at least 1");
}

std::vector<HuffmanCode> build_huffman(std::span<const std::uint64_t> counts) {
  const std::size_t vocab_size = counts.size();
  if (vocab_size < 2) throw DataError("Huffman coding needs at least two tokens");

  // (weight, order key, node). Leaves use key = token id; inner nodes use
  // V + creation index, so among equal weights leaves go first by id.
  using Entry = std::tuple<std::uint64_t, std::size_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t i = 0; i < vocab_size; ++i) heap.emplace(counts[i], i, i);

  // Nodes [0, V) are leaves, [V, 2V-1) inner nodes.
  std::vector<std::size_t> parent(2 * vocab_size - 1, 0);
  std::vector<std::uint8_t> branch(2 * vocab_size - 1, 0);
  std::size_t next = vocab_size;
  while (heap.size() > 1) {
    const auto [w0, k0, n0] = heap.top();
    heap.pop();
    const auto [w1, k1, n1] = heap.top();
    heap.pop();
    parent[n0] = next;
    parent[n1] = next;
    branch[n0] = 0;
    branch[n1] = 1;
    heap.emplace(w0 + w1, next, next);
    ++next;
  }
  const std::size_t root = next - 1;

  std::vector<HuffmanCode> codes(vocab_size);
  for (std::size_t leaf = 0; leaf < vocab_size; ++leaf) {
    auto& code = codes[leaf];
    for (std::size_t node = leaf; node != root; node = parent[node]) {
      code.bits.push_back(branch[node]);
      code.path.push_back(static_cast<std::uint32_t>(parent[node] - vocab_size));
    }
    std::reverse(code.bits.begin(), code.bits.end());
    std::reverse(code.path.begin(), code.path.end());
  }
  return codes;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts, std::uint64_t min_count)
    : tokens_(std::move(tokens)), counts_(std::move(counts)), min_count_(min_count) {
  if (tokens_.size() != counts_.size()) throw DataError("vocabulary tokens and counts differ in length");
  if (tokens_.size() > std::numeric_limits<TokenId>::max()) throw DataError("vocabulary too large");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (counts_[i] < min_count_ || counts_[i] == 0)
      throw DataError("token '" + tokens_[i] + "' has count below min_count");
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
      throw DataError("duplicate vocabulary token '" + tokens_[i] + "'");
    total_ += counts_[i];
  }

  sampling_.resize(tokens_.size());
  double norm = 0.0;
  for (auto c : counts_) norm += std::pow(static_cast<double>(c), 0.75);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    cumulative += std::pow(static_cast<double>(counts_[i]), 0.75) / norm;
    sampling_[i] = cumulative;
  }
  if (!sampling_.empty()) sampling_.back() = 1.0;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(sampling_.begin(), sampling_.end(), u);
  const auto id = static_cast<std::size_t>(it - sampling_.begin());
  return static_cast<TokenId>(std::min(id, sampling_.size() - 1));
}

void Vocabulary::ensure_huffman() {
  if (!huffman_) huffman_ = build_huffman(counts_);
}

std::vector<std::string> kmers_overlapping(std::string_view residues, std::size_t k) {
  if (k == 0) throw ConfigError("kmer length k must be at least 1");
  if (residues.size() < k)
    throw DataError("sequence of length " + std::to_string(residues.size()) + " is shorter than k=" +
                    std::to_string(k));
  std::vector<std::string> out;
  out.reserve(residues.size() - k + 1);
  for (std::size_t i = 0; i + k <= residues.size(); ++i) out.emplace_back(residues.substr(i, k));
  return out;
}

std::vector<std::vector<std::string>> kmers_nonoverlapping(std::string_view residues, std::size_t k) {
  if (k == 0) throw ConfigError("kmer length k must be at least 1");
  if (residues.size() < 2 * k - 1)
    throw DataError("sequence of length " + std::to_string(residues.size()) + " is too short for " +
                    std::to_string(k) + " non-overlapping phases");
  std::vector<std::vector<std::string>> phases(k);
  for (std::size_t p = 0; p < k; ++p) {
    auto& phase = phases[p];
    phase.reserve((residues.size() - p) / k);
    for (std::size_t i = p; i + k <= residues.size(); i += k) phase.emplace_back(residues.substr(i, k));
  }
  return phases;
}

std::vector<std::vector<std::string>> tokenize(std::string_view residues, const TokenizerConfig& cfg) {
  if (cfg.mode == TokenMode::Overlapping) return {kmers_overlapping(residues, cfg.k)};
  return kmers_nonoverlapping(residues, cfg.k);
}

Corpus corpus_from_documents(std::span<const RawDoc> docs, std::vector<std::string> sequence_ids,
                             const TokenizerConfig& cfg, std::uint64_t min_count) {
  cfg.validate();
  if (min_count == 0) throw ConfigError("min_count must be at least 1");

  // Count in first-appearance order.
  std::unordered_map<std::string, std::size_t> first_seen;
  std::vector<std::string> order;
  std::vector<std::uint64_t> counts;
  for (const auto& doc : docs) {
    for (const auto& kmer : doc.kmers) {
      auto [it, inserted] = first_seen.try_emplace(kmer, order.size());
      if (inserted) {
        order.push_back(kmer);
        counts.push_back(0);
      }
      ++counts[it->second];
    }
  }

  std::vector<std::string> kept_tokens;
  std::vector<std::uint64_t> kept_counts;
  std::vector<std::optional<TokenId>> remap(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (counts[i] < min_count) continue;
    remap[i] = static_cast<TokenId>(kept_tokens.size());
    kept_tokens.push_back(order[i]);
    kept_counts.push_back(counts[i]);
  }

  // Re-tag densely: a sequence survives if any of its documents keeps a token.
  std::size_t n_tags = sequence_ids.size();
  for (const auto& doc : docs) n_tags = std::max<std::size_t>(n_tags, doc.doc_tag + 1);
  std::vector<std::vector<TokenizedDoc>> by_tag(n_tags);
  for (const auto& doc : docs) {
    TokenizedDoc out{0, doc.phase, {}};
    out.tokens.reserve(doc.kmers.size());
    for (const auto& kmer : doc.kmers)
      if (auto id = remap[first_seen.at(kmer)]) out.tokens.push_back(*id);
    if (!out.tokens.empty()) by_tag[doc.doc_tag].push_back(std::move(out));
  }

  Corpus corpus;
  corpus.config = cfg;
  for (std::size_t tag = 0; tag < n_tags; ++tag) {
    std::string id = tag < sequence_ids.size() ? std::move(sequence_ids[tag]) : std::to_string(tag);
    if (by_tag[tag].empty()) {
      corpus.skipped.push_back(std::move(id));
      continue;
    }
    const auto new_tag = static_cast<std::uint32_t>(corpus.sequence_ids.size());
    for (auto& doc : by_tag[tag]) {
      doc.doc_tag = new_tag;
      corpus.docs.push_back(std::move(doc));
    }
    corpus.sequence_ids.push_back(std::move(id));
  }
  if (corpus.docs.empty()) throw DataError("empty corpus: no sequence produced any retained kmer");
  corpus.vocab = Vocabulary(std::move(kept_tokens), std::move(kept_counts), min_count);
  return corpus;
}

Corpus build_corpus(std::span<const SequenceRecord> records, const TokenizerConfig& cfg, std::uint64_t min_count) {
  cfg.validate();
  std::vector<RawDoc> raw;
  std::vector<std::string> ids;
  std::vector<std::string> too_short;
  for (const auto& rec : records) {
    if (rec.residues.size() < cfg.min_length()) {
      too_short.push_back(rec.id);
      continue;
    }
    const auto tag = static_cast<std::uint32_t>(ids.size());
    auto phases = tokenize(rec.residues, cfg);
    for (std::size_t p = 0; p < phases.size(); ++p)
      raw.push_back(RawDoc{tag, static_cast<std::uint32_t>(p), std::move(phases[p])});
    ids.push_back(rec.id);
  }
  if (raw.empty()) throw DataError("empty corpus: no sequence is long enough for k=" + std::to_string(cfg.k));
  Corpus corpus = corpus_from_documents(raw, std::move(ids), cfg, min_count);
  corpus.skipped.insert(corpus.skipped.begin(), too_short.begin(), too_short.end());
  return corpus;
}

std::vector<TokenId> encode(const Vocabulary& vocab, std::span<const std::string> kmers) {
  std::vector<TokenId> ids;
  ids.reserve(kmers.size());
  for (const auto& kmer : kmers)
    if (auto id = vocab.find(kmer)) ids.push_back(*id);
  return ids;
}

std::vector<TokenId> subsample_filter(std::span<const TokenId> tokens, const Vocabulary& vocab, double t, Rng& rng) {
  if (!(t > 0.0)) throw ConfigError("subsampling threshold must be positive");
  std::vector<TokenId> kept;
  kept.reserve(tokens.size());
  for (TokenId id : tokens) {
    const double ratio = t / vocab.frequency(id);
    const double keep = std::sqrt(ratio) + ratio;
    if (keep >= 1.0 || rng.uniform() < keep) kept.push_back(id);
  }
  return kept;
}

}  // namespace seqvec
