#pragma once

// Per-position SGD kernels shared by training, inference, loss estimation and
// the gradient tests. Everything is templated on the scalar type so the tests
// can run the exact same code in double precision.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "seqvec/matrix.hpp"
#include "seqvec/random.hpp"
#include "seqvec/tokenizer.hpp"

namespace seqvec {

enum class Architecture : std::uint8_t { CBOW = 0, SkipGram = 1, DM = 2, DBOW = 3 };
enum class ObjectiveKind : std::uint8_t { NegativeSampling = 0, HierarchicalSoftmax = 1 };

std::string_view to_string(Architecture arch);
/// Accepts dm, dbow, cbow, sg/skipgram.
Architecture parse_architecture(std::string_view text);

constexpr bool uses_window(Architecture arch) noexcept { return arch != Architecture::DBOW; }
constexpr bool uses_doc_vectors(Architecture arch) noexcept {
  return arch == Architecture::DM || arch == Architecture::DBOW;
}

inline double sigmoid(double x) noexcept {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// -log(sigmoid(x)), stable for large |x|.
inline double neg_log_sigmoid(double x) noexcept {
  return std::log1p(std::exp(-std::abs(x))) + (x < 0 ? -x : 0.0);
}

/// One binary decision against output row `row`: label 1 means the score
/// should be pushed up (true target / Huffman bit 0), label 0 pushed down.
struct Decision {
  std::uint32_t row = 0;
  std::uint8_t label = 0;
};

/// Turns a target token into output-row decisions for the configured objective.
class TargetEncoder {
 public:
  static constexpr int kMaxRedraws = 16;

  TargetEncoder(const Vocabulary& vocab, ObjectiveKind kind, std::size_t negatives)
      : vocab_(&vocab), kind_(kind), negatives_(negatives) {}

  ObjectiveKind kind() const noexcept { return kind_; }

  /// Negative sampling: the target plus `negatives` noise draws, each redrawn
  /// while equal to the target (at most kMaxRedraws times, then dropped).
  /// Hierarchical softmax: one decision per inner node on the target's path.
  void encode(TokenId target, Rng& rng, std::vector<Decision>& out) const {
    out.clear();
    if (kind_ == ObjectiveKind::HierarchicalSoftmax) {
      const auto& code = (*vocab_->huffman())[target];
      for (std::size_t i = 0; i < code.path.size(); ++i)
        out.push_back({code.path[i], static_cast<std::uint8_t>(1 - code.bits[i])});
      return;
    }
    out.push_back({target, 1});
    for (std::size_t j = 0; j < negatives_; ++j) {
      for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        const TokenId noise = vocab_->sample(rng);
        if (noise != target) {
          out.push_back({noise, 0});
          break;
        }
      }
    }
  }

 private:
  const Vocabulary* vocab_;
  ObjectiveKind kind_;
  std::size_t negatives_;
};

/// Sparse gradient accumulator keyed by row index.
struct SparseGradient {
  std::map<std::size_t, std::vector<double>> docs;
  std::map<std::size_t, std::vector<double>> words;
  std::map<std::size_t, std::vector<double>> outputs;

  template <class T>
  static void add(std::map<std::size_t, std::vector<double>>& into, std::size_t row, std::span<const T> g,
                  double scale) {
    auto& dst = into[row];
    dst.resize(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += scale * static_cast<double>(g[i]);
  }
};

/// Loss of `decisions` at hidden vector h. Adds dLoss/dh into grad_h; when
/// lr > 0 and update_outputs, applies the SGD step to each output row after
/// its contribution to grad_h is taken.
template <std::floating_point T>
double score_decisions(std::span<const T> h, std::span<const Decision> decisions, Matrix<T>& outputs,
                       std::span<T> grad_h, T lr, bool update_outputs, SparseGradient* collect = nullptr) {
  double loss = 0.0;
  const std::size_t d = h.size();
  for (const Decision& dec : decisions) {
    std::span<T> out = outputs.row(dec.row);
    const double f = dot(out, h);
    loss += dec.label ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
    const T g = static_cast<T>(sigmoid(f) - static_cast<double>(dec.label));  // dLoss/df
    for (std::size_t i = 0; i < d; ++i) grad_h[i] += g * out[i];
    if (collect) SparseGradient::add(collect->outputs, dec.row, h, static_cast<double>(g));
    if (update_outputs && lr > 0)
      for (std::size_t i = 0; i < d; ++i) out[i] -= lr * g * h[i];
  }
  return loss;
}

template <std::floating_point T>
struct ObjectiveGradient {
  double loss = 0.0;
  std::vector<T> grad_h;
  /// dLoss/d(output row), summed per row.
  std::map<std::size_t, std::vector<double>> outputs;
};

/// Loss and analytic gradients for predicting `target` from h. Negatives (if
/// any) are drawn from `rng` before scoring; parameters are not modified.
template <std::floating_point T>
ObjectiveGradient<T> objective_gradient(std::span<const T> h, TokenId target, const Matrix<T>& outputs,
                                        const TargetEncoder& encoder, Rng& rng) {
  std::vector<Decision> decisions;
  encoder.encode(target, rng, decisions);
  ObjectiveGradient<T> result;
  result.grad_h.assign(h.size(), T{0});
  SparseGradient collect;
  // Read-only: lr is zero, so score_decisions never writes through this.
  auto& mutable_outputs = const_cast<Matrix<T>&>(outputs);
  result.loss = score_decisions<T>(h, decisions, mutable_outputs, result.grad_h, T{0}, false, &collect);
  result.outputs = std::move(collect.outputs);
  return result;
}

struct UpdateMask {
  bool docs = true;
  bool words = true;
  bool outputs = true;

  static constexpr UpdateMask none() { return {false, false, false}; }
};

template <std::floating_point T>
struct Parameters {
  Matrix<T>* docs = nullptr;
  Matrix<T>* words = nullptr;
  Matrix<T>* outputs = nullptr;
};

struct StepResult {
  double loss = 0.0;
  std::size_t predictions = 0;

  StepResult& operator+=(const StepResult& o) {
    loss += o.loss;
    predictions += o.predictions;
    return *this;
  }
};

/// Scratch buffers reused across positions.
template <std::floating_point T>
struct StepWorkspace {
  std::vector<T> h;
  std::vector<T> grad_h;
  std::vector<std::size_t> context;
  std::vector<Decision> decisions;
};

/// Applies (or, with lr = 0 and an empty mask, only evaluates) the
/// architecture step for the token at `pos` with reduced window `window`.
///
/// CBOW:     h = mean(W[context]) predicts tokens[pos]; no context -> no-op.
/// SkipGram: h = W[tokens[pos]] predicts every context token.
/// DM:       h = mean(D[doc], W[context]) predicts tokens[pos].
/// DBOW:     h = D[doc] predicts tokens[pos].
/// Averaged inputs each receive grad_h / (number of contributors).
template <std::floating_point T>
StepResult train_position(Architecture arch, const Parameters<T>& params, UpdateMask mask,
                          std::span<const TokenId> tokens, std::size_t doc_row, std::size_t pos, std::size_t window,
                          const TargetEncoder& encoder, Rng& rng, T lr, StepWorkspace<T>& ws,
                          SparseGradient* collect = nullptr) {
  const std::size_t d = params.outputs->cols();
  ws.h.assign(d, T{0});
  ws.grad_h.assign(d, T{0});
  ws.context.clear();
  if (uses_window(arch)) {
    const std::size_t lo = pos >= window ? pos - window : 0;
    const std::size_t hi = std::min(tokens.size(), pos + window + 1);
    for (std::size_t j = lo; j < hi; ++j)
      if (j != pos) ws.context.push_back(tokens[j]);
  }
  const bool update_outputs = mask.outputs && lr > 0;
  StepResult result;

  switch (arch) {
    case Architecture::CBOW:
    case Architecture::DM: {
      const bool with_doc = arch == Architecture::DM;
      const std::size_t n = ws.context.size() + (with_doc ? 1 : 0);
      if (n == 0) return result;
      if (with_doc) {
        auto row = params.docs->row(doc_row);
        for (std::size_t i = 0; i < d; ++i) ws.h[i] += row[i];
      }
      for (std::size_t w : ws.context) {
        auto row = params.words->row(w);
        for (std::size_t i = 0; i < d; ++i) ws.h[i] += row[i];
      }
      const T inv_n = T{1} / static_cast<T>(n);
      for (auto& v : ws.h) v *= inv_n;

      encoder.encode(tokens[pos], rng, ws.decisions);
      result.loss = score_decisions<T>(ws.h, ws.decisions, *params.outputs, ws.grad_h, lr, update_outputs, collect);
      result.predictions = 1;

      if (collect) {
        if (with_doc) SparseGradient::add<T>(collect->docs, doc_row, ws.grad_h, 1.0 / static_cast<double>(n));
        for (std::size_t w : ws.context)
          SparseGradient::add<T>(collect->words, w, ws.grad_h, 1.0 / static_cast<double>(n));
      }
      if (lr > 0) {
        const T step = lr * inv_n;
        if (with_doc && mask.docs) {
          auto row = params.docs->row(doc_row);
          for (std::size_t i = 0; i < d; ++i) row[i] -= step * ws.grad_h[i];
        }
        if (mask.words) {
          for (std::size_t w : ws.context) {
            auto row = params.words->row(w);
            for (std::size_t i = 0; i < d; ++i) row[i] -= step * ws.grad_h[i];
          }
        }
      }
      return result;
    }

    case Architecture::SkipGram: {
      const std::size_t center = tokens[pos];
      auto center_row = params.words->row(center);
      ws.h.assign(center_row.begin(), center_row.end());
      for (std::size_t target : ws.context) {
        encoder.encode(static_cast<TokenId>(target), rng, ws.decisions);
        result.loss += score_decisions<T>(ws.h, ws.decisions, *params.outputs, ws.grad_h, lr, update_outputs, collect);
        ++result.predictions;
      }
      if (result.predictions == 0) return result;
      if (collect) SparseGradient::add<T>(collect->words, center, ws.grad_h, 1.0);
      if (lr > 0 && mask.words)
        for (std::size_t i = 0; i < d; ++i) center_row[i] -= lr * ws.grad_h[i];
      return result;
    }

    case Architecture::DBOW: {
      auto row = params.docs->row(doc_row);
      ws.h.assign(row.begin(), row.end());
      encoder.encode(tokens[pos], rng, ws.decisions);
      result.loss = score_decisions<T>(ws.h, ws.decisions, *params.outputs, ws.grad_h, lr, update_outputs, collect);
      result.predictions = 1;
      if (collect) SparseGradient::add<T>(collect->docs, doc_row, ws.grad_h, 1.0);
      if (lr > 0 && mask.docs)
        for (std::size_t i = 0; i < d; ++i) row[i] -= lr * ws.grad_h[i];
      return result;
    }
  }
  return result;
}

}  // namespace seqvec
