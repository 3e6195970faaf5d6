#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/gradcheck.hpp"
#include "seqvec/embedding.hpp"
#include "seqvec/error.hpp"

using namespace seqvec;

namespace {

Vocabulary small_vocab(std::size_t v) {
  std::vector<std::string> t;
  std::vector<std::uint64_t> c;
  for (std::size_t i = 0; i < v; ++i) {
    t.push_back("k" + std::to_string(i));
    c.push_back(1 + i);
  }
  return Vocabulary(t, c);
}

TrainConfig small_config(Architecture arch, ObjectiveKind kind = ObjectiveKind::NegativeSampling) {
  TrainConfig cfg;
  cfg.architecture = arch;
  cfg.objective = kind;
  cfg.dim = 8;
  cfg.window = 2;
  cfg.negatives = 2;
  cfg.epochs = 5;
  cfg.seed = 3;
  return cfg;
}

// Two families with disjoint token inventories: tokens [0, 5) and [5, 10).
std::vector<TokenizedDoc> two_family_docs(std::size_t per_family, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TokenizedDoc> docs;
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t i = 0; i < per_family; ++i) {
      TokenizedDoc d;
      d.doc_tag = static_cast<std::uint32_t>(docs.size());
      for (int j = 0; j < 30; ++j) d.tokens.push_back(static_cast<TokenId>(5 * f + rng.below(5)));
      docs.push_back(std::move(d));
    }
  return docs;
}

}  // namespace

TEST_CASE("TrainConfig validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.dim == 250);
  CHECK(cfg.window == 5);
  CHECK(cfg.architecture == Architecture::DM);
  CHECK(cfg.alpha_min == doctest::Approx(cfg.alpha0 / 1e4));
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  bad([](TrainConfig& c) { c.dim = 0; });
  bad([](TrainConfig& c) { c.window = 0; });
  bad([](TrainConfig& c) { c.epochs = 0; });
  bad([](TrainConfig& c) { c.workers = 0; });
  bad([](TrainConfig& c) { c.negatives = 0; });
  bad([](TrainConfig& c) { c.alpha0 = 5.0; });
  bad([](TrainConfig& c) { c.alpha0 = 0.0; });
  bad([](TrainConfig& c) { c.alpha_min = c.alpha0; });
  bad([](TrainConfig& c) { c.subsample = -1.0; });
  TrainConfig hs;
  hs.objective = ObjectiveKind::HierarchicalSoftmax;
  hs.negatives = 0;
  CHECK_NOTHROW(hs.validate());
}

TEST_CASE("parse_architecture") {
  CHECK(parse_architecture("sg") == Architecture::SkipGram);
  CHECK(parse_architecture("skipgram") == Architecture::SkipGram);
  CHECK(parse_architecture("cbow") == Architecture::CBOW);
  CHECK_THROWS_AS(parse_architecture("lstm"), ConfigError);
}

TEST_CASE("init_model") {
  TrainConfig cfg = small_config(Architecture::DM);
  cfg.dim = 4;
  cfg.seed = 7;
  const auto a = init_model(small_vocab(6), 3, cfg);
  const auto b = init_model(small_vocab(6), 3, cfg);
  CHECK(a == b);
  CHECK(a.docs.rows() == 3);
  CHECK(a.words.rows() == 6);
  CHECK(a.outputs.rows() == 6);
  for (float v : a.words.values()) CHECK(std::abs(v) <= 0.5f / 4);
  for (float v : a.docs.values()) CHECK(std::abs(v) <= 0.5f / 4);
  for (float v : a.outputs.values()) CHECK(v == 0.0f);

  CHECK_THROWS_AS(init_model(Vocabulary{}, 3, cfg), DataError);
  cfg.dim = 0;
  CHECK_THROWS_AS(init_model(small_vocab(6), 3, cfg), ConfigError);

  TrainConfig hs = small_config(Architecture::DM, ObjectiveKind::HierarchicalSoftmax);
  const auto m = init_model(small_vocab(6), 2, hs);
  CHECK(m.outputs.rows() == 5);
  CHECK(m.vocab.huffman().has_value());
}

TEST_CASE("objective at h = 0") {
  const auto vocab = small_vocab(8);
  const std::size_t n = 3;
  const TargetEncoder enc(vocab, ObjectiveKind::NegativeSampling, n);
  Matrix<double> out(8, 4);
  Rng fill(1);
  for (auto& v : out.values()) v = fill.uniform() - 0.5;
  const std::vector<double> h(4, 0.0);

  Rng r1(5), r2(5);
  const auto g = objective_gradient<double>(h, 2, out, enc, r1);
  std::vector<Decision> dec;
  enc.encode(2, r2, dec);
  REQUIRE(dec.size() == n + 1);
  CHECK(g.loss == doctest::Approx((1 + n) * std::numbers::ln2).epsilon(1e-14));
  for (std::size_t i = 0; i < 4; ++i) {
    double expected = -0.5 * out(2, i);
    for (std::size_t j = 1; j < dec.size(); ++j) expected += 0.5 * out(dec[j].row, i);
    CHECK(g.grad_h[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("hierarchical softmax with two tokens") {
  Vocabulary vocab({"a", "b"}, {3, 1});
  vocab.ensure_huffman();
  const TargetEncoder enc(vocab, ObjectiveKind::HierarchicalSoftmax, 0);
  Matrix<double> inner(1, 3);
  inner(0, 0) = 0.3;
  inner(0, 1) = -0.7;
  inner(0, 2) = 0.2;
  const std::vector<double> h{0.5, 0.1, -0.4};
  const double f = 0.3 * 0.5 - 0.7 * 0.1 - 0.2 * 0.4;
  for (TokenId t : {0u, 1u}) {
    Rng r(1);
    const auto g = objective_gradient<double>(h, t, inner, enc, r);
    const int bit = (*vocab.huffman())[t].bits[0];
    const double expected = bit == 0 ? -std::log(sigmoid(f)) : -std::log(sigmoid(-f));
    CHECK(g.loss == doctest::Approx(expected).epsilon(1e-12));
  }
  for (std::uint64_t s = 0; s < 20; ++s)
    CHECK(testing::check_objective_gradient(ObjectiveKind::HierarchicalSoftmax, 1000 + s).worst < 1e-4);
}

TEST_CASE("objective_gradient matches finite differences") {
  for (auto kind : {ObjectiveKind::NegativeSampling, ObjectiveKind::HierarchicalSoftmax})
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto r = testing::check_objective_gradient(kind, s);
      CHECK(r.worst < 1e-4);
    }
}

TEST_CASE("architecture steps match finite differences") {
  for (auto kind : {ObjectiveKind::NegativeSampling, ObjectiveKind::HierarchicalSoftmax})
    for (auto arch : {Architecture::CBOW, Architecture::SkipGram, Architecture::DM, Architecture::DBOW}) {
      CAPTURE(to_string(arch));
      CAPTURE(static_cast<int>(kind));
      std::size_t informative = 0;
      double worst = 0.0;
      for (std::uint64_t s = 0; s < 100; ++s) {
        const auto r = testing::check_step_gradient(arch, kind, 7919 * s + 1);
        worst = std::max(worst, r.worst);
        informative += r.informative;
      }
      CHECK(worst < 1e-4);
      CHECK(informative >= 90);
    }
}

TEST_CASE("averaged inputs share grad_h equally") {
  for (auto arch : {Architecture::DM, Architecture::CBOW}) {
    auto model = init_model(small_vocab(6), 1, small_config(arch));
    Rng fill(2);
    for (auto& v : model.outputs.values()) v = static_cast<float>(fill.uniform() - 0.5);
    const std::vector<TokenId> tokens{0, 1, 2, 3, 4};
    const auto before = model;
    const TargetEncoder enc(model.vocab, ObjectiveKind::NegativeSampling, 2);

    Rng probe(4);
    SparseGradient g;
    StepWorkspace<float> ws;
    const auto params = model.parameters();
    train_position<float>(arch, params, UpdateMask{true, true, true}, tokens, 0, 2, 2, enc, probe, 0.1f, ws, &g);

    const std::size_t n = 4 + (arch == Architecture::DM ? 1 : 0);
    // grad_h / n is what every contributor receives.
    const auto& share = g.words.begin()->second;
    for (TokenId w : {0u, 1u, 3u, 4u})
      for (std::size_t i = 0; i < 8; ++i) {
        const double delta = model.words(w, i) - before.words(w, i);
        CHECK(delta == doctest::Approx(-0.1 * share[i]).epsilon(1e-4));
      }
    CHECK(g.words.size() == 4);
    if (arch == Architecture::DM) {
      for (std::size_t i = 0; i < 8; ++i) {
        CHECK(model.docs(0, i) - before.docs(0, i) == doctest::Approx(-0.1 * share[i]).epsilon(1e-4));
        CHECK(g.docs.at(0)[i] == doctest::Approx(share[i]).epsilon(1e-12));
      }
    } else {
      CHECK(model.docs == before.docs);
    }
    (void)n;
  }
}

TEST_CASE("DM training lowers the loss") {
  TrainConfig cfg = small_config(Architecture::DM);
  cfg.epochs = 50;
  cfg.negatives = 2;
  cfg.window = 2;
  const Vocabulary vocab({"t0", "t1"}, {40, 40});
  std::vector<TokenizedDoc> docs;
  for (int i = 0; i < 10; ++i) docs.push_back({0, 0, {0, 1, 0, 1}});
  auto model = init_model(vocab, 1, cfg);
  double after_first = 0.0;
  TrainHooks hooks;
  hooks.on_epoch = [&](std::size_t epoch, const EmbeddingModel& m) {
    if (epoch == 1) after_first = loss_estimate(m, docs, 99);
  };
  train(model, docs, hooks);
  CHECK(loss_estimate(model, docs, 99) < after_first);
}

TEST_CASE("degenerate window with a single-token document") {
  TrainConfig cfg = small_config(Architecture::DM);
  cfg.window = 1;
  auto model = init_model(small_vocab(3), 1, cfg);
  const std::vector<TokenizedDoc> docs{{0, 0, {1}}};
  CHECK_NOTHROW(train(model, docs));
  CHECK(model.all_finite());
}

TEST_CASE("loss_estimate on an untrained model") {
  TrainConfig cfg = small_config(Architecture::DM);
  cfg.negatives = 5;
  const auto docs = two_family_docs(5, 1);
  const auto model = init_model(small_vocab(10), docs.size(), cfg);
  const double l = loss_estimate(model, docs, 3);
  CHECK(l == doctest::Approx(6 * std::numbers::ln2).epsilon(1e-12));
  CHECK(loss_estimate(model, docs, 3) == l);
}

TEST_CASE("training is deterministic with one worker") {
  for (auto arch : {Architecture::CBOW, Architecture::SkipGram, Architecture::DM, Architecture::DBOW})
    for (auto kind : {ObjectiveKind::NegativeSampling, ObjectiveKind::HierarchicalSoftmax}) {
      TrainConfig cfg = small_config(arch, kind);
      cfg.subsample = 0.05;
      const auto docs = two_family_docs(6, 2);
      auto a = init_model(small_vocab(10), docs.size(), cfg);
      auto b = a;
      train(a, docs);
      train(b, docs);
      CHECK(a == b);
      CHECK(a.all_finite());
      CHECK(loss_estimate(a, docs, 5) < 6 * std::numbers::ln2);
    }
}

TEST_CASE("parameters stay finite every epoch") {
  TrainConfig cfg = small_config(Architecture::DM);
  cfg.alpha0 = 1.0;
  cfg.alpha_min = 0.5;
  cfg.epochs = 10;
  const auto docs = two_family_docs(10, 3);
  auto model = init_model(small_vocab(10), docs.size(), cfg);
  TrainHooks hooks;
  std::size_t checked = 0;
  hooks.on_epoch = [&](std::size_t, const EmbeddingModel& m) {
    CHECK(m.all_finite());
    ++checked;
  };
  train(model, docs, hooks);
  CHECK(checked == 10);
}

TEST_CASE("DBOW leaves word vectors at their initial values") {
  const auto docs = two_family_docs(10, 4);
  auto model = init_model(small_vocab(10), docs.size(), small_config(Architecture::DBOW));
  const auto words = model.words;
  const auto doc_rows = model.docs;
  train(model, docs);
  CHECK(model.words == words);
  CHECK_FALSE(model.docs == doc_rows);
}

TEST_CASE("DBOW separates disjoint token families") {
  TrainConfig cfg = small_config(Architecture::DBOW);
  cfg.epochs = 20;
  cfg.dim = 16;
  const auto docs = two_family_docs(10, 5);
  auto model = init_model(small_vocab(10), docs.size(), cfg);
  train(model, docs);
  double within = 0.0, across = 0.0;
  std::size_t nw = 0, na = 0;
  for (std::size_t i = 0; i < docs.size(); ++i)
    for (std::size_t j = i + 1; j < docs.size(); ++j) {
      const double c = cosine(model.docs.row(i), model.docs.row(j));
      if ((i < 10) == (j < 10)) {
        within += c;
        ++nw;
      } else {
        across += c;
        ++na;
      }
    }
  CHECK(within / nw - across / na > 0.0);
}

TEST_CASE("word-level architectures fill D with mean word vectors") {
  for (auto arch : {Architecture::CBOW, Architecture::SkipGram}) {
    const auto docs = two_family_docs(3, 6);
    auto model = init_model(small_vocab(10), docs.size(), small_config(arch));
    train(model, docs);
    for (std::size_t r = 0; r < docs.size(); ++r) {
      const auto v = infer_doc(model, docs[r].tokens);
      for (std::size_t i = 0; i < 8; ++i) CHECK(model.docs(r, i) == doctest::Approx(v[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("multi-worker training runs and stays finite") {
  TrainConfig cfg = small_config(Architecture::DM);
  cfg.workers = 3;
  const auto docs = two_family_docs(10, 7);
  auto model = init_model(small_vocab(10), docs.size(), cfg);
  train(model, docs);
  CHECK(model.all_finite());
}

TEST_CASE("train rejects inconsistent input") {
  auto model = init_model(small_vocab(4), 1, small_config(Architecture::DM));
  CHECK_THROWS_AS(train(model, std::vector<TokenizedDoc>{}), DataError);
  CHECK_THROWS_AS(train(model, std::vector<TokenizedDoc>{{0, 0, {9}}}), DataError);
  CHECK_THROWS_AS(train(model, std::vector<TokenizedDoc>{{4, 0, {1}}}), DataError);
}

TEST_CASE("infer_doc") {
  const auto docs = two_family_docs(5, 8);
  auto model = init_model(small_vocab(10), docs.size(), small_config(Architecture::DM));
  train(model, docs);

  InferOptions none;
  none.epochs = 0;
  none.seed = 4;
  const auto a = infer_doc(model, docs[0].tokens, none);
  CHECK(a == infer_doc(model, docs[0].tokens, none));
  for (float v : a) CHECK(std::abs(v) <= 0.5f / 8);

  InferOptions opts;
  opts.seed = 4;
  const auto words = model.words;
  const auto outputs = model.outputs;
  const auto b = infer_doc(model, docs[0].tokens, opts);
  CHECK(b == infer_doc(model, docs[0].tokens, opts));
  CHECK(b != a);
  CHECK(model.words == words);
  CHECK(model.outputs == outputs);

  const std::vector<TokenId> unknown{100, 200};
  CHECK_THROWS_AS(infer_doc(model, unknown), DataError);
  const std::vector<TokenId> mixed{100, 1, 2};
  CHECK_NOTHROW(infer_doc(model, mixed));
}
