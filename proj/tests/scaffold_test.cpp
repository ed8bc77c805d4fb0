#include "framespan/scaffold.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "framespan/config.hpp"

using namespace framespan;

namespace {

Config small_config() {
  Config cfg;
  cfg.hidden_size = 3;
  cfg.dim_word = 4;
  cfg.dim_pos = 2;
  cfg.dim_frame = 3;
  cfg.dim_lu = 2;
  cfg.dim_role = 2;
  cfg.dim_scaffold_label = 2;
  cfg.dim_distance = 2;
  cfg.distance_clamp = 5;
  cfg.max_span_length = 3;
  return cfg;
}

// span table whose cells are direct inputs, sidestepping the encoders
SpanTable input_spans(Graph& g, int n, int b, int dim, Rng& rng) {
  SpanTable t;
  t.n = n;
  t.b = b;
  t.cells.assign(static_cast<size_t>(n) * n, Node{});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n && j - i + 1 <= b; ++j) {
      Tensor v({dim});
      for (auto& x : v.v) x = rng.uniform(-1.0, 1.0);
      t.cells[static_cast<size_t>(i) * n + j] = g.input(v);
    }
  return t;
}

}  // namespace

TEST(ScaffoldLoss, ZeroScoresGiveLog2PerSpan) {
  // zeroed output weights make every psi vanish, so each span contributes
  // exactly log 2; n=2 with D=2 has three spans
  Rng rng(21);
  ParameterStore store;
  Parameter& w1 = store.add_uniform("scaffold/W1", {3, 6}, rng);
  Parameter& w2 = store.add("scaffold/w2", {3});
  Parameter& labels = store.add_uniform("scaffold/labels", {2, 2}, rng);
  ScaffoldParams p{w1, w2, labels};

  Graph g;
  SpanTable spans = input_spans(g, 2, 2, 4, rng);
  Node loss = scaffold_loss(g, p, spans, {{0, 1}});
  EXPECT_NEAR(g.scalar_value(loss), 3.0 * std::log(2.0), 1e-12);
}

TEST(ScaffoldLoss, HandCraftedMarginGivesClosedForm) {
  // psi(r) reads only the label row: psi(0) = 0, psi(1) = log 9. A positive
  // span then costs log(10/9), a negative one log 10.
  ParameterStore store;
  Parameter& w1 = store.add("scaffold/W1", {1, 3});
  w1.value.v = {0.0, 0.0, 1.0};
  Parameter& w2 = store.add("scaffold/w2", {1});
  w2.value.v = {1.0};
  Parameter& labels = store.add("scaffold/labels", {2, 1});
  labels.value.v = {0.0, std::log(9.0)};
  ScaffoldParams p{w1, w2, labels};

  Graph g;
  SpanTable t;
  t.n = 1;
  t.b = 1;
  t.cells = {g.input(Tensor({2}, {0.3, -0.8}))};

  Node pos_loss = scaffold_loss(g, p, t, {{0, 0}});
  EXPECT_NEAR(g.scalar_value(pos_loss), std::log(10.0 / 9.0), 1e-12);
  Node neg_loss = scaffold_loss(g, p, t, {});
  EXPECT_NEAR(g.scalar_value(neg_loss), std::log(10.0), 1e-12);
}

TEST(ScaffoldLoss, ClassProbabilitiesSumToOne) {
  Rng rng(22);
  Config cfg = small_config();
  ParameterStore store;
  ScaffoldParams p = ScaffoldParams::create(store, cfg, rng);
  Graph g;
  SpanTable spans = input_spans(g, 3, 3, 2 * cfg.hidden_size, rng);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      Node p1 = scaffold_positive_prob(g, p, spans.at(i, j));
      Node p0 = g.logistic(
          g.sub(psi_score(g, p, spans.at(i, j), 0), psi_score(g, p, spans.at(i, j), 1)));
      EXPECT_NEAR(g.scalar_value(p0) + g.scalar_value(p1), 1.0, 1e-12);
    }
}

TEST(ScaffoldLoss, LossIsNegLogProbOfTruth) {
  Rng rng(23);
  Config cfg = small_config();
  ParameterStore store;
  ScaffoldParams p = ScaffoldParams::create(store, cfg, rng);
  Graph g;
  SpanTable t;
  t.n = 1;
  t.b = 1;
  Tensor v({2 * cfg.hidden_size});
  for (auto& x : v.v) x = rng.uniform(-1.0, 1.0);
  t.cells = {g.input(v)};

  Node loss_pos = scaffold_loss(g, p, t, {{0, 0}});
  Node prob_pos = scaffold_positive_prob(g, p, t.at(0, 0));
  EXPECT_NEAR(g.scalar_value(loss_pos), -std::log(g.scalar_value(prob_pos)), 1e-12);
}

TEST(ScaffoldLoss, IdenticalLabelRowsGiveChanceLoss) {
  Rng rng(24);
  Config cfg = small_config();
  ParameterStore store;
  ScaffoldParams p = ScaffoldParams::create(store, cfg, rng);
  for (int k = 0; k < cfg.dim_scaffold_label; ++k)
    p.label_table.value.at(1, k) = p.label_table.value.at(0, k);
  Graph g;
  SpanTable spans = input_spans(g, 2, 2, 2 * cfg.hidden_size, rng);
  Node loss = scaffold_loss(g, p, spans, {{0, 0}, {0, 1}});
  EXPECT_NEAR(g.scalar_value(loss), 3.0 * std::log(2.0), 1e-12);
}

TEST(ScaffoldLoss, PushesGradientIntoSharedEncoders) {
  Rng rng(25);
  Config cfg = small_config();
  ParameterStore store;
  EncoderParams enc = EncoderParams::create(store, cfg, 6, 3, 2, 2, 5, 0, rng);
  ScaffoldParams p = ScaffoldParams::create(store, cfg, rng);

  Graph g;
  TokenIds ids;
  ids.word = {1, 4, 2};
  ids.pretrained = {0, 0, 0};
  ids.pos = {1, 2, 1};
  std::vector<Node> h_tok = encode_tokens(g, enc, cfg, ids, nullptr, kNoTarget);
  SpanTable spans = encode_spans(g, enc, h_tok, cfg.max_span_length);
  store.zero_grads();
  g.backward(scaffold_loss(g, p, spans, {{0, 0}, {1, 2}}));

  auto nonzero = [](const Parameter& q) {
    for (double x : q.grad.v)
      if (x != 0.0) return true;
    return false;
  };
  EXPECT_TRUE(nonzero(enc.span_fwd.wix));
  EXPECT_TRUE(nonzero(enc.span_bwd.wix));
  EXPECT_TRUE(nonzero(enc.tok_fwd.wix));
  EXPECT_TRUE(nonzero(enc.tok_bwd.wih));
  EXPECT_TRUE(nonzero(enc.word_table));
  EXPECT_TRUE(nonzero(p.w1));
  EXPECT_TRUE(nonzero(p.w2));
  EXPECT_TRUE(nonzero(p.label_table));
  // the argument-only pieces stay untouched
  EXPECT_FALSE(nonzero(enc.tgt.wix));
  EXPECT_FALSE(nonzero(enc.frame_table));
  EXPECT_FALSE(nonzero(enc.role_table));
}

TEST(ScaffoldLoss, GradientsMatchFiniteDifferences) {
  Rng rng(26);
  Config cfg = small_config();
  ParameterStore store;
  EncoderParams enc = EncoderParams::create(store, cfg, 6, 3, 2, 2, 5, 0, rng);
  ScaffoldParams p = ScaffoldParams::create(store, cfg, rng);

  TokenIds ids;
  ids.word = {2, 5, 1};
  ids.pretrained = {0, 0, 0};
  ids.pos = {2, 1, 2};
  std::vector<std::pair<int, int>> positives = {{0, 1}, {2, 2}};

  auto loss_value = [&]() {
    Graph g;
    std::vector<Node> h_tok = encode_tokens(g, enc, cfg, ids, nullptr, kNoTarget);
    SpanTable spans = encode_spans(g, enc, h_tok, cfg.max_span_length);
    return g.scalar_value(scaffold_loss(g, p, spans, positives));
  };
  store.zero_grads();
  {
    Graph g;
    std::vector<Node> h_tok = encode_tokens(g, enc, cfg, ids, nullptr, kNoTarget);
    SpanTable spans = encode_spans(g, enc, h_tok, cfg.max_span_length);
    g.backward(scaffold_loss(g, p, spans, positives));
  }

  struct Probe {
    Parameter* q;
    int idx;
  };
  std::vector<Probe> probes = {
      {&p.w1, 1}, {&p.w2, 0}, {&p.label_table, 2}, {&enc.span_fwd.wix, 4}, {&enc.tok_bwd.wcx, 2}};
  for (const auto& pr : probes) {
    double saved = pr.q->value.v[pr.idx];
    pr.q->value.v[pr.idx] = saved + 1e-6;
    double up = loss_value();
    pr.q->value.v[pr.idx] = saved - 1e-6;
    double down = loss_value();
    pr.q->value.v[pr.idx] = saved;
    double fd = (up - down) / 2e-6;
    EXPECT_NEAR(pr.q->grad.v[pr.idx], fd, 1e-6 * std::max(1.0, std::abs(fd)))
        << pr.q->name << "[" << pr.idx << "]";
  }
}

TEST(JointLoss, CombinesTasksWithDelta) {
  Graph g;
  Node arg = g.constant(2.0);
  Node sc = g.constant(3.0);
  EXPECT_DOUBLE_EQ(g.scalar_value(joint_loss(g, &arg, sc, 0.17)), 2.0 + 0.17 * 3.0);
  EXPECT_DOUBLE_EQ(g.scalar_value(joint_loss(g, nullptr, sc, 0.17)), 0.17 * 3.0);
}

TEST(PsiScore, RejectsBadLabel) {
  Rng rng(27);
  Config cfg = small_config();
  ParameterStore store;
  ScaffoldParams p = ScaffoldParams::create(store, cfg, rng);
  Graph g;
  Node span = g.input(Tensor({2 * cfg.hidden_size}));
  EXPECT_THROW(psi_score(g, p, span, 2), error);
  EXPECT_THROW(psi_score(g, p, span, -1), error);
}
