#include <cmath>
#include <functional>
#include <numeric>

#include <gtest/gtest.h>

#include "treelstm/errors.h"
#include "treelstm/gradcheck.h"
#include "treelstm/heads.h"
#include "treelstm/rng.h"

namespace treelstm {
namespace {

void randomize(ParamSet& ps, Rng& rng, double scale) {
  for (auto& p : ps.params()) {
    for (auto& v : p.flat(Slot::kValue)) v = rng.uniform(-scale, scale);
  }
}

double numeric_grad(double& v, const std::function<double()>& f, double eps = 1e-5) {
  const double saved = v;
  v = saved + eps;
  const double up = f();
  v = saved - eps;
  const double down = f();
  v = saved;
  return (up - down) / (2 * eps);
}

TEST(Classify, ZeroWeightsGiveUniform) {
  Rng rng(1);
  ParamSet ps;
  add_classifier_params(ps, "cls", 5, 4, rng);
  ps.mat("cls.W").fill(0);
  ps.vec("cls.b").fill(0);
  const auto cp = bind_classifier_params(ps, "cls", Slot::kValue);
  const Vec p = classify(cp, Vec{1, -2, 3, 0.5});
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 0.2);
  EXPECT_THROW(classify(cp, Vec{1, 2}), DimensionError);
}

TEST(Softmax, SaturationAndShiftInvariance) {
  const Vec p = softmax(Vec{50, 0, 0, 0});
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    Vec z = init_vec(1 + rng.uniform_index(8), 5.0, rng);
    const Vec a = softmax(z);
    const double c = rng.uniform(-100, 100);
    for (auto& v : z.values()) v += c;
    const Vec b = softmax(z);
    EXPECT_NEAR(std::accumulate(a.values().begin(), a.values().end(), 0.0), 1.0, 1e-12);
    for (std::size_t k = 0; k < a.dim(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
  EXPECT_NEAR(softmax(Vec{1000, 0})[0], 1.0, 1e-15);
}

TEST(NllLoss, Examples) {
  const LossGrad exact = nll_loss_grad(Vec{0, 0, 1}, 2);
  EXPECT_EQ(exact.loss, 0.0);
  EXPECT_EQ(exact.d_logits, Vec(3));
  const LossGrad uniform = nll_loss_grad(Vec(5, 0.2), 1);
  EXPECT_NEAR(uniform.loss, std::log(5.0), 1e-15);
  EXPECT_THROW(nll_loss_grad(Vec(5, 0.2), 5), std::out_of_range);
}

TEST(NllLoss, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Vec z = init_vec(5, 3.0, rng);
    const std::size_t gold = rng.uniform_index(5);
    const LossGrad lg = nll_loss_grad(softmax(z), gold);
    for (std::size_t k = 0; k < 5; ++k) {
      const double n = numeric_grad(z[k], [&] { return -std::log(softmax(z)[gold]); });
      EXPECT_LE(relative_error(lg.d_logits[k], n, 1e-8), 1e-6);
    }
  }
}

TEST(ClassifierBackward, MatchesFiniteDifferences) {
  Rng rng(4);
  ParamSet ps;
  add_classifier_params(ps, "cls", 3, 4, rng);
  randomize(ps, rng, 1.0);
  const auto cp = bind_classifier_params(ps, "cls", Slot::kValue);
  const auto cg = bind_classifier_params(ps, "cls", Slot::kGrad);
  Vec h = init_vec(4, 1.0, rng);
  auto loss = [&] { return nll_loss_grad(classify(cp, h), 1).loss; };
  ps.zero_grads();
  const Vec dh = classifier_backward(cp, cg, h, nll_loss_grad(classify(cp, h), 1).d_logits);
  for (auto& p : ps.params()) {
    auto v = p.flat(Slot::kValue);
    auto g = p.flat(Slot::kGrad);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_LE(relative_error(g[k], numeric_grad(v[k], loss), 1e-8), 1e-6);
  }
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(relative_error(dh[k], numeric_grad(h[k], loss), 1e-8), 1e-6);
}

TEST(SparseTarget, WorkedCases) {
  EXPECT_EQ(sparse_target(4.5, 5), (Vec{0, 0, 0, 0.5, 0.5}));
  EXPECT_EQ(sparse_target(3, 5), (Vec{0, 0, 1, 0, 0}));
  EXPECT_EQ(sparse_target(5, 5), (Vec{0, 0, 0, 0, 1}));
  EXPECT_EQ(sparse_target(1, 5), (Vec{1, 0, 0, 0, 0}));
  EXPECT_THROW(sparse_target(0.99, 5), std::out_of_range);
  EXPECT_THROW(sparse_target(5.01, 5), std::out_of_range);
  EXPECT_THROW(sparse_target(NAN, 5), std::out_of_range);
}

TEST(SparseTarget, ExpectedRankEqualsScore) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t K = 2 + rng.uniform_index(9);
    const double y = rng.uniform(1.0, static_cast<double>(K));
    const Vec p = sparse_target(y, K);
    double mean = 0, total = 0;
    for (std::size_t k = 0; k < K; ++k) {
      EXPECT_GE(p[k], 0.0);
      mean += static_cast<double>(k + 1) * p[k];
      total += p[k];
    }
    EXPECT_NEAR(mean, y, 1e-12);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

struct SimFixture {
  ParamSet ps;
  SimilarityParams sp, sg;
  explicit SimFixture(std::size_t d, Rng& rng, double scale = 1.0) {
    add_similarity_params(ps, "sim", d, 6, 5, rng);
    randomize(ps, rng, scale);
    sp = bind_similarity_params(ps, "sim", Slot::kValue);
    sg = bind_similarity_params(ps, "sim", Slot::kGrad);
  }
};

TEST(SimilarityForward, IdenticalInputsAndZeroWeights) {
  Rng rng(6);
  SimFixture f(4, rng);
  const Vec h = init_vec(4, 1.0, rng);
  const SimilarityTrace t = similarity_forward(f.sp, h, h);
  EXPECT_EQ(t.h_diff, Vec(4));
  for (auto& p : f.ps.params()) {
    for (auto& v : p.flat(Slot::kValue)) v = 0;
  }
  EXPECT_DOUBLE_EQ(similarity_forward(f.sp, h, init_vec(4, 1.0, rng)).score, 3.0);
  EXPECT_THROW(similarity_forward(f.sp, h, Vec(3)), DimensionError);
}

TEST(SimilarityForward, SymmetricAndStrictlyBounded) {
  Rng rng(7);
  SimFixture f(5, rng, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec a = init_vec(5, 1.0, rng), b = init_vec(5, 1.0, rng);
    const SimilarityTrace ab = similarity_forward(f.sp, a, b), ba = similarity_forward(f.sp, b, a);
    EXPECT_EQ(ab.probs, ba.probs);
    EXPECT_EQ(ab.score, ba.score);
    EXPECT_GT(ab.score, 1.0);
    EXPECT_LT(ab.score, 5.0);
  }
}

TEST(KlLoss, IdentityAndNonNegativity) {
  const Vec p{0, 0.25, 0.75, 0, 0};
  EXPECT_NEAR(kl_loss_grad(p, p).loss, 0.0, 1e-15);
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec q = softmax(init_vec(5, 3.0, rng));
    const Vec t = sparse_target(rng.uniform(1, 5), 5);
    const LossGrad lg = kl_loss_grad(t, q);
    EXPECT_GE(lg.loss, 0.0);
    EXPECT_EQ(lg.d_logits, subtract(q, t));
  }
}

TEST(SimilarityBackward, MatchesFiniteDifferences) {
  Rng rng(9);
  SimFixture f(4, rng);
  Vec a = init_vec(4, 1.0, rng), b = init_vec(4, 1.0, rng);
  const Vec target = sparse_target(2.7, 5);
  auto loss = [&] { return kl_loss_grad(target, similarity_forward(f.sp, a, b).probs).loss; };
  f.ps.zero_grads();
  const SimilarityTrace t = similarity_forward(f.sp, a, b);
  const PairGrad pg = similarity_backward(f.sp, f.sg, t, kl_loss_grad(target, t.probs).d_logits);
  for (auto& p : f.ps.params()) {
    auto v = p.flat(Slot::kValue);
    auto g = p.flat(Slot::kGrad);
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_LE(relative_error(g[k], numeric_grad(v[k], loss), 1e-6), 1e-4) << p.name();
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LE(relative_error(pg.d_left[k], numeric_grad(a[k], loss), 1e-6), 1e-4);
    EXPECT_LE(relative_error(pg.d_right[k], numeric_grad(b[k], loss), 1e-6), 1e-4);
  }
}

}  // namespace
}  // namespace treelstm
