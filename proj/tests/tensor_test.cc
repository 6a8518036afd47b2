#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "treelstm/errors.h"
#include "treelstm/rng.h"
#include "treelstm/tensor.h"

namespace treelstm {
namespace {

TEST(Rng, MatchesSplitMix64ReferenceStream) {
  Rng rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
}

TEST(Rng, Uniform01UsesTop53Bits) {
  Rng a(99), b(99);
  const double u = a.uniform01();
  EXPECT_EQ(u, static_cast<double>(b.next() >> 11) * std::ldexp(1.0, -53));
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng rng(5);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++seen[k];
  }
  for (int c : seen) EXPECT_GT(c, 800);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(3);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(AffineCombine, ZeroOperandsLeaveBias) {
  const Mat w(2, 2), u(2, 2);
  const Vec x(2), h(2), b{1, 2};
  const MatVecTerm terms[] = {{u, h}};
  EXPECT_EQ(affine_combine(&w, &x, terms, b), (Vec{1, 2}));
}

TEST(AffineCombine, IdentityRecurrenceWithoutInput) {
  const Mat u = Mat::identity(2);
  const Vec h{3, -1}, b(2);
  const MatVecTerm terms[] = {{u, h}};
  EXPECT_EQ(affine_combine(nullptr, nullptr, terms, b), (Vec{3, -1}));
}

TEST(AffineCombine, HandArithmetic) {
  const Mat w{{1, 2}, {0, 1}};
  const Mat u{{1, 0}, {0, 2}};
  const Vec x{1, 1}, h{2, 3}, b{1, 1};
  const MatVecTerm terms[] = {{u, h}};
  // (1+2) + 2 + 1 = 6 ; 1 + 6 + 1 = 8
  EXPECT_EQ(affine_combine(&w, &x, terms, b), (Vec{6, 8}));
}

TEST(AffineCombine, NamesTheOffendingOperand) {
  const Mat w(2, 3);
  const Vec x(2), b(2);
  try {
    affine_combine(&w, &x, {}, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("x"), std::string::npos);
  }
  const Mat u(2, 2);
  const Vec h(3);
  const MatVecTerm terms[] = {{u, h}};
  try {
    affine_combine(nullptr, nullptr, terms, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("h[0]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(affine_combine(&w, nullptr, {}, b), std::invalid_argument);
}

TEST(AffineCombine, LinearInRecurrentOperand) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(6), e = 1 + rng.uniform_index(6);
    const Mat w = init_mat(d, e, 1.0, rng), u = init_mat(d, d, 1.0, rng);
    const Vec x = init_vec(e, 1.0, rng), h1 = init_vec(d, 1.0, rng), h2 = init_vec(d, 1.0, rng);
    const Vec b = init_vec(d, 1.0, rng);
    const Vec hs = add(h1, h2);
    const MatVecTerm t1[] = {{u, h1}}, t2[] = {{u, h2}}, ts[] = {{u, hs}};
    const Vec lhs = affine_combine(&w, &x, ts, b);
    // (Wx + U h1 + b) + (U h2 + b) - b
    const Vec rhs = subtract(add(affine_combine(&w, &x, t1, b), affine_combine(nullptr, nullptr, t2, b)), b);
    for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(lhs[k], rhs[k], 1e-12);
  }
}

TEST(Elementwise, KnownValues) {
  EXPECT_EQ(elementwise(Vec{0, 0}, Activation::kSigmoid), (Vec{0.5, 0.5}));
  EXPECT_EQ(elementwise(Vec{0}, Activation::kTanh), (Vec{0}));
  EXPECT_NEAR(elementwise(Vec{50}, Activation::kSigmoid)[0], 1.0, 1e-15);
}

TEST(Elementwise, SigmoidStrictlyInsideUnitInterval) {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const double z = rng.uniform(-30, 30);
    const double s = sigmoid(z);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    EXPECT_NEAR(s, 1.0 / (1.0 + std::exp(-z)), 1e-15);
  }
  EXPECT_GT(sigmoid(-700), 0.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000)));
}

TEST(Hadamard, Examples) {
  EXPECT_EQ(hadamard(Vec{1, 2}, Vec{0, 0}), (Vec{0, 0}));
  EXPECT_EQ(hadamard(Vec{1, 2}, Vec{1, 1}), (Vec{1, 2}));
  EXPECT_EQ(hadamard(Vec{2, 3}, Vec{4, 5}), (Vec{8, 15}));
  EXPECT_THROW(hadamard(Vec{1}, Vec{1, 2}), DimensionError);
}

TEST(VectorOps, ConcatSliceAndTransposedProducts) {
  const Vec a{1, 2}, b{3};
  EXPECT_EQ(concat(a, b), (Vec{1, 2, 3}));
  EXPECT_EQ(slice(Vec{1, 2, 3, 4}, 1, 2), (Vec{2, 3}));
  EXPECT_THROW(slice(Vec{1, 2}, 1, 2), DimensionError);
  const Mat m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(matvec(m, Vec{1, 0, 1}), (Vec{4, 10}));
  Vec out{1, 1, 1};
  matvec_transposed_acc(m, Vec{1, 1}, out);
  EXPECT_EQ(out, (Vec{6, 8, 10}));
  Mat g(2, 3);
  add_outer(g, Vec{1, 2}, Vec{1, 0, -1}, 2.0);
  EXPECT_EQ(g, (Mat{{2, 0, -2}, {4, 0, -4}}));
}

TEST(InitMat, DeterministicAndBounded) {
  Rng a(1), b(1), c(2);
  const Mat m1 = init_mat(5, 7, 0.05, a);
  const Mat m2 = init_mat(5, 7, 0.05, b);
  const Mat m3 = init_mat(5, 7, 0.05, c);
  EXPECT_EQ(m1, m2);
  EXPECT_NE(m1, m3);
  for (double v : m1.values()) {
    EXPECT_GE(v, -0.05);
    EXPECT_LE(v, 0.05);
  }
  EXPECT_THROW(init_mat(2, 2, 0.0, a), std::invalid_argument);
}

TEST(AllFinite, DetectsNanAndInf) {
  EXPECT_TRUE(all_finite(Vec{1, 2}.span()));
  EXPECT_FALSE(all_finite(Vec{1, NAN}.span()));
  EXPECT_FALSE(all_finite(Vec{INFINITY}.span()));
}

}  // namespace
}  // namespace treelstm
