#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "treelstm/embeddings.h"
#include "treelstm/errors.h"
#include "treelstm/rng.h"
#include "treelstm/tree_io.h"

namespace treelstm {
namespace {

TEST(ReadConstituency, SkipsBlankLinesAndReportsLine) {
  std::istringstream in("(3 (2 good) (2 movie))\n\n(1 word)\n");
  const auto trees = read_constituency(in);
  ASSERT_EQ(trees.size(), 2u);
  EXPECT_EQ(trees[1].words(), (std::vector<std::string>{"word"}));
  std::istringstream bad("(1 a)\n(1 (2 a)\n");
  try {
    read_constituency(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ReadDependency, BlankLineSeparatedBlocks) {
  std::istringstream in("1\tdogs\t2\n2\trun\t0\n\n\n1\thi\t0\n");
  const auto trees = read_dependency(in);
  ASSERT_EQ(trees.size(), 2u);
  EXPECT_EQ(trees[0].length(), 2u);
  EXPECT_EQ(trees[1].words()[0], "hi");
}

TEST(ReadDependency, ErrorMentionsLineNumber) {
  std::istringstream in("1\ta\t0\n\n1\tb\t0\n2\tc\t0\n");
  try {
    read_dependency(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
  }
}

TEST(SpanLabels, RoundTrip) {
  const std::vector<SpanLabels> blocks{{{{0, 2}, 4}, {{0, 1}, 2}}, {{{0, 3}, 1}}};
  std::ostringstream out;
  write_span_labels(out, blocks);
  std::istringstream in(out.str());
  EXPECT_EQ(read_span_labels(in), blocks);
  std::istringstream bad("0\t2\n");
  EXPECT_THROW(read_span_labels(bad), ParseError);
  std::istringstream empty_range("2\t2\t1\n");
  EXPECT_THROW(read_span_labels(empty_range), ParseError);
}

TEST(ReadPairs, HeaderColumnsInAnyOrder) {
  std::istringstream in(
      "relatedness_score\tpair_ID\tentailment_judgment\tsentence_A\tsentence_B\n"
      "4.5\t1\tNEUTRAL\ta man runs\ta person runs\n"
      "1.0\t2\tNEUTRAL\tdogs bark\tcats eat\n");
  const auto pairs = read_pairs(in);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].id, "1");
  EXPECT_EQ(pairs[0].sentence_b, "a person runs");
  EXPECT_DOUBLE_EQ(pairs[0].score, 4.5);
  EXPECT_EQ(split_tokens(pairs[1].sentence_a), (std::vector<std::string>{"dogs", "bark"}));
}

TEST(ReadPairs, Errors) {
  std::istringstream missing("pair_ID\tsentence_A\trelatedness_score\n1\ta\t3\n");
  EXPECT_THROW(read_pairs(missing), ParseError);
  std::istringstream bad_score("pair_ID\tsentence_A\tsentence_B\trelatedness_score\n1\ta\tb\thigh\n");
  EXPECT_THROW(read_pairs(bad_score), ParseError);
  EXPECT_THROW(read_pairs_file("/nonexistent/pairs.tsv"), IoError);
}

TEST(Vocab, CountsDistinctTokensPlusUnk) {
  const Vocab v = build_vocab({{"a", "b", "a"}});
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.id("a"), 1u);
  EXPECT_EQ(v.id("b"), 2u);
  EXPECT_EQ(v.id("never"), Vocab::kUnk);
  EXPECT_EQ(build_vocab({}).size(), 1u);
  EXPECT_EQ(build_vocab({{}}).tokens(), (std::vector<std::string>{Vocab::kUnkToken}));
}

TEST(Vocab, DeterministicAndRoundTrips) {
  const std::vector<std::vector<std::string>> corpus{{"x", "y"}, {"z", "x"}};
  const Vocab a = build_vocab(corpus), b = build_vocab(corpus);
  EXPECT_EQ(a.tokens(), b.tokens());
  std::ostringstream out;
  write_vocab(out, a);
  std::istringstream in(out.str());
  EXPECT_EQ(read_vocab(in).tokens(), a.tokens());
  std::istringstream bad("x\ny\n");
  EXPECT_THROW(read_vocab(bad), ParseError);
}

TEST(LoadEmbeddings, CopiesKnownRowsExactly) {
  const Vocab v = build_vocab({{"cat", "zzz"}});
  std::istringstream in("dog 9 9 9\ncat 0.25 -1.5 3e-2\n");
  Rng rng(1);
  const EmbeddingLoad load = load_embeddings(in, v, 3, rng);
  EXPECT_EQ(load.table.lookup(v.id("cat")), (Vec{0.25, -1.5, 0.03}));
  EXPECT_EQ(load.found, 1u);
  EXPECT_DOUBLE_EQ(load.coverage, 1.0 / 3.0);
}

TEST(LoadEmbeddings, OovRowsAreSmallAndSeedDeterministic) {
  const Vocab v = build_vocab({{"zzz"}});
  auto load = [&](std::uint64_t seed) {
    std::istringstream in("cat 1 2\n");
    Rng rng(seed);
    return load_embeddings(in, v, 2, rng).table;
  };
  const EmbeddingTable a = load(3), b = load(3), c = load(4);
  for (std::size_t id = 0; id < v.size(); ++id) {
    for (double x : a.lookup(id).values()) {
      EXPECT_GE(x, -0.05);
      EXPECT_LE(x, 0.05);
    }
  }
  EXPECT_EQ(a.vectors(), b.vectors());
  EXPECT_NE(a.vectors(), c.vectors());
  // unk has its own initialized row
  EXPECT_NE(a.lookup(Vocab::kUnk), a.lookup(v.id("zzz")));
}

TEST(LoadEmbeddings, RaggedLineReportsLineNumber) {
  const Vocab v = build_vocab({{"cat"}});
  std::istringstream in("cat 1 2 3\ndog 1 2\n");
  Rng rng(1);
  try {
    load_embeddings(in, v, 3, rng);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
  Rng r2(1);
  EXPECT_THROW(load_embeddings_file("/nonexistent/vectors.txt", v, 3, r2), IoError);
}

TEST(EmbeddingTable, LookupBounds) {
  EmbeddingTable t(Mat{{1, 2}, {3, 4}}, false);
  EXPECT_EQ(t.lookup(1), (Vec{3, 4}));
  EXPECT_THROW(t.lookup(2), std::out_of_range);
}

TEST(EmbeddingTable, FrozenTableIgnoresGradients) {
  EmbeddingTable t(Mat{{1, 2}, {3, 4}}, false);
  const Mat before = t.vectors();
  t.accumulate_grad(0, Vec{1, 1});
  EXPECT_TRUE(t.pending_grads().empty());
  t.adagrad_update(0.1, 1e-10);
  EXPECT_EQ(t.vectors(), before);
}

TEST(EmbeddingTable, AdagradTouchesOnlyBufferedRows) {
  EmbeddingTable t(Mat{{1, 2}, {3, 4}, {5, 6}}, true);
  t.accumulate_grad(1, Vec{0.5, -2.0});
  t.accumulate_grad(1, Vec{0.5, 0.0});
  t.adagrad_update(0.1, 0.0);
  // g = (1, -2); G = g²; step = lr·g/|g| = ±0.1
  EXPECT_EQ(t.lookup(0), (Vec{1, 2}));
  EXPECT_EQ(t.lookup(2), (Vec{5, 6}));
  EXPECT_NEAR(t.lookup(1)[0], 2.9, 1e-15);
  EXPECT_NEAR(t.lookup(1)[1], 4.1, 1e-15);
  EXPECT_TRUE(t.pending_grads().empty());
  EXPECT_EQ(t.accumulators().row(1)[1], 4.0);
}

TEST(EmbeddingTable, NonFiniteGradientRejected) {
  EmbeddingTable t(Mat{{1, 2}}, true);
  t.accumulate_grad(0, Vec{NAN, 0});
  EXPECT_THROW(t.adagrad_update(0.1, 1e-10), NumericError);
  EXPECT_EQ(t.lookup(0), (Vec{1, 2}));
}

}  // namespace
}  // namespace treelstm
