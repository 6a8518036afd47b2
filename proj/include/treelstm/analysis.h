#ifndef TREELSTM_ANALYSIS_H_
#define TREELSTM_ANALYSIS_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treelstm/embeddings.h"
#include "treelstm/tree.h"

namespace treelstm {

class Model;

struct LengthBin {
  double ell = 0.0;
  double value = 0.0;
  std::size_t count = 0;
};

// Metric over the examples selected by index.
using SubsetMetric = std::function<double(std::span<const std::size_t>)>;

// One bin per integer center ℓ in [1, max_center]: examples with length in
// [ℓ - half_width, ℓ + half_width]. The last center's window is open above,
// so every longer example lands there. max_center defaults to the longest
// length (rounded up). Empty bins are skipped.
std::vector<LengthBin> length_binned(std::span<const double> lengths, const SubsetMetric& metric,
                                     std::size_t half_width = 2,
                                     std::optional<std::size_t> max_center = std::nullopt);

// "ell<TAB>value<TAB>count" with a header line.
std::string format_length_bins(const std::vector<LengthBin>& bins);

struct Neighbor {
  std::size_t index = 0;  // position in the corpus
  double score = 0.0;
};

// Relatedness-model ranking: ŷ(query, corpus[i]) descending, ties in corpus
// order. Returns min(k, corpus size) entries; throws invalid_argument on an
// empty corpus.
std::vector<Neighbor> nearest_neighbors(const Model& model, const std::vector<Tree>& corpus,
                                        const Tree& query, std::size_t k);

// Baseline: cosine between mean word vectors.
std::vector<Neighbor> nearest_neighbors_mean(const EmbeddingTable& embeddings,
                                             const std::vector<Tree>& corpus, const Tree& query,
                                             std::size_t k);

Vec mean_word_vector(const EmbeddingTable& embeddings, const Tree& tree);
double cosine(const Vec& a, const Vec& b);

}  // namespace treelstm

#endif  // TREELSTM_ANALYSIS_H_
