#include "treelstm/analysis.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "treelstm/model.h"

namespace treelstm {

std::vector<LengthBin> length_binned(std::span<const double> lengths, const SubsetMetric& metric,
                                     std::size_t half_width,
                                     std::optional<std::size_t> max_center) {
  if (lengths.empty()) return {};
  const double longest = *std::max_element(lengths.begin(), lengths.end());
  const std::size_t last =
      max_center.value_or(static_cast<std::size_t>(std::max(1.0, std::ceil(longest))));
  if (last == 0) throw std::invalid_argument("length_binned: max_center must be positive");
  const double hw = static_cast<double>(half_width);

  std::vector<LengthBin> bins;
  std::vector<std::size_t> members;
  for (std::size_t c = 1; c <= last; ++c) {
    const double ell = static_cast<double>(c);
    members.clear();
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      const double len = lengths[i];
      if (len >= ell - hw && (c == last || len <= ell + hw)) members.push_back(i);
    }
    if (members.empty()) continue;
    bins.push_back({ell, metric(members), members.size()});
  }
  return bins;
}

std::string format_length_bins(const std::vector<LengthBin>& bins) {
  std::ostringstream out;
  out.precision(10);
  out << "ell\tvalue\tcount\n";
  for (const auto& b : bins) out << b.ell << '\t' << b.value << '\t' << b.count << '\n';
  return out.str();
}

namespace {

std::vector<Neighbor> top_k(std::vector<Neighbor> all, std::size_t k) {
  std::stable_sort(all.begin(), all.end(),
                   [](const Neighbor& a, const Neighbor& b) { return a.score > b.score; });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace

std::vector<Neighbor> nearest_neighbors(const Model& model, const std::vector<Tree>& corpus,
                                        const Tree& query, std::size_t k) {
  if (corpus.empty()) throw std::invalid_argument("nearest_neighbors: empty corpus");
  std::vector<Neighbor> all;
  all.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    all.push_back({i, model.predict_score(query, corpus[i])});
  }
  return top_k(std::move(all), k);
}

Vec mean_word_vector(const EmbeddingTable& embeddings, const Tree& tree) {
  Vec m(embeddings.dim());
  for (std::size_t id : tree.word_ids()) {
    auto row = embeddings.vectors().row(id);
    for (std::size_t k = 0; k < row.size(); ++k) m[k] += row[k];
  }
  if (!tree.word_ids().empty()) m = scaled(m, 1.0 / static_cast<double>(tree.word_ids().size()));
  return m;
}

double cosine(const Vec& a, const Vec& b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<Neighbor> nearest_neighbors_mean(const EmbeddingTable& embeddings,
                                             const std::vector<Tree>& corpus, const Tree& query,
                                             std::size_t k) {
  if (corpus.empty()) throw std::invalid_argument("nearest_neighbors: empty corpus");
  const Vec q = mean_word_vector(embeddings, query);
  std::vector<Neighbor> all;
  all.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    all.push_back({i, cosine(q, mean_word_vector(embeddings, corpus[i]))});
  }
  return top_k(std::move(all), k);
}

}  // namespace treelstm
