#include "treelstm/embeddings.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "treelstm/errors.h"
#include "treelstm/rng.h"

namespace treelstm {

Vocab::Vocab() { add(kUnkToken); }

std::size_t Vocab::add(const std::string& token) {
  auto [it, inserted] = ids_.try_emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::size_t Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& token) const { return ids_.count(token) != 0; }

std::vector<std::size_t> Vocab::ids(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

void Vocab::index(Tree& tree) const { tree.set_word_ids(ids(tree.words())); }

Vocab build_vocab(const std::vector<std::vector<std::string>>& streams) {
  Vocab vocab;
  for (const auto& stream : streams) {
    for (const auto& token : stream) vocab.add(token);
  }
  return vocab;
}

void write_vocab(std::ostream& out, const Vocab& vocab) {
  for (const auto& t : vocab.tokens()) out << t << '\n';
}

Vocab read_vocab(std::istream& in) {
  Vocab vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != Vocab::kUnkToken) throw ParseError("vocab: first entry must be <unk>", 1);
      continue;
    }
    if (vocab.add(line) != lineno - 1) {
      throw ParseError("vocab: duplicate token on line " + std::to_string(lineno), lineno);
    }
  }
  return vocab;
}

EmbeddingTable::EmbeddingTable(Mat vectors, bool trainable)
    : vectors_(std::move(vectors)), trainable_(false) {
  set_trainable(trainable);
}

void EmbeddingTable::set_trainable(bool trainable) {
  trainable_ = trainable;
  if (trainable_ && accum_.rows() != vectors_.rows()) {
    accum_ = Mat(vectors_.rows(), vectors_.cols());
  }
  if (!trainable_) grads_.clear();
}

Vec EmbeddingTable::lookup(std::size_t id) const {
  if (id >= vectors_.rows()) {
    throw std::out_of_range("embedding lookup: id " + std::to_string(id) + " >= " +
                            std::to_string(vectors_.rows()));
  }
  auto row = vectors_.row(id);
  return Vec(std::vector<double>(row.begin(), row.end()));
}

void EmbeddingTable::accumulate_grad(std::size_t id, const Vec& g, double scale) {
  if (!trainable_) return;
  if (id >= vectors_.rows()) throw std::out_of_range("embedding grad: id out of range");
  check_dim("embedding grad", "g", g.dim(), dim());
  auto [it, inserted] = grads_.try_emplace(id, dim());
  axpy(scale, g, it->second);
}

void EmbeddingTable::scale_grads(double s) {
  for (auto& [id, g] : grads_) {
    for (auto& v : g.values()) v *= s;
  }
}

void EmbeddingTable::adagrad_update(double lr, double eps) {
  if (!trainable_) return;
  for (const auto& [id, g] : grads_) {
    if (!all_finite(g.span())) {
      throw NumericError("non-finite gradient in embedding row " + std::to_string(id));
    }
  }
  for (const auto& [id, g] : grads_) {
    auto row = vectors_.row(id);
    auto acc = accum_.row(id);
    for (std::size_t k = 0; k < row.size(); ++k) {
      acc[k] += g[k] * g[k];
      row[k] -= lr * g[k] / (std::sqrt(acc[k]) + eps);
    }
  }
  grads_.clear();
}

EmbeddingLoad load_embeddings(std::istream& in, const Vocab& vocab, std::size_t dim,
                              Rng& rng, double init_scale) {
  Mat vectors(vocab.size(), dim);
  std::vector<char> found(vocab.size(), 0);
  std::size_t n_found = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) fields.push_back(std::move(f));
    if (fields.size() != dim) {
      throw ParseError("embeddings: line " + std::to_string(lineno) + " has " +
                           std::to_string(fields.size()) + " values, expected " +
                           std::to_string(dim),
                       lineno);
    }
    if (!vocab.contains(token)) continue;
    const std::size_t id = vocab.id(token);
    if (found[id]) continue;  // first occurrence wins
    auto row = vectors.row(id);
    for (std::size_t k = 0; k < dim; ++k) {
      try {
        std::size_t used = 0;
        row[k] = std::stod(fields[k], &used);
        if (used != fields[k].size() || !std::isfinite(row[k])) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("embeddings: line " + std::to_string(lineno) + " has a bad value", lineno);
      }
    }
    found[id] = 1;
    ++n_found;
  }
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    if (found[id]) continue;
    for (auto& v : vectors.row(id)) v = rng.uniform(-init_scale, init_scale);
  }
  EmbeddingLoad out{EmbeddingTable(std::move(vectors), false), n_found,
                    vocab.size() ? double(n_found) / double(vocab.size()) : 0.0};
  return out;
}

EmbeddingLoad load_embeddings_file(const std::string& path, const Vocab& vocab,
                                   std::size_t dim, Rng& rng, double init_scale) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings '" + path + "'");
  return load_embeddings(in, vocab, dim, rng, init_scale);
}

EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, Rng& rng,
                                 double init_scale) {
  return EmbeddingTable(init_mat(vocab.size(), dim, init_scale, rng), false);
}

}  // namespace treelstm
