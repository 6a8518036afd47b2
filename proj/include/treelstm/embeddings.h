#ifndef TREELSTM_EMBEDDINGS_H_
#define TREELSTM_EMBEDDINGS_H_

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "treelstm/tensor.h"
#include "treelstm/tree.h"

namespace treelstm {

class Rng;

// Token <-> dense id map. Id 0 is the reserved unknown token.
class Vocab {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr const char* kUnkToken = "<unk>";

  Vocab();

  std::size_t add(const std::string& token);
  // kUnk for tokens never added.
  std::size_t id(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<std::size_t> ids(const std::vector<std::string>& tokens) const;
  // Fills tree.word_ids().
  void index(Tree& tree) const;

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> tokens_;
};

// Ids assigned in order of first appearance across the streams.
Vocab build_vocab(const std::vector<std::vector<std::string>>& streams);

void write_vocab(std::ostream& out, const Vocab& vocab);
// Inverse of write_vocab; the first line must be the unknown token.
Vocab read_vocab(std::istream& in);

// |V|×e word vectors. Trainable tables keep per-row AdaGrad accumulators
// and a sparse gradient buffer touched only by looked-up rows.
class EmbeddingTable {
 public:
  EmbeddingTable(Mat vectors, bool trainable);

  std::size_t dim() const { return vectors_.cols(); }
  std::size_t rows() const { return vectors_.rows(); }
  bool trainable() const { return trainable_; }
  void set_trainable(bool trainable);

  Vec lookup(std::size_t id) const;
  const Mat& vectors() const { return vectors_; }
  Mat& vectors() { return vectors_; }

  // grad buffer[id] += scale * g; ignored when not trainable.
  void accumulate_grad(std::size_t id, const Vec& g, double scale = 1.0);
  const std::map<std::size_t, Vec>& pending_grads() const { return grads_; }
  void clear_grads() { grads_.clear(); }
  void scale_grads(double s);

  // Per-row AdaGrad on buffered rows, then clears the buffer.
  // Throws NumericError on a non-finite gradient.
  void adagrad_update(double lr, double eps);
  const Mat& accumulators() const { return accum_; }

 private:
  Mat vectors_;
  bool trainable_;
  Mat accum_;
  std::map<std::size_t, Vec> grads_;
};

struct EmbeddingLoad {
  EmbeddingTable table;
  std::size_t found = 0;  // vocab rows copied from the stream
  double coverage = 0.0;  // found / |V|
};

// Reads "token v1 ... ve" lines. Vocab rows absent from the stream
// (including unk) are drawn uniform on [-init_scale, init_scale] in id order.
EmbeddingLoad load_embeddings(std::istream& in, const Vocab& vocab, std::size_t dim,
                              Rng& rng, double init_scale = 0.05);
EmbeddingLoad load_embeddings_file(const std::string& path, const Vocab& vocab,
                                   std::size_t dim, Rng& rng, double init_scale = 0.05);

EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, Rng& rng,
                                 double init_scale = 0.05);

}  // namespace treelstm

#endif  // TREELSTM_EMBEDDINGS_H_
