#ifndef TREELSTM_MODEL_H_
#define TREELSTM_MODEL_H_

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "treelstm/cells.h"
#include "treelstm/config.h"
#include "treelstm/embeddings.h"
#include "treelstm/heads.h"
#include "treelstm/params.h"
#include "treelstm/tree.h"

namespace treelstm {

class Rng;

// Relatedness training pair.
struct PairExample {
  Tree left;
  Tree right;
  double score = 0.0;
};

// Sentence encoder (one of the six variants) plus the task head, with all
// trainable tensors in one ParamSet. Embeddings live beside it.
//
// Gradients accumulate unscaled into ParamSet grads and the embedding
// buffer; callers average (see minibatch_loss_grad).
class Model {
 public:
  // Parameters initialized from Rng(config.seed).
  Model(const RunConfig& config, EmbeddingTable embeddings);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const RunConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  EmbeddingTable& embeddings() { return embeddings_; }
  const EmbeddingTable& embeddings() const { return embeddings_; }

  // d, or 2d for bidirectional encoders.
  std::size_t rep_dim() const;
  std::size_t composition_param_count() const;

  struct Encoding {
    std::variant<TreeTrace, SequenceTrace> trace;
    Vec rep;  // root hidden state / sequence representation
  };

  // Tree variants run over the tree; sequence variants over its words in
  // order. The tree must be indexed (Vocab::index).
  Encoding encode(const Tree& tree) const;
  // Hidden state feeding the classifier at `node` (tree variants only).
  const Vec& node_hidden(const Encoding& enc, std::size_t node) const;

  // dh_nodes: per-node dL/dh (tree variants; may be empty); d_rep: dL/d rep
  // (may be empty). Accumulates parameter gradients and returns dL/dx per
  // token, also pushed to the embedding buffer when it is trainable.
  std::vector<Vec> encode_backward(const Tree& tree, const Encoding& enc,
                                   std::span<const Vec> dh_nodes, const Vec& d_rep);

  struct LossSum {
    double loss = 0.0;      // summed over supervised terms
    std::size_t terms = 0;  // supervised terms
  };

  // Tree variants supervise every labeled node; sequence variants only
  // the root. `dropout_rng` null disables dropout.
  LossSum sentiment_loss_grad(const Tree& tree, Rng* dropout_rng);
  LossSum pair_loss_grad(const PairExample& pair);

  // Loss only (no gradients, no dropout).
  LossSum sentiment_loss(const Tree& tree) const;
  LossSum pair_loss(const PairExample& pair) const;

  std::size_t predict_label(const Tree& tree) const;
  Vec predict_probs(const Tree& tree, std::optional<std::size_t> node = std::nullopt) const;
  double predict_score(const Tree& left, const Tree& right) const;

  ClassifierParams classifier() const { return cls_; }
  SimilarityParams similarity() const { return sim_; }

 private:
  void bind();
  std::vector<Vec> token_vectors(const Tree& tree) const;

  RunConfig config_;
  EmbeddingTable embeddings_;
  ParamSet params_;
  std::vector<GateParams> cells_;       // values: one per layer (1 for trees)
  std::vector<GateParams> cell_grads_;  // gradients, same layout
  ClassifierParams cls_, cls_grad_;
  SimilarityParams sim_, sim_grad_;
};

// Inverted dropout scale vector: entries 0 with probability `rate`,
// 1/(1-rate) otherwise.
Vec dropout_mask(std::size_t dim, double rate, Rng& rng);

enum class DropoutMode { kTrain, kEval };
Vec dropout_apply(const Vec& h, double rate, Rng& rng, DropoutMode mode);

}  // namespace treelstm

#endif  // TREELSTM_MODEL_H_
