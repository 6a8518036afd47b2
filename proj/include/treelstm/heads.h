#ifndef TREELSTM_HEADS_H_
#define TREELSTM_HEADS_H_

#include <cstddef>
#include <string>

#include "treelstm/params.h"
#include "treelstm/tensor.h"

namespace treelstm {

class Rng;

// softmax(W h + b) over |Y| classes.
struct ClassifierParams {
  Mat* W = nullptr;  // |Y| × d_in
  Vec* b = nullptr;  // |Y|
};

void add_classifier_params(ParamSet& ps, const std::string& prefix, std::size_t classes,
                           std::size_t input_dim, Rng& rng, double scale = 0.05);
ClassifierParams bind_classifier_params(ParamSet& ps, const std::string& prefix, Slot slot);

// Max-subtracted softmax.
Vec softmax(const Vec& logits);

Vec classifier_logits(const ClassifierParams& cp, const Vec& h);
Vec classify(const ClassifierParams& cp, const Vec& h);

struct LossGrad {
  double loss = 0.0;
  Vec d_logits;
};

// -log p[gold]; gradient w.r.t. logits is p - onehot(gold).
LossGrad nll_loss_grad(const Vec& probs, std::size_t gold);

// Accumulates dW, db and returns dL/dh.
Vec classifier_backward(const ClassifierParams& cp, const ClassifierParams& grads, const Vec& h,
                        const Vec& d_logits);

// Pair-comparison network over (hL, hR):
//   h× = hL⊙hR, h+ = |hL-hR|, hs = σ(W× h× + W+ h+ + b_h),
//   p̂ = softmax(W_p hs + b_p), ŷ = rᵀp̂ with r = (1..K).
struct SimilarityParams {
  Mat* W_prod = nullptr;  // hidden × d
  Mat* W_diff = nullptr;  // hidden × d
  Vec* b_hidden = nullptr;
  Mat* W_out = nullptr;   // K × hidden
  Vec* b_out = nullptr;
};

void add_similarity_params(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
                           std::size_t hidden, std::size_t classes, Rng& rng,
                           double scale = 0.05);
SimilarityParams bind_similarity_params(ParamSet& ps, const std::string& prefix, Slot slot);

struct SimilarityTrace {
  Vec h_left, h_right;
  Vec h_prod, h_diff, h_hidden;
  Vec probs;
  double score = 0.0;
};

SimilarityTrace similarity_forward(const SimilarityParams& sp, const Vec& h_left,
                                   const Vec& h_right);

// p with rᵀp = y: mass on ⌊y⌋ and ⌊y⌋+1 (1-based). Throws on y ∉ [1,K].
Vec sparse_target(double y, std::size_t classes);

// KL(p ‖ p̂) with 0·log 0 = 0; gradient w.r.t. the similarity logits is p̂ - p.
LossGrad kl_loss_grad(const Vec& target, const Vec& probs);

struct PairGrad {
  Vec d_left, d_right;
};

// Accumulates head gradients; |·| uses sign(hL-hR) with sign(0) = 0.
PairGrad similarity_backward(const SimilarityParams& sp, const SimilarityParams& grads,
                             const SimilarityTrace& trace, const Vec& d_logits);

}  // namespace treelstm

#endif  // TREELSTM_HEADS_H_
