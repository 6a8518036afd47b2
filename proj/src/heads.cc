#include "treelstm/heads.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treelstm/errors.h"
#include "treelstm/rng.h"

namespace treelstm {

void add_classifier_params(ParamSet& ps, const std::string& prefix, std::size_t classes,
                           std::size_t input_dim, Rng& rng, double scale) {
  ps.add_mat(prefix + ".W", classes, input_dim) = init_mat(classes, input_dim, scale, rng);
  ps.add_vec(prefix + ".b", classes);
}

ClassifierParams bind_classifier_params(ParamSet& ps, const std::string& prefix, Slot slot) {
  return {&ps.mat(prefix + ".W", slot), &ps.vec(prefix + ".b", slot)};
}

Vec softmax(const Vec& logits) {
  if (logits.empty()) throw DimensionError("softmax: empty logits");
  const double mx = *std::max_element(logits.values().begin(), logits.values().end());
  Vec out(logits.dim());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.dim(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    total += out[k];
  }
  for (auto& v : out.values()) v /= total;
  return out;
}

Vec classifier_logits(const ClassifierParams& cp, const Vec& h) {
  check_dim("classify", "h", h.dim(), cp.W->cols());
  return add(matvec(*cp.W, h), *cp.b);
}

Vec classify(const ClassifierParams& cp, const Vec& h) { return softmax(classifier_logits(cp, h)); }

LossGrad nll_loss_grad(const Vec& probs, std::size_t gold) {
  if (gold >= probs.dim()) {
    throw std::out_of_range("nll_loss_grad: gold class " + std::to_string(gold) +
                            " outside " + std::to_string(probs.dim()) + " classes");
  }
  LossGrad out;
  out.loss = -std::log(probs[gold]);
  out.d_logits = probs;
  out.d_logits[gold] -= 1.0;
  return out;
}

Vec classifier_backward(const ClassifierParams& cp, const ClassifierParams& grads, const Vec& h,
                        const Vec& d_logits) {
  add_outer(*grads.W, d_logits, h);
  axpy(1.0, d_logits, *grads.b);
  Vec dh(h.dim());
  matvec_transposed_acc(*cp.W, d_logits, dh);
  return dh;
}

void add_similarity_params(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
                           std::size_t hidden, std::size_t classes, Rng& rng, double scale) {
  ps.add_mat(prefix + ".W_prod", hidden, input_dim) = init_mat(hidden, input_dim, scale, rng);
  ps.add_mat(prefix + ".W_diff", hidden, input_dim) = init_mat(hidden, input_dim, scale, rng);
  ps.add_vec(prefix + ".b_hidden", hidden);
  ps.add_mat(prefix + ".W_out", classes, hidden) = init_mat(classes, hidden, scale, rng);
  ps.add_vec(prefix + ".b_out", classes);
}

SimilarityParams bind_similarity_params(ParamSet& ps, const std::string& prefix, Slot slot) {
  return {&ps.mat(prefix + ".W_prod", slot), &ps.mat(prefix + ".W_diff", slot),
          &ps.vec(prefix + ".b_hidden", slot), &ps.mat(prefix + ".W_out", slot),
          &ps.vec(prefix + ".b_out", slot)};
}

SimilarityTrace similarity_forward(const SimilarityParams& sp, const Vec& h_left,
                                   const Vec& h_right) {
  check_dim("similarity_forward", "h_left", h_left.dim(), sp.W_prod->cols());
  check_dim("similarity_forward", "h_right", h_right.dim(), sp.W_prod->cols());
  SimilarityTrace t;
  t.h_left = h_left;
  t.h_right = h_right;
  t.h_prod = hadamard(h_left, h_right);
  t.h_diff = Vec(h_left.dim());
  for (std::size_t k = 0; k < h_left.dim(); ++k) t.h_diff[k] = std::fabs(h_left[k] - h_right[k]);
  const MatVecTerm terms[] = {{*sp.W_prod, t.h_prod}, {*sp.W_diff, t.h_diff}};
  t.h_hidden = elementwise(affine_combine(nullptr, nullptr, terms, *sp.b_hidden),
                           Activation::kSigmoid);
  t.probs = softmax(add(matvec(*sp.W_out, t.h_hidden), *sp.b_out));
  t.score = 0.0;
  for (std::size_t k = 0; k < t.probs.dim(); ++k) t.score += double(k + 1) * t.probs[k];
  return t;
}

Vec sparse_target(double y, std::size_t classes) {
  if (classes < 2) throw std::invalid_argument("sparse_target: need K > 1");
  if (!(y >= 1.0 && y <= double(classes))) {
    throw std::out_of_range("sparse_target: score " + std::to_string(y) + " outside [1, " +
                            std::to_string(classes) + "]");
  }
  Vec p(classes);
  const double fl = std::floor(y);
  const auto lo = static_cast<std::size_t>(fl);  // 1-based index ⌊y⌋
  p[lo - 1] = fl - y + 1.0;
  if (lo < classes) p[lo] = y - fl;
  return p;
}

LossGrad kl_loss_grad(const Vec& target, const Vec& probs) {
  check_dim("kl_loss_grad", "probs", probs.dim(), target.dim());
  LossGrad out;
  for (std::size_t k = 0; k < target.dim(); ++k) {
    if (target[k] > 0.0) out.loss += target[k] * (std::log(target[k]) - std::log(probs[k]));
  }
  out.d_logits = subtract(probs, target);
  return out;
}

PairGrad similarity_backward(const SimilarityParams& sp, const SimilarityParams& grads,
                             const SimilarityTrace& t, const Vec& d_logits) {
  add_outer(*grads.W_out, d_logits, t.h_hidden);
  axpy(1.0, d_logits, *grads.b_out);
  Vec d_hidden(t.h_hidden.dim());
  matvec_transposed_acc(*sp.W_out, d_logits, d_hidden);
  Vec dz(d_hidden.dim());
  for (std::size_t k = 0; k < dz.dim(); ++k) {
    dz[k] = d_hidden[k] * t.h_hidden[k] * (1.0 - t.h_hidden[k]);
  }
  add_outer(*grads.W_prod, dz, t.h_prod);
  add_outer(*grads.W_diff, dz, t.h_diff);
  axpy(1.0, dz, *grads.b_hidden);

  const std::size_t d = t.h_left.dim();
  Vec d_prod(d);
  Vec d_diff(d);
  matvec_transposed_acc(*sp.W_prod, dz, d_prod);
  matvec_transposed_acc(*sp.W_diff, dz, d_diff);
  PairGrad out{Vec(d), Vec(d)};
  for (std::size_t k = 0; k < d; ++k) {
    const double delta = t.h_left[k] - t.h_right[k];
    const double sign = delta > 0 ? 1.0 : (delta < 0 ? -1.0 : 0.0);
    out.d_left[k] = d_prod[k] * t.h_right[k] + d_diff[k] * sign;
    out.d_right[k] = d_prod[k] * t.h_left[k] - d_diff[k] * sign;
  }
  return out;
}

}  // namespace treelstm
