#include "treelstm/model.h"

#include <algorithm>
#include <stdexcept>

#include "treelstm/errors.h"
#include "treelstm/rng.h"

namespace treelstm {

namespace {

constexpr const char* kTreeCell = "tree";
constexpr const char* kClassifier = "cls";
constexpr const char* kSimilarity = "sim";

std::string layer_name(std::size_t l) { return "lstm" + std::to_string(l); }

SequenceMode sequence_mode(Variant v) {
  switch (v) {
    case Variant::kLstm: return {1, false};
    case Variant::kBiLstm: return {1, true};
    case Variant::kLstm2Layer: return {2, false};
    case Variant::kBiLstm2Layer: return {2, true};
    default: throw std::logic_error("not a sequence variant");
  }
}

std::vector<CellShape> cell_shapes(const RunConfig& cfg) {
  if (cfg.variant == Variant::kChildSumDep) return {{cfg.d, cfg.e, 1, cfg.offdiag, true}};
  if (cfg.variant == Variant::kNaryConst) return {{cfg.d, cfg.e, 2, cfg.offdiag, true}};
  const SequenceMode mode = sequence_mode(cfg.variant);
  std::vector<CellShape> shapes{{cfg.d, cfg.e, 1, true, true}};
  for (std::size_t l = 1; l < mode.layers; ++l) {
    shapes.push_back({cfg.d, mode.bidirectional ? 2 * cfg.d : cfg.d, 1, true, true});
  }
  return shapes;
}

std::vector<std::string> cell_names(const RunConfig& cfg) {
  if (is_tree_variant(cfg.variant)) return {kTreeCell};
  std::vector<std::string> names;
  for (std::size_t l = 0; l < sequence_mode(cfg.variant).layers; ++l) {
    names.push_back(layer_name(l));
  }
  return names;
}

}  // namespace

Vec dropout_mask(std::size_t dim, double rate, Rng& rng) {
  if (!(rate >= 0 && rate < 1)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  Vec mask(dim, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : mask.values()) m = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return mask;
}

Vec dropout_apply(const Vec& h, double rate, Rng& rng, DropoutMode mode) {
  if (mode == DropoutMode::kEval || rate == 0.0) return h;
  return hadamard(h, dropout_mask(h.dim(), rate, rng));
}

Model::Model(const RunConfig& config, EmbeddingTable embeddings)
    : config_(config), embeddings_(std::move(embeddings)) {
  config_.validate();
  if (embeddings_.dim() != config_.e) {
    throw DimensionError("model: embedding dimension " + std::to_string(embeddings_.dim()) +
                         " does not match e = " + std::to_string(config_.e));
  }
  embeddings_.set_trainable(config_.emb_lr > 0.0);
  Rng rng(config_.seed);
  const InitOptions init{config_.init_scale, config_.forget_bias};
  const auto shapes = cell_shapes(config_);
  const auto names = cell_names(config_);
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    add_gate_params(params_, names[k], shapes[k], rng, init);
  }
  if (is_sentiment(config_.task)) {
    add_classifier_params(params_, kClassifier, config_.classes(), rep_dim(), rng,
                          config_.init_scale);
  } else {
    add_similarity_params(params_, kSimilarity, rep_dim(), config_.sim_hidden, config_.classes(),
                          rng, config_.init_scale);
  }
  bind();
}

void Model::bind() {
  const auto shapes = cell_shapes(config_);
  const auto names = cell_names(config_);
  cells_.clear();
  cell_grads_.clear();
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    cells_.push_back(bind_gate_params(params_, names[k], shapes[k], Slot::kValue));
    cell_grads_.push_back(bind_gate_params(params_, names[k], shapes[k], Slot::kGrad));
  }
  if (is_sentiment(config_.task)) {
    cls_ = bind_classifier_params(params_, kClassifier, Slot::kValue);
    cls_grad_ = bind_classifier_params(params_, kClassifier, Slot::kGrad);
  } else {
    sim_ = bind_similarity_params(params_, kSimilarity, Slot::kValue);
    sim_grad_ = bind_similarity_params(params_, kSimilarity, Slot::kGrad);
  }
}

std::size_t Model::rep_dim() const {
  if (is_tree_variant(config_.variant)) return config_.d;
  return sequence_mode(config_.variant).bidirectional ? 2 * config_.d : config_.d;
}

std::size_t Model::composition_param_count() const {
  std::size_t n = 0;
  for (const auto& s : cell_shapes(config_)) n += gate_param_count(s);
  return n;
}

std::vector<Vec> Model::token_vectors(const Tree& tree) const {
  if (tree.word_ids().size() != tree.length()) {
    throw std::invalid_argument("model: tree has not been indexed against the vocabulary");
  }
  std::vector<Vec> xs;
  xs.reserve(tree.length());
  for (std::size_t id : tree.word_ids()) xs.push_back(embeddings_.lookup(id));
  return xs;
}

Model::Encoding Model::encode(const Tree& tree) const {
  const auto xs = token_vectors(tree);
  if (is_tree_variant(config_.variant)) {
    const TreeVariant tv =
        config_.variant == Variant::kChildSumDep ? TreeVariant::kChildSum : TreeVariant::kNary;
    TreeTrace tr = run_tree(cells_[0], tree, xs, tv);
    Vec rep = tr.states[tree.root()].h;
    return {std::move(tr), std::move(rep)};
  }
  SequenceTrace tr = run_sequence(cells_, xs, sequence_mode(config_.variant));
  Vec rep = sequence_representation(tr);
  return {std::move(tr), std::move(rep)};
}

const Vec& Model::node_hidden(const Encoding& enc, std::size_t node) const {
  const auto* tr = std::get_if<TreeTrace>(&enc.trace);
  if (tr == nullptr) throw std::logic_error("node_hidden: sequence encodings have no nodes");
  return tr->states.at(node).h;
}

std::vector<Vec> Model::encode_backward(const Tree& tree, const Encoding& enc,
                                        std::span<const Vec> dh_nodes, const Vec& d_rep) {
  std::vector<Vec> d_tokens;
  if (const auto* tr = std::get_if<TreeTrace>(&enc.trace)) {
    std::vector<Vec> dh(tree.size());
    if (!dh_nodes.empty()) {
      if (dh_nodes.size() != tree.size()) throw DimensionError("encode_backward: dh_nodes size");
      std::copy(dh_nodes.begin(), dh_nodes.end(), dh.begin());
    }
    if (!d_rep.empty()) {
      Vec& root = dh[tree.root()];
      if (root.empty()) root = Vec(config_.d);
      axpy(1.0, d_rep, root);
    }
    d_tokens = backward_tree(cells_[0], cell_grads_[0], tree, *tr, dh);
  } else {
    const auto& sq = std::get<SequenceTrace>(enc.trace);
    if (!dh_nodes.empty()) throw std::logic_error("encode_backward: sequence models have no nodes");
    std::vector<Vec> d_out = d_rep.empty() ? std::vector<Vec>(sq.length)
                                           : sequence_representation_grad(sq, d_rep);
    d_tokens = backward_sequence(cells_, cell_grads_, sq, d_out);
  }
  if (embeddings_.trainable()) {
    for (std::size_t t = 0; t < d_tokens.size(); ++t) {
      embeddings_.accumulate_grad(tree.word_ids()[t], d_tokens[t]);
    }
  }
  return d_tokens;
}

Model::LossSum Model::sentiment_loss_grad(const Tree& tree, Rng* dropout_rng) {
  if (!is_sentiment(config_.task)) throw std::logic_error("sentiment loss on a relatedness model");
  LossSum out;
  const Encoding enc = encode(tree);
  const bool tree_model = is_tree_variant(config_.variant);
  const bool use_dropout = dropout_rng != nullptr && config_.dropout > 0.0;

  auto supervise = [&](const Vec& h, int label) {
    const Vec mask = use_dropout ? dropout_mask(h.dim(), config_.dropout, *dropout_rng)
                                 : Vec(h.dim(), 1.0);
    const Vec h_in = hadamard(h, mask);
    const Vec probs = classify(cls_, h_in);
    const LossGrad lg = nll_loss_grad(probs, static_cast<std::size_t>(label));
    out.loss += lg.loss;
    ++out.terms;
    return hadamard(classifier_backward(cls_, cls_grad_, h_in, lg.d_logits), mask);
  };

  if (tree_model) {
    std::vector<Vec> dh(tree.size());
    for (std::size_t id = 0; id < tree.size(); ++id) {
      if (const auto& label = tree.node(id).label) dh[id] = supervise(node_hidden(enc, id), *label);
    }
    if (out.terms > 0) encode_backward(tree, enc, dh, Vec());
  } else if (const auto& label = tree.node(tree.root()).label) {
    Vec d_rep = supervise(enc.rep, *label);
    encode_backward(tree, enc, {}, d_rep);
  }
  return out;
}

Model::LossSum Model::sentiment_loss(const Tree& tree) const {
  LossSum out;
  const Encoding enc = encode(tree);
  auto term = [&](const Vec& h, int label) {
    out.loss += nll_loss_grad(classify(cls_, h), static_cast<std::size_t>(label)).loss;
    ++out.terms;
  };
  if (is_tree_variant(config_.variant)) {
    for (std::size_t id = 0; id < tree.size(); ++id) {
      if (const auto& label = tree.node(id).label) term(node_hidden(enc, id), *label);
    }
  } else if (const auto& label = tree.node(tree.root()).label) {
    term(enc.rep, *label);
  }
  return out;
}

Model::LossSum Model::pair_loss_grad(const PairExample& pair) {
  if (is_sentiment(config_.task)) throw std::logic_error("pair loss on a sentiment model");
  const Encoding left = encode(pair.left);
  const Encoding right = encode(pair.right);
  const SimilarityTrace st = similarity_forward(sim_, left.rep, right.rep);
  const LossGrad kl = kl_loss_grad(sparse_target(pair.score, config_.classes()), st.probs);
  const PairGrad pg = similarity_backward(sim_, sim_grad_, st, kl.d_logits);
  encode_backward(pair.left, left, {}, pg.d_left);
  encode_backward(pair.right, right, {}, pg.d_right);
  return {kl.loss, 1};
}

Model::LossSum Model::pair_loss(const PairExample& pair) const {
  const SimilarityTrace st = similarity_forward(sim_, encode(pair.left).rep, encode(pair.right).rep);
  return {kl_loss_grad(sparse_target(pair.score, config_.classes()), st.probs).loss, 1};
}

Vec Model::predict_probs(const Tree& tree, std::optional<std::size_t> node) const {
  const Encoding enc = encode(tree);
  if (!node || *node == tree.root()) return classify(cls_, enc.rep);
  return classify(cls_, node_hidden(enc, *node));
}

std::size_t Model::predict_label(const Tree& tree) const {
  const Vec probs = predict_probs(tree);
  return static_cast<std::size_t>(
      std::max_element(probs.values().begin(), probs.values().end()) - probs.values().begin());
}

double Model::predict_score(const Tree& left, const Tree& right) const {
  return similarity_forward(sim_, encode(left).rep, encode(right).rep).score;
}

}  // namespace treelstm
