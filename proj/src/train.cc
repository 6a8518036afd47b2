#include "treelstm/train.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "treelstm/errors.h"
#include "treelstm/metrics.h"
#include "treelstm/rng.h"

namespace treelstm {

void adagrad_step(ParamSet& params, double lr, double eps) {
  for (const auto& p : params.params()) {
    if (!all_finite(p.flat(Slot::kGrad))) {
      throw NumericError("non-finite gradient in parameter '" + p.name() + "'");
    }
  }
  for (auto& p : params.params()) {
    auto value = p.flat(Slot::kValue);
    auto grad = p.flat(Slot::kGrad);
    auto accum = p.flat(Slot::kAccum);
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      if (g == 0.0) continue;
      accum[k] += g * g;
      value[k] -= lr * g / (std::sqrt(accum[k]) + eps);
      grad[k] = 0.0;
    }
  }
}

BatchResult minibatch_loss_grad(Model& model, const Dataset& data,
                                std::span<const std::size_t> batch, Rng* dropout_rng) {
  if (batch.empty()) throw std::invalid_argument("minibatch_loss_grad: empty batch");
  ParamSet& params = model.params();
  params.zero_grads();
  model.embeddings().clear_grads();

  BatchResult out;
  double loss_sum = 0.0;
  const bool sentiment = is_sentiment(model.config().task);
  for (std::size_t idx : batch) {
    const Model::LossSum r = sentiment ? model.sentiment_loss_grad(data.sentences.at(idx), dropout_rng)
                                       : model.pair_loss_grad(data.pairs.at(idx));
    if (r.terms == 0) ++out.skipped;
    loss_sum += r.loss;
    out.terms += r.terms;
  }
  if (out.terms > 0) {
    const double inv = 1.0 / double(out.terms);
    for (auto& p : params.params()) {
      for (auto& g : p.flat(Slot::kGrad)) g *= inv;
    }
    model.embeddings().scale_grads(inv);
    out.loss = loss_sum * inv;
  }
  const double lambda = model.config().lambda;
  if (lambda > 0.0) {
    double sq = 0.0;
    for (auto& p : params.params()) {
      auto value = p.flat(Slot::kValue);
      auto grad = p.flat(Slot::kGrad);
      for (std::size_t k = 0; k < value.size(); ++k) {
        grad[k] += lambda * value[k];
        sq += value[k] * value[k];
      }
    }
    out.loss += 0.5 * lambda * sq;
  }
  return out;
}

std::vector<Tree> expand_labeled_spans(const std::vector<Tree>& trees) {
  std::vector<Tree> out;
  for (const Tree& tree : trees) {
    // Root first, then the remaining nodes in id order.
    std::vector<std::size_t> ids{tree.root()};
    for (std::size_t id = 0; id < tree.size(); ++id) {
      if (id != tree.root()) ids.push_back(id);
    }
    for (std::size_t id : ids) {
      const TreeNode& node = tree.node(id);
      if (!node.label || !is_contiguous(node.span)) continue;
      out.push_back(subtree(tree, id));
    }
  }
  return out;
}

std::vector<Tree> binarize_sentiment(std::vector<Tree> trees) {
  std::vector<Tree> out;
  out.reserve(trees.size());
  for (Tree& tree : trees) {
    for (std::size_t id = 0; id < tree.size(); ++id) {
      const auto label = tree.node(id).label;
      if (!label) continue;
      if (*label < 2) {
        tree.set_label(id, 0);
      } else if (*label > 2) {
        tree.set_label(id, 1);
      } else {
        tree.set_label(id, std::nullopt);
      }
    }
    if (tree.node(tree.root()).label) out.push_back(std::move(tree));
  }
  return out;
}

std::string format_epoch_row(const EpochRecord& r) {
  std::ostringstream os;
  os << std::setprecision(17) << r.epoch << '\t' << r.train_loss << '\t' << r.dev_metric << '\t'
     << r.seconds;
  return os.str();
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

void copy_values(const ParamSet& from, ParamSet& to) {
  for (std::size_t i = 0; i < from.size(); ++i) {
    auto src = from.params()[i].flat(Slot::kValue);
    auto dst = to.params()[i].flat(Slot::kValue);
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace

std::vector<std::size_t> predict_labels(const Model& model, const std::vector<Tree>& trees,
                                        std::size_t workers) {
  std::vector<std::size_t> out(trees.size());
  parallel_for(trees.size(), workers, [&](std::size_t i) { out[i] = model.predict_label(trees[i]); });
  return out;
}

std::vector<double> predict_scores(const Model& model, const std::vector<PairExample>& pairs,
                                   std::size_t workers) {
  std::vector<double> out(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    out[i] = model.predict_score(pairs[i].left, pairs[i].right);
  });
  return out;
}

double dev_metric(const Model& model, const Dataset& data, std::size_t workers) {
  if (is_sentiment(model.config().task)) {
    std::vector<std::size_t> gold;
    std::vector<Tree> labeled;
    for (const Tree& t : data.sentences) {
      if (const auto& label = t.node(t.root()).label) {
        gold.push_back(static_cast<std::size_t>(*label));
        labeled.push_back(t);
      }
    }
    if (gold.empty()) return 0.0;
    return accuracy(predict_labels(model, labeled, workers), gold);
  }
  if (data.pairs.size() < 2) return 0.0;
  std::vector<double> gold;
  for (const auto& p : data.pairs) gold.push_back(p.score);
  const auto m = regression_metrics(predict_scores(model, data.pairs, workers), gold);
  return m.pearson.value_or(0.0);
}

TrainResult train(Model& model, const Dataset& train_set, const Dataset& dev_set,
                  const TrainOptions& options) {
  const RunConfig& cfg = model.config();
  if (train_set.size() == 0) throw std::invalid_argument("train: empty training set");

  Dataset prepared;
  const Dataset* data = &train_set;
  if (is_sentiment(cfg.task) && !is_tree_variant(cfg.variant)) {
    prepared.sentences = expand_labeled_spans(train_set.sentences);
    data = &prepared;
  }
  const Dataset& selection = dev_set.size() > 0 ? dev_set : train_set;

  std::ofstream log;
  if (!options.log_path.empty()) {
    log.open(options.log_path);
    if (!log) throw IoError("cannot write epoch log '" + options.log_path + "'");
  }

  Rng rng(cfg.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(data->size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.best_metric = -std::numeric_limits<double>::infinity();
  ParamSet best = model.params();
  Mat best_embedding = model.embeddings().vectors();
  std::size_t since_best = 0;
  const bool tune_embeddings = model.embeddings().trainable() && cfg.emb_lr > 0.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch);
      const BatchResult br = minibatch_loss_grad(
          model, *data, std::span<const std::size_t>(order.data() + begin, end - begin), &rng);
      if (!std::isfinite(br.loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch));
      }
      result.skipped_examples += br.skipped;
      adagrad_step(model.params(), cfg.lr);
      if (tune_embeddings) model.embeddings().adagrad_update(cfg.emb_lr, kAdagradEps);
      loss_sum += br.loss;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(batches);
    rec.dev_metric = dev_metric(model, selection, options.workers);
    if (options.record_time) {
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.epochs.push_back(rec);
    if (log.is_open()) log << format_epoch_row(rec) << '\n' << std::flush;
    if (options.progress) *options.progress << format_epoch_row(rec) << '\n';

    if (rec.dev_metric > result.best_metric) {
      result.best_metric = rec.dev_metric;
      result.best_epoch = epoch;
      best = model.params();
      best_embedding = model.embeddings().vectors();
      since_best = 0;
      if (!options.checkpoint_path.empty()) save_model(model, options.checkpoint_path);
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  copy_values(best, model.params());
  model.embeddings().vectors() = std::move(best_embedding);
  return result;
}

// ---- checkpoints ----

namespace {

constexpr char kMagic[] = {'T', 'L', 'S', 'T', 'M'};
constexpr unsigned char kVersion = 1;

struct RecordView {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<const double> values;
};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xFF));
  }
}

void write_records(const std::vector<RecordView>& records, const std::string& path) {
  std::string buf(kMagic, sizeof(kMagic));
  buf.push_back(static_cast<char>(kVersion));
  put_le<std::uint64_t>(buf, records.size());
  for (const auto& r : records) {
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(r.name.size()));
    buf += r.name;
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(r.shape.size()));
    for (std::size_t dim : r.shape) put_le<std::uint64_t>(buf, dim);
    for (double v : r.values) put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

class Reader {
 public:
  Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) throw CheckpointError("checkpoint '" + path_ + "' is truncated");
  }

 private:
  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

}  // namespace

void save_checkpoint(const ParamSet& params, const std::string& path) {
  std::vector<RecordView> records;
  for (const auto& p : params.params()) records.push_back({p.name(), p.shape(), p.flat(Slot::kValue)});
  write_records(records, path);
}

ParamSet read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(data), path);
  const std::string magic = r.bytes(sizeof(kMagic));
  if (magic != std::string(kMagic, sizeof(kMagic))) {
    throw CheckpointError("'" + path + "' is not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint8_t>();
  if (version != kVersion) {
    throw CheckpointError("checkpoint '" + path + "' has unsupported version " +
                          std::to_string(version));
  }
  const auto count = r.get<std::uint64_t>();
  ParamSet out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>();
    std::string name = r.bytes(name_len);
    if (out.contains(name)) throw CheckpointError("checkpoint repeats record '" + name + "'");
    const auto rank = r.get<std::uint32_t>();
    if (rank < 1 || rank > 2) {
      throw CheckpointError("checkpoint record '" + name + "' has rank " + std::to_string(rank));
    }
    std::vector<std::size_t> shape;
    std::size_t total = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
      if (shape.back() != 0 && total > r.remaining() / 8 / shape.back()) {
        throw CheckpointError("checkpoint '" + path + "' is truncated");
      }
      total *= shape.back();
    }
    r.need(total * 8);
    auto values = rank == 2 ? std::span<double>(out.add_mat(name, shape[0], shape[1]).values())
                            : std::span<double>(out.add_vec(name, shape[0]).values());
    for (double& v : values) v = std::bit_cast<double>(r.get<std::uint64_t>());
  }
  if (r.remaining() != 0) throw CheckpointError("checkpoint '" + path + "' has trailing bytes");
  return out;
}

namespace {

// Every model parameter must appear in `ck` with the same shape, and `ck`
// may hold at most the extra records listed.
void check_layout(const ParamSet& ck, const ParamSet& params, std::size_t extra) {
  for (const auto& p : params.params()) {
    if (!ck.contains(p.name())) {
      throw CheckpointError("checkpoint lacks parameter '" + p.name() + "'");
    }
    const auto& q = ck.at(p.name());
    if (q.shape() != p.shape()) {
      throw CheckpointError("shape mismatch for '" + p.name() + "': checkpoint " +
                            shape_string(q.shape()) + ", model " + shape_string(p.shape()));
    }
  }
  if (ck.size() != params.size() + extra) {
    throw CheckpointError("checkpoint holds " + std::to_string(ck.size()) +
                          " records, model expects " + std::to_string(params.size() + extra));
  }
}

void copy_from_checkpoint(const ParamSet& ck, ParamSet& params) {
  for (auto& p : params.params()) {
    auto src = ck.at(p.name()).flat(Slot::kValue);
    std::copy(src.begin(), src.end(), p.flat(Slot::kValue).begin());
  }
}

}  // namespace

void load_checkpoint(const std::string& path, ParamSet& params) {
  const ParamSet ck = read_checkpoint(path);
  check_layout(ck, params, 0);
  copy_from_checkpoint(ck, params);
}

void save_model(const Model& model, const std::string& path) {
  std::vector<RecordView> records;
  for (const auto& p : model.params().params()) {
    records.push_back({p.name(), p.shape(), p.flat(Slot::kValue)});
  }
  const Mat& emb = model.embeddings().vectors();
  records.push_back({"embedding", {emb.rows(), emb.cols()}, emb.values()});
  write_records(records, path);
}

void load_model(const std::string& path, Model& model) {
  const ParamSet ck = read_checkpoint(path);
  if (!ck.contains("embedding")) throw CheckpointError("checkpoint lacks 'embedding'");
  const Param& emb = ck.at("embedding");
  Mat& current = model.embeddings().vectors();
  const std::vector<std::size_t> want{current.rows(), current.cols()};
  if (emb.shape() != want) {
    throw CheckpointError("shape mismatch for 'embedding': checkpoint " +
                          shape_string(emb.shape()) + ", model " + shape_string(want));
  }
  check_layout(ck, model.params(), 1);
  copy_from_checkpoint(ck, model.params());
  current.values() = emb.mat(Slot::kValue).values();
}

}  // namespace treelstm
