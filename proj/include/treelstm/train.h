#ifndef TREELSTM_TRAIN_H_
#define TREELSTM_TRAIN_H_

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "treelstm/model.h"
#include "treelstm/params.h"
#include "treelstm/tree.h"

namespace treelstm {

class Rng;

inline constexpr double kAdagradEps = 1e-10;

// G += g²; θ -= lr·g/(√G + eps); grads zeroed. Throws NumericError naming
// the parameter if any gradient is non-finite (nothing is updated then).
void adagrad_step(ParamSet& params, double lr, double eps = kAdagradEps);

// Sentiment trees or relatedness pairs, depending on the task.
struct Dataset {
  std::vector<Tree> sentences;
  std::vector<PairExample> pairs;
  std::size_t size() const { return sentences.size() + pairs.size(); }
};

struct BatchResult {
  double loss = 0.0;         // mean data loss + λ/2‖θ‖²
  std::size_t terms = 0;     // supervised terms averaged over
  std::size_t skipped = 0;   // examples without any labeled node
};

// Averages per-term losses and gradients over the batch, then adds the L2
// term (gradient += λθ) once; embeddings are not regularized.
BatchResult minibatch_loss_grad(Model& model, const Dataset& data,
                                std::span<const std::size_t> batch, Rng* dropout_rng);

// Each labeled node (with a contiguous span) becomes its own example; used
// for sequence models on sentiment data.
std::vector<Tree> expand_labeled_spans(const std::vector<Tree>& trees);

// Maps 0-1 → 0, 3-4 → 1 and drops neutral labels; sentences whose root is
// neutral are removed.
std::vector<Tree> binarize_sentiment(std::vector<Tree> trees);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
  double seconds = 0.0;
};

// "epoch<TAB>train_loss<TAB>dev_metric<TAB>seconds", %.17g numbers.
std::string format_epoch_row(const EpochRecord& r);

struct TrainOptions {
  std::string checkpoint_path;  // written at every dev improvement (empty = skip)
  std::string log_path;         // epoch TSV (empty = skip)
  bool record_time = true;      // false writes 0 seconds, making logs reproducible
  std::size_t workers = 1;      // evaluation threads
  std::ostream* progress = nullptr;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::size_t skipped_examples = 0;
};

// Seeded shuffling each epoch, minibatches of config.batch (last partial
// batch kept), AdaGrad, dev evaluation after each epoch, best-dev
// parameters restored at the end, early stop after `patience` epochs
// without improvement. With an empty dev set the training set is scored.
TrainResult train(Model& model, const Dataset& train_set, const Dataset& dev_set,
                  const TrainOptions& options = {});

// Dev metric used for model selection: root accuracy or Pearson r
// (0 when undefined).
double dev_metric(const Model& model, const Dataset& data, std::size_t workers = 1);

// Root predictions / relatedness scores, evaluated across `workers`
// threads with results stored by example index.
std::vector<std::size_t> predict_labels(const Model& model, const std::vector<Tree>& trees,
                                        std::size_t workers = 1);
std::vector<double> predict_scores(const Model& model, const std::vector<PairExample>& pairs,
                                   std::size_t workers = 1);

// ---- checkpoints ----
//
// "TLSTM\x01", u64 record count, then per record: u32 name length, name
// bytes, u32 rank, rank × u64 dims, prod(dims) × f64. Little-endian.

void save_checkpoint(const ParamSet& params, const std::string& path);
// Reads every record; returns a ParamSet holding the values.
ParamSet read_checkpoint(const std::string& path);
// Copies checkpoint values into `params`, which must have exactly the same
// names and shapes; on any error `params` is untouched.
void load_checkpoint(const std::string& path, ParamSet& params);

// Model parameters plus an "embedding" record.
void save_model(const Model& model, const std::string& path);
void load_model(const std::string& path, Model& model);

}  // namespace treelstm

#endif  // TREELSTM_TRAIN_H_
