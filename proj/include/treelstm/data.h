#ifndef TREELSTM_DATA_H_
#define TREELSTM_DATA_H_

#include <memory>
#include <string>
#include <vector>

#include "treelstm/config.h"
#include "treelstm/embeddings.h"
#include "treelstm/model.h"
#include "treelstm/train.h"

namespace treelstm {

// Files making up one data split. Which fields are read depends on the task
// and variant:
//   sentiment, nary-const / sequence: `path` holds s-expressions;
//   sentiment, childsum-dep: `path` holds dependency trees, `spans` the
//     per-sentence span labels projected onto them;
//   relatedness: `path` is the pair TSV; `left`/`right` hold the per-side
//     trees (dependency or constituency). Sequence variants may omit them.
struct DataFiles {
  std::string path;
  std::string spans;
  std::string left;
  std::string right;
  bool empty() const { return path.empty(); }
};

// Right-branching dependency chain over the tokens (for sequence models).
Tree flat_tree(const std::vector<std::string>& tokens);

// Unindexed trees / pairs. Binary sentiment drops neutral labels and
// neutral-root sentences. Throws IoError / ParseError.
Dataset load_dataset(const RunConfig& cfg, const DataFiles& files);

// Every token of every tree, in reading order.
std::vector<std::vector<std::string>> token_streams(const Dataset& data);
void index_dataset(Dataset& data, const Vocab& vocab);

// Sidecar paths next to a checkpoint.
std::string config_path_for(const std::string& checkpoint);
std::string vocab_path_for(const std::string& checkpoint);

// Writes <ckpt>, <ckpt>.config and <ckpt>.vocab.
void save_bundle(const Model& model, const Vocab& vocab, const std::string& checkpoint);

struct ModelBundle {
  RunConfig config;
  Vocab vocab;
  std::unique_ptr<Model> model;
};

// Reads the sidecars and restores the parameters and embeddings.
ModelBundle load_bundle(const std::string& checkpoint);

struct TrainRun {
  ModelBundle bundle;
  TrainResult result;
};

// Loads both splits, builds the vocabulary from train + dev, draws or loads
// embeddings (rng seeded with cfg.seed ^ 0xE3B0C442), writes the bundle
// sidecars when options.checkpoint_path is set, then trains. Embedding
// coverage goes to `diag` when given.
TrainRun train_from_files(const RunConfig& cfg, const DataFiles& train_files,
                          const DataFiles& dev_files, const std::string& embeddings_path,
                          const TrainOptions& options, std::ostream* diag = nullptr);

}  // namespace treelstm

#endif  // TREELSTM_DATA_H_
