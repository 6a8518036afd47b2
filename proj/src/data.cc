#include "treelstm/data.h"

#include <fstream>
#include <ostream>

#include "treelstm/errors.h"
#include "treelstm/rng.h"
#include "treelstm/tree_io.h"

namespace treelstm {

Tree flat_tree(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw ParseError("empty sentence", 0);
  std::vector<DependencyRow> rows;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    rows.push_back({i + 1, tokens[i], i + 1 == tokens.size() ? 0 : i + 2});
  }
  return parse_dependency(rows);
}

namespace {

std::vector<Tree> read_trees(Variant variant, const std::string& path) {
  return variant == Variant::kChildSumDep ? read_dependency_file(path)
                                          : read_constituency_file(path);
}

}  // namespace

Dataset load_dataset(const RunConfig& cfg, const DataFiles& files) {
  Dataset data;
  if (files.empty()) return data;
  if (is_sentiment(cfg.task)) {
    if (cfg.variant == Variant::kChildSumDep) {
      data.sentences = read_dependency_file(files.path);
      if (files.spans.empty()) {
        throw IoError("dependency sentiment data needs a span-label file for '" + files.path + "'");
      }
      const auto spans = read_span_labels_file(files.spans);
      if (spans.size() != data.sentences.size()) {
        throw IoError("'" + files.spans + "' has " + std::to_string(spans.size()) +
                      " blocks for " + std::to_string(data.sentences.size()) + " trees");
      }
      for (std::size_t i = 0; i < spans.size(); ++i) project_labels(data.sentences[i], spans[i]);
    } else {
      data.sentences = read_constituency_file(files.path);
    }
    if (cfg.task == Task::kSentimentBinary) {
      data.sentences = binarize_sentiment(std::move(data.sentences));
    }
    return data;
  }

  const auto records = read_pairs_file(files.path);
  std::vector<Tree> left, right;
  if (!files.left.empty() || !files.right.empty()) {
    if (files.left.empty() || files.right.empty()) {
      throw IoError("both left and right tree files are needed for '" + files.path + "'");
    }
    left = read_trees(cfg.variant, files.left);
    right = read_trees(cfg.variant, files.right);
    if (left.size() != records.size() || right.size() != records.size()) {
      throw IoError("tree files do not match the " + std::to_string(records.size()) +
                    " pairs in '" + files.path + "'");
    }
  } else if (is_tree_variant(cfg.variant)) {
    throw IoError("variant " + to_string(cfg.variant) + " needs left/right tree files for '" +
                  files.path + "'");
  } else {
    for (const auto& r : records) {
      left.push_back(flat_tree(split_tokens(r.sentence_a)));
      right.push_back(flat_tree(split_tokens(r.sentence_b)));
    }
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    data.pairs.push_back({std::move(left[i]), std::move(right[i]), records[i].score});
  }
  return data;
}

std::vector<std::vector<std::string>> token_streams(const Dataset& data) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : data.sentences) out.push_back(t.words());
  for (const auto& p : data.pairs) {
    out.push_back(p.left.words());
    out.push_back(p.right.words());
  }
  return out;
}

void index_dataset(Dataset& data, const Vocab& vocab) {
  for (auto& t : data.sentences) vocab.index(t);
  for (auto& p : data.pairs) {
    vocab.index(p.left);
    vocab.index(p.right);
  }
}

std::string config_path_for(const std::string& checkpoint) { return checkpoint + ".config"; }
std::string vocab_path_for(const std::string& checkpoint) { return checkpoint + ".vocab"; }

void save_bundle(const Model& model, const Vocab& vocab, const std::string& checkpoint) {
  save_model(model, checkpoint);
  std::ofstream cfg(config_path_for(checkpoint));
  cfg << format_config(model.config());
  std::ofstream voc(vocab_path_for(checkpoint));
  write_vocab(voc, vocab);
  if (!cfg || !voc) throw IoError("cannot write sidecar files for '" + checkpoint + "'");
}

ModelBundle load_bundle(const std::string& checkpoint) {
  ModelBundle b;
  b.config = resolve_config(read_config_file(config_path_for(checkpoint)));
  std::ifstream voc(vocab_path_for(checkpoint));
  if (!voc) throw IoError("cannot open vocabulary '" + vocab_path_for(checkpoint) + "'");
  b.vocab = read_vocab(voc);
  b.model = std::make_unique<Model>(b.config,
                                    EmbeddingTable(Mat(b.vocab.size(), b.config.e), false));
  load_model(checkpoint, *b.model);
  return b;
}

TrainRun train_from_files(const RunConfig& cfg, const DataFiles& train_files,
                          const DataFiles& dev_files, const std::string& embeddings_path,
                          const TrainOptions& options, std::ostream* diag) {
  Dataset train_set = load_dataset(cfg, train_files);
  Dataset dev_set = load_dataset(cfg, dev_files);
  auto streams = token_streams(train_set);
  for (auto& s : token_streams(dev_set)) streams.push_back(std::move(s));
  TrainRun run;
  run.bundle.config = cfg;
  run.bundle.vocab = build_vocab(streams);
  const Vocab& vocab = run.bundle.vocab;
  index_dataset(train_set, vocab);
  index_dataset(dev_set, vocab);

  Rng emb_rng(cfg.seed ^ 0xE3B0C442ULL);
  EmbeddingTable table = [&] {
    if (embeddings_path.empty()) return random_embeddings(vocab, cfg.e, emb_rng, cfg.init_scale);
    auto load = load_embeddings_file(embeddings_path, vocab, cfg.e, emb_rng, cfg.init_scale);
    if (diag) {
      *diag << "embeddings: " << load.found << " of " << vocab.size()
            << " vocabulary entries found\n";
    }
    return std::move(load.table);
  }();

  run.bundle.model = std::make_unique<Model>(cfg, std::move(table));
  if (!options.checkpoint_path.empty()) {
    save_bundle(*run.bundle.model, vocab, options.checkpoint_path);
  }
  run.result = train(*run.bundle.model, train_set, dev_set, options);
  return run;
}

}  // namespace treelstm
