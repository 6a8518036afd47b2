#ifndef TREELSTM_CONFIG_H_
#define TREELSTM_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace treelstm {

enum class Task { kSentimentBinary, kSentimentFine, kRelatedness };

enum class Variant { kLstm, kBiLstm, kLstm2Layer, kBiLstm2Layer, kChildSumDep, kNaryConst };

std::string to_string(Task task);
std::string to_string(Variant variant);
// Throw std::invalid_argument on unknown names.
Task parse_task(const std::string& name);
Variant parse_variant(const std::string& name);

bool is_tree_variant(Variant v);
bool is_sentiment(Task t);

struct RunConfig {
  Task task = Task::kSentimentFine;
  Variant variant = Variant::kNaryConst;
  std::size_t d = 150;
  std::size_t e = 300;
  std::size_t sim_hidden = 50;
  std::size_t relatedness_classes = 5;  // K
  double lr = 0.05;
  double emb_lr = 0.1;     // 0 keeps embeddings fixed
  double lambda = 1e-4;
  double dropout = 0.5;    // classifier input only
  std::size_t batch = 25;
  std::size_t epochs = 30;
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  double init_scale = 0.05;
  double forget_bias = 1.0;
  bool offdiag = true;     // N-ary off-diagonal forget matrices

  // |Y| for sentiment tasks, K for relatedness.
  std::size_t classes() const;
  // Throws std::invalid_argument naming the bad field.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

// Defaults differing by task: relatedness keeps embeddings fixed and
// uses no dropout.
RunConfig default_config(Task task, Variant variant);

// Composition-function parameter count under the one-bias-per-gate
// convention: gate W, U, b only; shared bidirectional weights counted once;
// embeddings and heads excluded.
std::size_t count_params(Variant variant, std::size_t d, std::size_t e = 300);

// ---- flat "key = value" config text ----
//
// Keys are the RunConfig field names (task, variant, d, e, sim_hidden,
// relatedness_classes, lr, emb_lr, lambda, dropout, batch, epochs,
// patience, seed, init_scale, forget_bias, offdiag). '#' starts a comment.

using ConfigEntries = std::map<std::string, std::string>;

const std::vector<std::string>& config_keys();

// Throws ParseError (1-based line) on lines without '=' and on repeated keys.
ConfigEntries parse_config_text(std::istream& in);
ConfigEntries read_config_file(const std::string& path);

// Starts from default_config(task, variant) and applies the remaining
// entries. Throws std::invalid_argument on unknown keys or bad values.
RunConfig resolve_config(const ConfigEntries& entries);

// Every key, one per line; resolve_config(parse_config_text(...)) of the
// result reproduces the config exactly.
std::string format_config(const RunConfig& cfg);

}  // namespace treelstm

#endif  // TREELSTM_CONFIG_H_
