#ifndef TREELSTM_GRADCHECK_H_
#define TREELSTM_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treelstm/config.h"
#include "treelstm/tree.h"

namespace treelstm {

class Rng;

// Random binary constituency tree over `leaves` tokens "w0".."w{vocab-1}",
// every node labeled in [0, classes).
Tree random_constituency_tree(std::size_t leaves, std::size_t vocab, std::size_t classes,
                              Rng& rng);
// Random dependency tree over `nodes` tokens, unlabeled.
Tree random_dependency_tree(std::size_t nodes, std::size_t vocab, Rng& rng);

struct GradcheckOptions {
  Task task = Task::kSentimentFine;
  Variant variant = Variant::kNaryConst;
  std::size_t d = 8;
  std::size_t e = 12;
  std::size_t max_nodes = 12;
  std::uint64_t seed = 1;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  // |a - n| / max(|a|, |n|, floor)
  double floor = 1e-6;
  // Test hook: perturbs one analytic gradient entry of this parameter.
  std::optional<std::string> corrupt;
};

struct GroupError {
  std::string name;  // parameter name, or "embedding"
  double worst = 0.0;
  std::size_t entries = 0;
};

struct GradcheckReport {
  std::vector<GroupError> groups;
  double worst = 0.0;
  std::string worst_group;
  bool passed = false;
};

double relative_error(double analytic, double numeric, double floor);

// Builds a model and one random instance (a labeled tree for sentiment
// tasks, a scored pair for relatedness), then compares backprop gradients
// with central differences for every parameter entry and every embedding
// entry the instance touches. Deterministic in options.seed.
GradcheckReport gradcheck(const GradcheckOptions& options);

// "group<TAB>worst_rel_err<TAB>entries" lines.
std::string format_gradcheck(const GradcheckReport& report);

}  // namespace treelstm

#endif  // TREELSTM_GRADCHECK_H_
