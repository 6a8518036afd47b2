#ifndef TREELSTM_TREE_H_
#define TREELSTM_TREE_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace treelstm {

enum class TreeKind { kConstituency, kDependency };

// Longest sentence accepted by the parsers.
inline constexpr std::size_t kMaxSentenceLength = 400;

struct TreeNode {
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;  // ordered
  std::optional<std::size_t> token;   // index into Tree::words
  std::optional<int> label;
  std::vector<std::size_t> span;      // sorted token indices of the subtree
};

// Rooted ordered tree over a tokenized sentence.
//
// Constituency trees are strictly binary at internal nodes and carry tokens
// only at leaves. Dependency trees carry a token at every node and order
// children by token index.
class Tree {
 public:
  Tree(TreeKind kind, std::vector<TreeNode> nodes, std::size_t root,
       std::vector<std::string> words);

  TreeKind kind() const { return kind_; }
  std::size_t root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(std::size_t id) const { return nodes_[id]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t length() const { return words_.size(); }

  // Children before parents; computed iteratively.
  const std::vector<std::size_t>& post_order() const { return post_order_; }

  void set_label(std::size_t id, std::optional<int> label) { nodes_[id].label = label; }

  // Vocabulary ids for words(), filled by Vocab::index.
  const std::vector<std::size_t>& word_ids() const { return word_ids_; }
  void set_word_ids(std::vector<std::size_t> ids);

  std::size_t labeled_count() const;

 private:
  void validate_and_finalize();

  TreeKind kind_;
  std::vector<TreeNode> nodes_;
  std::size_t root_;
  std::vector<std::string> words_;
  std::vector<std::size_t> post_order_;
  std::vector<std::size_t> word_ids_;
};

// "(3 (2 good) (2 movie))". Integer labels become node labels; any other
// label text (e.g. "NP") leaves the node unlabeled.
Tree parse_constituency(std::string_view text);

struct DependencyRow {
  std::size_t index;  // 1-based
  std::string token;
  std::size_t head;   // 0 = root
};

Tree parse_dependency(const std::vector<DependencyRow>& rows);
// Parses "index<TAB>token<TAB>head" lines (CoNLL-X 10-column rows also
// accepted, head taken from column 7).
Tree parse_dependency_lines(const std::vector<std::string>& lines);

std::string to_sexpr(const Tree& tree);

// Copy of the subtree rooted at `id`, with words restricted to its span.
// The span must be contiguous.
Tree subtree(const Tree& tree, std::size_t id);

// Labeled spans keyed by [start, end) token offsets.
using SpanLabels = std::map<std::pair<std::size_t, std::size_t>, int>;

struct ProjectionStats {
  std::size_t matched = 0;
  std::size_t total = 0;
  double match_rate() const { return total ? double(matched) / double(total) : 0.0; }
};

// Labels every node whose subtree token set is exactly some contiguous
// labeled range; clears all other labels.
ProjectionStats project_labels(Tree& tree, const SpanLabels& spans);

// Every labeled node's span and label, for building span-label files from
// constituency trees.
SpanLabels labeled_spans(const Tree& tree);

bool is_contiguous(const std::vector<std::size_t>& sorted_span);

}  // namespace treelstm

#endif  // TREELSTM_TREE_H_
