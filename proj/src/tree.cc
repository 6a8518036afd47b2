#include "treelstm/tree.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include "treelstm/errors.h"

namespace treelstm {

namespace {

std::vector<std::size_t> merge_sorted(const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::optional<int> parse_label(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) return std::nullopt;
  return value;
}

}  // namespace

Tree::Tree(TreeKind kind, std::vector<TreeNode> nodes, std::size_t root,
           std::vector<std::string> words)
    : kind_(kind), nodes_(std::move(nodes)), root_(root), words_(std::move(words)) {
  validate_and_finalize();
}

void Tree::validate_and_finalize() {
  const std::size_t n = nodes_.size();
  if (n == 0) throw std::invalid_argument("tree: no nodes");
  if (root_ >= n) throw std::invalid_argument("tree: root out of range");
  if (words_.size() > kMaxSentenceLength) {
    throw std::invalid_argument("tree: sentence has " + std::to_string(words_.size()) +
                                " tokens, limit is " + std::to_string(kMaxSentenceLength));
  }
  if (nodes_[root_].parent) throw std::invalid_argument("tree: root has a parent");
  for (std::size_t id = 0; id < n; ++id) {
    const TreeNode& node = nodes_[id];
    if (id != root_ && !node.parent) {
      throw std::invalid_argument("tree: node " + std::to_string(id) + " is a second root");
    }
    for (std::size_t c : node.children) {
      if (c >= n || nodes_[c].parent != id) {
        throw std::invalid_argument("tree: child list of node " + std::to_string(id) +
                                    " disagrees with parent fields");
      }
    }
    if (node.token && *node.token >= words_.size()) {
      throw std::invalid_argument("tree: node " + std::to_string(id) + " token out of range");
    }
    if (kind_ == TreeKind::kConstituency) {
      if (node.children.empty() && !node.token) {
        throw std::invalid_argument("tree: constituency leaf without token");
      }
      if (!node.children.empty() && node.token) {
        throw std::invalid_argument("tree: constituency token at internal node");
      }
      if (!node.children.empty() && node.children.size() != 2) {
        throw std::invalid_argument("tree: constituency node " + std::to_string(id) +
                                    " has " + std::to_string(node.children.size()) +
                                    " children");
      }
    } else if (!node.token) {
      throw std::invalid_argument("tree: dependency node without token");
    }
  }

  // Iterative post-order from the root; each node must be reached once.
  post_order_.clear();
  post_order_.reserve(n);
  std::vector<char> seen(n, 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root_, 0}};
  seen[root_] = 1;
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const auto& children = nodes_[id].children;
    if (next < children.size()) {
      std::size_t c = children[next++];
      if (seen[c]) throw std::invalid_argument("tree: cycle through node " + std::to_string(c));
      seen[c] = 1;
      stack.emplace_back(c, 0);
    } else {
      post_order_.push_back(id);
      stack.pop_back();
    }
  }
  if (post_order_.size() != n) throw std::invalid_argument("tree: unreachable nodes (cycle)");

  std::vector<std::size_t> token_uses(words_.size(), 0);
  for (std::size_t id : post_order_) {
    TreeNode& node = nodes_[id];
    node.span.clear();
    if (node.token) {
      node.span.push_back(*node.token);
      ++token_uses[*node.token];
    }
    for (std::size_t c : node.children) node.span = merge_sorted(node.span, nodes_[c].span);
  }
  for (std::size_t t = 0; t < words_.size(); ++t) {
    if (token_uses[t] != 1) {
      throw std::invalid_argument("tree: token " + std::to_string(t) + " used " +
                                  std::to_string(token_uses[t]) + " times");
    }
  }
}

void Tree::set_word_ids(std::vector<std::size_t> ids) {
  if (ids.size() != words_.size()) throw DimensionError("tree: word id count mismatch");
  word_ids_ = std::move(ids);
}

std::size_t Tree::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.label.has_value(); }));
}

Tree parse_constituency(std::string_view text) {
  std::vector<TreeNode> nodes;
  std::vector<std::string> words;
  std::vector<std::size_t> open;  // stack of node ids
  std::vector<std::size_t> open_at;
  std::optional<std::size_t> root;
  std::size_t pos = 0;
  const std::size_t n = text.size();

  auto skip_space = [&] {
    while (pos < n && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto read_atom = [&] {
    std::size_t start = pos;
    while (pos < n && text[pos] != '(' && text[pos] != ')' &&
           !std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
    return text.substr(start, pos - start);
  };

  skip_space();
  while (pos < n) {
    char ch = text[pos];
    if (ch == '(') {
      if (root && open.empty()) throw ParseError("constituency: text after the root", pos);
      const std::size_t at = pos++;
      skip_space();
      std::string_view label = read_atom();
      if (label.empty()) throw ParseError("constituency: missing label", pos);
      TreeNode node;
      node.label = parse_label(label);
      const std::size_t id = nodes.size();
      if (!open.empty()) {
        TreeNode& parent = nodes[open.back()];
        if (parent.token) throw ParseError("constituency: token mixed with subtrees", at);
        node.parent = open.back();
        parent.children.push_back(id);
      } else {
        root = id;
      }
      nodes.push_back(std::move(node));
      open.push_back(id);
      open_at.push_back(at);
    } else if (ch == ')') {
      if (open.empty()) throw ParseError("constituency: unbalanced ')'", pos);
      TreeNode& node = nodes[open.back()];
      if (node.children.empty() && !node.token) {
        throw ParseError("constituency: empty leaf", open_at.back());
      }
      if (!node.children.empty() && node.children.size() != 2) {
        throw ParseError("constituency: node with " + std::to_string(node.children.size()) +
                             " children (binary trees required)",
                         open_at.back());
      }
      open.pop_back();
      open_at.pop_back();
      ++pos;
    } else {
      if (open.empty()) throw ParseError("constituency: token outside parentheses", pos);
      const std::size_t at = pos;
      std::string_view token = read_atom();
      TreeNode& node = nodes[open.back()];
      if (node.token) throw ParseError("constituency: leaf with several tokens", at);
      if (!node.children.empty()) throw ParseError("constituency: token mixed with subtrees", at);
      if (words.size() == kMaxSentenceLength) {
        throw ParseError("constituency: sentence longer than " +
                             std::to_string(kMaxSentenceLength) + " tokens",
                         at);
      }
      node.token = words.size();
      words.emplace_back(token);
    }
    skip_space();
  }
  if (!open.empty()) throw ParseError("constituency: unbalanced '('", open_at.back());
  if (!root) throw ParseError("constituency: empty input", 0);
  return Tree(TreeKind::kConstituency, std::move(nodes), *root, std::move(words));
}

Tree parse_dependency(const std::vector<DependencyRow>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) throw ParseError("dependency: empty sentence", 0);
  if (n > kMaxSentenceLength) {
    throw ParseError("dependency: sentence longer than " +
                         std::to_string(kMaxSentenceLength) + " tokens",
                     1);
  }
  std::vector<TreeNode> nodes(n);
  std::vector<std::string> words(n);
  std::optional<std::size_t> root;
  for (std::size_t r = 0; r < n; ++r) {
    const DependencyRow& row = rows[r];
    if (row.index != r + 1) {
      throw ParseError("dependency: row " + std::to_string(r + 1) + " has index " +
                           std::to_string(row.index) + " (indices must be 1..n)",
                       r + 1);
    }
    if (row.head > n) {
      throw ParseError("dependency: row " + std::to_string(r + 1) + " has dangling head " +
                           std::to_string(row.head),
                       r + 1);
    }
    if (row.head == row.index) {
      throw ParseError("dependency: row " + std::to_string(r + 1) + " is its own head (cycle)",
                       r + 1);
    }
    if (row.head == 0) {
      if (root) {
        throw ParseError("dependency: row " + std::to_string(r + 1) +
                             " is a second root (first at row " + std::to_string(*root + 1) + ")",
                         r + 1);
      }
      root = r;
    } else {
      nodes[r].parent = row.head - 1;
    }
    nodes[r].token = r;
    words[r] = row.token;
  }
  if (!root) throw ParseError("dependency: no root row (head 0)", 1);
  for (std::size_t r = 0; r < n; ++r) {
    if (nodes[r].parent) nodes[*nodes[r].parent].children.push_back(r);
  }
  // Walking up from any node must reach the root within n steps.
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t cur = r;
    std::size_t steps = 0;
    while (nodes[cur].parent) {
      cur = *nodes[cur].parent;
      if (++steps > n) {
        throw ParseError("dependency: row " + std::to_string(r + 1) + " lies on a cycle", r + 1);
      }
    }
  }
  return Tree(TreeKind::kDependency, std::move(nodes), *root, std::move(words));
}

Tree parse_dependency_lines(const std::vector<std::string>& lines) {
  std::vector<DependencyRow> rows;
  rows.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> cols;
    std::stringstream ss(lines[i]);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 3 && cols.size() < 7) {
      throw ParseError("dependency: row " + std::to_string(i + 1) + " has " +
                           std::to_string(cols.size()) + " columns",
                       i + 1);
    }
    const std::string& head_text = cols.size() == 3 ? cols[2] : cols[6];
    std::size_t index = 0;
    std::size_t head = 0;
    auto parse_num = [&](const std::string& s, std::size_t& out) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("dependency: row " + std::to_string(i + 1) + ": bad integer '" + s + "'",
                         i + 1);
      }
    };
    parse_num(cols[0], index);
    parse_num(head_text, head);
    if (cols[1].empty()) {
      throw ParseError("dependency: row " + std::to_string(i + 1) + " has empty token", i + 1);
    }
    rows.push_back({index, cols[1], head});
  }
  return parse_dependency(rows);
}

std::string to_sexpr(const Tree& tree) {
  std::string out;
  // (node, next child) stack; emits "(label ...)" with "_" for no label.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{tree.root(), 0}};
  auto open = [&](std::size_t id) {
    const TreeNode& node = tree.node(id);
    if (!out.empty() && out.back() != '(') out += ' ';
    out += '(';
    out += node.label ? std::to_string(*node.label) : std::string("_");
    if (node.token) {
      out += ' ';
      out += tree.words()[*node.token];
    }
  };
  open(tree.root());
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const auto& children = tree.node(id).children;
    if (next < children.size()) {
      std::size_t c = children[next++];
      open(c);
      stack.emplace_back(c, 0);
    } else {
      out += ')';
      stack.pop_back();
    }
  }
  return out;
}

bool is_contiguous(const std::vector<std::size_t>& sorted_span) {
  return !sorted_span.empty() &&
         sorted_span.back() - sorted_span.front() + 1 == sorted_span.size();
}

Tree subtree(const Tree& tree, std::size_t id) {
  const TreeNode& top = tree.node(id);
  if (!is_contiguous(top.span)) throw std::invalid_argument("subtree: span is not contiguous");
  const std::size_t offset = top.span.front();
  std::vector<TreeNode> nodes;
  std::vector<std::size_t> remap(tree.size(), 0);
  std::vector<std::size_t> order;
  // Pre-order collection keeps ids in document order.
  std::vector<std::size_t> stack{id};
  while (!stack.empty()) {
    std::size_t cur = stack.back();
    stack.pop_back();
    remap[cur] = order.size();
    order.push_back(cur);
    const auto& ch = tree.node(cur).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  for (std::size_t old : order) {
    const TreeNode& src = tree.node(old);
    TreeNode node;
    if (old != id) node.parent = remap[*src.parent];
    for (std::size_t c : src.children) node.children.push_back(remap[c]);
    if (src.token) node.token = *src.token - offset;
    node.label = src.label;
    nodes.push_back(std::move(node));
  }
  std::vector<std::string> words(tree.words().begin() + offset,
                                 tree.words().begin() + offset + top.span.size());
  Tree out(tree.kind(), std::move(nodes), 0, std::move(words));
  if (!tree.word_ids().empty()) {
    out.set_word_ids(std::vector<std::size_t>(tree.word_ids().begin() + offset,
                                              tree.word_ids().begin() + offset + top.span.size()));
  }
  return out;
}

ProjectionStats project_labels(Tree& tree, const SpanLabels& spans) {
  ProjectionStats stats;
  stats.total = tree.size();
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const auto& span = tree.node(id).span;
    std::optional<int> label;
    if (is_contiguous(span)) {
      auto it = spans.find({span.front(), span.back() + 1});
      if (it != spans.end()) label = it->second;
    }
    tree.set_label(id, label);
    if (label) ++stats.matched;
  }
  return stats;
}

SpanLabels labeled_spans(const Tree& tree) {
  SpanLabels out;
  for (const TreeNode& node : tree.nodes()) {
    if (node.label && is_contiguous(node.span)) {
      out[{node.span.front(), node.span.back() + 1}] = *node.label;
    }
  }
  return out;
}

}  // namespace treelstm
