#ifndef TREELSTM_TREE_IO_H_
#define TREELSTM_TREE_IO_H_

#include <istream>
#include <string>
#include <vector>

#include "treelstm/tree.h"

namespace treelstm {

// One s-expression per non-blank line.
std::vector<Tree> read_constituency(std::istream& in);
std::vector<Tree> read_constituency_file(const std::string& path);

// TAB-separated rows, sentences separated by blank lines.
std::vector<Tree> read_dependency(std::istream& in);
std::vector<Tree> read_dependency_file(const std::string& path);

// "start<TAB>end<TAB>label" rows (end exclusive), one block per sentence.
std::vector<SpanLabels> read_span_labels(std::istream& in);
std::vector<SpanLabels> read_span_labels_file(const std::string& path);
void write_span_labels(std::ostream& out, const std::vector<SpanLabels>& blocks);

// SICK layout: header row naming pair_ID, sentence_A, sentence_B,
// relatedness_score (other columns ignored, any order).
struct PairRecord {
  std::string id;
  std::string sentence_a;
  std::string sentence_b;
  double score = 0.0;
};
std::vector<PairRecord> read_pairs(std::istream& in);
std::vector<PairRecord> read_pairs_file(const std::string& path);

// Whitespace tokenization of a raw sentence.
std::vector<std::string> split_tokens(const std::string& sentence);

}  // namespace treelstm

#endif  // TREELSTM_TREE_IO_H_
