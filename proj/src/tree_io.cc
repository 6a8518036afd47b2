#include "treelstm/tree_io.h"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <fstream>
#include <sstream>

#include "treelstm/errors.h"

namespace treelstm {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string col;
  while (std::getline(ss, col, '\t')) cols.push_back(col);
  if (!line.empty() && line.back() == '\t') cols.emplace_back();
  return cols;
}

}  // namespace

std::vector<Tree> read_constituency(std::istream& in) {
  std::vector<Tree> trees;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) continue;
    try {
      trees.push_back(parse_constituency(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ", offset " +
                           std::to_string(e.position()) + ": " + e.what(),
                       lineno);
    } catch (const std::invalid_argument& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
  return trees;
}

std::vector<Tree> read_constituency_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_constituency(in);
}

std::vector<Tree> read_dependency(std::istream& in) {
  std::vector<Tree> trees;
  std::vector<std::string> block;
  std::size_t block_start = 0;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (block.empty()) return;
    try {
      trees.push_back(parse_dependency_lines(block));
    } catch (const ParseError& e) {
      const std::size_t line = block_start + e.position() - 1;
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    } catch (const std::invalid_argument& e) {
      throw ParseError("line " + std::to_string(block_start) + ": " + e.what(), block_start);
    }
    block.clear();
  };
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) {
      flush();
      continue;
    }
    if (block.empty()) block_start = lineno;
    block.push_back(line);
  }
  flush();
  return trees;
}

std::vector<Tree> read_dependency_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_dependency(in);
}

std::vector<SpanLabels> read_span_labels(std::istream& in) {
  std::vector<SpanLabels> blocks;
  SpanLabels current;
  bool open = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) {
      if (open) blocks.push_back(std::move(current));
      current.clear();
      open = false;
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 3) {
      throw ParseError("span labels: line " + std::to_string(lineno) + " needs 3 columns",
                       lineno);
    }
    std::size_t start = 0;
    std::size_t end = 0;
    int label = 0;
    auto bad = [&] {
      return ParseError("span labels: line " + std::to_string(lineno) + " is malformed", lineno);
    };
    if (std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), start).ec !=
            std::errc() ||
        std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), end).ec !=
            std::errc() ||
        std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), label).ec !=
            std::errc()) {
      throw bad();
    }
    if (end <= start) throw bad();
    current[{start, end}] = label;
    open = true;
  }
  if (open) blocks.push_back(std::move(current));
  return blocks;
}

std::vector<SpanLabels> read_span_labels_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_span_labels(in);
}

void write_span_labels(std::ostream& out, const std::vector<SpanLabels>& blocks) {
  for (const auto& block : blocks) {
    for (const auto& [range, label] : block) {
      out << range.first << '\t' << range.second << '\t' << label << '\n';
    }
    out << '\n';
  }
}

std::vector<PairRecord> read_pairs(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("pairs: missing header", 1);
  strip_cr(line);
  auto header = split_tabs(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("pairs: header lacks column '" + name + "'", 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = column("pair_ID");
  const std::size_t a_col = column("sentence_A");
  const std::size_t b_col = column("sentence_B");
  const std::size_t score_col = column("relatedness_score");
  const std::size_t need = std::max({id_col, a_col, b_col, score_col}) + 1;

  std::vector<PairRecord> pairs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) continue;
    auto cols = split_tabs(line);
    if (cols.size() < need) {
      throw ParseError("pairs: line " + std::to_string(lineno) + " has too few columns", lineno);
    }
    PairRecord rec{cols[id_col], cols[a_col], cols[b_col], 0.0};
    try {
      std::size_t used = 0;
      rec.score = std::stod(cols[score_col], &used);
      if (used != cols[score_col].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("pairs: line " + std::to_string(lineno) + " has a bad score", lineno);
    }
    pairs.push_back(std::move(rec));
  }
  return pairs;
}

std::vector<PairRecord> read_pairs_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_pairs(in);
}

std::vector<std::string> split_tokens(const std::string& sentence) {
  std::vector<std::string> out;
  std::istringstream ss(sentence);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace treelstm
