#include "treelstm/config.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "treelstm/cells.h"
#include "treelstm/errors.h"

namespace treelstm {

std::string to_string(Task task) {
  switch (task) {
    case Task::kSentimentBinary: return "sentiment-binary";
    case Task::kSentimentFine: return "sentiment-fine";
    case Task::kRelatedness: return "relatedness";
  }
  return "?";
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::kLstm: return "lstm";
    case Variant::kBiLstm: return "bilstm";
    case Variant::kLstm2Layer: return "lstm-2layer";
    case Variant::kBiLstm2Layer: return "bilstm-2layer";
    case Variant::kChildSumDep: return "childsum-dep";
    case Variant::kNaryConst: return "nary-const";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::kSentimentBinary, Task::kSentimentFine, Task::kRelatedness}) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown task '" + name + "'");
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kLstm, Variant::kBiLstm, Variant::kLstm2Layer,
                    Variant::kBiLstm2Layer, Variant::kChildSumDep, Variant::kNaryConst}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + name + "'");
}

bool is_tree_variant(Variant v) { return v == Variant::kChildSumDep || v == Variant::kNaryConst; }

bool is_sentiment(Task t) { return t != Task::kRelatedness; }

std::size_t RunConfig::classes() const {
  switch (task) {
    case Task::kSentimentBinary: return 2;
    case Task::kSentimentFine: return 5;
    case Task::kRelatedness: return relatedness_classes;
  }
  return 0;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (d == 0) fail("d must be positive");
  if (e == 0) fail("e must be positive");
  if (sim_hidden == 0) fail("sim_hidden must be positive");
  if (relatedness_classes < 2) fail("relatedness_classes must exceed 1");
  if (!(lr > 0 && lr <= 1)) fail("lr must lie in (0, 1]");
  if (!(emb_lr >= 0 && emb_lr <= 1)) fail("emb_lr must lie in [0, 1]");
  if (!(lambda >= 0 && lambda <= 1)) fail("lambda must lie in [0, 1]");
  if (!(dropout >= 0 && dropout < 1)) fail("dropout must lie in [0, 1)");
  if (batch == 0) fail("batch must be positive");
  if (!(init_scale > 0)) fail("init_scale must be positive");
}

RunConfig default_config(Task task, Variant variant) {
  RunConfig cfg;
  cfg.task = task;
  cfg.variant = variant;
  if (task == Task::kRelatedness) {
    cfg.emb_lr = 0.0;
    cfg.dropout = 0.0;
  }
  return cfg;
}

std::size_t count_params(Variant variant, std::size_t d, std::size_t e) {
  switch (variant) {
    case Variant::kLstm:
    case Variant::kBiLstm:
    case Variant::kChildSumDep:
      return gate_param_count({d, e, 1, true, true});
    case Variant::kLstm2Layer:
      return gate_param_count({d, e, 1, true, true}) + gate_param_count({d, d, 1, true, true});
    case Variant::kBiLstm2Layer:
      return gate_param_count({d, e, 1, true, true}) +
             gate_param_count({d, 2 * d, 1, true, true});
    case Variant::kNaryConst:
      return gate_param_count({d, e, 2, true, true});
  }
  return 0;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "task",    "variant", "d",     "e",        "sim_hidden", "relatedness_classes",
      "lr",      "emb_lr",  "lambda", "dropout", "batch",      "epochs",
      "patience", "seed",   "init_scale", "forget_bias", "offdiag"};
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("config: bad value '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("config: bad value '" + text + "' for " + key);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ConfigEntries parse_config_text(std::istream& in) {
  ConfigEntries entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value", lineno);
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key", lineno);
    if (!entries.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ParseError("config line " + std::to_string(lineno) + ": repeated key " + key, lineno);
    }
  }
  return entries;
}

ConfigEntries read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_config_text(in);
}

RunConfig resolve_config(const ConfigEntries& entries) {
  for (const auto& [key, value] : entries) {
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  auto get = [&](const char* key) -> const std::string* {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  const RunConfig base;
  const Task task = get("task") ? parse_task(*get("task")) : base.task;
  const Variant variant = get("variant") ? parse_variant(*get("variant")) : base.variant;
  RunConfig cfg = default_config(task, variant);
  auto size = [&](const char* key, std::size_t& field) {
    if (const auto* v = get(key)) field = parse_number<std::size_t>(key, *v);
  };
  auto real = [&](const char* key, double& field) {
    if (const auto* v = get(key)) field = parse_number<double>(key, *v);
  };
  size("d", cfg.d);
  size("e", cfg.e);
  size("sim_hidden", cfg.sim_hidden);
  size("relatedness_classes", cfg.relatedness_classes);
  real("lr", cfg.lr);
  real("emb_lr", cfg.emb_lr);
  real("lambda", cfg.lambda);
  real("dropout", cfg.dropout);
  size("batch", cfg.batch);
  size("epochs", cfg.epochs);
  size("patience", cfg.patience);
  if (const auto* v = get("seed")) cfg.seed = parse_number<std::uint64_t>("seed", *v);
  real("init_scale", cfg.init_scale);
  real("forget_bias", cfg.forget_bias);
  if (const auto* v = get("offdiag")) cfg.offdiag = parse_bool("offdiag", *v);
  cfg.validate();
  return cfg;
}

std::string format_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "task = " << to_string(cfg.task) << '\n'
      << "variant = " << to_string(cfg.variant) << '\n'
      << "d = " << cfg.d << '\n'
      << "e = " << cfg.e << '\n'
      << "sim_hidden = " << cfg.sim_hidden << '\n'
      << "relatedness_classes = " << cfg.relatedness_classes << '\n'
      << "lr = " << format_double(cfg.lr) << '\n'
      << "emb_lr = " << format_double(cfg.emb_lr) << '\n'
      << "lambda = " << format_double(cfg.lambda) << '\n'
      << "dropout = " << format_double(cfg.dropout) << '\n'
      << "batch = " << cfg.batch << '\n'
      << "epochs = " << cfg.epochs << '\n'
      << "patience = " << cfg.patience << '\n'
      << "seed = " << cfg.seed << '\n'
      << "init_scale = " << format_double(cfg.init_scale) << '\n'
      << "forget_bias = " << format_double(cfg.forget_bias) << '\n'
      << "offdiag = " << (cfg.offdiag ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace treelstm
