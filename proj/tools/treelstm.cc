// Command-line front end: train, eval, gradcheck, count-params, nn.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treelstm/analysis.h"
#include "treelstm/config.h"
#include "treelstm/data.h"
#include "treelstm/errors.h"
#include "treelstm/gradcheck.h"
#include "treelstm/metrics.h"
#include "treelstm/rng.h"
#include "treelstm/train.h"
#include "treelstm/tree_io.h"

using namespace treelstm;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDataError = 2;
constexpr int kNumericError = 3;

// Stand-in exception for usage errors detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string dashed(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

// Registers one string option per RunConfig key; values stay textual so
// file entries and flags resolve through the same parser.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "flat key = value config file");
    static const std::map<std::string, std::string> help{
        {"task", "sentiment-binary | sentiment-fine | relatedness"},
        {"variant", "lstm | bilstm | lstm-2layer | bilstm-2layer | childsum-dep | nary-const"},
        {"d", "memory dimension"},
        {"e", "word vector dimension"},
        {"sim_hidden", "similarity hidden width"},
        {"relatedness_classes", "relatedness score classes K"},
        {"lr", "AdaGrad learning rate"},
        {"emb_lr", "embedding learning rate (0 freezes)"},
        {"lambda", "L2 strength"},
        {"dropout", "classifier input dropout rate"},
        {"batch", "minibatch size"},
        {"epochs", "maximum epochs"},
        {"patience", "epochs without dev improvement before stopping"},
        {"seed", "random seed"},
        {"init_scale", "uniform init half-width"},
        {"forget_bias", "forget gate bias init"},
        {"offdiag", "N-ary off-diagonal forget matrices (true/false)"},
    };
    for (const auto& key : config_keys()) {
      options[key] = app->add_option("--" + dashed(key), values[key], help.at(key));
    }
  }

  // defaults < config file < flags
  RunConfig resolve() const {
    ConfigEntries entries;
    if (!config_file.empty()) entries = read_config_file(config_file);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) entries[key] = values.at(key);
    }
    return resolve_config(entries);
  }
};

void add_data_flags(CLI::App* app, const std::string& split, DataFiles& files) {
  app->add_option("--" + split, files.path, split + " data (treebank, dependency trees or pair TSV)");
  app->add_option("--" + split + "-spans", files.spans, split + " span labels for dependency trees");
  app->add_option("--" + split + "-left", files.left, split + " trees for the first sentence of each pair");
  app->add_option("--" + split + "-right", files.right, split + " trees for the second sentence of each pair");
}

void echo_config(const RunConfig& cfg) {
  std::cerr << "# resolved config\n" << format_config(cfg);
}

// Runs `body`, translating library exceptions into exit codes.
template <typename Fn>
int guarded(Fn body) {
  try {
    return body();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
}

// Config resolution failures are configuration errors; everything else
// inside a command is a data error unless numeric.
bool resolve_or_report(const ConfigFlags& flags, RunConfig& cfg) {
  try {
    cfg = flags.resolve();
    return true;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
  }
  return false;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---- train ----

struct TrainArgs {
  ConfigFlags flags;
  DataFiles train, dev;
  std::string embeddings;
  std::string checkpoint = "model.ckpt";
  std::string log;
  std::size_t workers = 1;
  bool no_timing = false;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg;
  if (!resolve_or_report(a.flags, cfg)) return kConfigError;
  echo_config(cfg);
  if (a.train.empty()) {
    std::cerr << "error: --train is required\n";
    return kConfigError;
  }
  return guarded([&] {
    TrainOptions opts;
    opts.checkpoint_path = a.checkpoint;
    opts.log_path = a.log.empty() ? a.checkpoint + ".log" : a.log;
    opts.record_time = !a.no_timing;
    opts.workers = a.workers;
    opts.progress = a.quiet ? nullptr : &std::cerr;
    const TrainResult r = train_from_files(cfg, a.train, a.dev, a.embeddings, opts, &std::cerr).result;
    std::cout << "best_epoch\t" << r.best_epoch << '\n'
              << "best_dev_metric\t" << fmt(r.best_metric) << '\n'
              << "epochs_run\t" << r.epochs.size() << '\n';
    return kOk;
  });
}

// ---- eval ----

struct EvalArgs {
  std::vector<std::string> checkpoints;
  DataFiles test;
  std::size_t workers = 1;
  bool lengths = false;
  std::size_t half_width = 2;
  std::size_t max_center = 0;
  std::string output;
  std::string predictions;
  std::string seeds;
};

struct EvalRun {
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<double> predictions;
  std::vector<LengthBin> bins;
};

EvalRun evaluate(const ModelBundle& b, const EvalArgs& a) {
  Dataset data = load_dataset(b.config, a.test);
  index_dataset(data, b.vocab);
  EvalRun run;
  std::vector<double> lengths;
  SubsetMetric metric;
  std::vector<std::size_t> preds, golds;
  std::vector<double> scores, targets;

  if (is_sentiment(b.config.task)) {
    std::vector<Tree> labeled;
    for (const auto& t : data.sentences) {
      if (const auto& l = t.node(t.root()).label) {
        golds.push_back(static_cast<std::size_t>(*l));
        labeled.push_back(t);
        lengths.push_back(static_cast<double>(t.length()));
      }
    }
    if (labeled.empty()) throw IoError("no labeled test sentences in '" + a.test.path + "'");
    preds = predict_labels(*b.model, labeled, a.workers);
    run.metrics.push_back({"accuracy", accuracy(preds, golds)});
    for (auto p : preds) run.predictions.push_back(static_cast<double>(p));
    metric = [&](std::span<const std::size_t> idx) {
      std::vector<std::size_t> p, g;
      for (auto i : idx) {
        p.push_back(preds[i]);
        g.push_back(golds[i]);
      }
      return accuracy(p, g);
    };
  } else {
    if (data.pairs.size() < 2) throw IoError("need at least two test pairs");
    scores = predict_scores(*b.model, data.pairs, a.workers);
    for (const auto& p : data.pairs) {
      targets.push_back(p.score);
      lengths.push_back(0.5 * static_cast<double>(p.left.length() + p.right.length()));
    }
    const auto m = regression_metrics(scores, targets);
    if (!m.pearson) throw NumericError("correlation undefined: constant predictions or targets");
    run.metrics = {{"pearson", *m.pearson}, {"spearman", *m.spearman}, {"mse", m.mse}};
    run.predictions = scores;
    metric = [&](std::span<const std::size_t> idx) {
      std::vector<double> p, g;
      for (auto i : idx) {
        p.push_back(scores[i]);
        g.push_back(targets[i]);
      }
      if (p.size() < 2) return std::nan("");
      return regression_metrics(p, g).pearson.value_or(std::nan(""));
    };
  }
  if (a.lengths) {
    const auto max_center =
        a.max_center ? std::optional<std::size_t>(a.max_center) : std::nullopt;
    for (const auto& bin : length_binned(lengths, metric, a.half_width, max_center)) {
      if (std::isfinite(bin.value)) run.bins.push_back(bin);
    }
  }
  return run;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  auto number = [&](const std::string& s) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      throw UsageError("bad --seeds value '" + text + "'");
    }
    return v;
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::uint64_t lo = number(text.substr(0, dots)), hi = number(text.substr(dots + 2));
    if (lo > hi) throw UsageError("bad --seeds range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) seeds.push_back(number(item));
  if (seeds.empty()) throw UsageError("bad --seeds value '" + text + "'");
  return seeds;
}

std::vector<std::string> checkpoint_list(const EvalArgs& a) {
  if (a.seeds.empty()) return a.checkpoints;
  std::vector<std::string> out;
  for (const auto& pattern : a.checkpoints) {
    const auto at = pattern.find("{seed}");
    if (at == std::string::npos) throw UsageError("--seeds needs {seed} in --checkpoint " + pattern);
    for (std::uint64_t s : parse_seed_list(a.seeds)) {
      out.push_back(pattern.substr(0, at) + std::to_string(s) + pattern.substr(at + 6));
    }
  }
  return out;
}

int cmd_eval(const EvalArgs& a) {
  return guarded([&] {
    if (a.test.empty()) throw UsageError("--test is required");
    std::vector<EvalRun> runs;
    for (const auto& ck : checkpoint_list(a)) {
      const ModelBundle b = load_bundle(ck);
      echo_config(b.config);
      runs.push_back(evaluate(b, a));
    }
    std::ostringstream out;
    if (runs.size() == 1) {
      out << "metric\tvalue\n";
      for (const auto& [name, v] : runs[0].metrics) out << name << '\t' << fmt(v) << '\n';
    } else {
      out << "metric\tmean\tstd\n";
      for (std::size_t m = 0; m < runs[0].metrics.size(); ++m) {
        double mean = 0;
        for (const auto& r : runs) mean += r.metrics[m].second;
        mean /= double(runs.size());
        double var = 0;
        for (const auto& r : runs) var += std::pow(r.metrics[m].second - mean, 2);
        var /= double(runs.size() - 1);
        out << runs[0].metrics[m].first << '\t' << fmt(mean) << '\t' << fmt(std::sqrt(var)) << '\n';
      }
    }
    if (a.lengths) {
      // Bins whose metric is defined in every run, averaged across runs.
      std::map<double, std::pair<std::vector<double>, std::size_t>> merged;
      for (const auto& r : runs) {
        for (const auto& bin : r.bins) {
          auto& slot = merged[bin.ell];
          slot.first.push_back(bin.value);
          slot.second = bin.count;
        }
      }
      std::vector<LengthBin> bins;
      for (const auto& [ell, slot] : merged) {
        if (slot.first.size() != runs.size()) continue;
        double v = 0;
        for (double x : slot.first) v += x;
        bins.push_back({ell, v / double(runs.size()), slot.second});
      }
      out << '\n' << format_length_bins(bins);
    }
    std::cout << out.str();
    if (!a.output.empty()) {
      std::ofstream f(a.output);
      f << out.str();
      if (!f) throw IoError("cannot write '" + a.output + "'");
    }
    if (!a.predictions.empty()) {
      std::ofstream f(a.predictions);
      f.precision(17);
      for (double p : runs[0].predictions) f << p << '\n';
      if (!f) throw IoError("cannot write '" + a.predictions + "'");
    }
    return kOk;
  });
}

// ---- gradcheck ----

struct GradcheckArgs {
  std::vector<std::string> variants;
  std::string head = "all";
  std::size_t d = 8;
  std::size_t e = 12;
  std::size_t max_nodes = 12;
  std::uint64_t seed = 1;
  std::string corrupt;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  std::vector<Variant> variants;
  std::vector<Task> heads;
  try {
    if (a.variants.empty()) {
      variants = {Variant::kLstm,         Variant::kBiLstm,      Variant::kLstm2Layer,
                  Variant::kBiLstm2Layer, Variant::kChildSumDep, Variant::kNaryConst};
    }
    for (const auto& v : a.variants) variants.push_back(parse_variant(v));
    if (a.head == "classifier" || a.head == "all") heads.push_back(Task::kSentimentFine);
    if (a.head == "similarity" || a.head == "all") heads.push_back(Task::kRelatedness);
    if (heads.empty()) throw std::invalid_argument("unknown head '" + a.head + "'");
    if (a.d == 0 || a.e == 0 || a.max_nodes == 0) throw std::invalid_argument("sizes must be positive");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return guarded([&] {
    bool failed = false;
    std::cout << "variant\thead\tgroup\tworst_rel_err\tentries\n";
    for (Variant v : variants) {
      for (Task t : heads) {
        GradcheckOptions o;
        o.task = t;
        o.variant = v;
        o.d = a.d;
        o.e = a.e;
        o.max_nodes = a.max_nodes;
        o.seed = a.seed;
        if (!a.corrupt.empty()) o.corrupt = a.corrupt;
        const std::string head = t == Task::kRelatedness ? "similarity" : "classifier";
        if (o.corrupt && *o.corrupt != "embedding") {
          // Skip combinations that lack the corrupted parameter.
          RunConfig probe = default_config(t, v);
          probe.d = a.d;
          probe.e = a.e;
          Model m(probe, EmbeddingTable(Mat(1, a.e), false));
          if (!m.params().contains(*o.corrupt)) continue;
        }
        const GradcheckReport r = gradcheck(o);
        std::istringstream lines(format_gradcheck(r));
        for (std::string line; std::getline(lines, line);) {
          std::cout << to_string(v) << '\t' << head << '\t' << line << '\n';
        }
        if (!r.passed) {
          failed = true;
          std::cerr << "gradcheck failed: " << to_string(v) << '/' << head << " parameter "
                    << r.worst_group << " relative error " << r.worst << " > " << o.tolerance
                    << '\n';
        }
      }
    }
    return failed ? kNumericError : kOk;
  });
}

// ---- nn ----

struct NnArgs {
  std::string checkpoint;
  std::string baseline;
  std::string corpus;
  std::string format = "auto";
  std::string query;
  std::string query_file;
  std::string embeddings;
  std::size_t e = 300;
  std::size_t k = 5;
  std::uint64_t seed = 1;
};

std::vector<Tree> read_corpus(const std::string& format, const std::string& path) {
  if (format == "constituency") return read_constituency_file(path);
  if (format == "dependency") return read_dependency_file(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  std::vector<Tree> out;
  for (std::string line; std::getline(in, line);) {
    auto tokens = split_tokens(line);
    if (!tokens.empty()) out.push_back(flat_tree(tokens));
  }
  return out;
}

int cmd_nn(const NnArgs& a) {
  if (a.checkpoint.empty() && a.baseline.empty()) {
    std::cerr << "error: give --checkpoint or --baseline mean\n";
    return kConfigError;
  }
  if (!a.baseline.empty() && a.baseline != "mean") {
    std::cerr << "error: unknown baseline '" << a.baseline << "'\n";
    return kConfigError;
  }
  if (a.query.empty() == a.query_file.empty()) {
    std::cerr << "error: give exactly one of --query and --query-file\n";
    return kConfigError;
  }
  if (a.format != "auto" && a.format != "sentences" && a.format != "constituency" &&
      a.format != "dependency") {
    std::cerr << "error: unknown corpus format '" << a.format << "'\n";
    return kConfigError;
  }
  return guarded([&] {
    std::optional<ModelBundle> bundle;
    if (!a.checkpoint.empty()) {
      bundle = load_bundle(a.checkpoint);
      echo_config(bundle->config);
      if (a.baseline.empty() && is_sentiment(bundle->config.task)) {
        throw UsageError("model ranking needs a relatedness checkpoint");
      }
    }
    std::string format = a.format;
    if (format == "auto") {
      format = "sentences";
      if (bundle && a.baseline.empty()) {
        if (bundle->config.variant == Variant::kChildSumDep) format = "dependency";
        if (bundle->config.variant == Variant::kNaryConst) format = "constituency";
      }
    }
    std::vector<Tree> corpus = read_corpus(format, a.corpus);
    if (corpus.empty()) throw IoError("empty corpus '" + a.corpus + "'");

    std::optional<Tree> query;
    if (!a.query_file.empty()) {
      auto q = read_corpus(format, a.query_file);
      if (q.empty()) throw IoError("no query in '" + a.query_file + "'");
      query = std::move(q.front());
    } else {
      const auto tokens = split_tokens(a.query);
      for (const auto& t : corpus) {
        if (t.words() == tokens) {
          query = t;
          break;
        }
      }
      if (!query && format == "sentences") query = flat_tree(tokens);
      if (!query) throw IoError("query is not in the corpus; pass its tree with --query-file");
    }
    if (a.k == 0) return kOk;

    Vocab vocab;
    std::optional<EmbeddingTable> table;
    if (bundle) {
      vocab = bundle->vocab;
    } else {
      std::vector<std::vector<std::string>> streams;
      for (const auto& t : corpus) streams.push_back(t.words());
      streams.push_back(query->words());
      vocab = build_vocab(streams);
      if (a.embeddings.empty()) throw UsageError("--baseline mean needs --embeddings or --checkpoint");
      Rng rng(a.seed);
      table = std::move(load_embeddings_file(a.embeddings, vocab, a.e, rng).table);
    }
    for (auto& t : corpus) vocab.index(t);
    vocab.index(*query);

    std::vector<Neighbor> ranked;
    if (!a.baseline.empty()) {
      ranked = nearest_neighbors_mean(table ? *table : bundle->model->embeddings(), corpus, *query,
                                      a.k);
    } else {
      ranked = nearest_neighbors(*bundle->model, corpus, *query, a.k);
    }
    for (const auto& n : ranked) std::cout << fmt(n.score) << '\t' << join(corpus[n.index].words()) << '\n';
    return kOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-LSTM sentence models: training, evaluation and diagnostics"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoint + epoch log");
  train_args.flags.add_to(train_cmd);
  add_data_flags(train_cmd, "train", train_args.train);
  add_data_flags(train_cmd, "dev", train_args.dev);
  train_cmd->add_option("--embeddings", train_args.embeddings, "word vectors (token v1 ... ve per line)");
  train_cmd->add_option("--checkpoint", train_args.checkpoint, "checkpoint path")->capture_default_str();
  train_cmd->add_option("--log", train_args.log, "epoch log path (default <checkpoint>.log)");
  train_cmd->add_option("--workers", train_args.workers, "evaluation threads")->capture_default_str();
  train_cmd->add_flag("--no-timing", train_args.no_timing, "write 0 for epoch seconds");
  train_cmd->add_flag("--quiet", train_args.quiet, "no per-epoch progress on stderr");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score checkpoints on a test set");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoints, "checkpoint (repeat for mean/std)")
      ->required();
  add_data_flags(eval_cmd, "test", eval_args.test);
  eval_cmd->add_option("--workers", eval_args.workers, "evaluation threads")->capture_default_str();
  eval_cmd->add_flag("--lengths", eval_args.lengths, "also emit the length-binned metric TSV");
  eval_cmd->add_option("--half-width", eval_args.half_width, "length window half-width")
      ->capture_default_str();
  eval_cmd->add_option("--max-center", eval_args.max_center,
                       "last window center; longer examples are batched into it");
  eval_cmd->add_option("--output", eval_args.output, "also write the metric TSV here");
  eval_cmd->add_option("--predictions", eval_args.predictions,
                       "write per-example predictions of the first checkpoint");
  eval_cmd->add_option("--seeds", eval_args.seeds,
                       "seed list (1..5 or 1,3,7) substituted for {seed} in each --checkpoint");

  GradcheckArgs gc_args;
  auto* gc_cmd = app.add_subcommand("gradcheck", "compare backprop with finite differences");
  gc_cmd->add_option("--variant", gc_args.variants, "variant to check (repeatable; default all)");
  gc_cmd->add_option("--head", gc_args.head, "classifier | similarity | all")->capture_default_str();
  gc_cmd->add_option("--d", gc_args.d, "memory dimension")->capture_default_str();
  gc_cmd->add_option("--e", gc_args.e, "word vector dimension")->capture_default_str();
  gc_cmd->add_option("--max-nodes", gc_args.max_nodes, "tree size limit")->capture_default_str();
  gc_cmd->add_option("--seed", gc_args.seed, "random seed")->capture_default_str();
  gc_cmd->add_option("--corrupt", gc_args.corrupt, "perturb this parameter's gradient (test hook)");

  Variant cp_variant = Variant::kLstm;
  std::string cp_variant_name;
  std::size_t cp_d = 150, cp_e = 300;
  auto* cp_cmd = app.add_subcommand("count-params", "composition parameter count");
  cp_cmd->add_option("--variant", cp_variant_name, "model variant")->required();
  cp_cmd->add_option("--d", cp_d, "memory dimension")->capture_default_str();
  cp_cmd->add_option("--e", cp_e, "word vector dimension")->capture_default_str();

  NnArgs nn_args;
  auto* nn_cmd = app.add_subcommand("nn", "rank corpus sentences by similarity to a query");
  nn_cmd->add_option("--checkpoint", nn_args.checkpoint, "relatedness checkpoint");
  nn_cmd->add_option("--baseline", nn_args.baseline, "mean: cosine of mean word vectors");
  nn_cmd->add_option("--corpus", nn_args.corpus, "corpus file")->required();
  nn_cmd->add_option("--corpus-format", nn_args.format,
                     "auto | sentences | constituency | dependency")
      ->capture_default_str();
  nn_cmd->add_option("--query", nn_args.query, "query sentence");
  nn_cmd->add_option("--query-file", nn_args.query_file, "file whose first entry is the query");
  nn_cmd->add_option("--embeddings", nn_args.embeddings, "word vectors for the baseline");
  nn_cmd->add_option("--e", nn_args.e, "word vector dimension for --embeddings")
      ->capture_default_str();
  nn_cmd->add_option("--k", nn_args.k, "results to print")->capture_default_str();
  nn_cmd->add_option("--seed", nn_args.seed, "seed for vectors missing from --embeddings")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
    return kConfigError;
  }

  if (train_cmd->parsed()) return cmd_train(train_args);
  if (eval_cmd->parsed()) return cmd_eval(eval_args);
  if (gc_cmd->parsed()) return cmd_gradcheck(gc_args);
  if (nn_cmd->parsed()) return cmd_nn(nn_args);
  if (cp_cmd->parsed()) {
    try {
      cp_variant = parse_variant(cp_variant_name);
      if (cp_d == 0 || cp_e == 0) throw std::invalid_argument("dimensions must be positive");
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    }
    std::cout << count_params(cp_variant, cp_d, cp_e) << '\n';
    return kOk;
  }
  return kConfigError;
}
