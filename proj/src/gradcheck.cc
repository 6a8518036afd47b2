#include "treelstm/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "treelstm/embeddings.h"
#include "treelstm/model.h"
#include "treelstm/rng.h"

namespace treelstm {

namespace {

std::string word(std::size_t vocab, Rng& rng) {
  return "w" + std::to_string(rng.uniform_index(vocab));
}

// Bracketing of `n` leaves as an s-expression.
std::string random_sexpr(std::size_t n, std::size_t vocab, std::size_t classes, Rng& rng) {
  const std::string label = std::to_string(rng.uniform_index(classes));
  if (n == 1) return "(" + label + " " + word(vocab, rng) + ")";
  const std::size_t left = 1 + rng.uniform_index(n - 1);
  return "(" + label + " " + random_sexpr(left, vocab, classes, rng) + " " +
         random_sexpr(n - left, vocab, classes, rng) + ")";
}

}  // namespace

Tree random_constituency_tree(std::size_t leaves, std::size_t vocab, std::size_t classes,
                              Rng& rng) {
  return parse_constituency(random_sexpr(std::max<std::size_t>(leaves, 1), vocab, classes, rng));
}

Tree random_dependency_tree(std::size_t nodes, std::size_t vocab, Rng& rng) {
  nodes = std::max<std::size_t>(nodes, 1);
  // Attach positions in a random order; each attaches to one placed earlier.
  std::vector<std::size_t> order(nodes);
  for (std::size_t i = 0; i < nodes; ++i) order[i] = i + 1;
  rng.shuffle(order);
  std::vector<DependencyRow> rows(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const std::size_t idx = order[k];
    const std::size_t head = k == 0 ? 0 : order[rng.uniform_index(k)];
    rows[idx - 1] = {idx, word(vocab, rng), head};
  }
  return parse_dependency(rows);
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradcheck(const GradcheckOptions& options) {
  Rng rng(options.seed);
  constexpr std::size_t kVocab = 10;
  const bool sentiment = is_sentiment(options.task);
  const bool constituency = options.variant != Variant::kChildSumDep;

  RunConfig cfg = default_config(options.task, options.variant);
  cfg.d = options.d;
  cfg.e = options.e;
  cfg.lambda = 0.0;
  cfg.dropout = 0.0;
  cfg.emb_lr = 0.1;
  cfg.seed = options.seed;
  cfg.validate();

  auto make_tree = [&]() {
    if (constituency) {
      const std::size_t leaves = 1 + rng.uniform_index((options.max_nodes + 1) / 2);
      return random_constituency_tree(leaves, kVocab, cfg.classes(), rng);
    }
    Tree t = random_dependency_tree(1 + rng.uniform_index(options.max_nodes), kVocab, rng);
    for (std::size_t id = 0; id < t.size(); ++id) {
      if (rng.bernoulli(0.7)) t.set_label(id, static_cast<int>(rng.uniform_index(cfg.classes())));
    }
    if (!t.node(t.root()).label) {
      t.set_label(t.root(), static_cast<int>(rng.uniform_index(cfg.classes())));
    }
    return t;
  };

  Vocab vocab;
  for (std::size_t i = 0; i < kVocab; ++i) vocab.add("w" + std::to_string(i));
  Tree tree = make_tree();
  Tree other = make_tree();
  vocab.index(tree);
  vocab.index(other);
  const double score = 1.0 + 4.0 * rng.uniform01();

  Model model(cfg, random_embeddings(vocab, cfg.e, rng, 0.5));
  // Wider than the training init so every nonlinearity is exercised.
  for (auto& p : model.params().params()) {
    for (auto& v : p.flat(Slot::kValue)) v = rng.uniform(-0.5, 0.5);
  }

  const PairExample pair{tree, other, score};
  auto loss = [&]() {
    return sentiment ? model.sentiment_loss(tree).loss : model.pair_loss(pair).loss;
  };

  model.params().zero_grads();
  model.embeddings().clear_grads();
  if (sentiment) {
    model.sentiment_loss_grad(tree, nullptr);
  } else {
    model.pair_loss_grad(pair);
  }

  if (options.corrupt) {
    if (*options.corrupt == "embedding") {
      Vec bump(cfg.e);
      bump[0] = 1e-2;
      model.embeddings().accumulate_grad(tree.word_ids().front(), bump);
    } else {
      model.params().at(*options.corrupt).flat(Slot::kGrad)[0] += 1e-2;
    }
  }

  const double eps = options.epsilon;
  auto numeric = [&](double& x) {
    const double saved = x;
    x = saved + eps;
    const double up = loss();
    x = saved - eps;
    const double down = loss();
    x = saved;
    return (up - down) / (2.0 * eps);
  };

  GradcheckReport report;
  auto record = [&](GroupError g) {
    if (report.groups.empty() || g.worst > report.worst) {
      report.worst = g.worst;
      report.worst_group = g.name;
    }
    report.groups.push_back(std::move(g));
  };

  for (auto& p : model.params().params()) {
    GroupError g{p.name(), 0.0, p.size()};
    auto values = p.flat(Slot::kValue);
    auto grads = p.flat(Slot::kGrad);
    for (std::size_t k = 0; k < values.size(); ++k) {
      g.worst = std::max(g.worst, relative_error(grads[k], numeric(values[k]), options.floor));
    }
    record(std::move(g));
  }

  std::set<std::size_t> touched(tree.word_ids().begin(), tree.word_ids().end());
  if (!sentiment) touched.insert(other.word_ids().begin(), other.word_ids().end());
  const auto& pending = model.embeddings().pending_grads();
  GroupError g{"embedding", 0.0, 0};
  for (std::size_t id : touched) {
    auto row = model.embeddings().vectors().row(id);
    auto it = pending.find(id);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double a = it == pending.end() ? 0.0 : it->second[k];
      g.worst = std::max(g.worst, relative_error(a, numeric(row[k]), options.floor));
      ++g.entries;
    }
  }
  record(std::move(g));

  report.passed = report.worst <= options.tolerance;
  return report;
}

std::string format_gradcheck(const GradcheckReport& report) {
  std::ostringstream out;
  out.precision(6);
  out << std::scientific;
  for (const auto& g : report.groups) out << g.name << '\t' << g.worst << '\t' << g.entries << '\n';
  return out.str();
}

}  // namespace treelstm
