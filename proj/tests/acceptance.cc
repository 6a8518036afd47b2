// Acceptance checks 1-11. One PASS/FAIL/SKIP line per check; exit status 1
// if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "treelstm/cells.h"
#include "treelstm/config.h"
#include "treelstm/data.h"
#include "treelstm/errors.h"
#include "treelstm/gradcheck.h"
#include "treelstm/heads.h"
#include "treelstm/metrics.h"
#include "treelstm/rng.h"
#include "treelstm/train.h"

namespace treelstm {
namespace {

namespace fs = std::filesystem;

const std::string kData = TREELSTM_TEST_DATA;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return {ok ? Status::kPass : Status::kFail, std::move(d)}; }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const Variant kAllVariants[] = {Variant::kLstm,         Variant::kBiLstm,
                                Variant::kLstm2Layer,   Variant::kBiLstm2Layer,
                                Variant::kChildSumDep, Variant::kNaryConst};

// A parameter set holding one cell, every value uniform on [-scale, scale].
struct RandomCell {
  ParamSet ps;
  GateParams p;
  RandomCell(const CellShape& shape, Rng& rng, double scale) {
    add_gate_params(ps, "c", shape, rng);
    for (auto& prm : ps.params()) {
      for (auto& v : prm.flat(Slot::kValue)) v = rng.uniform(-scale, scale);
    }
    p = bind_gate_params(ps, "c", shape, Slot::kValue);
  }
  RandomCell(const RandomCell&) = delete;
};

Vec random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (auto& x : v.values()) x = rng.uniform(-scale, scale);
  return v;
}

double max_abs_diff(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim()) return INFINITY;
  double m = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// ---- 1 ----

Outcome gradient_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_at;
  std::size_t runs = 0;
  for (Variant v : kAllVariants) {
    for (Task task : {Task::kSentimentFine, Task::kRelatedness}) {
      for (std::uint64_t seed : {1, 2, 3}) {
        GradcheckOptions o;
        o.variant = v;
        o.task = task;
        o.seed = seed;
        const GradcheckReport r = gradcheck(o);
        ++runs;
        if (r.worst > worst || !r.passed) {
          worst = std::max(worst, r.worst);
          worst_at = to_string(v) + "/" + to_string(task) + "/seed" + std::to_string(seed) + " " +
                     r.worst_group;
        }
        if (!r.passed) return fail("gradcheck failed at " + worst_at + ": " + sci(r.worst));
      }
    }
  }
  const double secs = seconds_since(t0);
  return verdict(worst <= 1e-4 && secs < 60.0,
                 std::to_string(runs) + " runs, worst rel err " + sci(worst) + " (" + worst_at +
                     "), " + fixed(secs) + " s");
}

// ---- 2 ----

Outcome chain_reduction() {
  Rng rng(2002);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(8), e = 1 + rng.uniform_index(8);
    const std::size_t n = 1 + rng.uniform_index(12);
    RandomCell cell({d, e}, rng, 1.0);
    const Tree chain = flat_tree(std::vector<std::string>(n, "w"));
    std::vector<Vec> xs;
    for (std::size_t t = 0; t < n; ++t) xs.push_back(random_vec(e, rng));
    const SequenceTrace seq = run_sequence(std::span(&cell.p, 1), xs, {1, false});
    for (TreeVariant tv : {TreeVariant::kChildSum, TreeVariant::kNary}) {
      const TreeTrace tr = run_tree(cell.p, chain, xs, tv);
      for (std::size_t id = 0; id < chain.size(); ++id) {
        const std::size_t pos = *chain.node(id).token;
        worst = std::max(worst, max_abs_diff(tr.states[id].h, seq.states[0][0][pos].h));
        worst = std::max(worst, max_abs_diff(tr.states[id].c, seq.states[0][0][pos].c));
      }
    }
  }
  return verdict(worst <= 1e-12, "100 draws, childsum and 1-ary, max abs diff " + sci(worst));
}

// ---- 3 ----

Outcome permutation_invariance() {
  Rng rng(3003);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(10), e = 1 + rng.uniform_index(10);
    RandomCell cell({d, e}, rng, 1.0);
    const Vec x = random_vec(e, rng);
    std::vector<NodeState> kids;
    for (std::size_t k = 0, n = 2 + rng.uniform_index(5); k < n; ++k) {
      kids.push_back({random_vec(d, rng), random_vec(d, rng)});
    }
    const NodeState a = childsum_step(cell.p, &x, kids).first;
    rng.shuffle(kids);
    const NodeState b = childsum_step(cell.p, &x, kids).first;
    worst = std::max({worst, max_abs_diff(a.c, b.c), max_abs_diff(a.h, b.h)});
  }
  return verdict(worst <= 1e-15, "100 nodes with 2-6 children, max abs diff " + sci(worst));
}

// ---- 4 ----

Outcome sparse_target_check() {
  constexpr std::size_t K = 5;
  Rng rng(4004);
  std::vector<double> ys;
  for (int i = 0; i < 1000; ++i) ys.push_back(rng.uniform(1.0, 5.0));
  for (double y : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    ys.push_back(y);
    if (y > 1.0) ys.push_back(std::nextafter(y, 0.0));
    if (y < 5.0) ys.push_back(std::nextafter(y, 6.0));
  }
  double worst_mean = 0.0, worst_sum = 0.0;
  for (double y : ys) {
    const Vec p = sparse_target(y, K);
    if (p.dim() != K) return fail("wrong length at y=" + std::to_string(y));
    double mean = 0.0, sum = 0.0;
    std::vector<std::size_t> nonzero;
    for (std::size_t k = 0; k < K; ++k) {
      if (p[k] < 0.0) return fail("negative entry at y=" + std::to_string(y));
      if (p[k] != 0.0) nonzero.push_back(k);
      mean += double(k + 1) * p[k];
      sum += p[k];
    }
    if (nonzero.empty() || nonzero.size() > 2 ||
        (nonzero.size() == 2 && nonzero[1] != nonzero[0] + 1)) {
      return fail("support not one or two adjacent entries at y=" + std::to_string(y));
    }
    worst_mean = std::max(worst_mean, std::abs(mean - y));
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  return verdict(worst_mean <= 1e-12 && worst_sum <= 1e-12,
                 std::to_string(ys.size()) + " targets, max |r.p - y| " + sci(worst_mean) +
                     ", max |sum - 1| " + sci(worst_sum));
}

// ---- 5 ----

Outcome similarity_head_check() {
  Rng rng(5005);
  double lo = INFINITY, hi = -INFINITY;
  for (int block = 0; block < 20; ++block) {
    const std::size_t d = 1 + rng.uniform_index(20), hidden = 1 + rng.uniform_index(20);
    ParamSet ps;
    add_similarity_params(ps, "sim", d, hidden, 5, rng, 0.5);
    for (auto& prm : ps.params()) {
      for (auto& v : prm.flat(Slot::kValue)) v = rng.uniform(-1.0, 1.0);
    }
    const SimilarityParams sp = bind_similarity_params(ps, "sim", Slot::kValue);
    for (int i = 0; i < 50; ++i) {
      const Vec hl = random_vec(d, rng), hr = random_vec(d, rng);
      const SimilarityTrace a = similarity_forward(sp, hl, hr);
      const SimilarityTrace b = similarity_forward(sp, hr, hl);
      if (!(a.score > 1.0 && a.score < 5.0)) return fail("score " + std::to_string(a.score) + " outside (1,5)");
      if (a.score != b.score || a.probs != b.probs) return fail("swapping inputs changed the output");
      const SimilarityTrace same = similarity_forward(sp, hl, hl);
      for (double v : same.h_diff.values()) {
        if (v != 0.0) return fail("h+ nonzero for identical inputs");
      }
      lo = std::min(lo, a.score);
      hi = std::max(hi, a.score);
    }
  }
  return pass("1000 pairs, scores in [" + fixed(lo, 4) + ", " + fixed(hi, 4) +
              "], symmetric, h+ = 0 on identical inputs");
}

// ---- 6 ----

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = x.size();
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

std::vector<double> oracle_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double smaller = 0, equal = 0;
    for (double v : x) {
      smaller += v < x[i];
      equal += v == x[i];
    }
    r[i] = 1 + smaller + (equal - 1) / 2;
  }
  return r;
}

Outcome metric_oracles() {
  Rng rng(6006);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(49);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = trial % 2 ? std::round(rng.uniform(0, 6)) : rng.uniform(-3, 3);
      b[i] = std::round(rng.uniform(1, 5) * 4) / 4;
    }
    b[n - 1] = b[0];  // at least one tie
    auto constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
    };
    if (constant(a)) a[0] += 1.0;
    if (constant(b)) b[0] += 1.0;
    const RegressionMetrics m = regression_metrics(a, b);
    if (!m.pearson || !m.spearman) return fail("correlation undefined on a non-constant pair");
    double se = 0.0;
    for (std::size_t i = 0; i < n; ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
    worst = std::max({worst, std::abs(*m.pearson - oracle_pearson(a, b)),
                      std::abs(*m.spearman - oracle_pearson(oracle_ranks(a), oracle_ranks(b))),
                      std::abs(m.mse - se / double(n))});
  }
  const std::vector<double> c{3.0, 3.0, 3.0}, y{1.0, 2.0, 4.0};
  bool raised = true;
  for (auto fn : {&pearson_r, &spearman_rho}) {
    try {
      fn(c, y);
      raised = false;
    } catch (const UndefinedCorrelation&) {
    }
  }
  if (!raised) return fail("constant vector did not raise UndefinedCorrelation");
  return verdict(worst <= 1e-12, "200 pairs with ties, max diff " + sci(worst) +
                                     "; constant input raises UndefinedCorrelation");
}

// ---- 7, 8, 9 ----

RunConfig toy_sentiment_config(std::uint64_t seed) {
  RunConfig cfg = default_config(Task::kSentimentBinary, Variant::kNaryConst);
  cfg.d = 20;
  cfg.e = 16;
  cfg.lr = 0.05;
  cfg.batch = 5;
  cfg.dropout = 0.0;
  cfg.epochs = 200;
  cfg.patience = 200;
  cfg.seed = seed;
  return cfg;
}

RunConfig toy_relatedness_config(std::uint64_t seed) {
  RunConfig cfg = default_config(Task::kRelatedness, Variant::kChildSumDep);
  cfg.d = 20;
  cfg.e = 16;
  cfg.lr = 0.1;
  cfg.batch = 5;
  cfg.epochs = 300;
  cfg.patience = 300;
  cfg.seed = seed;
  return cfg;
}

Outcome toy_sentiment() {
  const auto t0 = std::chrono::steady_clock::now();
  const DataFiles files{kData + "/toy_sentiment.txt", "", "", ""};
  std::string detail;
  bool ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    TrainOptions opts;
    opts.record_time = false;
    TrainRun run = train_from_files(toy_sentiment_config(seed), files, files, "", opts);
    Dataset train_set = load_dataset(run.bundle.config, files);
    index_dataset(train_set, run.bundle.vocab);
    const double acc = dev_metric(*run.bundle.model, train_set);
    std::size_t first = 0;
    for (const auto& e : run.result.epochs) {
      if (e.dev_metric == 1.0) {
        first = e.epoch;
        break;
      }
    }
    ok &= acc == 1.0;
    detail += "seed " + std::to_string(seed) + ": acc " + fixed(acc, 3) +
              (first ? " (first at epoch " + std::to_string(first) + ")" : std::string()) + "; ";
  }
  const double secs = seconds_since(t0);
  return verdict(ok && secs < 30.0, detail + fixed(secs) + " s");
}

Outcome toy_relatedness() {
  const auto t0 = std::chrono::steady_clock::now();
  const DataFiles files{kData + "/toy_pairs.tsv", "", kData + "/toy_pairs.left.dep",
                        kData + "/toy_pairs.right.dep"};
  std::string detail;
  bool ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    TrainOptions opts;
    opts.record_time = false;
    TrainRun run = train_from_files(toy_relatedness_config(seed), files, files, "", opts);
    std::size_t first = 0;
    for (const auto& e : run.result.epochs) {
      if (e.dev_metric >= 0.99) {
        first = e.epoch;
        break;
      }
    }
    ok &= run.result.best_metric >= 0.99;
    detail += "seed " + std::to_string(seed) + ": r " + fixed(run.result.best_metric, 4) +
              (first ? " (>= 0.99 at epoch " + std::to_string(first) + ")" : std::string()) + "; ";
  }
  const double secs = seconds_since(t0);
  return verdict(ok && secs < 30.0, detail + fixed(secs) + " s");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "treelstm_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const DataFiles files{kData + "/toy_sentiment.txt", "", "", ""};
  std::vector<std::string> ckpt, log, sidecars;
  for (int run = 0; run < 2; ++run) {
    const fs::path base = dir / ("run" + std::to_string(run) + ".ckpt");
    TrainOptions opts;
    opts.checkpoint_path = base.string();
    opts.log_path = base.string() + ".log";
    opts.record_time = false;
    train_from_files(toy_sentiment_config(1), files, files, "", opts);
    ckpt.push_back(slurp(base));
    log.push_back(slurp(opts.log_path));
    sidecars.push_back(slurp(config_path_for(base.string())) + slurp(vocab_path_for(base.string())));
  }
  fs::remove_all(dir);
  if (ckpt[0].empty() || log[0].empty()) return fail("no checkpoint or log written");
  const bool ok = ckpt[0] == ckpt[1] && log[0] == log[1] && sidecars[0] == sidecars[1];
  return verdict(ok, "checkpoint " + std::to_string(ckpt[0].size()) + " bytes, log " +
                         std::to_string(log[0].size()) + " bytes, " +
                         (ok ? "identical" : "DIFFERENT"));
}

// ---- 10 ----

Outcome parameter_counter() {
  const std::size_t lstm = count_params(Variant::kLstm, 150, 300);
  const std::size_t bilstm = count_params(Variant::kBiLstm, 150, 300);
  const std::size_t childsum = count_params(Variant::kChildSumDep, 150, 300);
  const bool ok = lstm == 270600 && childsum == 270600 && bilstm == lstm && lstm != 203400;
  return verdict(ok, "lstm " + std::to_string(lstm) + ", bilstm " + std::to_string(bilstm) +
                         ", childsum " + std::to_string(childsum) +
                         "; differs from the published 203400 as expected");
}

// ---- 11 ----

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

double mean_test_metric(const RunConfig& base, const DataFiles& train_f, const DataFiles& dev_f,
                        const DataFiles& test_f, const std::string& vectors) {
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg = base;
    cfg.seed = seed;
    TrainOptions opts;
    opts.workers = 4;
    TrainRun run = train_from_files(cfg, train_f, dev_f, vectors, opts);
    Dataset test = load_dataset(cfg, test_f);
    index_dataset(test, run.bundle.vocab);
    sum += dev_metric(*run.bundle.model, test, opts.workers);
  }
  return sum / 5.0;
}

Outcome full_scale() {
  const std::string sick = env("TREELSTM_SICK_DIR"), sst = env("TREELSTM_SST_DIR");
  const std::string vectors = env("TREELSTM_VECTORS");
  if ((sick.empty() && sst.empty()) || vectors.empty()) {
    return {Status::kSkip, "set TREELSTM_VECTORS and TREELSTM_SICK_DIR and/or TREELSTM_SST_DIR"};
  }
  std::string detail;
  bool ok = true;
  if (!sick.empty()) {
    auto split = [&](const std::string& s) {
      return DataFiles{sick + "/" + s + ".tsv", "", sick + "/" + s + ".left.dep",
                       sick + "/" + s + ".right.dep"};
    };
    const double r = mean_test_metric(default_config(Task::kRelatedness, Variant::kChildSumDep),
                                      split("train"), split("dev"), split("test"), vectors);
    ok &= r >= 0.85;
    detail += "relatedness mean r " + fixed(r, 4) + "; ";
  }
  if (!sst.empty()) {
    auto split = [&](const std::string& s) { return DataFiles{sst + "/" + s + ".txt", "", "", ""}; };
    const double acc = mean_test_metric(default_config(Task::kSentimentFine, Variant::kNaryConst),
                                        split("train"), split("dev"), split("test"), vectors);
    ok &= acc >= 0.49;
    detail += "fine-grained mean accuracy " + fixed(100 * acc, 1) + "; ";
  }
  return verdict(ok, detail);
}

struct Check {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace treelstm

int main() {
  using namespace treelstm;
  const std::vector<Check> checks{
      {1, "gradient exactness", gradient_exactness},
      {2, "chain reduction", chain_reduction},
      {3, "child permutation invariance", permutation_invariance},
      {4, "sparse target", sparse_target_check},
      {5, "similarity head bounds and symmetry", similarity_head_check},
      {6, "metric oracles", metric_oracles},
      {7, "toy sentiment overfit", toy_sentiment},
      {8, "toy relatedness overfit", toy_relatedness},
      {9, "determinism", determinism},
      {10, "parameter counter", parameter_counter},
      {11, "full-scale runs", full_scale},
  };
  int failures = 0;
  for (const auto& c : checks) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kSkip ? "SKIP" : "FAIL";
    failures += o.status == Status::kFail;
    std::cout << tag << " " << c.id << " " << c.name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
