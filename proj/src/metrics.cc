#include "treelstm/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "treelstm/errors.h"

namespace treelstm {

namespace {

void check_pair(const char* op, std::size_t a, std::size_t b, std::size_t min_len) {
  if (a != b) {
    throw std::invalid_argument(std::string(op) + ": length mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
  if (a < min_len) {
    throw std::invalid_argument(std::string(op) + ": need at least " + std::to_string(min_len) +
                                " values");
  }
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> golds) {
  check_pair("accuracy", preds.size(), golds.size(), 1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == golds[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double pearson_r(std::span<const double> a, std::span<const double> b) {
  check_pair("pearson", a.size(), b.size(), 2);
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelation("correlation of a constant vector");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(x.size());
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && x[order[hi]] == x[order[lo]]) ++hi;
    const double r = 0.5 * static_cast<double>(lo + 1 + hi);  // mean of lo+1 .. hi
    for (std::size_t k = lo; k < hi; ++k) ranks[order[k]] = r;
    lo = hi;
  }
  return ranks;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  check_pair("spearman", a.size(), b.size(), 2);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson_r(ra, rb);
}

double mse(std::span<const double> pred, std::span<const double> gold) {
  check_pair("mse", pred.size(), gold.size(), 1);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - gold[i]) * (pred[i] - gold[i]);
  return s / static_cast<double>(pred.size());
}

RegressionMetrics regression_metrics(std::span<const double> pred, std::span<const double> gold) {
  check_pair("regression_metrics", pred.size(), gold.size(), 2);
  RegressionMetrics m;
  m.mse = mse(pred, gold);
  try {
    m.pearson = pearson_r(pred, gold);
    m.spearman = spearman_rho(pred, gold);
  } catch (const UndefinedCorrelation&) {
    m.pearson.reset();
    m.spearman.reset();
  }
  return m;
}

std::string format_report(const MetricReport& report) {
  std::ostringstream out;
  out.precision(10);
  for (const auto& [name, value] : report.values) out << name << '\t' << value << '\n';
  return out.str();
}

}  // namespace treelstm
