#ifndef TREELSTM_METRICS_H_
#define TREELSTM_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace treelstm {

// Exact-match fraction. Throws invalid_argument on length mismatch or
// empty input.
double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> golds);

// Throw UndefinedCorrelation when either input is constant.
double pearson_r(std::span<const double> a, std::span<const double> b);
double spearman_rho(std::span<const double> a, std::span<const double> b);

double mse(std::span<const double> pred, std::span<const double> gold);

// 1-based ranks; tied values share the mean of the positions they occupy.
std::vector<double> average_ranks(std::span<const double> x);

// Correlations are empty when undefined (constant input).
struct RegressionMetrics {
  std::optional<double> pearson;
  std::optional<double> spearman;
  double mse = 0.0;
};

// Needs equal lengths >= 2.
RegressionMetrics regression_metrics(std::span<const double> pred, std::span<const double> gold);

struct MetricReport {
  std::string task;
  std::vector<std::pair<std::string, double>> values;
  std::vector<double> predictions;
  unsigned long long seed = 0;
};

// "metric<TAB>value" lines.
std::string format_report(const MetricReport& report);

}  // namespace treelstm

#endif  // TREELSTM_METRICS_H_
