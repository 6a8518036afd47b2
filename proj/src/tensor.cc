#include "treelstm/tensor.h"

#include <algorithm>
#include <cmath>

#include "treelstm/errors.h"
#include "treelstm/rng.h"

namespace treelstm {

void Vec::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Mat: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Mat::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void check_dim(const char* op, const char* what, std::size_t got, std::size_t want) {
  if (got != want) {
    throw DimensionError(std::string(op) + ": " + what + " has dimension " +
                         std::to_string(got) + ", expected " + std::to_string(want));
  }
}

Vec affine_combine(const Mat* w, const Vec* x, std::span<const MatVecTerm> terms,
                   const Vec& b) {
  if ((w == nullptr) != (x == nullptr)) {
    throw DimensionError("affine_combine: W and x must be given together");
  }
  const std::size_t d = b.dim();
  Vec out = b;
  if (w != nullptr) {
    check_dim("affine_combine", "W rows", w->rows(), d);
    check_dim("affine_combine", "x", x->dim(), w->cols());
    for (std::size_t r = 0; r < d; ++r) {
      auto row = w->row(r);
      double acc = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * (*x)[c];
      out[r] += acc;
    }
  }
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Mat& u = terms[k].m;
    const Vec& h = terms[k].v;
    if (u.rows() != d || h.dim() != u.cols()) {
      const std::string idx = std::to_string(k);
      check_dim("affine_combine", ("U[" + idx + "] rows").c_str(), u.rows(), d);
      check_dim("affine_combine", ("h[" + idx + "]").c_str(), h.dim(), u.cols());
    }
    for (std::size_t r = 0; r < d; ++r) {
      auto row = u.row(r);
      double acc = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * h[c];
      out[r] += acc;
    }
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vec elementwise(const Vec& v, Activation kind) {
  Vec out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    out[i] = kind == Activation::kSigmoid ? sigmoid(v[i]) : std::tanh(v[i]);
  }
  return out;
}

Vec hadamard(const Vec& a, const Vec& b) {
  check_dim("hadamard", "b", b.dim(), a.dim());
  Vec out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vec add(const Vec& a, const Vec& b) {
  check_dim("add", "b", b.dim(), a.dim());
  Vec out = a;
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] += b[i];
  return out;
}

Vec subtract(const Vec& a, const Vec& b) {
  check_dim("subtract", "b", b.dim(), a.dim());
  Vec out = a;
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] -= b[i];
  return out;
}

Vec scaled(const Vec& a, double s) {
  Vec out = a;
  for (auto& v : out.values()) v *= s;
  return out;
}

void axpy(double alpha, const Vec& x, Vec& y) {
  check_dim("axpy", "y", y.dim(), x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) y[i] += alpha * x[i];
}

double dot(const Vec& a, const Vec& b) {
  check_dim("dot", "b", b.dim(), a.dim());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const Vec& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  return acc;
}

Vec concat(const Vec& a, const Vec& b) {
  std::vector<double> out;
  out.reserve(a.dim() + b.dim());
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  return Vec(std::move(out));
}

Vec slice(const Vec& a, std::size_t begin, std::size_t len) {
  if (begin + len > a.dim()) throw DimensionError("slice: range exceeds vector");
  return Vec(std::vector<double>(a.values().begin() + begin,
                                 a.values().begin() + begin + len));
}

Vec matvec(const Mat& m, const Vec& v) {
  check_dim("matvec", "v", v.dim(), m.cols());
  Vec out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

void matvec_transposed_acc(const Mat& m, const Vec& v, Vec& out) {
  check_dim("matvec_transposed_acc", "v", v.dim(), m.rows());
  check_dim("matvec_transposed_acc", "out", out.dim(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double s = v[r];
    if (s == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * s;
  }
}

void add_outer(Mat& m, const Vec& a, const Vec& b, double scale) {
  check_dim("add_outer", "a", a.dim(), m.rows());
  check_dim("add_outer", "b", b.dim(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double s = scale * a[r];
    if (s == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += s * b[c];
  }
}

Mat init_mat(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  if (!(scale > 0)) throw std::invalid_argument("init_mat: scale must be positive");
  Mat m(rows, cols);
  for (auto& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

Vec init_vec(std::size_t dim, double scale, Rng& rng) {
  if (!(scale > 0)) throw std::invalid_argument("init_vec: scale must be positive");
  Vec v(dim);
  for (auto& x : v.values()) x = rng.uniform(-scale, scale);
  return v;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace treelstm
