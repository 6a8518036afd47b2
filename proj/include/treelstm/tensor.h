#ifndef TREELSTM_TENSOR_H_
#define TREELSTM_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace treelstm {

class Rng;

// Dense column vector of doubles.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vec(std::initializer_list<double> values) : data_(values) {}
  explicit Vec(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t dim() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  void fill(double v);

  friend bool operator==(const Vec&, const Vec&) = default;

 private:
  std::vector<double> data_;
};

// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Row-major nested initializer; all rows must have equal length.
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  void fill(double v);
  static Mat identity(std::size_t n);

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// One U·h contribution of a pre-activation.
struct MatVecTerm {
  const Mat& m;
  const Vec& v;
};

// W·x + Σ U_k·h_k + b. `w` and `x` must be both present or both null.
Vec affine_combine(const Mat* w, const Vec* x, std::span<const MatVecTerm> terms,
                   const Vec& b);

enum class Activation { kSigmoid, kTanh };

double sigmoid(double z);
Vec elementwise(const Vec& v, Activation kind);

Vec hadamard(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec subtract(const Vec& a, const Vec& b);
Vec scaled(const Vec& a, double s);
// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);
double dot(const Vec& a, const Vec& b);
double sum(const Vec& a);
Vec concat(const Vec& a, const Vec& b);
Vec slice(const Vec& a, std::size_t begin, std::size_t len);

Vec matvec(const Mat& m, const Vec& v);
// out += mᵀ·v
void matvec_transposed_acc(const Mat& m, const Vec& v, Vec& out);
// m += scale · a·bᵀ
void add_outer(Mat& m, const Vec& a, const Vec& b, double scale = 1.0);

// Entries drawn i.i.d. uniform on [-scale, scale], row-major order.
Mat init_mat(std::size_t rows, std::size_t cols, double scale, Rng& rng);
Vec init_vec(std::size_t dim, double scale, Rng& rng);

bool all_finite(std::span<const double> values);

// Throws DimensionError("<op>: <what> has dimension <got>, expected <want>").
void check_dim(const char* op, const char* what, std::size_t got, std::size_t want);

}  // namespace treelstm

#endif  // TREELSTM_TENSOR_H_
