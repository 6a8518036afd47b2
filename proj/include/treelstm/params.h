#ifndef TREELSTM_PARAMS_H_
#define TREELSTM_PARAMS_H_

#include <cstddef>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "treelstm/tensor.h"

namespace treelstm {

// Which mirror of a parameter to address.
enum class Slot { kValue, kGrad, kAccum };

// One named parameter (matrix or vector) with its gradient and AdaGrad
// accumulator mirrors.
class Param {
 public:
  Param(std::string name, std::size_t rows, std::size_t cols);  // rank 2
  Param(std::string name, std::size_t dim);                     // rank 1

  const std::string& name() const { return name_; }
  std::size_t rank() const { return rank_; }
  std::vector<std::size_t> shape() const;
  std::size_t size() const;

  Mat& mat(Slot s);
  Vec& vec(Slot s);
  const Mat& mat(Slot s) const;
  const Vec& vec(Slot s) const;

  std::span<double> flat(Slot s);
  std::span<const double> flat(Slot s) const;

 private:
  std::string name_;
  std::size_t rank_;
  Mat mat_[3];
  Vec vec_[3];
};

// Insertion-ordered registry of parameters. Element addresses are stable,
// so views holding Mat*/Vec* into a ParamSet survive later additions.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet&) = default;
  ParamSet& operator=(const ParamSet&) = default;
  ParamSet(ParamSet&&) = default;
  ParamSet& operator=(ParamSet&&) = default;

  Mat& add_mat(const std::string& name, std::size_t rows, std::size_t cols);
  Vec& add_vec(const std::string& name, std::size_t dim);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;

  Mat& mat(const std::string& name, Slot s = Slot::kValue) { return at(name).mat(s); }
  Vec& vec(const std::string& name, Slot s = Slot::kValue) { return at(name).vec(s); }

  std::deque<Param>& params() { return params_; }
  const std::deque<Param>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  // Total scalar count.
  std::size_t total_size() const;

  void zero_grads();
  // Same names and shapes in the same order.
  bool same_layout(const ParamSet& other) const;

 private:
  Param& add(Param p);

  std::deque<Param> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace treelstm

#endif  // TREELSTM_PARAMS_H_
