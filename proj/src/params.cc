#include "treelstm/params.h"

#include <stdexcept>

namespace treelstm {

Param::Param(std::string name, std::size_t rows, std::size_t cols)
    : name_(std::move(name)), rank_(2) {
  for (auto& m : mat_) m = Mat(rows, cols);
}

Param::Param(std::string name, std::size_t dim) : name_(std::move(name)), rank_(1) {
  for (auto& v : vec_) v = Vec(dim);
}

std::vector<std::size_t> Param::shape() const {
  if (rank_ == 2) return {mat_[0].rows(), mat_[0].cols()};
  return {vec_[0].dim()};
}

std::size_t Param::size() const { return rank_ == 2 ? mat_[0].size() : vec_[0].dim(); }

Mat& Param::mat(Slot s) {
  if (rank_ != 2) throw std::logic_error("param '" + name_ + "' is a vector");
  return mat_[static_cast<int>(s)];
}
const Mat& Param::mat(Slot s) const {
  if (rank_ != 2) throw std::logic_error("param '" + name_ + "' is a vector");
  return mat_[static_cast<int>(s)];
}
Vec& Param::vec(Slot s) {
  if (rank_ != 1) throw std::logic_error("param '" + name_ + "' is a matrix");
  return vec_[static_cast<int>(s)];
}
const Vec& Param::vec(Slot s) const {
  if (rank_ != 1) throw std::logic_error("param '" + name_ + "' is a matrix");
  return vec_[static_cast<int>(s)];
}

std::span<double> Param::flat(Slot s) {
  return rank_ == 2 ? std::span<double>(mat(s).values()) : std::span<double>(vec(s).values());
}
std::span<const double> Param::flat(Slot s) const {
  return rank_ == 2 ? std::span<const double>(mat(s).values())
                    : std::span<const double>(vec(s).values());
}

Param& ParamSet::add(Param p) {
  if (contains(p.name())) throw std::invalid_argument("duplicate parameter '" + p.name() + "'");
  index_[p.name()] = params_.size();
  params_.push_back(std::move(p));
  return params_.back();
}

Mat& ParamSet::add_mat(const std::string& name, std::size_t rows, std::size_t cols) {
  return add(Param(name, rows, cols)).mat(Slot::kValue);
}

Vec& ParamSet::add_vec(const std::string& name, std::size_t dim) {
  return add(Param(name, dim)).vec(Slot::kValue);
}

Param& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return params_[it->second];
}

const Param& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return params_[it->second];
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void ParamSet::zero_grads() {
  for (auto& p : params_) {
    for (auto& v : p.flat(Slot::kGrad)) v = 0.0;
  }
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name() != other.params_[i].name() ||
        params_[i].shape() != other.params_[i].shape()) {
      return false;
    }
  }
  return true;
}

}  // namespace treelstm
