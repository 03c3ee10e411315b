#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "photosplat/common.hpp"

namespace photosplat {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense double tensor with an always-present gradient buffer. Shapes are
// row-major; rank up to 4 in practice but unconstrained here.
class Tensor {
 public:
  explicit Tensor(std::vector<std::size_t> shape, bool requires_grad = false);

  static TensorPtr create(std::vector<std::size_t> shape,
                          bool requires_grad = false);
  static TensorPtr scalar(double value, bool requires_grad = false);
  static TensorPtr from_values(std::vector<std::size_t> shape,
                               std::vector<double> values,
                               bool requires_grad = false);
  static TensorPtr zeros_like(const Tensor& other);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const;
  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool rg) { requires_grad_ = rg; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double* grad() { return grad_.data(); }
  const double* grad() const { return grad_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& grad_values() { return grad_; }
  const std::vector<double>& grad_values() const { return grad_; }

  double at(std::size_t i) const { return values_[i]; }
  void set(std::size_t i, double v) { values_[i] = v; }

  void zero_grad();
  void fill(double v);

  std::string shape_str() const;

  static bool same_shape(const Tensor& a, const Tensor& b);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
  bool requires_grad_ = false;
};

// One recorded operation. backward() reads output->grad() and scatters into
// the inputs it captured by shared_ptr.
class TapeNode {
 public:
  virtual ~TapeNode() = default;
  virtual void backward() = 0;
};

// Records nodes in execution order while active. Ops only record when a tape
// is active and some input requires grad.
class Tape {
 public:
  void record(std::unique_ptr<TapeNode> node);
  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Runs all node backwards in reverse recorded order. Caller seeds the
  // output gradient first.
  void replay_backward();

  static Tape* active();

 private:
  friend class TapeGuard;
  std::vector<std::unique_ptr<TapeNode>> nodes_;
};

// Scoped activation. Nesting replaces the active tape for the inner scope.
class TapeGuard {
 public:
  explicit TapeGuard(Tape& tape);
  ~TapeGuard();
  TapeGuard(const TapeGuard&) = delete;
  TapeGuard& operator=(const TapeGuard&) = delete;

 private:
  Tape* previous_;
};

// Seeds grad of a scalar output with 1 and replays the tape backwards.
void backward(Tape& tape, const TensorPtr& output);

}  // namespace photosplat
