#include "photosplat/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace photosplat {

namespace {
Tape* g_active_tape = nullptr;

std::size_t shape_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, bool requires_grad)
    : shape_(std::move(shape)),
      values_(shape_count(shape_), 0.0),
      grad_(shape_count(shape_), 0.0),
      requires_grad_(requires_grad) {}

TensorPtr Tensor::create(std::vector<std::size_t> shape, bool requires_grad) {
  return std::make_shared<Tensor>(std::move(shape), requires_grad);
}

TensorPtr Tensor::scalar(double value, bool requires_grad) {
  auto t = create({1}, requires_grad);
  t->values_[0] = value;
  return t;
}

TensorPtr Tensor::from_values(std::vector<std::size_t> shape,
                              std::vector<double> values, bool requires_grad) {
  auto t = std::make_shared<Tensor>(std::move(shape), requires_grad);
  require(values.size() == t->size(), "from_values: ", values.size(),
          " values for shape ", t->shape_str());
  t->values_ = std::move(values);
  return t;
}

TensorPtr Tensor::zeros_like(const Tensor& other) {
  return create(other.shape_, other.requires_grad_);
}

std::size_t Tensor::dim(std::size_t i) const {
  require(i < shape_.size(), "dim index ", i, " out of range for rank ",
          shape_.size());
  return shape_[i];
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << "]";
  return os.str();
}

bool Tensor::same_shape(const Tensor& a, const Tensor& b) {
  return a.shape_ == b.shape_;
}

void Tape::record(std::unique_ptr<TapeNode> node) {
  nodes_.push_back(std::move(node));
}

void Tape::clear() { nodes_.clear(); }

void Tape::replay_backward() {
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)->backward();
}

Tape* Tape::active() { return g_active_tape; }

TapeGuard::TapeGuard(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeGuard::~TapeGuard() { g_active_tape = previous_; }

void backward(Tape& tape, const TensorPtr& output) {
  require(output != nullptr, "backward: null output");
  require(output->size() == 1, "backward: output must be scalar, got ",
          output->shape_str());
  output->grad()[0] = 1.0;
  tape.replay_backward();
}

}  // namespace photosplat
