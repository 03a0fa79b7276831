#include "uanet/autodiff/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "uanet/core/error.hpp"

namespace uanet::ad {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  const auto n = numel(shape);
  return from(std::move(shape), std::vector<double>(n, v), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape.empty() || std::any_of(shape.begin(), shape.end(), [](auto d) { return d == 0; }))
    throw DimensionError("tensor shape must have positive dimensions, got " + to_string(shape));
  if (numel(shape) != values.size())
    throw DimensionError("shape " + to_string(shape) + " does not match " + std::to_string(values.size()) +
                         " values");
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from({1, 1}, {v}, requires_grad); }

std::size_t Tensor::rows() const {
  const auto& s = node_->shape;
  return s.size() == 1 ? 1 : s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = node_->shape;
  if (s.size() == 1) return s[0];
  std::size_t c = 1;
  for (std::size_t i = 1; i < s.size(); ++i) c *= s[i];
  return c;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on non-scalar tensor " + to_string(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor& Tensor::set_requires_grad(bool on) {
  node_->requires_grad = on;
  return *this;
}

Tensor Tensor::clone() const { return from(node_->shape, node_->value, false); }

Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  Tape* tape = g_active_tape;
  if (tape != nullptr) {
    const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                   [](const Tensor& t) { return t.requires_grad(); });
    if (needs) {
      node->requires_grad = true;
      node->leaf = false;
      node->parents.reserve(inputs.size());
      for (auto& in : inputs) node->parents.push_back(in.handle());
      node->backward = std::move(backward);
      tape->nodes_.push_back(node);
    }
  }
  return Tensor(std::move(node));
}

Tape::~Tape() {
  if (g_active_tape == this) g_active_tape = nullptr;
}

Tape::Scope::Scope(Tape& t) : previous_(g_active_tape) { g_active_tape = &t; }
Tape::Scope::~Scope() { g_active_tape = previous_; }

Tape::Pause::Pause() : previous_(g_active_tape) { g_active_tape = nullptr; }
Tape::Pause::~Pause() { g_active_tape = previous_; }

Tape* Tape::active() noexcept { return g_active_tape; }

std::size_t Tape::backward(const Tensor& root) {
  if (!root.defined() || root.size() != 1)
    throw ContractError("backward() requires a scalar root, got " +
                        (root.defined() ? to_string(root.shape()) : std::string("undefined")));
  const auto* root_node = root.node();
  auto it = std::find_if(nodes_.begin(), nodes_.end(),
                         [&](const auto& n) { return n.get() == root_node; });
  if (it == nodes_.end()) throw ContractError("backward() root was not recorded on this tape");

  // Leaf contributions from this pass are summed from zero and only then
  // added to the existing accumulator, so repeated passes add identical terms.
  std::vector<std::pair<detail::Node*, std::vector<double>>> saved;
  std::unordered_set<const detail::Node*> seen;
  const auto last = static_cast<std::size_t>(it - nodes_.begin());
  for (std::size_t i = 0; i <= last; ++i) {
    auto& n = nodes_[i];
    n->ensure_grad();
    std::fill(n->grad.begin(), n->grad.end(), 0.0);
    for (auto& p : n->parents) {
      if (!p->leaf || !p->requires_grad) continue;
      if (!seen.insert(p.get()).second) continue;
      p->ensure_grad();
      saved.emplace_back(p.get(), p->grad);
      std::fill(p->grad.begin(), p->grad.end(), 0.0);
    }
  }
  root.node()->grad[0] = 1.0;

  std::size_t visited = 0;
  for (std::size_t i = last + 1; i-- > 0;) {
    auto& n = *nodes_[i];
    for (auto& p : n.parents)
      if (p->requires_grad) p->ensure_grad();
    n.backward(n);
    ++visited;
  }
  for (auto& [leaf, before] : saved)
    for (std::size_t i = 0; i < before.size(); ++i) leaf->grad[i] = before[i] + leaf->grad[i];
  return visited;
}

}  // namespace uanet::ad
