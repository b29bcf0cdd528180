#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dtg/grid_world.hpp"  // FieldRef

namespace dtg {

// Dense row-major tensor of doubles. Rank 1 or 2 in practice.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shp);
  static Tensor scalar(double v) { return Tensor{{1}, {v}}; }
  static Tensor from_vector(std::vector<double> v);
  static Tensor from_matrix(std::size_t r, std::size_t c, std::vector<double> v);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// Handle into a Tape.
struct Val {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Dynamic reverse-mode tape. Nodes are appended in topological order; backward
// walks them in reverse. Construction and backward are single-owner; reading
// values is const. With grads disabled the tape is a plain forward evaluator.
class Tape {
public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Val leaf(Tensor v);
  Val leaf(const std::vector<double>& v) { return leaf(Tensor::from_vector(v)); }

  const Tensor& value(Val v) const;
  const Tensor& grad(Val v) const;  // valid after backward()

  // binary / matrix ops
  Val matmul(Val a, Val b);        // (m,k) x (k,n) -> (m,n)
  Val matvec(Val w, Val x);        // (m,k) x (k)   -> (m)
  Val add(Val a, Val b);           // same shape
  Val sub(Val a, Val b);
  Val mul(Val a, Val b);           // elementwise, same shape
  Val add_rowvec(Val m, Val v);    // (r,c) + (c) broadcast over rows

  // scalar-parameter ops
  Val scale(Val a, double s);
  Val add_const(Val a, double c);

  // shape ops (flat layout; slice/concat treat the buffer as 1-D)
  Val concat(Val a, Val b);
  Val slice(Val a, std::size_t offset, std::size_t len);
  Val reshape(Val a, std::vector<std::size_t> shape);

  // elementwise nonlinearities
  Val tanh_(Val a);
  Val sigmoid_(Val a);
  Val exp_(Val a);
  Val clip01(Val a);  // gradient passes only strictly inside (0, 1)

  // reductions
  Val mean(Val a);
  Val sum(Val a);
  Val mse(Val a, Val b);  // mean squared error over all elements

  // structured ops
  Val cumsum0(Val a);  // prefix sum along dim 0 of an (m,2) tensor
  // Interpolates `field` at rows of xy ((m,2), world meters); gradient flows
  // into xy. Samples outside the cell-center hull clamp to the border with
  // zero positional gradient and bump the out-of-field counter.
  Val bilinear_sample(const FieldRef& field, Val xy);

  void backward(Val loss);  // loss must be scalar

  int out_of_field_samples() const { return oob_samples_; }
  std::size_t node_count() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

private:
  enum class Op : uint8_t {
    kLeaf, kMatMul, kMatVec, kAdd, kSub, kMul, kAddRow, kScale, kAddConst,
    kConcat, kSlice, kReshape, kTanh, kSigmoid, kExp, kClip01, kMean, kSum,
    kMse, kCumSum0, kBilinear
  };

  struct Node {
    Tensor value;
    Tensor grad;
    Op op = Op::kLeaf;
    int a = -1;
    int b = -1;
    std::size_t p0 = 0;  // op-specific (slice offset, ...)
    double d0 = 0.0;     // op-specific (scale factor, ...)
    FieldRef field;      // kBilinear only
  };

  Val push(Tensor value, Op op, int a = -1, int b = -1);
  void backprop_node(int i);
  const Tensor& val_of(int id) const { return nodes_[id].value; }
  Tensor& grad_of(int id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  bool grad_enabled_;
  int oob_samples_ = 0;
};

// Ordered named parameter set; iteration order is insertion order and is the
// canonical order for checkpoints and optimizer state.
class ParamStore {
public:
  Tensor& add(const std::string& name, Tensor init);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const;

  struct Item {
    std::string name;
    Tensor value;
  };
  const std::vector<Item>& items() const { return items_; }
  std::vector<Item>& items() { return items_; }
  std::size_t total_size() const;

private:
  std::vector<Item> items_;
};

// All parameters bound as leaves on one tape, looked up by name.
class BoundParams {
public:
  BoundParams(Tape& tape, const ParamStore& store);
  Val operator[](const std::string& name) const;
  const std::vector<Val>& vals() const { return vals_; }
  const ParamStore& store() const { return *store_; }

private:
  const ParamStore* store_;
  std::vector<Val> vals_;
};

}  // namespace dtg
