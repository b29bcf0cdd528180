#include "dtg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dtg/error.hpp"

namespace dtg {

Tensor Tensor::zeros(std::vector<std::size_t> shp) {
  std::size_t n = 1;
  for (std::size_t d : shp) n *= d;
  Tensor t;
  t.shape = std::move(shp);
  t.data.assign(n, 0.0);
  return t;
}

Tensor Tensor::from_vector(std::vector<double> v) {
  Tensor t;
  t.shape = {v.size()};
  t.data = std::move(v);
  return t;
}

Tensor Tensor::from_matrix(std::size_t r, std::size_t c, std::vector<double> v) {
  if (v.size() != r * c) fail("shape-mismatch", "matrix data size != r*c");
  Tensor t;
  t.shape = {r, c};
  t.data = std::move(v);
  return t;
}

Val Tape::push(Tensor value, Op op, int a, int b) {
  Node n;
  n.value = std::move(value);
  n.op = grad_enabled_ ? op : Op::kLeaf;  // forward-only mode keeps no edges
  n.a = a;
  n.b = b;
  nodes_.push_back(std::move(n));
  return Val{static_cast<int>(nodes_.size()) - 1};
}

Val Tape::leaf(Tensor v) { return push(std::move(v), Op::kLeaf); }

const Tensor& Tape::value(Val v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    fail("bad-val", "value handle out of range");
  return nodes_[v.id].value;
}

const Tensor& Tape::grad(Val v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    fail("bad-val", "grad handle out of range");
  if (nodes_[v.id].grad.size() != nodes_[v.id].value.size())
    fail("no-grad", "backward() has not populated this node");
  return nodes_[v.id].grad;
}

namespace {
void require(bool cond, const char* what) {
  if (!cond) fail("shape-mismatch", what);
}
}  // namespace

Val Tape::matmul(Val a, Val b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rank() == 2 && B.rank() == 2, "matmul needs rank-2 inputs");
  require(A.shape[1] == B.shape[0], "matmul inner dimensions differ");
  std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
  Tensor C = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &A.data[i * k];
    double* crow = &C.data[i * n];
    for (std::size_t l = 0; l < k; ++l) {
      double av = arow[l];
      const double* brow = &B.data[l * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return push(std::move(C), Op::kMatMul, a.id, b.id);
}

Val Tape::matvec(Val w, Val x) {
  const Tensor& W = value(w);
  const Tensor& X = value(x);
  require(W.rank() == 2 && X.rank() == 1, "matvec needs (m,k) x (k)");
  require(W.shape[1] == X.shape[0], "matvec inner dimensions differ");
  std::size_t m = W.shape[0], k = W.shape[1];
  Tensor y = Tensor::zeros({m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &W.data[i * k];
    double acc = 0.0;
    for (std::size_t l = 0; l < k; ++l) acc += row[l] * X.data[l];
    y.data[i] = acc;
  }
  return push(std::move(y), Op::kMatVec, w.id, x.id);
}

Val Tape::add(Val a, Val b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "add shape mismatch");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
  return push(std::move(C), Op::kAdd, a.id, b.id);
}

Val Tape::sub(Val a, Val b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "sub shape mismatch");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] -= B.data[i];
  return push(std::move(C), Op::kSub, a.id, b.id);
}

Val Tape::mul(Val a, Val b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "mul shape mismatch");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
  return push(std::move(C), Op::kMul, a.id, b.id);
}

Val Tape::add_rowvec(Val m, Val v) {
  const Tensor& M = value(m);
  const Tensor& V = value(v);
  require(M.rank() == 2 && V.rank() == 1, "add_rowvec needs (r,c) + (c)");
  require(M.shape[1] == V.shape[0], "add_rowvec width mismatch");
  Tensor C = M;
  std::size_t r = M.shape[0], c = M.shape[1];
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) C.data[i * c + j] += V.data[j];
  return push(std::move(C), Op::kAddRow, m.id, v.id);
}

Val Tape::scale(Val a, double s) {
  Tensor C = value(a);
  for (double& x : C.data) x *= s;
  Val r = push(std::move(C), Op::kScale, a.id);
  nodes_[r.id].d0 = s;
  return r;
}

Val Tape::add_const(Val a, double c) {
  Tensor C = value(a);
  for (double& x : C.data) x += c;
  Val r = push(std::move(C), Op::kAddConst, a.id);
  nodes_[r.id].d0 = c;
  return r;
}

Val Tape::concat(Val a, Val b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  Tensor C = Tensor::zeros({A.size() + B.size()});
  std::copy(A.data.begin(), A.data.end(), C.data.begin());
  std::copy(B.data.begin(), B.data.end(), C.data.begin() + A.size());
  return push(std::move(C), Op::kConcat, a.id, b.id);
}

Val Tape::slice(Val a, std::size_t offset, std::size_t len) {
  const Tensor& A = value(a);
  require(offset + len <= A.size(), "slice out of range");
  Tensor C = Tensor::zeros({len});
  std::copy(A.data.begin() + offset, A.data.begin() + offset + len, C.data.begin());
  Val r = push(std::move(C), Op::kSlice, a.id);
  nodes_[r.id].p0 = offset;
  return r;
}

Val Tape::reshape(Val a, std::vector<std::size_t> shape) {
  const Tensor& A = value(a);
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  require(n == A.size(), "reshape must preserve element count");
  Tensor C = A;
  C.shape = std::move(shape);
  return push(std::move(C), Op::kReshape, a.id);
}

Val Tape::tanh_(Val a) {
  Tensor C = value(a);
  for (double& x : C.data) x = std::tanh(x);
  return push(std::move(C), Op::kTanh, a.id);
}

Val Tape::sigmoid_(Val a) {
  Tensor C = value(a);
  for (double& x : C.data) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(C), Op::kSigmoid, a.id);
}

Val Tape::exp_(Val a) {
  Tensor C = value(a);
  for (double& x : C.data) x = std::exp(x);
  return push(std::move(C), Op::kExp, a.id);
}

Val Tape::clip01(Val a) {
  Tensor C = value(a);
  for (double& x : C.data) x = std::clamp(x, 0.0, 1.0);
  return push(std::move(C), Op::kClip01, a.id);
}

Val Tape::mean(Val a) {
  const Tensor& A = value(a);
  require(A.size() > 0, "mean of empty tensor");
  double s = std::accumulate(A.data.begin(), A.data.end(), 0.0);
  return push(Tensor::scalar(s / A.size()), Op::kMean, a.id);
}

Val Tape::sum(Val a) {
  const Tensor& A = value(a);
  double s = std::accumulate(A.data.begin(), A.data.end(), 0.0);
  return push(Tensor::scalar(s), Op::kSum, a.id);
}

Val Tape::mse(Val a, Val b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "mse shape mismatch");
  require(A.size() > 0, "mse of empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    double d = A.data[i] - B.data[i];
    s += d * d;
  }
  return push(Tensor::scalar(s / A.size()), Op::kMse, a.id, b.id);
}

Val Tape::cumsum0(Val a) {
  const Tensor& A = value(a);
  require(A.rank() == 2, "cumsum0 needs a rank-2 tensor");
  std::size_t r = A.shape[0], c = A.shape[1];
  Tensor C = A;
  for (std::size_t i = 1; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) C.data[i * c + j] += C.data[(i - 1) * c + j];
  return push(std::move(C), Op::kCumSum0, a.id);
}

namespace {

// shared between forward and backward so both see identical cell selection
struct BilinearSetup {
  std::size_t i0, j0;
  double fx, fy;
  bool clamped;
};

BilinearSetup bilinear_setup(const FieldRef& f, double x, double y) {
  BilinearSetup s{};
  double u = x / f.resolution - 0.5;
  double v = y / f.resolution - 0.5;
  s.clamped = u < 0.0 || u > f.width - 1.0 || v < 0.0 || v > f.height - 1.0;
  u = std::clamp(u, 0.0, static_cast<double>(f.width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(f.height - 1));
  s.i0 = std::min(static_cast<std::size_t>(u), static_cast<std::size_t>(f.width - 2));
  s.j0 = std::min(static_cast<std::size_t>(v), static_cast<std::size_t>(f.height - 2));
  if (f.width == 1) s.i0 = 0;
  if (f.height == 1) s.j0 = 0;
  s.fx = u - s.i0;
  s.fy = v - s.j0;
  return s;
}

double field_at(const FieldRef& f, std::size_t i, std::size_t j) {
  i = std::min(i, static_cast<std::size_t>(f.width - 1));
  j = std::min(j, static_cast<std::size_t>(f.height - 1));
  return f.data[j * f.width + i];
}

}  // namespace

Val Tape::bilinear_sample(const FieldRef& field, Val xy) {
  const Tensor& P = value(xy);
  require(P.rank() == 2 && P.shape[1] == 2, "bilinear_sample needs (m,2) points");
  require(field.data != nullptr && field.width > 0 && field.height > 0,
          "bilinear_sample needs a non-empty field");
  std::size_t m = P.shape[0];
  Tensor out = Tensor::zeros({m});
  for (std::size_t r = 0; r < m; ++r) {
    BilinearSetup s = bilinear_setup(field, P.data[2 * r], P.data[2 * r + 1]);
    if (s.clamped) ++oob_samples_;
    double f00 = field_at(field, s.i0, s.j0);
    double f10 = field_at(field, s.i0 + 1, s.j0);
    double f01 = field_at(field, s.i0, s.j0 + 1);
    double f11 = field_at(field, s.i0 + 1, s.j0 + 1);
    out.data[r] = (1 - s.fx) * (1 - s.fy) * f00 + s.fx * (1 - s.fy) * f10 +
                  (1 - s.fx) * s.fy * f01 + s.fx * s.fy * f11;
  }
  Val r = push(std::move(out), Op::kBilinear, xy.id);
  nodes_[r.id].field = field;
  return r;
}

void Tape::backprop_node(int i) {
  Node& n = nodes_[i];
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul: {
      const Tensor& A = val_of(n.a);
      const Tensor& B = val_of(n.b);
      Tensor& ga = grad_of(n.a);
      Tensor& gb = grad_of(n.b);
      std::size_t m = A.shape[0], k = A.shape[1], nn = B.shape[1];
      // ga += g . B^T (rows of g dot rows of B)
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t l = 0; l < k; ++l) {
          const double* grow = &g.data[r * nn];
          const double* brow = &B.data[l * nn];
          double acc = 0.0;
          for (std::size_t j = 0; j < nn; ++j) acc += grow[j] * brow[j];
          ga.data[r * k + l] += acc;
        }
      // gb += A^T . g (axpy rows)
      for (std::size_t r = 0; r < m; ++r) {
        const double* grow = &g.data[r * nn];
        for (std::size_t l = 0; l < k; ++l) {
          double av = A.data[r * k + l];
          double* gbrow = &gb.data[l * nn];
          for (std::size_t j = 0; j < nn; ++j) gbrow[j] += av * grow[j];
        }
      }
      break;
    }
    case Op::kMatVec: {
      const Tensor& W = val_of(n.a);
      const Tensor& X = val_of(n.b);
      Tensor& gw = grad_of(n.a);
      Tensor& gx = grad_of(n.b);
      std::size_t m = W.shape[0], k = W.shape[1];
      for (std::size_t r = 0; r < m; ++r) {
        double gv = g.data[r];
        if (gv == 0.0) continue;
        const double* wrow = &W.data[r * k];
        double* gwrow = &gw.data[r * k];
        for (std::size_t l = 0; l < k; ++l) {
          gwrow[l] += gv * X.data[l];
          gx.data[l] += gv * wrow[l];
        }
      }
      break;
    }
    case Op::kAdd: {
      Tensor& ga = grad_of(n.a);
      Tensor& gb = grad_of(n.b);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ga.data[j] += g.data[j];
        gb.data[j] += g.data[j];
      }
      break;
    }
    case Op::kSub: {
      Tensor& ga = grad_of(n.a);
      Tensor& gb = grad_of(n.b);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ga.data[j] += g.data[j];
        gb.data[j] -= g.data[j];
      }
      break;
    }
    case Op::kMul: {
      const Tensor& A = val_of(n.a);
      const Tensor& B = val_of(n.b);
      Tensor& ga = grad_of(n.a);
      Tensor& gb = grad_of(n.b);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ga.data[j] += g.data[j] * B.data[j];
        gb.data[j] += g.data[j] * A.data[j];
      }
      break;
    }
    case Op::kAddRow: {
      Tensor& gm = grad_of(n.a);
      Tensor& gv = grad_of(n.b);
      std::size_t r = n.value.shape[0], c = n.value.shape[1];
      for (std::size_t i2 = 0; i2 < r; ++i2)
        for (std::size_t j = 0; j < c; ++j) {
          gm.data[i2 * c + j] += g.data[i2 * c + j];
          gv.data[j] += g.data[i2 * c + j];
        }
      break;
    }
    case Op::kScale: {
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.data[j] += g.data[j] * n.d0;
      break;
    }
    case Op::kAddConst: {
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.data[j] += g.data[j];
      break;
    }
    case Op::kConcat: {
      Tensor& ga = grad_of(n.a);
      Tensor& gb = grad_of(n.b);
      std::size_t na = ga.size();
      for (std::size_t j = 0; j < na; ++j) ga.data[j] += g.data[j];
      for (std::size_t j = 0; j < gb.size(); ++j) gb.data[j] += g.data[na + j];
      break;
    }
    case Op::kSlice: {
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.data[n.p0 + j] += g.data[j];
      break;
    }
    case Op::kReshape: {
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.data[j] += g.data[j];
      break;
    }
    case Op::kTanh: {
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) {
        double y = n.value.data[j];
        ga.data[j] += g.data[j] * (1.0 - y * y);
      }
      break;
    }
    case Op::kSigmoid: {
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) {
        double y = n.value.data[j];
        ga.data[j] += g.data[j] * y * (1.0 - y);
      }
      break;
    }
    case Op::kExp: {
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.data[j] += g.data[j] * n.value.data[j];
      break;
    }
    case Op::kClip01: {
      const Tensor& A = val_of(n.a);
      Tensor& ga = grad_of(n.a);
      for (std::size_t j = 0; j < g.size(); ++j)
        if (A.data[j] > 0.0 && A.data[j] < 1.0) ga.data[j] += g.data[j];
      break;
    }
    case Op::kMean: {
      Tensor& ga = grad_of(n.a);
      double gv = g.data[0] / ga.size();
      for (double& x : ga.data) x += gv;
      break;
    }
    case Op::kSum: {
      Tensor& ga = grad_of(n.a);
      double gv = g.data[0];
      for (double& x : ga.data) x += gv;
      break;
    }
    case Op::kMse: {
      const Tensor& A = val_of(n.a);
      const Tensor& B = val_of(n.b);
      Tensor& ga = grad_of(n.a);
      Tensor& gb = grad_of(n.b);
      double gv = g.data[0] * 2.0 / A.size();
      for (std::size_t j = 0; j < A.size(); ++j) {
        double d = gv * (A.data[j] - B.data[j]);
        ga.data[j] += d;
        gb.data[j] -= d;
      }
      break;
    }
    case Op::kCumSum0: {
      // y_i = sum_{r<=i} x_r  =>  dx_r = sum_{i>=r} dy_i (suffix sums)
      Tensor& ga = grad_of(n.a);
      std::size_t r = n.value.shape[0], c = n.value.shape[1];
      std::vector<double> suffix(c, 0.0);
      for (std::size_t i2 = r; i2-- > 0;) {
        for (std::size_t j = 0; j < c; ++j) {
          suffix[j] += g.data[i2 * c + j];
          ga.data[i2 * c + j] += suffix[j];
        }
      }
      break;
    }
    case Op::kBilinear: {
      const Tensor& P = val_of(n.a);
      Tensor& gp = grad_of(n.a);
      std::size_t m = P.shape[0];
      for (std::size_t r = 0; r < m; ++r) {
        double gv = g.data[r];
        if (gv == 0.0) continue;
        BilinearSetup s = bilinear_setup(n.field, P.data[2 * r], P.data[2 * r + 1]);
        if (s.clamped) continue;  // border-clamped: zero positional gradient
        double f00 = field_at(n.field, s.i0, s.j0);
        double f10 = field_at(n.field, s.i0 + 1, s.j0);
        double f01 = field_at(n.field, s.i0, s.j0 + 1);
        double f11 = field_at(n.field, s.i0 + 1, s.j0 + 1);
        double du = (1 - s.fy) * (f10 - f00) + s.fy * (f11 - f01);
        double dv = (1 - s.fx) * (f01 - f00) + s.fx * (f11 - f10);
        gp.data[2 * r] += gv * du / n.field.resolution;
        gp.data[2 * r + 1] += gv * dv / n.field.resolution;
      }
      break;
    }
  }
}

void Tape::backward(Val loss) {
  if (!grad_enabled_) fail("no-grad", "tape was constructed in forward-only mode");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) fail("non-scalar-loss", "backward needs a scalar loss");
  for (int i = 0; i <= loss.id; ++i) {
    nodes_[i].grad.shape = nodes_[i].value.shape;
    nodes_[i].grad.data.assign(nodes_[i].value.size(), 0.0);
  }
  nodes_[loss.id].grad.data[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) backprop_node(i);
}

Tensor& ParamStore::add(const std::string& name, Tensor init) {
  if (has(name)) fail("duplicate-param", name);
  items_.push_back({name, std::move(init)});
  return items_.back().value;
}

Tensor& ParamStore::at(const std::string& name) {
  for (auto& it : items_)
    if (it.name == name) return it.value;
  fail("missing-param", name);
}

const Tensor& ParamStore::at(const std::string& name) const {
  for (const auto& it : items_)
    if (it.name == name) return it.value;
  fail("missing-param", name);
}

bool ParamStore::has(const std::string& name) const {
  for (const auto& it : items_)
    if (it.name == name) return true;
  return false;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& it : items_) n += it.value.size();
  return n;
}

BoundParams::BoundParams(Tape& tape, const ParamStore& store) : store_(&store) {
  vals_.reserve(store.items().size());
  for (const auto& it : store.items()) vals_.push_back(tape.leaf(it.value));
}

Val BoundParams::operator[](const std::string& name) const {
  const auto& items = store_->items();
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].name == name) return vals_[i];
  fail("missing-param", name);
}

}  // namespace dtg
