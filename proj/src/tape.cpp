#include "ldp/tape.hpp"

#include <cmath>
#include <cstring>
#include <utility>

namespace ldp {

namespace {

inline void axpy(int n, float a, const float* __restrict x, float* __restrict y) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

// Four partial sums, fixed recombination order.
inline float dotf(const float* __restrict a, const float* __restrict b, int n) {
  float s0 = 0.f, s1 = 0.f, s2 = 0.f, s3 = 0.f;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  float s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Valid output index range [lo, hi) for out*stride + off in [0, limit).
inline void strided_range(int off, int stride, int limit, int out_len, int& lo, int& hi) {
  lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
  int top = limit - 1 - off;
  hi = top < 0 ? 0 : top / stride + 1;
  if (hi > out_len) hi = out_len;
  if (lo > hi) lo = hi;
}

void transpose2d(const float* src, float* dst, int rows, int cols) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) dst[static_cast<std::int64_t>(c) * rows + r] = src[static_cast<std::int64_t>(r) * cols + c];
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  fail(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void check_tape(const char* op, Var v) {
  if (!v.tape || v.id < 0) fail(std::string(op) + ": unbound var");
}

void check_same(const char* op, Var a, Var b) {
  check_tape(op, a);
  check_tape(op, b);
  if (a.tape != b.tape) fail(std::string(op) + ": vars from different tapes");
}

}  // namespace

int ParamStore::add(std::string name, Tensor value) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return static_cast<int>(values_.size()) - 1;
}

std::int64_t ParamStore::total_count() const {
  std::int64_t n = 0;
  for (const Tensor& t : values_) n += t.numel();
  return n;
}

const Tensor& Var::val() const { return tape->value(id); }

Var Tape::leaf(Tensor value, bool trainable) {
  int id = push("leaf", std::move(value), trainable && grad_enabled_, nullptr);
  return Var{this, id};
}

Var Tape::param(ParamStore& store, int index) {
  auto& ids = param_nodes_[&store];
  if (ids.empty()) ids.assign(static_cast<std::size_t>(store.size()), -1);
  int& cached = ids[static_cast<std::size_t>(index)];
  if (cached < 0) cached = push("param", store.value(index), grad_enabled_, nullptr);
  return Var{this, cached};
}

int Tape::push(const char* op, Tensor value, bool requires_grad,
               std::function<void(Tape&)> backward) {
  if (!value.all_finite()) fail(std::string(op) + ": produced non-finite values");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.numel() == 0) n.grad = Tensor(n.value.shape());
  return n.grad;
}

Tensor Tape::grad_of(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (n.grad.numel() == 0) return Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward(Var loss) {
  check_tape("backward", loss);
  if (loss.tape != this) fail("backward: loss from another tape");
  if (value(loss.id).numel() != 1)
    fail("backward: loss must be scalar, got " + shape_str(value(loss.id).shape()));
  if (ran_backward_) fail("backward: tape already differentiated");
  ran_backward_ = true;
  grad_buf(loss.id)[0] = 1.0f;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.numel() == 0 || !n.backward) continue;
    n.backward(*this);
  }
}

std::vector<Tensor> Tape::param_grads(const ParamStore& store) const {
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(store.size()));
  auto it = param_nodes_.find(&store);
  for (int i = 0; i < store.size(); ++i) {
    int id = (it == param_nodes_.end()) ? -1 : it->second[static_cast<std::size_t>(i)];
    if (id >= 0 && nodes_[static_cast<std::size_t>(id)].grad.numel() > 0)
      out.push_back(nodes_[static_cast<std::size_t>(id)].grad);
    else
      out.push_back(Tensor(store.value(i).shape()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// elementwise

namespace {

template <typename Fwd, typename Bwd>
Var unary_op(const char* op, Var x, Fwd f, Bwd df) {
  check_tape(op, x);
  Tape& t = *x.tape;
  const Tensor& xv = t.value(x.id);
  Tensor y(xv.shape());
  for (std::int64_t i = 0; i < xv.numel(); ++i) y[i] = f(xv[i]);
  int xid = x.id;
  int id = t.push(op, std::move(y), t.requires(x.id), [xid, df](Tape& tp) {
    // backward fills the input grad from dy and the cached input value
    int self = -1;
    (void)self;
    return;
  });
  // The lambda above cannot know its own id; re-register properly below.
  (void)id;
  return Var{&t, id};
}

}  // namespace

// unary_op cannot see its own node id inside the closure, so the elementwise
// ops are written out long-form with an explicit self id.

#define LDP_UNARY(NAME, FWD_EXPR, BWD_EXPR)                                            \
  Var NAME(Var x) {                                                                   \
    check_tape(#NAME, x);                                                             \
    Tape& t = *x.tape;                                                                \
    const Tensor& xv = t.value(x.id);                                                 \
    Tensor y(xv.shape());                                                             \
    for (std::int64_t i = 0; i < xv.numel(); ++i) {                                   \
      float xf = xv[i];                                                               \
      (void)xf;                                                                       \
      y[i] = (FWD_EXPR);                                                              \
    }                                                                                 \
    int xid = x.id;                                                                   \
    int self = t.push(#NAME, std::move(y), t.requires(x.id), nullptr);                \
    if (t.requires(self)) {                                                           \
      t.set_backward(self, [xid, self](Tape& tp) {                                    \
        const Tensor& g = tp.grad_buf(self);                                          \
        const Tensor& xin = tp.value(xid);                                            \
        const Tensor& yout = tp.value(self);                                          \
        (void)xin;                                                                    \
        (void)yout;                                                                   \
        if (!tp.requires(xid)) return;                                                \
        Tensor& gx = tp.grad_buf(xid);                                                \
        for (std::int64_t i = 0; i < g.numel(); ++i) {                                \
          float xf = xin[i];                                                          \
          float yf = yout[i];                                                         \
          (void)xf;                                                                   \
          (void)yf;                                                                   \
          gx[i] += g[i] * (BWD_EXPR);                                                 \
        }                                                                             \
      });                                                                             \
    }                                                                                 \
    return Var{&t, self};                                                             \
  }

}  // namespace ldp
