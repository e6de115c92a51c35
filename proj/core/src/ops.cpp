#include "stc/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stc::ad {

namespace {

Tape& tape_of(const Var& a, const char* op) {
  if (!a.valid()) throw std::logic_error(std::string(op) + ": unbound operand");
  return *a.tape();
}

void same_tape(const Var& a, const Var& b, const char* op) {
  if (a.tape() != b.tape()) throw std::logic_error(std::string(op) + ": operands live on different tapes");
}

void accumulate(Tensor& dst, std::span<const double> src) {
  auto d = dst.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += src[i];
}

enum class BinaryKind { add, sub, mul, div };

Var binary(const Var& a, const Var& b, BinaryKind kind, const char* name) {
  Tape& tape = tape_of(a, name);
  same_tape(a, b, name);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const bool a_scalar = x.size() == 1 && y.size() != 1;
  const bool b_scalar = y.size() == 1 && x.size() != 1;
  if (!a_scalar && !b_scalar && x.shape() != y.shape()) throw ShapeError(name, x.shape(), y.shape());

  const Shape out_shape = a_scalar ? y.shape() : x.shape();
  Tensor out(out_shape);
  const std::size_t n = out.size();
  auto xa = [&](std::size_t i) { return a_scalar ? x[0] : x[i]; };
  auto yb = [&](std::size_t i) { return b_scalar ? y[0] : y[i]; };
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case BinaryKind::add: out[i] = xa(i) + yb(i); break;
      case BinaryKind::sub: out[i] = xa(i) - yb(i); break;
      case BinaryKind::mul: out[i] = xa(i) * yb(i); break;
      case BinaryKind::div: out[i] = xa(i) / yb(i); break;
    }
  }

  const auto ia = a.id();
  const auto ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& xv = t.value(ia);
    const Tensor& yv = t.value(ib);
    auto xs = [&](std::size_t i) { return a_scalar ? xv[0] : xv[i]; };
    auto ys = [&](std::size_t i) { return b_scalar ? yv[0] : yv[i]; };
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        switch (kind) {
          case BinaryKind::add:
          case BinaryKind::sub: d = g[i]; break;
          case BinaryKind::mul: d = g[i] * ys(i); break;
          case BinaryKind::div: d = g[i] / ys(i); break;
        }
        ga[a_scalar ? 0 : i] += d;
      }
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        switch (kind) {
          case BinaryKind::add: d = g[i]; break;
          case BinaryKind::sub: d = -g[i]; break;
          case BinaryKind::mul: d = g[i] * xs(i); break;
          case BinaryKind::div: d = -g[i] * xs(i) / (ys(i) * ys(i)); break;
        }
        gb[b_scalar ? 0 : i] += d;
      }
    }
  });
}

// Elementwise unary op given f(x) and df/dx expressed through (x, y).
template <class F, class DF>
Var unary(const Var& a, F f, DF df, const char* name) {
  Tape& tape = tape_of(a, name);
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& xv = t.value(ia);
    const Tensor& yv = t.value(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(xv[i], yv[i]);
  });
}

struct AxisLayout {
  std::size_t outer = 1;
  std::size_t length = 1;
  std::size_t inner = 1;
};

AxisLayout layout_for(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw ShapeError(op, "axis " + std::to_string(axis) + " out of range for " + to_string(shape));
  }
  AxisLayout l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  l.length = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(const Var& a, const Var& b) { return binary(a, b, BinaryKind::add, "add"); }
Var sub(const Var& a, const Var& b) { return binary(a, b, BinaryKind::sub, "sub"); }
Var mul(const Var& a, const Var& b) { return binary(a, b, BinaryKind::mul, "mul"); }
Var div(const Var& a, const Var& b) { return binary(a, b, BinaryKind::div, "div"); }

Var scale(const Var& a, double k) {
  return unary(a, [k](double x) { return k * x; }, [k](double, double) { return k; }, "scale");
}

Var add_scalar(const Var& a, double k) {
  return unary(a, [k](double x) { return x + k; }, [](double, double) { return 1.0; }, "add_scalar");
}

Var matmul(const Var& a, const Var& b) {
  Tape& tape = tape_of(a, "matmul");
  same_tape(a, b, "matmul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rank() != 2 || y.rank() != 2 || x.dim(1) != y.dim(0)) throw ShapeError("matmul", x.shape(), y.shape());
  const std::size_t m = x.dim(0), k = x.dim(1), n = y.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out[i * n];
    for (std::size_t l = 0; l < k; ++l) {
      const double xv = x[i * k + l];
      const double* yrow = &y[l * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += xv * yrow[j];
    }
  }
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& xv = t.value(ia);
    const Tensor& yv = t.value(ib);
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &g[i * n];
        for (std::size_t l = 0; l < k; ++l) {
          const double* yrow = &yv[l * n];
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * yrow[j];
          ga[i * k + l] += acc;
        }
      }
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &g[i * n];
        for (std::size_t l = 0; l < k; ++l) {
          const double xv_il = xv[i * k + l];
          double* gbrow = &gb[l * n];
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += xv_il * grow[j];
        }
      }
    }
  });
}

Var add_bias(const Var& x, const Var& bias) {
  Tape& tape = tape_of(x, "add_bias");
  same_tape(x, bias, "add_bias");
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (xv.rank() != 2 || bv.rank() != 1 || bv.dim(0) != xv.dim(1)) throw ShapeError("add_bias", xv.shape(), bv.shape());
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  Tensor out = xv;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  }
  const auto ix = x.id(), ib = bias.id();
  return tape.record(std::move(out), {ix, ib}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    if (t.requires_grad(ix)) accumulate(t.grad_buffer(ix), g.data());
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
      }
    }
  });
}

Var mul_rows(const Var& x, const Var& p) {
  Tape& tape = tape_of(x, "mul_rows");
  same_tape(x, p, "mul_rows");
  const Tensor& xv = x.value();
  const Tensor& pv = p.value();
  if (xv.rank() != 2 || pv.rank() != 1 || pv.dim(0) != xv.dim(0)) throw ShapeError("mul_rows", xv.shape(), pv.shape());
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] * pv[r];
  }
  const auto ix = x.id(), ip = p.id();
  return tape.record(std::move(out), {ix, ip}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& xs = t.value(ix);
    const Tensor& ps = t.value(ip);
    if (t.requires_grad(ix)) {
      Tensor& gx = t.grad_buffer(ix);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[r * cols + c] * ps[r];
      }
    }
    if (t.requires_grad(ip)) {
      Tensor& gp = t.grad_buffer(ip);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += g[r * cols + c] * xs[r * cols + c];
        gp[r] += acc;
      }
    }
  });
}

Var conv1d(const Var& x, const Var& w, const Var& bias, std::size_t dilation, std::size_t padding) {
  Tape& tape = tape_of(x, "conv1d");
  same_tape(x, w, "conv1d");
  const bool has_bias = bias.valid();
  if (has_bias) same_tape(x, bias, "conv1d");
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 2 || wv.rank() != 3 || wv.dim(1) != xv.dim(1)) throw ShapeError("conv1d", xv.shape(), wv.shape());
  if (dilation == 0) throw ShapeError("conv1d", "dilation must be positive");
  const std::size_t len = xv.dim(0), cin = xv.dim(1), taps = wv.dim(0), cout = wv.dim(2);
  if (has_bias && (bias.value().rank() != 1 || bias.value().dim(0) != cout)) {
    throw ShapeError("conv1d", wv.shape(), bias.value().shape());
  }
  const std::size_t span = dilation * (taps - 1);
  if (len + 2 * padding <= span) {
    throw ShapeError("conv1d", "input " + to_string(xv.shape()) + " too short for kernel " + to_string(wv.shape()));
  }
  const std::size_t out_len = len + 2 * padding - span;

  Tensor out({out_len, cout});
  for (std::size_t t = 0; t < out_len; ++t) {
    double* orow = &out[t * cout];
    if (has_bias) {
      const Tensor& bv = bias.value();
      for (std::size_t o = 0; o < cout; ++o) orow[o] = bv[o];
    }
    for (std::size_t k = 0; k < taps; ++k) {
      const auto src = static_cast<std::ptrdiff_t>(t + k * dilation) - static_cast<std::ptrdiff_t>(padding);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
      const double* xrow = &xv[static_cast<std::size_t>(src) * cin];
      for (std::size_t i = 0; i < cin; ++i) {
        const double xval = xrow[i];
        const double* wrow = &wv[(k * cin + i) * cout];
        for (std::size_t o = 0; o < cout; ++o) orow[o] += xval * wrow[o];
      }
    }
  }

  const auto ix = x.id(), iw = w.id();
  const auto ib = has_bias ? bias.id() : std::size_t{0};
  std::vector<std::size_t> parents{ix, iw};
  if (has_bias) parents.push_back(ib);
  return tape.record(std::move(out), std::move(parents), [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& xs = t.value(ix);
    const Tensor& ws = t.value(iw);
    const bool need_x = t.requires_grad(ix);
    const bool need_w = t.requires_grad(iw);
    if (has_bias && t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t r = 0; r < out_len; ++r) {
        for (std::size_t o = 0; o < cout; ++o) gb[o] += g[r * cout + o];
      }
    }
    if (!need_x && !need_w) return;
    Tensor* gx = need_x ? &t.grad_buffer(ix) : nullptr;
    Tensor* gw = need_w ? &t.grad_buffer(iw) : nullptr;
    for (std::size_t r = 0; r < out_len; ++r) {
      const double* grow = &g[r * cout];
      for (std::size_t k = 0; k < taps; ++k) {
        const auto src = static_cast<std::ptrdiff_t>(r + k * dilation) - static_cast<std::ptrdiff_t>(padding);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
        const auto s = static_cast<std::size_t>(src);
        const double* xrow = &xs[s * cin];
        for (std::size_t i = 0; i < cin; ++i) {
          const double* wrow = &ws[(k * cin + i) * cout];
          if (gx) {
            double acc = 0.0;
            for (std::size_t o = 0; o < cout; ++o) acc += grow[o] * wrow[o];
            (*gx)[s * cin + i] += acc;
          }
          if (gw) {
            const double xval = xrow[i];
            double* gwrow = &(*gw)[(k * cin + i) * cout];
            for (std::size_t o = 0; o < cout; ++o) gwrow[o] += xval * grow[o];
          }
        }
      }
    }
  });
}

Var conv1d_same(const Var& x, const Var& w, const Var& bias, std::size_t dilation) {
  const std::size_t taps = w.value().rank() == 3 ? w.value().dim(0) : 1;
  return conv1d(x, w, bias, dilation, dilation * (taps - 1) / 2);
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; },
               "relu");
}

Var sigmoid(const Var& a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; }, "exp");
}

Var log(const Var& a) {
  for (double v : a.value().data()) {
    if (!(v > 0.0)) throw std::domain_error("log: non-positive input " + std::to_string(v));
  }
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; }, "log");
}

Var clamp(const Var& a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return unary(a, [=](double x) { return std::clamp(x, lo, hi); },
               [=](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; }, "clamp");
}

Var softmax(const Var& a, std::size_t axis) {
  Tape& tape = tape_of(a, "softmax");
  const Tensor& x = a.value();
  const auto l = layout_for(x.shape(), axis, "softmax");
  Tensor out(x.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.length * l.inner + in;
      double mx = x[base];
      for (std::size_t k = 1; k < l.length; ++k) mx = std::max(mx, x[base + k * l.inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < l.length; ++k) {
        const double e = std::exp(x[base + k * l.inner] - mx);
        out[base + k * l.inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < l.length; ++k) out[base + k * l.inner] /= z;
    }
  }
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t in = 0; in < l.inner; ++in) {
        const std::size_t base = o * l.length * l.inner + in;
        double s = 0.0;
        for (std::size_t k = 0; k < l.length; ++k) s += g[base + k * l.inner] * y[base + k * l.inner];
        for (std::size_t k = 0; k < l.length; ++k) {
          const auto idx = base + k * l.inner;
          ga[idx] += y[idx] * (g[idx] - s);
        }
      }
    }
  });
}

Var log_softmax(const Var& a, std::size_t axis) {
  Tape& tape = tape_of(a, "log_softmax");
  const Tensor& x = a.value();
  const auto l = layout_for(x.shape(), axis, "log_softmax");
  Tensor out(x.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.length * l.inner + in;
      double mx = x[base];
      for (std::size_t k = 1; k < l.length; ++k) mx = std::max(mx, x[base + k * l.inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < l.length; ++k) z += std::exp(x[base + k * l.inner] - mx);
      const double lse = mx + std::log(z);
      for (std::size_t k = 0; k < l.length; ++k) out[base + k * l.inner] = x[base + k * l.inner] - lse;
    }
  }
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t in = 0; in < l.inner; ++in) {
        const std::size_t base = o * l.length * l.inner + in;
        double s = 0.0;
        for (std::size_t k = 0; k < l.length; ++k) s += g[base + k * l.inner];
        for (std::size_t k = 0; k < l.length; ++k) {
          const auto idx = base + k * l.inner;
          ga[idx] += g[idx] - std::exp(y[idx]) * s;
        }
      }
    }
  });
}

Var sum(const Var& a) {
  Tape& tape = tape_of(a, "sum");
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const auto ia = a.id();
  return tape.record(Tensor::scalar(s), {ia}, [=](Tape& t, std::size_t self) {
    const double g = t.grad_buffer(self)[0];
    for (auto& v : t.grad_buffer(ia).data()) v += g;
  });
}

Var mean(const Var& a) {
  const auto n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var dot(const Var& a, const Var& b) {
  Tape& tape = tape_of(a, "dot");
  same_tape(a, b, "dot");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.size() != y.size()) throw ShapeError("dot", x.shape(), y.shape());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(Tensor::scalar(s), {ia, ib}, [=](Tape& t, std::size_t self) {
    const double g = t.grad_buffer(self)[0];
    const Tensor& xs = t.value(ia);
    const Tensor& ys = t.value(ib);
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * ys[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * xs[i];
    }
  });
}

Var l2_norm(const Var& a) {
  Tape& tape = tape_of(a, "l2_norm");
  double s = 0.0;
  for (double v : a.value().data()) s += v * v;
  const double norm = std::sqrt(s);
  const auto ia = a.id();
  return tape.record(Tensor::scalar(norm), {ia}, [=](Tape& t, std::size_t self) {
    if (norm == 0.0) return;
    const double g = t.grad_buffer(self)[0];
    const Tensor& xs = t.value(ia);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * xs[i] / norm;
  });
}

Var select(const Var& a, std::size_t index) {
  Tape& tape = tape_of(a, "select");
  if (index >= a.value().size()) {
    throw ShapeError("select", "index " + std::to_string(index) + " out of range for " + to_string(a.shape()));
  }
  const auto ia = a.id();
  return tape.record(Tensor::scalar(a.value()[index]), {ia}, [=](Tape& t, std::size_t self) {
    t.grad_buffer(ia)[index] += t.grad_buffer(self)[0];
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(a, "slice_rows");
  const Tensor& x = a.value();
  if (x.rank() == 0 || begin >= end || end > x.dim(0)) {
    throw ShapeError("slice_rows", "range [" + std::to_string(begin) + ", " + std::to_string(end) +
                                       ") invalid for " + to_string(x.shape()));
  }
  const std::size_t stride = x.size() / x.dim(0);
  Shape shape = x.shape();
  shape[0] = end - begin;
  std::vector<double> data(x.data().begin() + static_cast<std::ptrdiff_t>(begin * stride),
                           x.data().begin() + static_cast<std::ptrdiff_t>(end * stride));
  const auto ia = a.id();
  return tape.record(Tensor(std::move(shape), std::move(data)), {ia}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[begin * stride + i] += g[i];
  });
}

Var reshape(const Var& a, Shape shape) {
  Tape& tape = tape_of(a, "reshape");
  if (element_count(shape) != a.value().size()) throw ShapeError("reshape", a.shape(), shape);
  const auto ia = a.id();
  return tape.record(Tensor(std::move(shape), a.value().storage()), {ia}, [=](Tape& t, std::size_t self) {
    accumulate(t.grad_buffer(ia), t.grad_buffer(self).data());
  });
}

Var dropout(const Var& a, double rate, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  if (rng == nullptr || rate == 0.0) return a;
  Tape& tape = tape_of(a, "dropout");
  const Tensor& x = a.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (auto& m : mask) m = uniform01(*rng) < rate ? 0.0 : keep_scale;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
  const auto ia = a.id();
  return tape.record(std::move(out), {ia}, [ia, mask = std::move(mask)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buffer(self);
    Tensor& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
  });
}

}  // namespace stc::ad
