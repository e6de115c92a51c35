#pragma once

#include <cstddef>

#include "stc/autodiff/tape.hpp"
#include "stc/util/rng.hpp"

// Differentiable primitives. Every function records its result on the tape
// of its first operand and throws ShapeError on incompatible operands.
namespace stc::ad {

// Elementwise arithmetic. Operands must have equal shapes, or one of them
// must hold a single element, which is broadcast.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var scale(const Var& a, double k);
Var add_scalar(const Var& a, double k);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }
inline Var operator*(double k, const Var& a) { return scale(a, k); }

/// [m x k] . [k x n] -> [m x n]
Var matmul(const Var& a, const Var& b);
/// x [T x C] + b [C], broadcast over rows.
Var add_bias(const Var& x, const Var& bias);
/// x [T x C] scaled row-wise by p [T].
Var mul_rows(const Var& x, const Var& p);

/// 1-D convolution over the temporal axis.
/// x [T x Cin], w [K x Cin x Cout], bias [Cout] (may be an unbound Var).
/// Zero padding of `padding` frames on both sides; output length
/// T + 2*padding - dilation*(K-1).
Var conv1d(const Var& x, const Var& w, const Var& bias, std::size_t dilation, std::size_t padding);
/// conv1d with padding dilation*(K-1)/2, which preserves length for odd K.
Var conv1d_same(const Var& x, const Var& w, const Var& bias, std::size_t dilation);

Var relu(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);
/// Natural log; rejects non-positive inputs.
Var log(const Var& a);
/// Clamps into [lo, hi]; the gradient passes only where lo <= x <= hi.
Var clamp(const Var& a, double lo, double hi);

Var softmax(const Var& a, std::size_t axis);
Var log_softmax(const Var& a, std::size_t axis);

Var sum(const Var& a);
Var mean(const Var& a);
Var dot(const Var& a, const Var& b);
Var l2_norm(const Var& a);

/// Element at flat index, as a scalar.
Var select(const Var& a, std::size_t index);
/// Rows [begin, end) along the leading (temporal) axis.
Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var reshape(const Var& a, Shape shape);

/// Inverted dropout. With rng == nullptr (eval mode) or rate == 0 it is the
/// identity; otherwise a mask is drawn from rng, so a seeded rng makes the
/// train-mode pass reproducible.
Var dropout(const Var& a, double rate, Rng* rng);

}  // namespace stc::ad
