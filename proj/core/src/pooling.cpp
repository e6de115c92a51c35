#include "stc/nets/pooling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace stc::nets {

using ad::Tensor;
using ad::Var;

Var reweight(const Var& features, const Var& probabilities) {
  const auto& xs = features.shape();
  const auto& ps = probabilities.shape();
  if (xs.size() != 2 || ps.size() != 1 || xs[0] != ps[0]) throw ad::ShapeError("reweight", xs, ps);
  return ad::add(ad::mul_rows(features, probabilities), features);
}

Var topk_pool(const Var& frame_logits, std::size_t k) {
  if (k == 0) throw std::invalid_argument("topk_pool: K must be at least 1");
  const Tensor& x = frame_logits.value();
  if (x.rank() != 2) throw ad::ShapeError("topk_pool", "expected [T x C] frame logits, got " + ad::to_string(x.shape()));
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const std::size_t keep = std::min(k, rows);

  std::vector<std::size_t> chosen(keep * cols);
  Tensor out({cols});
  std::vector<std::size_t> order(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double va = x[a * cols + c], vb = x[b * cols + c];
                        return va > vb || (va == vb && a < b);
                      });
    double s = 0.0;
    for (std::size_t j = 0; j < keep; ++j) {
      chosen[c * keep + j] = order[j];
      s += x[order[j] * cols + c];
    }
    out[c] = s / static_cast<double>(keep);
  }

  const auto id = frame_logits.id();
  return frame_logits.tape()->record(
      std::move(out), {id}, [id, cols, keep, chosen = std::move(chosen)](ad::Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& gx = t.grad_buffer(id);
        const double w = 1.0 / static_cast<double>(keep);
        for (std::size_t c = 0; c < cols; ++c) {
          for (std::size_t j = 0; j < keep; ++j) gx[chosen[c * keep + j] * cols + c] += g[c] * w;
        }
      });
}

}  // namespace stc::nets
