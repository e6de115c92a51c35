#include "stc/train/adam.hpp"

#include <cmath>

namespace stc::train {

void Adam::step(ad::ParamStore& params) {
  const auto& o = options_;
  for (auto& [name, p] : params) {
    if (!p.trainable) continue;
    if (p.grad.empty()) p.grad = ad::Tensor(p.value.shape());
    if (p.grad.shape() != p.value.shape()) throw ad::ShapeError("adam_step", p.value.shape(), p.grad.shape());
    auto it = slots_.find(name);
    if (it == slots_.end()) it = slots_.emplace(name, Slot{ad::Tensor(p.value.shape()), ad::Tensor(p.value.shape()), 0}).first;
    Slot& s = it->second;
    if (s.m.shape() != p.value.shape()) throw ad::ShapeError("adam_step", p.value.shape(), s.m.shape());
    ++s.t;
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(s.t));
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto m = s.m.data();
    auto v = s.v.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

std::uint64_t Adam::steps(const std::string& name) const {
  auto it = slots_.find(name);
  return it == slots_.end() ? 0 : it->second.t;
}

}  // namespace stc::train
