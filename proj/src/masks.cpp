#include "cpr/masks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpr {

const MaskConstants& mask_constants() {
  static const MaskConstants c = [] {
    MaskConstants m;
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    m.alpha = std::sqrt((1.0 - inv_sqrt3) / 2.0);
    const double beta_mag = std::sqrt((1.0 + inv_sqrt3) / 2.0);
    const double phi = -5.0 * std::numbers::pi / 4.0;
    m.beta = beta_mag * Complex(std::cos(phi), std::sin(phi));
    const Complex alpha(m.alpha, 0.0);
    m.a = {alpha, m.beta, alpha, -m.beta};
    m.b = {m.beta, alpha, -m.beta, alpha};
    return m;
  }();
  return c;
}

MaskSet build_masks(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_masks: dimension must be positive");
  const MaskConstants& c = mask_constants();
  MaskSet set;
  set.n = n;
  for (std::size_t s = 0; s < 4; ++s) {
    set.p[s].assign(n, c.b[s]);
    set.p[s][0] += c.a[s];
  }
  return set;
}

}  // namespace cpr
