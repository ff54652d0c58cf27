#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace pqs {

template <class Rng>
DiscreteFunction random_cosine_field(const MeshPtr& mesh, Rng& rng, int modes, bool include_constant) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>((modes + 1) * (modes + 1)), 0.0);
  for (int k = 0; k <= modes; ++k)
    for (int l = 0; l <= modes; ++l) {
      const double v = coef(rng);
      if (k == 0 && l == 0 && !include_constant) continue;
      c[static_cast<std::size_t>(k * (modes + 1) + l)] = v;
    }
  const double lx = mesh->lx(), ly = mesh->ly();
  return DiscreteFunction::interpolate(mesh, [&](double x, double y) {
    double s = 0.0;
    for (int k = 0; k <= modes; ++k) {
      const double cx = std::cos(k * std::numbers::pi * x / lx);
      for (int l = 0; l <= modes; ++l)
        s += c[static_cast<std::size_t>(k * (modes + 1) + l)] * cx * std::cos(l * std::numbers::pi * y / ly);
    }
    return s;
  });
}

}  // namespace pqs
