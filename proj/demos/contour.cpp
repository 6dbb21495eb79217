// Branch points, the contour L and its conformal map for a range of p.
#include <cstdio>

#include "tandemq/bvp.hpp"

int main() {
  tandemq::ModelParams m;
  std::printf("%6s %14s %10s %10s %6s %12s\n", "p", "x2", "center", "max|y|", "iter", "residual");
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    m.p = p;
    const auto b = tandemq::branch_points(m);
    const auto c = tandemq::contour_L(m, 256);
    const auto map = tandemq::theodorsen_solve(c, 256);
    std::printf("%6.2f %14.10f %10.6f %10.6f %6d %12.3e\n", p, b.x2, c.center, c.max_modulus, map.iterations,
                map.boundary_residual());
  }
  return 0;
}
