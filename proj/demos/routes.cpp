// Mean queue lengths at one parameter point by every route.
#include <cstdio>
#include <cstdlib>

#include "tandemq/bvp.hpp"
#include "tandemq/oracle.hpp"
#include "tandemq/psa.hpp"
#include "tandemq/simulate.hpp"

int main(int argc, char** argv) {
  tandemq::ModelParams m;
  m.p = argc > 1 ? std::atof(argv[1]) : 0.3;
  try {
    std::printf("p = %.3f, empty probability %.10f\n", m.p, tandemq::empty_probability(m));

    const tandemq::PsaSolver psa(m);
    for (int M = 0; M <= 6; M += 2) {
      const auto r = psa.metrics(M);
      std::printf("psa  M=%d      EQ1 %.10f  EQ2 %.10f\n", M, r.EQ1, r.EQ2);
    }
    const auto sol = tandemq::solve_bvp(m);
    const auto b = tandemq::bvp_metrics(sol);
    std::printf("bvp  (%3d it) EQ1 %.10f  EQ2 %.10f\n", sol.map.iterations, b.EQ1, b.EQ2);

    const auto t = tandemq::solve_truncated(m, 120);
    const auto o = tandemq::oracle_metrics(t);
    std::printf("ctmc N=%d    EQ1 %.10f  EQ2 %.10f\n", t.N, o.EQ1, o.EQ2);

    const auto s = tandemq::simulate(m);
    std::printf("sim           EQ1 %.4f +- %.4f  EQ2 %.4f +- %.4f\n", s.EQ1.mean, s.EQ1.half_width, s.EQ2.mean,
                s.EQ2.half_width);
  } catch (const tandemq::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
