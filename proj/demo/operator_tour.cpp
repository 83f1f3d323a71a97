// Second level derivative of a power sum, its RL representation and the
// classical special cases.

#include <cstdio>

#include "fraclevel/fraclevel.hpp"

using namespace fraclevel;

int main() {
    LevelParams p(0.5, {0.2, 0.4});
    auto f = parse_monomials("t^0.9 + 2*t^2 + t^-0.9");
    std::printf("xi = (%g, %g)\n", p.xi(1), p.xi(2));
    std::printf("f           = %s\n", to_string(f).c_str());
    std::printf("composed    = %s\n", to_string(lfd_composed(f, p)).c_str());
    std::printf("via RL form = %s\n", to_string(lfd_rl_form(f, p)).c_str());
    auto c = lfd_boundary_constants(f, p);
    std::printf("C_1 = %.15g, C_2 = %.15g\n", c[1], c[2]);

    auto g = parse_monomials("1 + t + t^2");
    const double rho = 0.3;
    std::printf("\nCaputo of %s:\n  %s\n", to_string(g).c_str(), to_string(lfd_composed(g, caputo_params(rho))).c_str());
    std::printf("RL:\n  %s\n", to_string(lfd_composed(g, riemann_liouville_params(rho))).c_str());

    std::printf("\nE_{0.5,1}(-1) = %.15g\n", ml_eval(0.5, 1.0, -1.0));
    std::printf("E_{2,1}(-100) = %.15g (cos 10 = %.15g)\n", ml_eval(2.0, 1.0, -100.0), std::cos(10.0));

    auto grid = sample([](double t) { return t * t; }, 1.0, 1025);
    auto d = lfd_grid(grid, p);
    auto exact = lfd_rl_form(parse_monomials("t^2"), p);
    std::printf("\ngrid path at t = 0.5: %.10g (power-sum value %.10g)\n", d[512], eval(exact, 0.5));
    return 0;
}
