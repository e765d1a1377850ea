// Compares the quadratic hierarchy term IV(eps) with its Boltzmann limit
// on the reference two-particle state. Small sample counts; a demo only.

#include <iostream>

#include "qkin/studies.hpp"

int main() {
    using namespace qkin;
    StudySpec s = default_spec("quadratic-convergence");
    s.quad.n_samples = 2000;
    auto f = reference_state(2, s.spatial_precision);
    auto J = reference_observable(s.spatial_precision);
    CollisionKernelConfig kc;
    kc.tolerance = 1e-4;
    QuadValue lim = boltzmann_pairing(f, J, s.t2, s.potential, kc);
    std::cout << "limit " << lim.value << " (+- " << lim.error << ")\n";
    for (double eps : s.epsilons) {
        EpsilonTermRequest r;
        r.term = TermId::IV_quadratic;
        r.epsilon = eps;
        r.t2 = s.t2;
        r.potential = s.potential;
        r.state = f;
        r.observable = J;
        r.quad = s.quad;
        MCEstimate e = eval_quadratic_term(r);
        std::cout << "eps " << eps << "  IV " << e.value << " +- " << e.std_error << "  gap "
                  << std::abs(e.value - lim.value) << "\n";
    }
}
