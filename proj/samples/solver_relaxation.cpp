// Relaxes two drifting Maxwellians under the classical homogeneous equation
// and prints moments and the H functional per step.

#include <iostream>

#include "qkin/studies.hpp"

int main() {
    using namespace qkin;
    StudySpec s = default_spec("solve-qb");
    s.grid_points = 12;
    s.steps = 5;
    SolverConfig cfg = solver_config(s, false);
    cfg.collision.sphere_n_theta = 4;
    auto state = VelocityGridState::sample(s.grid_extent, s.grid_points, bimodal_velocity_data());
    for (const auto& r : run_solver(state, cfg, s.potential))
        std::cout << "t " << r.t << "  mass " << r.m.mass << "  energy " << r.m.energy << "  H " << r.H << "\n";
}
