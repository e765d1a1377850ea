#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace qkin {

using Vec3 = Eigen::Vector3d;

// phi_hat(h) = A (c0 + |h|^{2n}) exp(-a |h|^2)
struct PairPotential {
    double amplitude = 1.0;
    int vanishing_order = 6;
    double width = 1.0;
    double offset = 0.0;

    // Radial profile; only |h|^2 enters, which keeps h -> -h bit-identical.
    double radial(double r2) const {
        return amplitude * (offset + std::pow(r2, vanishing_order)) * std::exp(-width * r2);
    }
    double at_origin() const { return vanishing_order == 0 ? amplitude * (offset + 1.0) : amplitude * offset; }
    PairPotential scaled(double lambda) const {
        PairPotential p = *this;
        p.amplitude *= lambda;
        return p;
    }
};

inline double eval_phi_hat(const PairPotential& p, const Vec3& h) { return p.radial(h.squaredNorm()); }

inline int check_vanishing_order(const PairPotential& p) {
    return p.offset == 0.0 ? 2 * p.vanishing_order : 0;
}

inline bool satisfies_theorem_class(const PairPotential& p) { return check_vanishing_order(p) >= 11; }

// Radius beyond which |phi_hat(h)| <= A (c0+1) K exp(-a|h|^2/2) holds with K = 1:
// (c0 + r^{2n}) e^{-a r^2/2} <= c0 + 1 once r^{2n} e^{-a r^2/2} <= 1.
inline double schwartz_radius(const PairPotential& p) {
    if (p.vanishing_order == 0) return 0.0;
    double r = std::sqrt(2.0 * p.vanishing_order / p.width);  // maximiser of r^{2n} e^{-a r^2/2}
    while (std::pow(r, 2 * p.vanishing_order) * std::exp(-0.5 * p.width * r * r) > 1.0) r *= 1.05;
    return std::max(r, 1.0);
}

}  // namespace qkin
