#pragma once

// Limiting collision operators: the Boltzmann pairing, the mean-field Q(f,f),
// the Uehling-Uhlenbeck kernel in sphere coordinates, the hierarchy terms
// Q1/Q2 and the cubic term M(f).
//
// Collision coordinates: for a direction omega and relative velocity
// w = v - v_*, write w = u omega + E eta with u = w . omega and E an
// orthonormal basis of the plane orthogonal to omega. Then dw = du d^2 eta for
// every fixed omega, and the post-collision velocities v - u omega,
// v_* + u omega conserve momentum and energy.

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "gaussian_integral.hpp"
#include "gaussian_states.hpp"
#include "potentials.hpp"
#include "rules.hpp"

namespace qkin {

using Mat3 = Eigen::Matrix3d;

struct StatisticsFlag {
    int theta = 1;  // +1 bosons, -1 fermions
};

struct CollisionKernelConfig {
    int sphere_n_theta = 10;  // product rule with n_theta x 2 n_theta nodes
    int u_nodes = 12;        // Gauss-Legendre nodes per panel
    int u_panels = 3;        // panels per half line
    int plane_nodes = 12;    // Gauss-Hermite nodes per axis for plane / box integrals of handles
    int radial_nodes = 12;
    int radial_panels = 4;
    Vec3 velocity_center = Vec3::Zero();  // support hint for function handles
    double velocity_scale = 1.0;
    double tolerance = 1e-6;  // absolute; compared with the doubled-resolution difference
    bool enforce_tolerance = true;

    CollisionKernelConfig doubled() const {
        CollisionKernelConfig c = *this;
        c.sphere_n_theta *= 2;
        c.u_nodes *= 2;
        c.plane_nodes *= 2;
        c.radial_nodes *= 2;
        return c;
    }
    SphereRule sphere() const { return product_sphere_rule(sphere_n_theta); }
};

struct QuadValue {
    double value = 0.0;
    double error = 0.0;
};

// Orthonormal basis (3x2) of the plane orthogonal to omega.
inline Eigen::Matrix<double, 3, 2> plane_basis(const Vec3& omega) {
    Vec3 a = std::abs(omega.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 e1 = (a - a.dot(omega) * omega).normalized();
    Vec3 e2 = omega.cross(e1);
    Eigen::Matrix<double, 3, 2> E;
    E << e1, e2;
    return E;
}

// |u| beyond which |u| phi_hat(u)^2 < 1e-17 of its peak.
inline double kernel_cutoff(const PairPotential& p) {
    auto k = [&](double u) { return std::abs(u) * std::pow(p.radial(u * u), 2); };
    double peak = 0.0, u = 0.0;
    for (double x = 0.01; x < 40.0; x += 0.01) peak = std::max(peak, k(x));
    for (u = 40.0; u > 0.01 && k(u) < 1e-17 * peak; u -= 0.01) {
    }
    return u + 0.5;
}

// Composite Gauss-Legendre on [-U, 0] and [0, U] (the |u| kink sits on a panel edge).
inline Rule1D split_u_rule(double U, int nodes, int panels) {
    Rule1D neg = composite_legendre(-U, 0.0, nodes, panels);
    Rule1D pos = composite_legendre(0.0, U, nodes, panels);
    neg.x.insert(neg.x.end(), pos.x.begin(), pos.x.end());
    neg.w.insert(neg.w.end(), pos.w.begin(), pos.w.end());
    return neg;
}

template <class F>
QuadValue with_refinement(const CollisionKernelConfig& cfg, F&& compute, const char* what) {
    double coarse = compute(cfg);
    double fine = compute(cfg.doubled());
    QuadValue q{fine, std::abs(fine - coarse)};
    if (cfg.enforce_tolerance && q.error > cfg.tolerance)
        throw ToleranceNotMet(std::string(what) + ": refinement difference " + std::to_string(q.error) +
                              " above tolerance " + std::to_string(cfg.tolerance));
    return q;
}

// ---- Boltzmann pairing ------------------------------------------------------------

namespace limit_detail {

// Collision coordinates for a two-particle pairing: z = (x1, V, eta), d = 8,
// v1 = V + w/2, v2 = V - w/2, w = u omega + E eta.
struct PairCoords {
    static constexpr int d = 8;
    Affine x1, V, w, v1, v2;
    PairCoords(const Vec3& omega, double u) {
        auto E = plane_basis(omega);
        x1 = Affine::var(d, 0);
        V = Affine::var(d, 3);
        Affine eta = Affine::var(d, 6, 2);
        w = Affine{Eigen::MatrixXd::Zero(3, d), Eigen::VectorXd(u * omega)};
        w.G.block<3, 2>(0, 6) = E;
        v1 = V + 0.5 * w;
        v2 = V - 0.5 * w;
        (void)eta;
    }
};

// int dx1 dV d^2eta  J(x1, VJ) f(x1, x1, v1, v2) for each J cosine term.
inline double pair_integral(const GaussianPhaseState& f, const TestObservable& J, const PairCoords& c,
                            const Affine& VJ) {
    double s = 0.0;
    for (const auto& jt : J.terms()) {
        if (jt.weight == 0.0) continue;
        QuadForm q(PairCoords::d);
        auto polys = add_observable_term(q, J, jt, c.x1, VJ);
        add_state_factor(q, f, {stack(c.x1, c.v1), stack(c.x1, c.v2)});
        s += integrate(q, polys).real();
    }
    return s;
}

}  // namespace limit_detail

// (1/8pi^2) int dx1 dv1 dv2 dS_omega [J(x1, v1 - u omega) - J(x1, v1)] |u| phi_hat(u omega)^2 f(t2, x1, x1, v1, v2)
inline QuadValue boltzmann_pairing(const GaussianPhaseState& f0, const TestObservable& J, double t2,
                                   const PairPotential& p, const CollisionKernelConfig& cfg) {
    if (f0.k() != 2) throw IncompatibleState("boltzmann_pairing needs k=2");
    GaussianPhaseState f = free_transport(f0, t2);
    const double U = kernel_cutoff(p);
    auto compute = [&](const CollisionKernelConfig& c) {
        SphereRule S = c.sphere();
        Rule1D ur = split_u_rule(U, c.u_nodes, c.u_panels);
        double total = 0.0;
        for (size_t i = 0; i < S.nodes.size(); ++i) {
            const Vec3& om = S.nodes[i];
            for (size_t k = 0; k < ur.x.size(); ++k) {
                double u = ur.x[k];
                double ker = std::abs(u) * std::pow(p.radial(u * u), 2);
                if (ker == 0.0) continue;
                limit_detail::PairCoords pc(om, u);
                Affine shifted = pc.v1 - Affine::constant(8, u * om);
                double gain = limit_detail::pair_integral(f, J, pc, shifted);
                double loss = limit_detail::pair_integral(f, J, pc, pc.v1);
                total += S.weights[i] * ur.w[k] * ker * (gain - loss);
            }
        }
        return total / (8 * kPi * kPi);
    };
    return with_refinement(cfg, compute, "boltzmann_pairing");
}

// ---- velocity-space functions --------------------------------------------------------

// Sum of weighted Gaussians c_i exp(-1/2 (v - m_i)^T P_i (v - m_i)); line and plane
// integrals are closed form.
struct GaussianMixture3 {
    struct Comp {
        double weight;
        Vec3 mean;
        Mat3 precision;
    };
    std::vector<Comp> comps;

    double operator()(const Vec3& v) const {
        double s = 0.0;
        for (const auto& c : comps) {
            Vec3 d = v - c.mean;
            s += c.weight * std::exp(-0.5 * d.dot(c.precision * d));
        }
        return s;
    }
    // int over eta in R^2 of f(v - E eta)
    double plane_integral(const Vec3& v, const Eigen::Matrix<double, 3, 2>& E) const {
        double s = 0.0;
        for (const auto& c : comps) {
            Vec3 d = v - c.mean;
            Eigen::Matrix2d A = E.transpose() * c.precision * E;
            Eigen::Vector2d b = E.transpose() * c.precision * d;
            double e = d.dot(c.precision * d) - b.dot(A.ldlt().solve(b));
            s += c.weight * 2 * kPi / std::sqrt(A.determinant()) * std::exp(-0.5 * e);
        }
        return s;
    }
    double mass() const {
        double s = 0.0;
        for (const auto& c : comps) s += c.weight * std::pow(2 * kPi, 1.5) / std::sqrt(c.precision.determinant());
        return s;
    }
};

inline GaussianMixture3 maxwellian(double mass, const Vec3& drift, double temperature) {
    double c = mass / std::pow(2 * kPi * temperature, 1.5);
    return {{{c, drift, Mat3::Identity() / temperature}}};
}

// A velocity distribution: any callable, optionally with a Gaussian-mixture form.
struct VelocityFunction {
    std::function<double(const Vec3&)> eval;
    std::optional<GaussianMixture3> mixture;

    VelocityFunction() = default;
    VelocityFunction(GaussianMixture3 m) : eval(m), mixture(std::move(m)) {}
    explicit VelocityFunction(std::function<double(const Vec3&)> f) : eval(std::move(f)) {}
    double operator()(const Vec3& v) const { return eval(v); }
};

namespace limit_detail {

// Gauss-Hermite-weighted 2D rule for int f(v - E eta) d^2 eta, centred at the point
// of the plane closest to `center`.
inline double plane_integral(const VelocityFunction& f, const Vec3& v, const Eigen::Matrix<double, 3, 2>& E,
                             const CollisionKernelConfig& c) {
    if (f.mixture) return f.mixture->plane_integral(v, E);
    const Rule1D& gh = gauss_hermite(c.plane_nodes);
    Eigen::Vector2d eta0 = E.transpose() * (v - c.velocity_center);
    const double s = c.velocity_scale;
    double tot = 0.0;
    for (size_t i = 0; i < gh.x.size(); ++i)
        for (size_t j = 0; j < gh.x.size(); ++j) {
            Eigen::Vector2d eta = eta0 + s * Eigen::Vector2d(gh.x[i], gh.x[j]);
            double wt = gh.w[i] * gh.w[j] * 2 * kPi * s * s * std::exp(0.5 * (gh.x[i] * gh.x[i] + gh.x[j] * gh.x[j]));
            tot += wt * f(v - E * eta);
        }
    return tot;
}

// int_0^r u phi_hat(u)^2 du in closed form, from (c0 + u^{2n})^2 = c0^2 + 2 c0 u^{2n} + u^{4n}.
inline double kernel_primitive(const PairPotential& p, double r) {
    const double a2 = 2.0 * p.width;
    const int n = p.vanishing_order;
    auto mom = [&](int m) {  // int_0^r u^{2m+1} e^{-2a u^2} du
        return boost::math::tgamma_lower(double(m + 1), a2 * r * r) / (2.0 * std::pow(a2, m + 1));
    };
    double A2 = p.amplitude * p.amplitude, c0 = p.offset;
    return A2 * (c0 * c0 * mom(0) + 2.0 * c0 * mom(n) + mom(2 * n));
}

}  // namespace limit_detail

// Loss frequency kernel: (1/8pi^2) int dS_omega |r cos| phi_hat(r cos)^2 = (1/(2 pi r)) int_0^r u phi_hat(u)^2 du.
inline double loss_kernel(const PairPotential& p, double r) {
    if (r < 1e-8) {
        // small-r limit of the primitive divided by r
        return p.amplitude * p.amplitude * std::pow(p.offset + (p.vanishing_order == 0 ? 1.0 : 0.0), 2) * r /
               (4 * kPi);
    }
    return limit_detail::kernel_primitive(p, r) / (2 * kPi * r);
}

// Q(f,f)(v) = (1/8pi^2) int dv1 dS |u| phi_hat(u omega)^2 [f(v') f(v1') - f(v) f(v1)]
inline QuadValue meanfield_Q(const VelocityFunction& f, const Vec3& v, const PairPotential& p,
                             const CollisionKernelConfig& cfg) {
    const double U = kernel_cutoff(p);
    auto compute = [&](const CollisionKernelConfig& c) {
        SphereRule S = c.sphere();
        Rule1D ur = split_u_rule(U, c.u_nodes, c.u_panels);
        double gain = 0.0;
        for (size_t i = 0; i < S.nodes.size(); ++i) {
            const Vec3& om = S.nodes[i];
            auto E = plane_basis(om);
            double line = 0.0;
            for (size_t k = 0; k < ur.x.size(); ++k) {
                double u = ur.x[k];
                double ker = std::abs(u) * std::pow(p.radial(u * u), 2);
                if (ker != 0.0) line += ur.w[k] * ker * f(v - u * om);
            }
            if (line != 0.0) gain += S.weights[i] * line * limit_detail::plane_integral(f, v, E, c);
        }
        gain /= 8 * kPi * kPi;
        double fv = f(v);
        double loss = 0.0;
        if (fv != 0.0) {
            // radial extent of v1 around v
            double far = (c.velocity_center - v).norm(), scale = c.velocity_scale;
            if (f.mixture) {
                far = 0.0;
                scale = 0.0;
                for (const auto& cp : f.mixture->comps) {
                    far = std::max(far, (cp.mean - v).norm());
                    scale = std::max(scale, 1.0 / std::sqrt(cp.precision.diagonal().minCoeff()));
                }
            }
            Rule1D rr = composite_legendre(0.0, far + 9.0 * scale, c.radial_nodes, c.radial_panels);
            for (size_t k = 0; k < rr.x.size(); ++k) {
                double r = rr.x[k], sh = 0.0;
                for (size_t i = 0; i < S.nodes.size(); ++i) sh += S.weights[i] * f(v + r * S.nodes[i]);
                loss += rr.w[k] * r * r * loss_kernel(p, r) * sh;
            }
            loss *= fv;
        }
        return gain - loss;
    };
    return with_refinement(cfg, compute, "meanfield_Q");
}

// ---- Uehling-Uhlenbeck ----------------------------------------------------------------

struct UUWeight {
    double weight;         // (1/8pi^2) [phi_hat(v' - v) + theta phi_hat(v' - v_*)]^2
    double measure;        // |v - v_*|, the factor carried by the parametrized cubic term
    double delta_measure;  // |u| / 2, what the two delta functions reduce to on the sphere
};

// Kernel on the collision manifold v' = v - u omega, v_*' = v_* + u omega, u = (v - v_*) . omega.
// With `literal_second_argument` the second potential argument is (v - v_*) + u omega
// instead of the energy-conserving v' - v_* = (v - v_*) - u omega.
inline UUWeight uu_W(const Vec3& v, const Vec3& v_star, const Vec3& omega, const PairPotential& p, int theta,
                     bool literal_second_argument = false) {
    Vec3 w = v - v_star;
    double u = w.dot(omega);
    Vec3 second = literal_second_argument ? Vec3(w + u * omega) : Vec3(w - u * omega);
    double a = eval_phi_hat(p, u * omega);
    double b = eval_phi_hat(p, second);
    double s = a + theta * b;
    return {s * s / (8 * kPi * kPi), w.norm(), 0.5 * std::abs(u)};
}

namespace limit_detail {

// Squared UU kernel bracket [phi(u) + theta phi(|eta|)]^2 split into three
// Gaussian-times-polynomial pieces in eta:
//   phi(u)^2,  2 theta phi(u) phi(E eta),  phi(E eta)^2.
template <class Body>
double uu_kernel_pieces(const PairPotential& p, int theta, double u, const Affine& wperp, Body&& body) {
    const double pu = p.radial(u * u);
    double s = 0.0;
    // piece 1: constant in eta
    if (pu != 0.0) s += pu * pu * body([&](QuadForm&) { return std::vector<PolyFactor>{}; });
    // piece 2
    if (pu != 0.0 && theta != 0)
        s += 2.0 * theta * pu * body([&](QuadForm& q) {
                 q.add_isotropic(wperp, p.width);
                 q.add_log_scalar(std::log(p.amplitude));
                 return std::vector<PolyFactor>{radial_poly(wperp, p.offset, p.vanishing_order)};
             });
    // piece 3
    if (theta != 0)
        s += body([&](QuadForm& q) {
            q.add_isotropic(wperp, 2.0 * p.width);
            q.add_log_scalar(2.0 * std::log(p.amplitude));
            PolyFactor r = radial_poly(wperp, p.offset, p.vanishing_order);
            PolyFn sq = [e = r.eval](const cd* y) {
                cd t = e(y);
                return t * t;
            };
            return std::vector<PolyFactor>{PolyFactor{wperp, 2 * r.degree, sq}};
        });
    return s;
}

}  // namespace limit_detail

// int dx1 dv1 J(x1, v1) Q_{1,1,2} f^{(2)}, with the delta functions of W reduced on the sphere.
inline QuadValue uu_hierarchy_Q1_pairing(const GaussianPhaseState& f, const TestObservable& J,
                                         const PairPotential& p, StatisticsFlag th,
                                         const CollisionKernelConfig& cfg) {
    if (f.k() != 2) throw IncompatibleState("Q1 pairing needs k=2");
    const double U = kernel_cutoff(p) + 4.0;
    auto compute = [&](const CollisionKernelConfig& c) {
        SphereRule S = c.sphere();
        Rule1D ur = split_u_rule(U, c.u_nodes, c.u_panels);
        double total = 0.0;
        for (size_t i = 0; i < S.nodes.size(); ++i) {
            const Vec3& om = S.nodes[i];
            for (size_t k = 0; k < ur.x.size(); ++k) {
                double u = ur.x[k];
                limit_detail::PairCoords pc(om, u);
                Affine wperp = pc.w - Affine::constant(8, u * om);
                Affine v1p = pc.v1 - Affine::constant(8, u * om), v2p = pc.v2 + Affine::constant(8, u * om);
                auto body = [&](auto&& kernel) {
                    double s = 0.0;
                    for (int sign : {1, -1})
                        for (const auto& jt : J.terms()) {
                            if (jt.weight == 0.0) continue;
                            QuadForm q(8);
                            auto polys = kernel(q);
                            auto jp = add_observable_term(q, J, jt, pc.x1, pc.v1);
                            polys.insert(polys.end(), jp.begin(), jp.end());
                            if (sign > 0)
                                add_state_factor(q, f, {stack(pc.x1, v1p), stack(pc.x1, v2p)});
                            else
                                add_state_factor(q, f, {stack(pc.x1, pc.v1), stack(pc.x1, pc.v2)});
                            s += sign * integrate(q, polys).real();
                        }
                    return s;
                };
                double val = limit_detail::uu_kernel_pieces(p, th.theta, u, wperp, body);
                total += S.weights[i] * ur.w[k] * 0.5 * std::abs(u) * val;
            }
        }
        return total / (8 * kPi * kPi);
    };
    return with_refinement(cfg, compute, "Q1 pairing");
}

// int dx1 dv1 J(x1, v1) Q_{2,1,3} f^{(3)}: prefactor 8 pi^3 theta and the four displayed
// bracket terms with the repeated spatial argument x1.
// `kernel_theta` fixes the theta inside W (0 means: same as th).
inline QuadValue uu_hierarchy_Q2_pairing(const GaussianPhaseState& f, const TestObservable& J,
                                         const PairPotential& p, StatisticsFlag th,
                                         const CollisionKernelConfig& cfg, int kernel_theta = 0) {
    if (f.k() != 3) throw IncompatibleState("Q2 pairing needs k=3");
    const int kt = kernel_theta == 0 ? th.theta : kernel_theta;
    const double U = kernel_cutoff(p) + 4.0;
    auto compute = [&](const CollisionKernelConfig& c) {
        SphereRule S = c.sphere();
        Rule1D ur = split_u_rule(U, c.u_nodes, c.u_panels);
        double total = 0.0;
        for (size_t i = 0; i < S.nodes.size(); ++i) {
            const Vec3& om = S.nodes[i];
            for (size_t k = 0; k < ur.x.size(); ++k) {
                double u = ur.x[k];
                limit_detail::PairCoords pc(om, u);
                Affine uo = Affine::constant(8, u * om);
                Affine wperp = pc.w - uo;
                Affine v1p = pc.v1 - uo, v2p = pc.v2 + uo;
                // {f(v1', v2', v1) + f(v1', v2', v2) - f(v1, v2, v1') - f(v1, v2, v2')}
                const std::vector<std::pair<int, std::array<const Affine*, 3>>> brackets = {
                    {1, {&v1p, &v2p, &pc.v1}},
                    {1, {&v1p, &v2p, &pc.v2}},
                    {-1, {&pc.v1, &pc.v2, &v1p}},
                    {-1, {&pc.v1, &pc.v2, &v2p}}};
                auto body = [&](auto&& kernel) {
                    double s = 0.0;
                    for (const auto& [sign, vs] : brackets)
                        for (const auto& jt : J.terms()) {
                            if (jt.weight == 0.0) continue;
                            QuadForm q(8);
                            auto polys = kernel(q);
                            auto jp = add_observable_term(q, J, jt, pc.x1, pc.v1);
                            polys.insert(polys.end(), jp.begin(), jp.end());
                            add_state_factor(q, f, {stack(pc.x1, *vs[0]), stack(pc.x1, *vs[1]), stack(pc.x1, *vs[2])});
                            s += sign * integrate(q, polys).real();
                        }
                    return s;
                };
                double val = limit_detail::uu_kernel_pieces(p, kt, u, wperp, body);
                total += S.weights[i] * ur.w[k] * 0.5 * std::abs(u) * val;
            }
        }
        return 8 * kPi * kPi * kPi * th.theta * total / (8 * kPi * kPi);
    };
    return with_refinement(cfg, compute, "Q2 pairing");
}

// Cubic bracket f' f_*' (f + f_*) - f f_* (f' + f_*').
inline double uu_cubic_bracket(double f, double fs, double fp, double fsp) {
    return fp * fsp * (f + fs) - f * fs * (fp + fsp);
}

// Full UU bracket f' f_*' (1 + c f)(1 + c f_*) - f f_* (1 + c f')(1 + c f_*'), c = 8 pi^3 theta.
inline double uu_full_bracket(double f, double fs, double fp, double fsp, int theta) {
    const double c = 8 * kPi * kPi * kPi * theta;
    return fp * fsp * (1 + c * f) * (1 + c * fs) - f * fs * (1 + c * fp) * (1 + c * fsp);
}

// M(f)(v) = pi theta int dv_* dS |v - v_*| [phi(v' - v) + theta phi(v' - v_*)]^2 x cubic bracket,
// on the energy-conserving collision manifold. v_* runs over a Gauss-Legendre box of
// half-width 8 velocity_scale around velocity_center.
inline QuadValue uu_M_cubic(const VelocityFunction& f, const Vec3& v, const PairPotential& p, int theta,
                            const CollisionKernelConfig& cfg, bool literal_second_argument = false) {
    auto compute = [&](const CollisionKernelConfig& c) {
        SphereRule S = c.sphere();
        const double L = 8.0 * c.velocity_scale;
        Rule1D ax = composite_legendre(-L, L, c.plane_nodes, 2);
        const double fv = f(v);
        double total = 0.0;
        for (size_t a = 0; a < ax.x.size(); ++a)
            for (size_t b = 0; b < ax.x.size(); ++b)
                for (size_t d = 0; d < ax.x.size(); ++d) {
                    Vec3 vs = c.velocity_center + Vec3(ax.x[a], ax.x[b], ax.x[d]);
                    double wt = ax.w[a] * ax.w[b] * ax.w[d];
                    double fs = f(vs);
                    double inner = 0.0;
                    for (size_t i = 0; i < S.nodes.size(); ++i) {
                        const Vec3& om = S.nodes[i];
                        UUWeight W = uu_W(v, vs, om, p, theta, literal_second_argument);
                        if (W.weight == 0.0) continue;
                        double u = (v - vs).dot(om);
                        double fp = f(v - u * om), fsp = f(vs + u * om);
                        inner += S.weights[i] * W.weight * uu_cubic_bracket(fv, fs, fp, fsp);
                    }
                    total += wt * (v - vs).norm() * inner;
                }
        // W carries 1/8pi^2; pi theta = 8 pi^3 theta / (8 pi^2)
        return kPi * theta * total * 8 * kPi * kPi;
    };
    return with_refinement(cfg, compute, "uu_M_cubic");
}

// Bose-Einstein / Fermi-Dirac form: f / (1 + c f) = exp(-alpha - beta |v - u|^2 / 2), c = 8 pi^3 theta.
inline VelocityFunction quantum_equilibrium(double alpha, double beta, const Vec3& drift, int theta) {
    const double c = 8 * kPi * kPi * kPi * theta;
    return VelocityFunction(std::function<double(const Vec3&)>([=](const Vec3& v) {
        double g = std::exp(-alpha - 0.5 * beta * (v - drift).squaredNorm());
        return g / (1.0 - c * g);
    }));
}

}  // namespace qkin
