#pragma once

// Duhamel terms II-V of the once-iterated hierarchy, paired with a test
// observable and evaluated in the post-substitution coordinates.
//
// Every estimator is a Monte Carlo average over a few outer variables
// ((s1, h2) for IV and V, t2 for II and III); all remaining variables are
// integrated in closed form by the complex Gaussian engine. Each integrand
// is built factor by factor from affine maps so the code can be read side by
// side with the displayed formulas.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gaussian_integral.hpp"
#include "gaussian_states.hpp"
#include "potentials.hpp"
#include "quadrature.hpp"

namespace qkin {

enum class TermId { II, III, IV_quadratic, V_cubic_1, V_cubic_2 };

inline std::string to_string(TermId t) {
    switch (t) {
        case TermId::II: return "II";
        case TermId::III: return "III";
        case TermId::IV_quadratic: return "IV_quadratic";
        case TermId::V_cubic_1: return "V_cubic_1";
        case TermId::V_cubic_2: return "V_cubic_2";
    }
    return "?";
}

struct EpsilonTermRequest {
    TermId term = TermId::IV_quadratic;
    double epsilon = 0.1;
    double t2 = 0.5;  // outer time: t2 for IV/V, t1 for II/III
    PairPotential potential;
    GaussianPhaseState state;  // data at time 0; the trial family is S(t) applied to it
    TestObservable observable;
    QuadratureConfig quad;
    // Superposition partners: the estimator integrates (state + extra_states)
    // against (observable + extra_observables).
    std::vector<GaussianPhaseState> extra_states;
    std::vector<TestObservable> extra_observables;
    // IV only: use sigma_2 instead of the displayed sigma_1 in the first
    // argument of J (the value the substitution actually produces).
    bool corrected_J_shift = false;
    // Gauss-Legendre nodes for the s1 integral inside each h2 sample (IV, V).
    int s1_nodes = 24;
};

// Gaussian form plus polynomial factors; integrand = exp(-1/2 z'Mz + b'z + c) * prod(poly).
struct IntegrandForm {
    QuadForm q;
    std::vector<PolyFactor> polys;
    double weight = 1.0;  // sign/σ weight applied after integration
};

inline cd eval_form_at(const IntegrandForm& f, const Eigen::VectorXd& z) {
    Eigen::VectorXcd zc = z.cast<cd>();
    cd e = -0.5 * (zc.transpose() * f.q.M * zc)(0, 0) + (f.q.b.transpose() * zc)(0, 0) + f.q.c;
    cd v = std::exp(e);
    for (const auto& p : f.polys) {
        Eigen::VectorXcd y = (p.y.G * z + p.y.g).cast<cd>();
        v *= p.eval(y.data());
    }
    return f.weight * v;
}

inline cd integrate_form(const IntegrandForm& f) { return f.weight * integrate(f.q, f.polys); }

namespace terms {

inline Eigen::VectorXd v3(const Vec3& h) { return Eigen::VectorXd(h); }

// phi_hat(y) for affine y: amplitude and Gaussian go into q, polynomial is returned.
inline PolyFactor add_phi_hat(QuadForm& q, const PairPotential& p, const Affine& y) {
    q.add_isotropic(y, p.width);
    q.add_log_scalar(std::log(p.amplitude));
    return radial_poly(y, p.offset, p.vanishing_order);
}

inline bool is_zero(const PairPotential& p) { return p.amplitude == 0.0; }

// ---- term IV: z = (x1, x2, v1, v2, xi1), d = 15 -------------------------------
inline std::vector<IntegrandForm> forms_IV(const PairPotential& p, const GaussianPhaseState& f_tau,
                                           const TestObservable& J, double eps, double s1, const Vec3& h2,
                                           bool corrected) {
    const int d = 15;
    Affine x1 = Affine::var(d, 0), x2 = Affine::var(d, 3), v1 = Affine::var(d, 6), v2 = Affine::var(d, 9),
           xi1 = Affine::var(d, 12);
    Eigen::VectorXd h = v3(h2);
    const double phi_h2 = eval_phi_hat(p, h2);
    std::vector<IntegrandForm> out;
    for (int sig1 : {1, -1})
        for (int sig2 : {1, -1})
            for (const auto& jt : J.terms()) {
                if (jt.weight == 0.0) continue;
                int sa = corrected ? sig2 : sig1;
                IntegrandForm F{QuadForm(d), {}, -sig1 * sig2 * phi_h2 / std::pow(2 * kPi, 6)};
                Affine h1 = eps * xi1 - h;  // eps xi1 - h2
                Affine XJ = x1 + eps * s1 * (v1 + 0.5 * sa * h);
                Affine VJ = v1 + 0.5 * sig2 * h + 0.5 * sig1 * h1;
                F.polys = add_observable_term(F.q, J, jt, XJ, VJ);
                F.polys.push_back(add_phi_hat(F.q, p, h1));
                F.q.add_bilinear_phase(xi1, x1 - x2);
                F.q.add_bilinear_phase(h1, s1 * (v1 - v2 + sig2 * h));
                add_state_factor(F.q, f_tau, {stack(x1, v1), stack(x2, v2)});
                out.push_back(std::move(F));
            }
    return out;
}

// ---- terms V: z = (x1, x2, x3, v1, v2, v3, xi1), d = 21 ------------------------
inline std::vector<IntegrandForm> forms_V(int variant, const PairPotential& p, const GaussianPhaseState& f_tau,
                                          const TestObservable& J, double eps, double s1, const Vec3& h2) {
    const int d = 21;
    Affine x1 = Affine::var(d, 0), x2 = Affine::var(d, 3), x3 = Affine::var(d, 6), v1 = Affine::var(d, 9),
           v2 = Affine::var(d, 12), v3v = Affine::var(d, 15), xi1 = Affine::var(d, 18);
    Eigen::VectorXd h = v3(h2);
    const double phi_h2 = eval_phi_hat(p, h2);
    std::vector<IntegrandForm> out;
    for (int sig1 : {1, -1})
        for (int sig2 : {1, -1})
            for (const auto& jt : J.terms()) {
                if (jt.weight == 0.0) continue;
                IntegrandForm F{QuadForm(d), {}, -sig1 * sig2 * phi_h2 / std::pow(2 * kPi, 6)};
                Affine h1 = eps * xi1 - h;
                Affine XJ, VJ, third_x;
                if (variant == 1) {
                    XJ = x1 + eps * s1 * (v1 + 0.5 * sig2 * h);
                    VJ = v1 + 0.5 * sig2 * h - 0.5 * sig1 * h + 0.5 * sig1 * eps * xi1;
                    F.q.add_bilinear_phase(xi1, x1 + eps * s1 * (v1 + 0.5 * sig2 * h) - x2 - eps * s1 * v2);
                    F.q.add_bilinear_phase(Affine::constant(d, -h), s1 * (v1 + 0.5 * sig2 * h) - s1 * v2);
                    third_x = x2 - eps * x3;
                } else {
                    XJ = x1 + eps * s1 * v1;
                    VJ = v1 + 0.5 * sig1 * h1;
                    F.q.add_bilinear_phase(xi1, x1 + eps * s1 * v1 - x2 - eps * s1 * (v2 + 0.5 * sig2 * h));
                    F.q.add_bilinear_phase(Affine::constant(d, -h), s1 * v1 - s1 * (v2 + 0.5 * sig2 * h));
                    third_x = 2.0 * x2 - x1 - eps * x3;
                }
                F.q.add_linear_phase(x3, h);
                F.polys = add_observable_term(F.q, J, jt, XJ, VJ);
                F.polys.push_back(add_phi_hat(F.q, p, h1));
                add_state_factor(F.q, f_tau, {stack(x1, v1), stack(x2, v2), stack(third_x, v3v)});
                out.push_back(std::move(F));
            }
    return out;
}

// ---- terms II (k = 2 diagnostic) and III: z = (x1, x2, v1, v2, h), d = 15 ------
// Integrand of <J, S(t1 - t2) A_{1,2} f_{t2}> without the outer prefactor.
inline std::vector<IntegrandForm> forms_A12(const PairPotential& p, const GaussianPhaseState& f_t2,
                                            const TestObservable& J, double eps, double t1, double t2) {
    const int d = 15;
    Affine x1 = Affine::var(d, 0), x2 = Affine::var(d, 3), v1 = Affine::var(d, 6), v2 = Affine::var(d, 9),
           h = Affine::var(d, 12);
    std::vector<IntegrandForm> out;
    for (int sig : {1, -1})
        for (const auto& jt : J.terms()) {
            if (jt.weight == 0.0) continue;
            IntegrandForm F{QuadForm(d), {}, double(sig) / std::pow(2 * kPi, 3)};
            F.polys = add_observable_term(F.q, J, jt, x1 + (t1 - t2) * v1, v1);
            F.polys.push_back(add_phi_hat(F.q, p, h));
            F.q.add_bilinear_phase((1.0 / eps) * h, x1 - x2);
            add_state_factor(F.q, f_t2, {stack(x1, v1 - 0.5 * sig * h), stack(x2, v2 + 0.5 * sig * h)});
            out.push_back(std::move(F));
        }
    return out;
}

template <class Forms>
cd sum_forms(const Forms& forms) {
    cd s = 0.0;
    for (const auto& F : forms) s += integrate_form(F);
    return s;
}

inline void check_k(const GaussianPhaseState& f, int k, const char* what) {
    if (f.k() != k) throw IncompatibleState(std::string(what) + " needs a k=" + std::to_string(k) + " state");
}

// Closed-form inner value of IV at fixed (s1, h2), summed over the superposition.
inline cd inner_IV(const EpsilonTermRequest& r, double s1, const Vec3& h2) {
    if (is_zero(r.potential)) return 0.0;
    cd s = 0.0;
    double tau = r.t2 - r.epsilon * s1;
    std::vector<const GaussianPhaseState*> fs{&r.state};
    for (const auto& g : r.extra_states) fs.push_back(&g);
    std::vector<const TestObservable*> js{&r.observable};
    for (const auto& J : r.extra_observables) js.push_back(&J);
    for (auto f : fs) {
        if (f->amplitude == 0.0) continue;
        GaussianPhaseState ft = free_transport(*f, tau);
        for (auto J : js) s += sum_forms(forms_IV(r.potential, ft, *J, r.epsilon, s1, h2, r.corrected_J_shift));
    }
    return s;
}

inline cd inner_V(const EpsilonTermRequest& r, int variant, double s1, const Vec3& h2) {
    if (is_zero(r.potential)) return 0.0;
    cd s = 0.0;
    double tau = r.t2 - r.epsilon * s1;
    std::vector<const GaussianPhaseState*> fs{&r.state};
    for (const auto& g : r.extra_states) fs.push_back(&g);
    std::vector<const TestObservable*> js{&r.observable};
    for (const auto& J : r.extra_observables) js.push_back(&J);
    for (auto f : fs) {
        if (f->amplitude == 0.0) continue;
        GaussianPhaseState ft = free_transport(*f, tau);
        for (auto J : js) s += sum_forms(forms_V(variant, r.potential, ft, *J, r.epsilon, s1, h2));
    }
    return s;
}

// <J, S(t1-t2) A_{1,2} f_{t2}> times -i; II multiplies by 1/sqrt(eps), III by N/sqrt(eps).
inline cd inner_A12(const EpsilonTermRequest& r, double t2) {
    if (is_zero(r.potential)) return 0.0;
    cd s = 0.0;
    std::vector<const GaussianPhaseState*> fs{&r.state};
    for (const auto& g : r.extra_states) fs.push_back(&g);
    std::vector<const TestObservable*> js{&r.observable};
    for (const auto& J : r.extra_observables) js.push_back(&J);
    for (auto f : fs) {
        if (f->amplitude == 0.0) continue;
        GaussianPhaseState ft = free_transport(*f, t2);
        for (auto J : js) s += sum_forms(forms_A12(r.potential, ft, *J, r.epsilon, r.t2, t2));
    }
    return cd(0.0, -1.0) * s;
}

// ---- proposals -----------------------------------------------------------------

// Mixture of radial shells in R^3 with density ∝ |h|^{2p} exp(-|h|^2 / (2 s^2)).
class ShellMixture {
public:
    struct Shell {
        int p;
        double s;
        double w;
    };
    explicit ShellMixture(std::vector<Shell> shells) : shells_(std::move(shells)) {
        double tot = 0.0;
        for (auto& c : shells_) tot += c.w;
        for (auto& c : shells_) {
            c.w /= tot;
            lognorm_.push_back(std::log(2 * kPi) + (c.p + 1.5) * std::log(2 * c.s * c.s) + std::lgamma(c.p + 1.5));
        }
    }
    Vec3 sample(Rng& rng) const {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double r = u(rng), acc = 0.0;
        size_t i = 0;
        for (; i + 1 < shells_.size(); ++i) {
            acc += shells_[i].w;
            if (r < acc) break;
        }
        const Shell& c = shells_[i];
        std::chi_squared_distribution<double> chi(3.0 + 2.0 * c.p);
        std::normal_distribution<double> nd;
        Vec3 dir(nd(rng), nd(rng), nd(rng));
        return dir.normalized() * (c.s * std::sqrt(chi(rng)));
    }
    double density(const Vec3& h) const {
        double r2 = h.squaredNorm(), d = 0.0;
        for (size_t i = 0; i < shells_.size(); ++i) {
            const Shell& c = shells_[i];
            double lp = c.p == 0 ? 0.0 : c.p * std::log(r2);
            d += c.w * std::exp(lp - 0.5 * r2 / (c.s * c.s) - lognorm_[i]);
        }
        return d;
    }

private:
    std::vector<Shell> shells_;
    std::vector<double> lognorm_;
};

// rms spread of v1 - v2 per axis for the state at time 0
inline double relative_velocity_spread(const GaussianPhaseState& f) {
    double var = 0.0;
    int cnt = 0;
    for (int j = 0; j < std::min(2, f.k()); ++j) {
        Mat6 S = f.blocks[j].precision.inverse();
        var += S.block<3, 3>(3, 3).trace() / 3.0;
        ++cnt;
    }
    if (cnt == 1) var *= 2.0;
    return std::sqrt(var);
}

// Scale at which the x3 integral concentrates h2: eps * sqrt(largest marginal x-precision of particle 3).
inline double cubic_h2_scale(const GaussianPhaseState& f, double eps) {
    Mat6 S = f.blocks[2].precision.inverse();
    Eigen::Matrix3d Px = S.block<3, 3>(0, 0).inverse();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Px);
    return eps * std::sqrt(es.eigenvalues()(2));
}

inline ShellMixture h2_proposal(const EpsilonTermRequest& r) {
    const int n = r.potential.vanishing_order;
    const double a = r.potential.width;
    if (r.term == TermId::IV_quadratic) {
        double s = 1.0 / (2.0 * std::sqrt(a));
        return ShellMixture({{2 * n, s, 0.6}, {n, s * std::sqrt(2.0), 0.25}, {0, 1.0 / std::sqrt(a), 0.15}});
    }
    double s = cubic_h2_scale(r.state, r.epsilon);
    return ShellMixture({{0, s, 0.3}, {n, s, 0.25}, {2 * n, s, 0.2}, {0, 0.5 * s, 0.1}, {0, 1.0, 0.15}});
}

}  // namespace terms

// ---- estimators ------------------------------------------------------------------

namespace terms {

// Conditional Monte Carlo: h2 is sampled, the s1 integral over [0, t2/eps] is
// done with composite Gauss-Legendre. The s1 integrand decays like
// exp(-s1^2 |h2|^2 sigma_w^2 / 2), which sets the cut-off.
inline cd s1_integral(const EpsilonTermRequest& r, const Vec3& h2, double sigma_w,
                      const std::function<cd(double, const Vec3&)>& inner) {
    const double T = r.t2 / r.epsilon;
    const double hn = h2.norm();
    const double U = hn > 0.0 ? std::min(T, 12.0 / (hn * sigma_w)) : T;
    Rule1D rule = composite_legendre(0.0, U, r.s1_nodes / 2, 2);
    cd s = 0.0;
    for (size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * inner(rule.x[i], h2);
    return s;
}

inline MCEstimate estimate_outer_s1_h2(const EpsilonTermRequest& r,
                                       const std::function<cd(double, const Vec3&)>& inner) {
    ShellMixture hp = h2_proposal(r);
    const double sw = relative_velocity_spread(r.state);
    return mc_integrate(
        [&](Rng& rng) -> cd {
            Vec3 h2 = hp.sample(rng);
            double q = hp.density(h2);
            if (!(q > 0.0)) return 0.0;
            return s1_integral(r, h2, sw, inner) / q;
        },
        r.quad);
}

}  // namespace terms

inline MCEstimate zero_estimate(const QuadratureConfig& c) {
    MCEstimate e;
    e.n_samples = c.n_samples;
    e.seed = c.seed;
    return e;
}

inline MCEstimate eval_quadratic_term(const EpsilonTermRequest& r) {
    terms::check_k(r.state, 2, "IV");
    for (const auto& g : r.extra_states) terms::check_k(g, 2, "IV");
    if (terms::is_zero(r.potential)) return zero_estimate(r.quad);
    return terms::estimate_outer_s1_h2(r, [&](double s1, const Vec3& h2) { return terms::inner_IV(r, s1, h2); });
}

inline MCEstimate eval_cubic_term(const EpsilonTermRequest& r) {
    if (r.term != TermId::V_cubic_1 && r.term != TermId::V_cubic_2)
        throw IncompatibleState("eval_cubic_term needs V_cubic_1 or V_cubic_2");
    terms::check_k(r.state, 3, "V");
    for (const auto& g : r.extra_states) terms::check_k(g, 3, "V");
    if (terms::is_zero(r.potential)) return zero_estimate(r.quad);
    int variant = r.term == TermId::V_cubic_1 ? 1 : 2;
    return terms::estimate_outer_s1_h2(
        r, [&](double s1, const Vec3& h2) { return terms::inner_V(r, variant, s1, h2); });
}

namespace terms {

inline MCEstimate estimate_A12(const EpsilonTermRequest& r, double prefactor) {
    const double t1 = r.t2;
    MCEstimate e = mc_integrate(
        [&](Rng& rng) -> cd {
            std::uniform_real_distribution<double> u(0.0, t1);
            return prefactor * t1 * inner_A12(r, u(rng));
        },
        r.quad);
    return e;
}

}  // namespace terms

// II: the operator sum is empty for k = 1; k = 2 gives the diagnostic pairing.
inline MCEstimate eval_term_II(const EpsilonTermRequest& r) {
    if (r.state.k() == 1) return zero_estimate(r.quad);
    terms::check_k(r.state, 2, "II diagnostic");
    if (terms::is_zero(r.potential)) return zero_estimate(r.quad);
    return terms::estimate_A12(r, 1.0 / std::sqrt(r.epsilon));
}

inline MCEstimate eval_term_III(const EpsilonTermRequest& r) {
    terms::check_k(r.state, 2, "III");
    if (terms::is_zero(r.potential)) return zero_estimate(r.quad);
    const double N = std::pow(r.epsilon, -3.0);
    return terms::estimate_A12(r, N / std::sqrt(r.epsilon));
}

inline MCEstimate eval_term(const EpsilonTermRequest& r) {
    switch (r.term) {
        case TermId::II: return eval_term_II(r);
        case TermId::III: return eval_term_III(r);
        case TermId::IV_quadratic: return eval_quadratic_term(r);
        default: return eval_cubic_term(r);
    }
}

// Limit of the cubic pairing: zero when phi_hat(0) = 0, otherwise the s1 integral over [0, inf) diverges.
inline double eval_cubic_limit_formula(int variant, const PairPotential& p, const GaussianPhaseState& f,
                                       const TestObservable& J) {
    if (variant != 1 && variant != 2) throw IncompatibleState("cubic variant must be 1 or 2");
    terms::check_k(f, 3, "cubic limit");
    (void)J;
    if (f.amplitude == 0.0 || p.amplitude == 0.0) return 0.0;
    if (p.at_origin() == 0.0) return 0.0;
    throw DivergentLimit("phi_hat(0) = " + std::to_string(p.at_origin()) + " makes the s1 integral infinite");
}

// V at each eps with phi_hat(0) != 0; weight clipping is on unless the caller set it.
inline std::vector<MCEstimate> necessity_scan(const PairPotential& p, const GaussianPhaseState& f,
                                              const TestObservable& J, const std::vector<double>& eps_list,
                                              double t2, QuadratureConfig cfg, TermId variant = TermId::V_cubic_1,
                                              bool clip = true) {
    if (p.at_origin() == 0.0) throw PotentialVanishes("necessity scan needs phi_hat(0) != 0");
    if (clip && cfg.clip_quantile >= 1.0) cfg.clip_quantile = 0.9999;
    std::vector<MCEstimate> out;
    for (double eps : eps_list) {
        EpsilonTermRequest r;
        r.term = variant;
        r.epsilon = eps;
        r.t2 = t2;
        r.potential = p;
        r.state = f;
        r.observable = J;
        r.quad = cfg;
        out.push_back(eval_cubic_term(r));
    }
    return out;
}

// Deterministic reference for criterion-style checks: composite Gauss-Legendre
// over the Monte Carlo variables with the same closed-form inner integral.
struct TermOracleSpec {
    int nodes = 8;
    int s1_panels = 2;
    int r_panels = 2;
    double r_max = 0.0;  // 0: chosen from the potential / concentration scale
};

inline OracleResult oracle_term(const EpsilonTermRequest& r, const TermOracleSpec& spec = {}) {
    if (r.term == TermId::II || r.term == TermId::III) {
        if (r.term == TermId::II && r.state.k() == 1) return {0.0, 0.0};
        terms::check_k(r.state, 2, "II/III oracle");
        double pre = (r.term == TermId::II ? 1.0 : std::pow(r.epsilon, -3.0)) / std::sqrt(r.epsilon);
        OracleConfig oc{{0.0}, {r.t2}, {spec.nodes}, {spec.s1_panels}};
        auto res = oracle_integrate([&](const Eigen::VectorXd& x) { return pre * terms::inner_A12(r, x(0)); }, oc);
        return res;
    }
    const int n = r.potential.vanishing_order;
    const double a = r.potential.width;
    double R = spec.r_max;
    if (R <= 0.0) {
        R = std::sqrt((n + 15.0) / a);
        if (r.term != TermId::IV_quadratic) R = std::min(R, 9.0 * terms::cubic_h2_scale(r.state, r.epsilon));
    }
    double T = r.t2 / r.epsilon;
    OracleConfig oc{{0.0, 0.0, -1.0, 0.0},
                    {T, R, 1.0, 2 * kPi},
                    {spec.nodes, spec.nodes, spec.nodes, spec.nodes},
                    {spec.s1_panels, spec.r_panels, 1, 1}};
    int variant = r.term == TermId::V_cubic_2 ? 2 : 1;
    auto f = [&](const Eigen::VectorXd& x) -> cd {
        double st = std::sqrt(std::max(0.0, 1.0 - x(2) * x(2)));
        Vec3 h2 = x(1) * Vec3(st * std::cos(x(3)), st * std::sin(x(3)), x(2));
        double jac = x(1) * x(1);
        cd v = r.term == TermId::IV_quadratic ? terms::inner_IV(r, x(0), h2) : terms::inner_V(r, variant, x(0), h2);
        return jac * v;
    };
    return oracle_integrate(f, oc);
}

}  // namespace qkin
