#pragma once

// Spatially homogeneous quantum Boltzmann and Uehling-Uhlenbeck equations on a
// uniform velocity grid with endpoints, v_i = -L + i h, h = 2L / (N - 1).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "limit_operators.hpp"

namespace qkin {

enum class Interpolation { LogTriquadratic, LogTricubic, Trilinear };

struct VelocityGridState {
    double L = 4.5;
    int N = 16;
    std::vector<double> values;
    double t = 0.0;

    double h() const { return 2.0 * L / (N - 1); }
    int index(int i, int j, int k) const { return (i * N + j) * N + k; }
    Vec3 node(int i, int j, int k) const { return Vec3(-L + i * h(), -L + j * h(), -L + k * h()); }
    Vec3 node(int idx) const { return node(idx / (N * N), (idx / N) % N, idx % N); }
    size_t size() const { return values.size(); }

    static VelocityGridState zeros(double L, int N) {
        if (N < 3 || N > 64) throw ConfigError("grid points per axis must be in [3, 64]");
        VelocityGridState s;
        s.L = L;
        s.N = N;
        s.values.assign(size_t(N) * N * N, 0.0);
        return s;
    }
    static VelocityGridState sample(double L, int N, const std::function<double(const Vec3&)>& f) {
        VelocityGridState s = zeros(L, N);
        for (size_t q = 0; q < s.size(); ++q) s.values[q] = f(s.node(int(q)));
        return s;
    }
    // trapezoidal weight of node idx
    double weight(int idx) const {
        auto w1 = [&](int i) { return (i == 0 || i == N - 1) ? 0.5 : 1.0; };
        double hh = h();
        return w1(idx / (N * N)) * w1((idx / N) % N) * w1(idx % N) * hh * hh * hh;
    }
};

struct SolverConfig {
    double dt = 0.05;
    int steps = 20;
    CollisionKernelConfig collision;
    StatisticsFlag statistics;
    bool uu = false;
    bool projection = false;
    Interpolation interpolation = Interpolation::LogTriquadratic;
    double stability_limit = 0.5;
    int threads = 0;

    SolverConfig() {
        collision.sphere_n_theta = 6;
        collision.u_nodes = 8;
        collision.plane_nodes = 8;
    }
};

struct Moments {
    double mass = 0.0;
    Vec3 momentum = Vec3::Zero();
    double energy = 0.0;  // (1/2) int |v|^2 f
};

inline Moments moments(const VelocityGridState& s) {
    Moments m;
    for (size_t q = 0; q < s.size(); ++q) {
        double w = s.weight(int(q)) * s.values[q];
        Vec3 v = s.node(int(q));
        m.mass += w;
        m.momentum += w * v;
        m.energy += 0.5 * w * v.squaredNorm();
    }
    return m;
}

struct HValue {
    double value = 0.0;
    int excluded_nodes = 0;
};

// Classical: int f log f. Quantum (diagnostic form, c = 8 pi^3 theta):
// int f log f - (1 + c f) log(1 + c f) / c.
inline HValue h_functional(const VelocityGridState& s, std::optional<int> theta = std::nullopt,
                           double floor = 1e-300) {
    HValue h;
    const double c = theta ? 8 * kPi * kPi * kPi * *theta : 0.0;
    for (size_t q = 0; q < s.size(); ++q) {
        double f = s.values[q];
        if (f <= floor) {
            if (f != 0.0) ++h.excluded_nodes;
            continue;
        }
        double e = f * std::log(f);
        if (c != 0.0) {
            double g = 1.0 + c * f;
            if (g <= 0.0) {
                ++h.excluded_nodes;
                continue;
            }
            e -= g * std::log(g) / c;
        }
        h.value += s.weight(int(q)) * e;
    }
    return h;
}

// Off-node evaluation of the grid function; zero outside [-L, L]^3.
// The log modes interpolate log(f / (1 + c f)); c = 0 is plain log f, c = 8 pi^3 theta
// makes the quantum equilibrium family exact just as c = 0 does for Maxwellians.
// Allowed excess of the interpolated log over the stencil maximum; a Gaussian peak
// between nodes needs well under 1.
inline constexpr double kLogOvershoot = 2.0;

class GridInterpolant {
public:
    GridInterpolant(const VelocityGridState& s, Interpolation mode, double c = 0.0) : s_(s), mode_(mode), c_(c) {
        if (mode_ != Interpolation::Trilinear) {
            logv_.resize(s.size());
            for (size_t q = 0; q < s.size(); ++q) {
                double f = std::max(s.values[q], 1e-300);
                logv_[q] = std::log(f) - (c_ != 0.0 ? std::log(std::max(1.0 + c_ * f, 1e-300)) : 0.0);
            }
        }
    }

    double operator()(const Vec3& v) const {
        const double h = s_.h(), L = s_.L;
        const int N = s_.N;
        double r[3];
        for (int a = 0; a < 3; ++a) {
            r[a] = (v[a] + L) / h;
            if (r[a] < 0.0 || r[a] > N - 1) return 0.0;
        }
        if (mode_ == Interpolation::Trilinear) {
            int i0[3];
            double fr[3];
            for (int a = 0; a < 3; ++a) {
                i0[a] = std::min(int(r[a]), N - 2);
                fr[a] = r[a] - i0[a];
            }
            double acc = 0.0;
            for (int di = 0; di < 2; ++di)
                for (int dj = 0; dj < 2; ++dj)
                    for (int dk = 0; dk < 2; ++dk) {
                        double w = (di ? fr[0] : 1 - fr[0]) * (dj ? fr[1] : 1 - fr[1]) * (dk ? fr[2] : 1 - fr[2]);
                        acc += w * s_.values[s_.index(i0[0] + di, i0[1] + dj, i0[2] + dk)];
                    }
            return acc;
        }
        if (mode_ == Interpolation::LogTricubic) {
            // 4-point Lagrange in each axis on log f
            int c0[3];
            double lw[3][4];
            for (int a = 0; a < 3; ++a) {
                c0[a] = std::clamp(int(std::floor(r[a])) - 1, 0, N - 4);
                double x = r[a] - c0[a];  // nodes at 0, 1, 2, 3
                lw[a][0] = -(x - 1) * (x - 2) * (x - 3) / 6.0;
                lw[a][1] = x * (x - 2) * (x - 3) / 2.0;
                lw[a][2] = -x * (x - 1) * (x - 3) / 2.0;
                lw[a][3] = x * (x - 1) * (x - 2) / 6.0;
            }
            double acc = 0.0, top = -std::numeric_limits<double>::infinity();
            for (int di = 0; di < 4; ++di)
                for (int dj = 0; dj < 4; ++dj) {
                    const double* row = &logv_[s_.index(c0[0] + di, c0[1] + dj, c0[2])];
                    acc += lw[0][di] * lw[1][dj] *
                           (lw[2][0] * row[0] + lw[2][1] * row[1] + lw[2][2] * row[2] + lw[2][3] * row[3]);
                    top = std::max({top, row[0], row[1], row[2], row[3]});
                }
            return finish(std::min(acc, top + kLogOvershoot));
        }
        // 3-point Lagrange in each axis on log f; exact for Gaussians
        int c[3];
        double lw[3][3];
        for (int a = 0; a < 3; ++a) {
            c[a] = std::clamp(int(std::lround(r[a])), 1, N - 2);
            double x = r[a] - c[a];
            lw[a][0] = 0.5 * x * (x - 1);
            lw[a][1] = 1 - x * x;
            lw[a][2] = 0.5 * x * (x + 1);
        }
        // capped near the stencil maximum: next to empty nodes the log data has cliffs
        double acc = 0.0, top = -std::numeric_limits<double>::infinity();
        for (int di = 0; di < 3; ++di)
            for (int dj = 0; dj < 3; ++dj) {
                double wij = lw[0][di] * lw[1][dj];
                int base = s_.index(c[0] - 1 + di, c[1] - 1 + dj, c[2] - 1);
                acc += wij * (lw[2][0] * logv_[base] + lw[2][1] * logv_[base + 1] + lw[2][2] * logv_[base + 2]);
                top = std::max({top, logv_[base], logv_[base + 1], logv_[base + 2]});
            }
        return finish(std::min(acc, top + kLogOvershoot));
    }

private:
    double finish(double acc) const {
        double g = std::exp(acc);
        return c_ == 0.0 ? g : g / std::max(1.0 - c_ * g, 1e-6);
    }

    const VelocityGridState& s_;
    Interpolation mode_;
    double c_;
    std::vector<double> logv_;
};

namespace solver_detail {

// Lambda(r) on [0, r_max] with cubic Lagrange interpolation; smooth, so a fine table
// is accurate to roundoff level.
class LossKernelTable {
public:
    LossKernelTable(const PairPotential& p, double r_max, int n = 8192) : dr_(r_max / n), p_(p) {
        vals_.resize(n + 4);
        for (int i = 0; i < n + 4; ++i) vals_[i] = loss_kernel(p, (i - 1) * dr_);
        vals_[0] = -vals_[2];  // Lambda is odd in r
    }
    double operator()(double r) const {
        double x = r / dr_ + 1.0;
        int i = int(x);
        if (i < 1 || i + 2 >= int(vals_.size())) return loss_kernel(p_, r);
        double t = x - i;
        const double* y = &vals_[i - 1];
        return y[1] + 0.5 * t * (y[2] - y[0] + t * (2 * y[0] - 5 * y[1] + 4 * y[2] - y[3] +
                                                     t * (3 * (y[1] - y[2]) + y[3] - y[0])));
    }

private:
    double dr_;
    PairPotential p_;
    std::vector<double> vals_;
};

template <class F>
void parallel_nodes(size_t n, int threads, F&& body) {
    int nt = threads > 0 ? threads : int(std::max(1u, std::thread::hardware_concurrency()));
    nt = int(std::min<size_t>(nt, n));
    if (nt <= 1) {
        for (size_t q = 0; q < n; ++q) body(q);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            for (size_t q = t; q < n; q += nt) body(q);
        });
    for (auto& th : pool) th.join();
}

// Upper hemisphere of the product rule with doubled weights; valid because every
// collision integrand depends on omega only through u omega and w_perp.
inline SphereRule hemisphere(int n_theta) {
    SphereRule full = product_sphere_rule(n_theta + (n_theta % 2));
    SphereRule h;
    for (size_t i = 0; i < full.nodes.size(); ++i)
        if (full.nodes[i].z() > 0.0) {
            h.nodes.push_back(full.nodes[i]);
            h.weights.push_back(2.0 * full.weights[i]);
        }
    h.degree = full.degree;
    return h;
}

struct Scale {
    Vec3 center;
    double sigma;
};

inline Scale state_scale(const VelocityGridState& s) {
    Moments m = moments(s);
    if (m.mass <= 0.0) return {Vec3::Zero(), 1.0};
    Vec3 u = m.momentum / m.mass;
    double T = (2.0 * m.energy / m.mass - u.squaredNorm()) / 3.0;
    return {u, std::sqrt(std::max(T, 1e-4))};
}

// Composite Gauss-Legendre on [a, b] with a panel edge at 0 when 0 lies inside.
inline Rule1D window_rule(double a, double b, int nodes, int panels) {
    if (a < 0.0 && b > 0.0) {
        Rule1D r = composite_legendre(a, 0.0, nodes, panels);
        Rule1D q = composite_legendre(0.0, b, nodes, panels);
        r.x.insert(r.x.end(), q.x.begin(), q.x.end());
        r.w.insert(r.w.end(), q.w.begin(), q.w.end());
        return r;
    }
    return composite_legendre(a, b, nodes, 2 * panels);
}

}  // namespace solver_detail

// Per-node collision frequency nu(v_i) = sum_j w_j Lambda(|v_i - v_j|) f_j by grid
// convolution; coarse, used only for the stability guard.
inline std::vector<double> loss_frequency(const VelocityGridState& s, const PairPotential& p, int threads = 0) {
    const int N = s.N;
    const double h = s.h();
    std::vector<double> lam(size_t(N) * N * N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            for (int c = 0; c < N; ++c) lam[(a * N + b) * N + c] = loss_kernel(p, h * std::sqrt(double(a * a + b * b + c * c)));
    std::vector<double> wf(s.size());
    for (size_t q = 0; q < s.size(); ++q) wf[q] = s.weight(int(q)) * s.values[q];
    std::vector<double> nu(s.size(), 0.0);
    solver_detail::parallel_nodes(s.size(), threads, [&](size_t q) {
        int i = int(q) / (N * N), j = (int(q) / N) % N, k = int(q) % N;
        double acc = 0.0;
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                const double* lrow = &lam[(std::abs(a - i) * N + std::abs(b - j)) * N];
                const double* frow = &wf[(a * N + b) * N];
                for (int c = 0; c < N; ++c) acc += lrow[std::abs(c - k)] * frow[c];
            }
        nu[q] = acc;
    });
    return nu;
}

// Q(f,f) at every node from the interpolated grid function: gain
// (1/8pi^2) sum_omega R_omega(v) P_omega(v), loss f(v) int Lambda(|v - v1|) f(v1) dv1.
// `F` evaluates f off the nodes; the grid values supply f at the nodes and the moments.
template <class Eval>
std::vector<double> rhs_qb_with(const VelocityGridState& s, const Eval& F, const PairPotential& p,
                                const SolverConfig& cfg) {
    std::vector<double> out(s.size(), 0.0);
    if (std::all_of(s.values.begin(), s.values.end(), [](double x) { return x == 0.0; })) return out;
    const SphereRule S = solver_detail::hemisphere(cfg.collision.sphere_n_theta);
    const auto sc = solver_detail::state_scale(s);
    const Rule1D& gh = gauss_hermite(cfg.collision.plane_nodes);
    const double U = kernel_cutoff(p);
    std::vector<Eigen::Matrix<double, 3, 2>> E;
    for (const auto& om : S.nodes) E.push_back(plane_basis(om));
    const Rule1D ur = split_u_rule(U, cfg.collision.u_nodes, cfg.collision.u_panels);
    // radial shells around the state's mean for the loss integral; weights absorb f(v1)
    std::vector<std::pair<Vec3, double>> shell;
    {
        const SphereRule full = product_sphere_rule(cfg.collision.sphere_n_theta);
        Rule1D rr = composite_legendre(0.0, 9.0 * sc.sigma, cfg.collision.radial_nodes, cfg.collision.radial_panels);
        for (size_t k = 0; k < rr.x.size(); ++k)
            for (size_t i = 0; i < full.nodes.size(); ++i)
                shell.emplace_back(sc.center + rr.x[k] * full.nodes[i], rr.w[k] * rr.x[k] * rr.x[k] * full.weights[i]);
        for (auto& [v1, w] : shell) w *= F(v1);
    }
    const solver_detail::LossKernelTable lam(p, 2.0 * std::sqrt(3.0) * s.L + 10.0 * sc.sigma);
    solver_detail::parallel_nodes(s.size(), cfg.threads, [&](size_t q) {
        const Vec3 v = s.node(int(q));
        double gain = 0.0;
        for (size_t i = 0; i < S.nodes.size(); ++i) {
            const Vec3& om = S.nodes[i];
            double R = 0.0;
            for (size_t k = 0; k < ur.x.size(); ++k) {
                double u = ur.x[k];
                double ker = std::abs(u) * std::pow(p.radial(u * u), 2);
                if (ker != 0.0) R += ur.w[k] * ker * F(v - u * om);
            }
            if (R == 0.0) continue;
            Eigen::Vector2d eta0 = E[i].transpose() * (v - sc.center);
            double P = 0.0;
            for (size_t x = 0; x < gh.x.size(); ++x)
                for (size_t y = 0; y < gh.x.size(); ++y) {
                    Eigen::Vector2d eta = eta0 + sc.sigma * Eigen::Vector2d(gh.x[x], gh.x[y]);
                    double w = gh.w[x] * gh.w[y] * 2 * kPi * sc.sigma * sc.sigma *
                               std::exp(0.5 * (gh.x[x] * gh.x[x] + gh.x[y] * gh.x[y]));
                    P += w * F(v - E[i] * eta);
                }
            gain += S.weights[i] * R * P;
        }
        double nu = 0.0;
        if (s.values[q] != 0.0)
            for (const auto& [v1, w] : shell) nu += w * lam((v - v1).norm());
        out[q] = gain / (8 * kPi * kPi) - s.values[q] * nu;
    });
    return out;
}

// Uehling-Uhlenbeck right-hand side with the full quantum bracket and kernel
// (1/8pi^2) |u| [phi_hat(u omega) + theta phi_hat(w_perp)]^2 over (omega, u, eta).
// theta = 0 drops the quantum terms and reproduces Q(f,f).
template <class Eval>
std::vector<double> rhs_uu_with(const VelocityGridState& s, const Eval& F, const PairPotential& p, int theta,
                                const SolverConfig& cfg) {
    std::vector<double> out(s.size(), 0.0);
    if (std::all_of(s.values.begin(), s.values.end(), [](double x) { return x == 0.0; })) return out;
    const SphereRule S = solver_detail::hemisphere(cfg.collision.sphere_n_theta);
    const auto sc = solver_detail::state_scale(s);
    const Rule1D& gh = gauss_hermite(cfg.collision.plane_nodes);
    const double U = kernel_cutoff(p);
    std::vector<Eigen::Matrix<double, 3, 2>> E;
    for (const auto& om : S.nodes) E.push_back(plane_basis(om));
    solver_detail::parallel_nodes(s.size(), cfg.threads, [&](size_t q) {
        const Vec3 v = s.node(int(q));
        const double f = s.values[q];
        double acc = 0.0;
        for (size_t i = 0; i < S.nodes.size(); ++i) {
            const Vec3& om = S.nodes[i];
            double u0 = om.dot(v - sc.center);
            double a = std::max(-U, u0 - 7.0 * sc.sigma), b = std::min(U, u0 + 7.0 * sc.sigma);
            if (a >= b) continue;
            Rule1D ur = solver_detail::window_rule(a, b, cfg.collision.u_nodes, cfg.collision.u_panels);
            std::vector<double> fp(ur.x.size()), pu(ur.x.size());
            for (size_t k = 0; k < ur.x.size(); ++k) {
                fp[k] = F(v - ur.x[k] * om);
                pu[k] = p.radial(ur.x[k] * ur.x[k]);
            }
            Eigen::Vector2d eta0 = E[i].transpose() * (v - sc.center);
            for (size_t x = 0; x < gh.x.size(); ++x)
                for (size_t y = 0; y < gh.x.size(); ++y) {
                    Eigen::Vector2d eta = eta0 + sc.sigma * Eigen::Vector2d(gh.x[x], gh.x[y]);
                    double wq = gh.w[x] * gh.w[y] * 2 * kPi * sc.sigma * sc.sigma *
                                std::exp(0.5 * (gh.x[x] * gh.x[x] + gh.x[y] * gh.x[y]));
                    Vec3 wp = E[i] * eta;
                    double phw = p.radial(eta.squaredNorm());
                    double fsp = F(v - wp);
                    double line = 0.0;
                    for (size_t k = 0; k < ur.x.size(); ++k) {
                        double u = ur.x[k];
                        double ker = pu[k] + theta * phw;
                        ker = std::abs(u) * ker * ker;
                        if (ker == 0.0) continue;
                        double fs = F(v - u * om - wp);
                        double br = theta == 0 ? fp[k] * fsp - f * fs : uu_full_bracket(f, fs, fp[k], fsp, theta);
                        line += ur.w[k] * ker * br;
                    }
                    acc += S.weights[i] * wq * line;
                }
        }
        out[q] = acc / (8 * kPi * kPi);
    });
    return out;
}

inline std::vector<double> rhs_qb(const VelocityGridState& s, const PairPotential& p, const SolverConfig& cfg) {
    return rhs_qb_with(s, GridInterpolant(s, cfg.interpolation), p, cfg);
}

inline std::vector<double> rhs_uu(const VelocityGridState& s, const PairPotential& p, int theta,
                                  const SolverConfig& cfg) {
    return rhs_uu_with(s, GridInterpolant(s, cfg.interpolation, 8 * kPi * kPi * kPi * theta), p, theta, cfg);
}

struct StepLog {
    double clamped_mass = 0.0;
    double projection_norm = 0.0;
    double lipschitz = 0.0;
};

// Rough Lipschitz bound of the right-hand side: twice the largest collision frequency,
// enhanced by the quantum factor.
inline double lipschitz_estimate(const VelocityGridState& s, const PairPotential& p, const SolverConfig& cfg) {
    auto nu = loss_frequency(s, p, cfg.threads);
    double m = *std::max_element(nu.begin(), nu.end());
    if (cfg.uu) {
        double fmax = *std::max_element(s.values.begin(), s.values.end());
        m *= std::pow(1.0 + 8 * kPi * kPi * kPi * fmax, 2);
    }
    return 2.0 * m;
}

// Correction f -> f (1 + b(v) . lambda) with b = (1, v, |v|^2 / 2), chosen so that
// {mass, momentum, energy} = target. Multiplicative, so empty nodes stay empty.
inline double project_moments(VelocityGridState& s, const Moments& target) {
    using Vec5 = Eigen::Matrix<double, 5, 1>;
    auto basis = [](const Vec3& v) {
        Vec5 b;
        b << 1.0, v.x(), v.y(), v.z(), 0.5 * v.squaredNorm();
        return b;
    };
    Eigen::Matrix<double, 5, 5> G = Eigen::Matrix<double, 5, 5>::Zero();
    Vec5 cur = Vec5::Zero();
    for (size_t q = 0; q < s.size(); ++q) {
        Vec5 b = basis(s.node(int(q)));
        double w = s.weight(int(q)) * s.values[q];
        G += w * b * b.transpose();
        cur += w * b;
    }
    Vec5 tgt;
    tgt << target.mass, target.momentum, target.energy;
    Vec5 lam = G.ldlt().solve(tgt - cur);
    double norm = 0.0;
    for (size_t q = 0; q < s.size(); ++q) {
        double d = s.values[q] * basis(s.node(int(q))).dot(lam);
        s.values[q] += d;
        norm += d * d;
    }
    return std::sqrt(norm);
}

inline std::vector<double> rhs(const VelocityGridState& s, const PairPotential& p, const SolverConfig& cfg) {
    return cfg.uu ? rhs_uu(s, p, cfg.statistics.theta, cfg) : rhs_qb(s, p, cfg);
}

// Classical fourth-order Runge-Kutta step, optional moment projection, positivity clamp.
inline VelocityGridState step(const VelocityGridState& s, const SolverConfig& cfg, const PairPotential& p,
                              StepLog* log = nullptr) {
    StepLog lg;
    if (cfg.dt == 0.0) {
        if (log) *log = lg;
        return s;
    }
    lg.lipschitz = lipschitz_estimate(s, p, cfg);
    if (cfg.dt * lg.lipschitz > cfg.stability_limit)
        throw StabilityViolation("dt * Lipschitz estimate = " + std::to_string(cfg.dt * lg.lipschitz) +
                                 " exceeds " + std::to_string(cfg.stability_limit));
    auto axpy = [&](double a, const std::vector<double>& k) {
        VelocityGridState r = s;
        for (size_t q = 0; q < r.size(); ++q) r.values[q] += a * k[q];
        return r;
    };
    const double dt = cfg.dt;
    auto k1 = rhs(s, p, cfg);
    auto k2 = rhs(axpy(0.5 * dt, k1), p, cfg);
    auto k3 = rhs(axpy(0.5 * dt, k2), p, cfg);
    auto k4 = rhs(axpy(dt, k3), p, cfg);
    VelocityGridState out = s;
    for (size_t q = 0; q < out.size(); ++q) out.values[q] += dt / 6.0 * (k1[q] + 2 * k2[q] + 2 * k3[q] + k4[q]);
    out.t = s.t + dt;
    if (cfg.projection) lg.projection_norm = project_moments(out, moments(s));
    for (size_t q = 0; q < out.size(); ++q)
        if (out.values[q] < 0.0) {
            lg.clamped_mass += out.weight(int(q)) * -out.values[q];
            out.values[q] = 0.0;
        }
    if (log) *log = lg;
    return out;
}

struct TrajectoryRow {
    double t;
    Moments m;
    double H;
    double clamped_mass;
};

inline TrajectoryRow trajectory_row(const VelocityGridState& s, const SolverConfig& cfg, double clamped) {
    auto h = cfg.uu ? h_functional(s, cfg.statistics.theta) : h_functional(s);
    return {s.t, moments(s), h.value, clamped};
}

inline std::vector<TrajectoryRow> run_solver(VelocityGridState s, const SolverConfig& cfg, const PairPotential& p,
                                             VelocityGridState* final_state = nullptr) {
    std::vector<TrajectoryRow> rows{trajectory_row(s, cfg, 0.0)};
    for (int n = 0; n < cfg.steps; ++n) {
        StepLog lg;
        s = step(s, cfg, p, &lg);
        rows.push_back(trajectory_row(s, cfg, lg.clamped_mass));
    }
    if (final_state) *final_state = s;
    return rows;
}

inline void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path);
    os.precision(17);
    os << "t,mass,momentum_x,momentum_y,momentum_z,energy,H,clamped_mass\n";
    for (const auto& r : rows)
        os << r.t << ',' << r.m.mass << ',' << r.m.momentum.x() << ',' << r.m.momentum.y() << ','
           << r.m.momentum.z() << ',' << r.m.energy << ',' << r.H << ',' << r.clamped_mass << '\n';
}

inline double l1_distance(const VelocityGridState& a, const VelocityGridState& b) {
    double d = 0.0;
    for (size_t q = 0; q < a.size(); ++q) d += a.weight(int(q)) * std::abs(a.values[q] - b.values[q]);
    return d;
}

}  // namespace qkin
