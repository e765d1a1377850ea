#pragma once

// Gauss-Legendre and probabilists' Gauss-Hermite rules via Golub-Welsch.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace qkin {

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};

namespace detail {

inline Rule1D golub_welsch(int n, bool hermite) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = hermite ? std::sqrt(double(k)) : k / std::sqrt(4.0 * k * k - 1.0);
        T(k, k - 1) = T(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    double mu0 = hermite ? 1.0 : 2.0;
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v * v;
    }
    // symmetrise to remove eigen-solver noise
    for (int i = 0; i < n / 2; ++i) {
        double xm = 0.5 * (r.x[n - 1 - i] - r.x[i]);
        double wm = 0.5 * (r.w[n - 1 - i] + r.w[i]);
        r.x[i] = -xm;
        r.x[n - 1 - i] = xm;
        r.w[i] = r.w[n - 1 - i] = wm;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

constexpr int kMaxCachedRule = 256;

inline const Rule1D& cached_rule(int n, bool hermite) {
    static std::array<Rule1D, kMaxCachedRule + 1> gl, gh;
    static std::array<bool, kMaxCachedRule + 1> gl_ok{}, gh_ok{};
    static std::mutex mu;
    if (n < 1 || n > kMaxCachedRule) throw std::invalid_argument("rule order out of range");
    std::lock_guard<std::mutex> lock(mu);
    auto& tab = hermite ? gh : gl;
    auto& ok = hermite ? gh_ok : gl_ok;
    if (!ok[n]) {
        tab[n] = golub_welsch(n, hermite);
        ok[n] = true;
    }
    return tab[n];
}

}  // namespace detail

// Nodes/weights on [-1,1]; weights sum to 2.
inline const Rule1D& gauss_legendre(int n) { return detail::cached_rule(n, false); }

// Nodes/weights for E[g(Z)], Z ~ N(0,1); weights sum to 1.
inline const Rule1D& gauss_hermite(int n) { return detail::cached_rule(n, true); }

// Composite Gauss-Legendre on [a,b] with `panels` equal panels of n nodes.
inline Rule1D composite_legendre(double a, double b, int n, int panels = 1) {
    const Rule1D& base = gauss_legendre(n);
    Rule1D r;
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        for (int i = 0; i < n; ++i) {
            r.x.push_back(lo + 0.5 * h * (base.x[i] + 1.0));
            r.w.push_back(0.5 * h * base.w[i]);
        }
    }
    return r;
}

// Product rule on S^2: Gauss-Legendre in cos(theta) times an equispaced azimuth.
// Exact for polynomials of degree <= 2*n_theta - 1 when n_phi >= 2*n_theta.
// Invariant under omega -> -omega for even n_phi.
struct SphereRule {
    std::vector<Eigen::Vector3d> nodes;
    std::vector<double> weights;
    int degree = 0;
};

inline SphereRule product_sphere_rule(int n_theta) {
    SphereRule s;
    int n_phi = 2 * n_theta;
    const Rule1D& gl = gauss_legendre(n_theta);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n_theta; ++i) {
        double ct = gl.x[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < n_phi; ++j) {
            double ph = (j + 0.5) * 2.0 * pi / n_phi;
            s.nodes.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
            s.weights.push_back(gl.w[i] * 2.0 * pi / n_phi);
        }
    }
    s.degree = 2 * n_theta - 1;
    return s;
}

}  // namespace qkin
