#pragma once

// Closed-form integrals of  poly(z) * exp(-1/2 z^T M z + b^T z + c)  over R^d
// with M complex symmetric, Re M positive definite.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "errors.hpp"
#include "rules.hpp"

namespace qkin {

using cd = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;

// y = G z + g, an affine map R^d -> R^m.
struct Affine {
    Eigen::MatrixXd G;
    Eigen::VectorXd g;

    int rows() const { return int(G.rows()); }
    int dim() const { return int(G.cols()); }

    static Affine var(int d, int offset, int len = 3) {
        Affine a{Eigen::MatrixXd::Zero(len, d), Eigen::VectorXd::Zero(len)};
        for (int i = 0; i < len; ++i) a.G(i, offset + i) = 1.0;
        return a;
    }
    static Affine constant(int d, const Eigen::VectorXd& c) {
        return Affine{Eigen::MatrixXd::Zero(c.size(), d), c};
    }
};

inline Affine operator+(Affine a, const Affine& b) {
    a.G += b.G;
    a.g += b.g;
    return a;
}
inline Affine operator-(Affine a, const Affine& b) {
    a.G -= b.G;
    a.g -= b.g;
    return a;
}
inline Affine operator*(double s, Affine a) {
    a.G *= s;
    a.g *= s;
    return a;
}
inline Affine operator+(Affine a, const Eigen::VectorXd& c) {
    a.g += c;
    return a;
}
inline Affine operator-(Affine a, const Eigen::VectorXd& c) {
    a.g -= c;
    return a;
}
inline Affine stack(const Affine& a, const Affine& b) {
    Affine r{Eigen::MatrixXd(a.rows() + b.rows(), a.dim()), Eigen::VectorXd(a.rows() + b.rows())};
    r.G << a.G, b.G;
    r.g << a.g, b.g;
    return r;
}

// Complex symmetric LDL^T without pivoting. Valid when Re M > 0, where every
// pivot is a Schur complement with positive real part.
struct ComplexLDLT {
    Eigen::MatrixXcd L;
    Eigen::VectorXcd D;

    explicit ComplexLDLT(const Eigen::MatrixXcd& M, bool require_positive_real = true) {
        const int n = int(M.rows());
        L = Eigen::MatrixXcd::Identity(n, n);
        D.resize(n);
        for (int j = 0; j < n; ++j) {
            cd s = M(j, j);
            for (int k = 0; k < j; ++k) s -= L(j, k) * L(j, k) * D(k);
            D(j) = s;
            if (require_positive_real && !(s.real() > 0.0))
                throw NonPositiveDefinite("pivot with nonpositive real part in complex LDL^T");
            if (std::abs(s) == 0.0) continue;
            for (int i = j + 1; i < n; ++i) {
                cd t = M(i, j);
                for (int k = 0; k < j; ++k) t -= L(i, k) * L(j, k) * D(k);
                L(i, j) = t / s;
            }
        }
    }

    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& B) const {
        Eigen::MatrixXcd Y = L.triangularView<Eigen::UnitLower>().solve(B);
        for (int i = 0; i < Y.rows(); ++i) Y.row(i) /= D(i);
        return L.transpose().triangularView<Eigen::UnitUpper>().solve(Y);
    }

    // sum of principal logs of the pivots
    cd log_det() const {
        cd s = 0.0;
        for (int i = 0; i < D.size(); ++i) s += std::log(D(i));
        return s;
    }
};

// A polynomial factor p(y), y = G z + g, of total degree <= `degree`.
// `eval` receives y.rows() complex coordinates.
using PolyFn = std::function<cd(const cd*)>;

struct PolyFactor {
    Affine y;
    int degree = 0;
    PolyFn eval;
};

// c0 + (y.y)^n, the polynomial part of the Fourier-side potential.
inline PolyFactor radial_poly(const Affine& y, double c0, int n) {
    const int m = y.rows();
    return PolyFactor{y, 2 * n, [c0, n, m](const cd* v) {
                          cd r2 = 0.0;
                          for (int i = 0; i < m; ++i) r2 += v[i] * v[i];
                          cd p = 1.0;
                          for (int i = 0; i < n; ++i) p *= r2;
                          return c0 + p;
                      }};
}

struct QuadForm {
    Eigen::MatrixXcd M;
    Eigen::VectorXcd b;
    cd c = 0.0;

    explicit QuadForm(int d) : M(Eigen::MatrixXcd::Zero(d, d)), b(Eigen::VectorXcd::Zero(d)) {}

    int dim() const { return int(b.size()); }

    // exp(-1/2 y^T P y) with y affine, P real symmetric
    void add_gaussian(const Affine& y, const Eigen::MatrixXd& P) {
        Eigen::MatrixXd PG = P * y.G;
        M += (y.G.transpose() * PG).cast<cd>();
        b -= (PG.transpose() * y.g).cast<cd>();
        c -= 0.5 * y.g.dot(P * y.g);
    }

    // exp(-a |y|^2)
    void add_isotropic(const Affine& y, double a) {
        M += (2.0 * a * (y.G.transpose() * y.G)).cast<cd>();
        b -= (2.0 * a * (y.G.transpose() * y.g)).cast<cd>();
        c -= a * y.g.squaredNorm();
    }

    // exp(i p . q)
    void add_bilinear_phase(const Affine& p, const Affine& q) {
        const cd I(0.0, 1.0);
        Eigen::MatrixXd S = p.G.transpose() * q.G;
        M -= I * (S + S.transpose()).cast<cd>();
        b += I * (p.G.transpose() * q.g + q.G.transpose() * p.g).cast<cd>();
        c += I * p.g.dot(q.g);
    }

    // exp(i kappa . y)
    void add_linear_phase(const Affine& y, const Eigen::VectorXd& kappa) {
        const cd I(0.0, 1.0);
        b += I * (y.G.transpose() * kappa).cast<cd>();
        c += I * kappa.dot(y.g);
    }

    void add_log_scalar(cd s) { c += s; }
};

// E[p(y)] for y ~ N(mu, C) with complex mean and complex symmetric covariance.
inline cd gaussian_poly_expectation(const Eigen::VectorXcd& mu, const Eigen::MatrixXcd& C, int degree,
                                    const PolyFn& p) {
    const int m = int(mu.size());
    if (degree <= 0) return p(mu.data());
    ComplexLDLT f(C, false);
    Eigen::MatrixXcd Lh = f.L;
    for (int j = 0; j < m; ++j) Lh.col(j) *= std::sqrt(f.D(j));
    const int nq = degree / 2 + 1;
    const Rule1D& gh = gauss_hermite(nq);
    std::vector<int> idx(m, 0);
    std::vector<cd> y(m);
    cd sum = 0.0;
    while (true) {
        double wt = 1.0;
        for (int k = 0; k < m; ++k) wt *= gh.w[idx[k]];
        for (int i = 0; i < m; ++i) {
            cd acc = mu(i);
            for (int k = 0; k <= i; ++k) acc += Lh(i, k) * gh.x[idx[k]];
            y[i] = acc;
        }
        sum += wt * p(y.data());
        int k = 0;
        while (k < m && ++idx[k] == nq) idx[k++] = 0;
        if (k == m) break;
    }
    return sum;
}

// Integral of prod(polys) * exp(-1/2 z^T M z + b^T z + c) over R^d.
inline cd integrate(const QuadForm& q, const std::vector<PolyFactor>& polys = {}) {
    const int d = q.dim();
    ComplexLDLT f(q.M);
    Eigen::VectorXcd mean = f.solve(q.b);
    cd logv = 0.5 * d * std::log(2.0 * kPi) - 0.5 * f.log_det() + 0.5 * (q.b.transpose() * mean)(0, 0) + q.c;
    cd pre = std::exp(logv);
    if (polys.empty()) return pre;

    int rows = 0, degree = 0;
    for (const auto& p : polys) {
        rows += p.y.rows();
        degree += p.degree;
    }
    Eigen::MatrixXd G(rows, d);
    Eigen::VectorXd g(rows);
    int r = 0;
    for (const auto& p : polys) {
        G.middleRows(r, p.y.rows()) = p.y.G;
        g.segment(r, p.y.rows()) = p.y.g;
        r += p.y.rows();
    }
    Eigen::MatrixXcd Gc = G.cast<cd>();
    Eigen::VectorXcd mu = Gc * mean + g.cast<cd>();
    Eigen::MatrixXcd C = Gc * f.solve(Gc.transpose());
    auto prod = [&polys](const cd* y) {
        cd v = 1.0;
        int o = 0;
        for (const auto& p : polys) {
            v *= p.eval(y + o);
            o += p.y.rows();
        }
        return v;
    };
    return pre * gaussian_poly_expectation(mu, C, degree, prod);
}

// Integrate out the variables listed in `eliminate`; the result is a form in
// the remaining variables (original order kept). Polynomial factors must not
// depend on eliminated variables.
inline QuadForm marginalize(const QuadForm& q, const std::vector<int>& eliminate) {
    const int d = q.dim();
    std::vector<bool> el(d, false);
    for (int i : eliminate) {
        if (i < 0 || i >= d) throw DimensionMismatch("marginalize index out of range");
        el[i] = true;
    }
    std::vector<int> keep, drop;
    for (int i = 0; i < d; ++i) (el[i] ? drop : keep).push_back(i);
    const int nk = int(keep.size()), ne = int(drop.size());
    Eigen::MatrixXcd Mee(ne, ne), Mke(nk, ne), Mkk(nk, nk);
    Eigen::VectorXcd be(ne), bk(nk);
    for (int i = 0; i < ne; ++i) {
        be(i) = q.b(drop[i]);
        for (int j = 0; j < ne; ++j) Mee(i, j) = q.M(drop[i], drop[j]);
    }
    for (int i = 0; i < nk; ++i) {
        bk(i) = q.b(keep[i]);
        for (int j = 0; j < ne; ++j) Mke(i, j) = q.M(keep[i], drop[j]);
        for (int j = 0; j < nk; ++j) Mkk(i, j) = q.M(keep[i], keep[j]);
    }
    ComplexLDLT f(Mee);
    Eigen::VectorXcd xe = f.solve(be);
    Eigen::MatrixXcd Xe = f.solve(Mke.transpose());
    QuadForm r(nk);
    r.M = Mkk - Mke * Xe;
    r.b = bk - Mke * xe;
    r.c = q.c + 0.5 * ne * std::log(2.0 * kPi) - 0.5 * f.log_det() + 0.5 * (be.transpose() * xe)(0, 0);
    return r;
}

}  // namespace qkin
