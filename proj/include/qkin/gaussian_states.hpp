#pragma once

// Gaussian k-particle phase-space states, test observables and the
// estimate record shared by the Monte Carlo estimators.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "gaussian_integral.hpp"

namespace qkin {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct GaussianBlock {
    Vec6 mean = Vec6::Zero();
    Mat6 precision = Mat6::Identity();
};

struct GaussianPhaseState {
    std::vector<GaussianBlock> blocks;
    double amplitude = 1.0;

    int k() const { return int(blocks.size()); }
};

inline void require_spd(const Eigen::MatrixXd& P, const char* what) {
    Eigen::MatrixXd S = 0.5 * (P + P.transpose());
    if ((S - P).norm() > 1e-12 * (1.0 + P.norm()))
        throw NonPositiveDefinite(std::string(what) + " is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw NonPositiveDefinite(std::string(what) + " failed Cholesky");
}

inline double block_mass(const GaussianBlock& b) {
    return std::pow(2.0 * kPi, 3.0) / std::sqrt(b.precision.determinant());
}

inline double mass(const GaussianPhaseState& f) {
    double m = f.amplitude;
    for (const auto& b : f.blocks) m *= block_mass(b);
    return m;
}

// normalize = true picks Z so that every particle factor has unit mass.
inline GaussianPhaseState make_tensor_state(const std::vector<GaussianBlock>& blocks, double Z = 1.0,
                                            bool normalize = false) {
    if (blocks.empty()) throw IncompatibleState("k must be at least 1");
    for (const auto& b : blocks) require_spd(b.precision, "block precision");
    GaussianPhaseState f{blocks, Z};
    if (normalize) {
        f.amplitude = 1.0;
        f.amplitude = 1.0 / mass(f);
    }
    return f;
}

inline GaussianPhaseState scaled(GaussianPhaseState f, double lambda) {
    f.amplitude *= lambda;
    return f;
}

// f evaluated at (points_j + shifts_j), j = 1..k; each entry is (x_j, v_j).
inline double eval_state(const GaussianPhaseState& f, const std::vector<Vec6>& points,
                         const std::vector<Vec6>& shifts = {}) {
    if (int(points.size()) != f.k() || (!shifts.empty() && int(shifts.size()) != f.k()))
        throw DimensionMismatch("eval_state expects one point (and shift) per particle");
    double e = 0.0;
    for (int j = 0; j < f.k(); ++j) {
        Vec6 d = points[j] - f.blocks[j].mean;
        if (!shifts.empty()) d += shifts[j];
        e += d.dot(f.blocks[j].precision * d);
    }
    return f.amplitude * std::exp(-0.5 * e);
}

// (S(t) f)(x, v) = f(x - t v, v)
inline GaussianPhaseState free_transport(const GaussianPhaseState& f, double t) {
    if (t == 0.0) return f;
    Mat6 B = Mat6::Identity();
    B.block<3, 3>(0, 3) = -t * Eigen::Matrix3d::Identity();
    Mat6 Binv = Mat6::Identity();
    Binv.block<3, 3>(0, 3) = t * Eigen::Matrix3d::Identity();
    GaussianPhaseState g = f;
    for (auto& b : g.blocks) {
        Mat6 P = B.transpose() * b.precision * B;
        b.precision = 0.5 * (P + P.transpose());
        b.mean = Binv * b.mean;
        Eigen::SelfAdjointEigenSolver<Mat6> es(b.precision);
        double lo = es.eigenvalues()(0), hi = es.eigenvalues()(5);
        if (!(lo > 0.0) || hi / lo > 1e15)
            throw NonPositiveDefinite("free transport produced an ill-conditioned precision");
    }
    return g;
}

// Adds the factor  f(zeta_1, ..., zeta_k)  to q, where zeta_j are affine 6-vectors.
inline void add_state_factor(QuadForm& q, const GaussianPhaseState& f, const std::vector<Affine>& zeta) {
    if (int(zeta.size()) != f.k()) throw DimensionMismatch("state factor arity");
    for (int j = 0; j < f.k(); ++j) q.add_gaussian(zeta[j] - f.blocks[j].mean, f.blocks[j].precision);
    q.add_log_scalar(std::log(f.amplitude));
}

struct PhaseIntegralResult {
    cd amplitude;
    QuadForm remaining;
};

// Integrates exp(-1/2 (z-mean)^T P (z-mean) + i theta . z_y) over the y block of z.
inline PhaseIntegralResult linear_phase_integral(const Eigen::VectorXd& mean, const Eigen::MatrixXd& P,
                                                 const std::vector<int>& y_idx, const Eigen::VectorXd& theta) {
    const int d = int(mean.size());
    if (P.rows() != d || P.cols() != d || int(theta.size()) != int(y_idx.size()))
        throw DimensionMismatch("linear_phase_integral shapes");
    Eigen::MatrixXd Pyy(y_idx.size(), y_idx.size());
    for (size_t i = 0; i < y_idx.size(); ++i)
        for (size_t j = 0; j < y_idx.size(); ++j) Pyy(i, j) = P(y_idx[i], y_idx[j]);
    require_spd(Pyy, "y-block precision");
    QuadForm q(d);
    Affine z{Eigen::MatrixXd::Identity(d, d), -mean};
    q.add_gaussian(z, P);
    Affine y{Eigen::MatrixXd::Zero(y_idx.size(), d), Eigen::VectorXd::Zero(y_idx.size())};
    for (size_t i = 0; i < y_idx.size(); ++i) y.G(i, y_idx[i]) = 1.0;
    q.add_linear_phase(y, theta);
    QuadForm r = marginalize(q, y_idx);
    cd amp = std::exp(r.c);
    r.c = 0.0;
    return {amp, r};
}

inline cd linear_phase_integral(const Eigen::VectorXd& mean, const Eigen::MatrixXd& P,
                                const Eigen::VectorXd& theta) {
    std::vector<int> all(mean.size());
    for (int i = 0; i < int(mean.size()); ++i) all[i] = i;
    return linear_phase_integral(mean, P, all, theta).amplitude;
}

// E|He_m(Y)|, Y ~ N(0,1): sum of |F| jumps between consecutive roots of He_m,
// with F = -He_{m-1} phi an antiderivative of He_m phi.
inline double hermite_abs_moment(int m) {
    if (m == 0) return 1.0;
    auto he = [](int n, double x) {
        double a = 1.0, b = x;
        if (n == 0) return a;
        for (int k = 1; k < n; ++k) {
            double c = x * b - k * a;
            a = b;
            b = c;
        }
        return b;
    };
    auto F = [&](double x) { return -he(m - 1, x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); };
    const Rule1D& roots = gauss_hermite(m);
    double s = std::abs(F(roots.x.front())) + std::abs(F(roots.x.back()));
    for (int i = 0; i + 1 < m; ++i) s += std::abs(F(roots.x[i + 1]) - F(roots.x[i]));
    return s;
}

// sum_j sum_{m=0..4} (||d^m_{x_j} f||_1 + ||d^m_{v_j} f||_1), where d^m_{x_j} for
// m >= 1 is read as the sum over the three pure axis derivatives.
inline double w41_norm(const GaussianPhaseState& f) {
    const double total = std::abs(mass(f));
    double s = 0.0;
    for (const auto& b : f.blocks) {
        s += 2.0 * total;
        for (int m = 1; m <= 4; ++m)
            for (int a = 0; a < 6; ++a) s += total * std::pow(b.precision(a, a), 0.5 * m) * hermite_abs_moment(m);
    }
    return s;
}

// J(x, v) = A * exp(-1/2 (z-mean)^T P (z-mean)) * [cos(kappa . z)] * [poly(v)], z = (x, v).
// P may be positive semidefinite (P = 0 gives a constant envelope).
struct TestObservable {
    Vec6 mean = Vec6::Zero();
    Mat6 precision = Mat6::Identity();
    Vec6 kappa = Vec6::Zero();
    double amplitude = 1.0;
    PolyFn velocity_poly;  // receives (v_x, v_y, v_z)
    int velocity_poly_degree = 0;

    bool modulated() const { return kappa.squaredNorm() > 0.0; }

    double eval(const Eigen::Vector3d& x, const Eigen::Vector3d& v) const {
        Vec6 z;
        z << x, v;
        Vec6 d = z - mean;
        double val = amplitude * std::exp(-0.5 * d.dot(precision * d));
        if (modulated()) val *= std::cos(kappa.dot(z));
        if (velocity_poly) {
            Eigen::Vector3cd vc = v.cast<cd>();
            val *= velocity_poly(vc.data()).real();
        }
        return val;
    }

    // cos splits into two linear phases
    struct Term {
        double weight;
        Vec6 kappa;
    };
    std::vector<Term> terms() const {
        if (!modulated()) return {{amplitude, Vec6::Zero()}};
        return {{0.5 * amplitude, kappa}, {0.5 * amplitude, -kappa}};
    }
};

// Adds J evaluated at (X, V) to q for one cosine term; returns poly factors to attach.
inline std::vector<PolyFactor> add_observable_term(QuadForm& q, const TestObservable& J,
                                                   const TestObservable::Term& term, const Affine& X,
                                                   const Affine& V) {
    Affine z = stack(X, V);
    q.add_gaussian(z - J.mean, J.precision);
    if (term.kappa.squaredNorm() > 0.0) q.add_linear_phase(z, term.kappa);
    q.add_log_scalar(std::log(std::abs(term.weight)) + (term.weight < 0 ? cd(0.0, kPi) : cd(0.0)));
    if (J.velocity_poly) return {PolyFactor{V, J.velocity_poly_degree, J.velocity_poly}};
    return {};
}

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    double imag_value = 0.0;
    double imag_stderr = 0.0;
    double clip_bias_bound = 0.0;
};

// JSON: {k, blocks:[{mean:[6], precision:[36]}], amplitude}
inline void to_json(nlohmann::json& j, const GaussianPhaseState& f) {
    j = nlohmann::json{{"k", f.k()}, {"amplitude", f.amplitude}, {"blocks", nlohmann::json::array()}};
    for (const auto& b : f.blocks) {
        std::vector<double> m(b.mean.data(), b.mean.data() + 6);
        std::vector<double> p(36);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) p[6 * r + c] = b.precision(r, c);
        j["blocks"].push_back({{"mean", m}, {"precision", p}});
    }
}

inline void from_json(const nlohmann::json& j, GaussianPhaseState& f) {
    f.blocks.clear();
    f.amplitude = j.at("amplitude").get<double>();
    for (const auto& jb : j.at("blocks")) {
        auto m = jb.at("mean").get<std::vector<double>>();
        auto p = jb.at("precision").get<std::vector<double>>();
        if (m.size() != 6 || p.size() != 36) throw DimensionMismatch("state block JSON sizes");
        GaussianBlock b;
        for (int i = 0; i < 6; ++i) b.mean(i) = m[i];
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) b.precision(r, c) = p[6 * r + c];
        require_spd(b.precision, "block precision");
        f.blocks.push_back(b);
    }
    if (j.contains("k") && j.at("k").get<int>() != f.k()) throw DimensionMismatch("k disagrees with blocks");
}

}  // namespace qkin
