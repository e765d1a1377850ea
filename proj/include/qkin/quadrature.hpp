#pragma once

// Seeded, sharded Monte Carlo with importance sampling, and a deterministic
// composite Gauss-Legendre oracle.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "gaussian_states.hpp"
#include "rules.hpp"

namespace qkin {

using Rng = std::mt19937_64;

// Substream for one shard; depends only on (seed, shard).
inline Rng shard_rng(std::uint64_t seed, int shard) {
    std::seed_seq seq{std::uint32_t(seed & 0xffffffffu), std::uint32_t(seed >> 32), std::uint32_t(shard),
                      0x9e3779b9u};
    return Rng(seq);
}

// Sampling distributions with explicit densities.
struct Proposal {
    virtual ~Proposal() = default;
    virtual int dim() const = 0;
    virtual Eigen::VectorXd sample(Rng& rng) const = 0;
    virtual double density(const Eigen::VectorXd& x) const = 0;
};

class GaussianProposal : public Proposal {
public:
    GaussianProposal(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) : mean_(std::move(mean)) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw NonPositiveDefinite("proposal covariance");
        L_ = llt.matrixL();
        Linv_ = L_.inverse();
        double logdet = 2.0 * L_.diagonal().array().log().sum();
        lognorm_ = -0.5 * mean_.size() * std::log(2.0 * kPi) - 0.5 * logdet;
    }
    int dim() const override { return int(mean_.size()); }
    Eigen::VectorXd sample(Rng& rng) const override {
        std::normal_distribution<double> nd;
        Eigen::VectorXd z(dim());
        for (int i = 0; i < dim(); ++i) z(i) = nd(rng);
        return mean_ + L_ * z;
    }
    double density(const Eigen::VectorXd& x) const override {
        Eigen::VectorXd u = Linv_ * (x - mean_);
        return std::exp(lognorm_ - 0.5 * u.squaredNorm());
    }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd L_, Linv_;
    double lognorm_;
};

// rate * exp(-rate x) on [0, upper), renormalised when upper is finite.
class ExponentialProposal : public Proposal {
public:
    explicit ExponentialProposal(double rate, double upper = std::numeric_limits<double>::infinity())
        : rate_(rate), upper_(upper), mass_(std::isfinite(upper) ? -std::expm1(-rate * upper) : 1.0) {
        if (!(rate > 0.0)) throw ConfigError("exponential proposal rate must be positive");
    }
    int dim() const override { return 1; }
    Eigen::VectorXd sample(Rng& rng) const override {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double x = -std::log1p(-u(rng) * mass_) / rate_;
        return Eigen::VectorXd::Constant(1, std::min(x, std::nextafter(upper_, 0.0)));
    }
    double density(const Eigen::VectorXd& x) const override {
        if (x(0) < 0.0 || x(0) >= upper_) return 0.0;
        return rate_ * std::exp(-rate_ * x(0)) / mass_;
    }

private:
    double rate_, upper_, mass_;
};

class MixtureProposal : public Proposal {
public:
    MixtureProposal(std::vector<std::shared_ptr<const Proposal>> parts, std::vector<double> weights)
        : parts_(std::move(parts)), w_(std::move(weights)) {
        double s = 0.0;
        for (double w : w_) s += w;
        for (double& w : w_) w /= s;
    }
    int dim() const override { return parts_.front()->dim(); }
    Eigen::VectorXd sample(Rng& rng) const override {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double r = u(rng), c = 0.0;
        for (size_t i = 0; i + 1 < parts_.size(); ++i) {
            c += w_[i];
            if (r < c) return parts_[i]->sample(rng);
        }
        return parts_.back()->sample(rng);
    }
    double density(const Eigen::VectorXd& x) const override {
        double d = 0.0;
        for (size_t i = 0; i < parts_.size(); ++i) d += w_[i] * parts_[i]->density(x);
        return d;
    }

private:
    std::vector<std::shared_ptr<const Proposal>> parts_;
    std::vector<double> w_;
};

struct QuadratureConfig {
    long long n_samples = 100000;
    int shard_count = 8;
    std::uint64_t seed = 12345;
    double max_rel_stderr = std::numeric_limits<double>::infinity();
    double clip_quantile = 1.0;  // < 1 enables importance-weight clipping
    int threads = 0;             // 0: hardware concurrency
};

namespace detail {

struct ShardAcc {
    long long n = 0;
    double mr = 0.0, m2r = 0.0, mi = 0.0, m2i = 0.0;
    void push(cd w) {
        ++n;
        double dr = w.real() - mr;
        mr += dr / n;
        m2r += dr * (w.real() - mr);
        double di = w.imag() - mi;
        mi += di / n;
        m2i += di * (w.imag() - mi);
    }
    void merge(const ShardAcc& o) {
        if (o.n == 0) return;
        long long nn = n + o.n;
        double dr = o.mr - mr, di = o.mi - mi;
        mr += dr * o.n / nn;
        mi += di * o.n / nn;
        m2r += o.m2r + dr * dr * double(n) * o.n / nn;
        m2i += o.m2i + di * di * double(n) * o.n / nn;
        n = nn;
    }
};

}  // namespace detail

// `draw` returns one importance-weighted sample (integrand / proposal density).
inline MCEstimate mc_integrate(const std::function<cd(Rng&)>& draw, const QuadratureConfig& cfg) {
    if (cfg.shard_count < 1 || cfg.n_samples < 2 || cfg.n_samples % cfg.shard_count != 0)
        throw ConfigError("n_samples must be a positive multiple of shard_count");
    auto t0 = std::chrono::steady_clock::now();
    const long long per = cfg.n_samples / cfg.shard_count;
    const bool clip = cfg.clip_quantile < 1.0;
    std::vector<std::vector<cd>> raw(cfg.shard_count);
    std::vector<detail::ShardAcc> acc(cfg.shard_count);

    auto run_shard = [&](int s) {
        Rng rng = shard_rng(cfg.seed, s);
        if (clip) raw[s].reserve(per);
        for (long long i = 0; i < per; ++i) {
            cd w = draw(rng);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = 0.0;
            if (clip)
                raw[s].push_back(w);
            else
                acc[s].push(w);
        }
    };
    int nt = cfg.threads > 0 ? cfg.threads : int(std::max(1u, std::thread::hardware_concurrency()));
    nt = std::min(nt, cfg.shard_count);
    if (nt <= 1) {
        for (int s = 0; s < cfg.shard_count; ++s) run_shard(s);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (int s = t; s < cfg.shard_count; s += nt) run_shard(s);
            });
        for (auto& th : pool) th.join();
    }

    MCEstimate est;
    if (clip) {
        std::vector<double> mags;
        mags.reserve(cfg.n_samples);
        for (const auto& r : raw)
            for (cd w : r) mags.push_back(std::abs(w));
        size_t q = std::min(mags.size() - 1, size_t(cfg.clip_quantile * double(mags.size())));
        std::nth_element(mags.begin(), mags.begin() + q, mags.end());
        double thr = mags[q], excess = 0.0;
        for (int s = 0; s < cfg.shard_count; ++s)
            for (cd w : raw[s]) {
                double a = std::abs(w);
                if (a > thr) {
                    excess += a - thr;
                    w *= thr / a;
                }
                acc[s].push(w);
            }
        est.clip_bias_bound = excess / double(cfg.n_samples);
    }
    detail::ShardAcc tot;
    for (const auto& a : acc) tot.merge(a);
    est.value = tot.mr;
    est.imag_value = tot.mi;
    est.std_error = std::sqrt(tot.m2r / double(tot.n - 1) / double(tot.n));
    est.imag_stderr = std::sqrt(tot.m2i / double(tot.n - 1) / double(tot.n));
    est.n_samples = tot.n;
    est.seed = cfg.seed;
    est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (std::isfinite(cfg.max_rel_stderr) && est.std_error > cfg.max_rel_stderr * std::abs(est.value))
        throw NonConvergentEstimate("relative stderr " + std::to_string(est.std_error / std::abs(est.value)) +
                                    " above cap");
    return est;
}

// Integrand plus proposal form.
inline MCEstimate mc_integrate(const std::function<cd(const Eigen::VectorXd&)>& f, const Proposal& proposal,
                               const QuadratureConfig& cfg) {
    return mc_integrate(
        [&](Rng& rng) -> cd {
            Eigen::VectorXd x = proposal.sample(rng);
            double p = proposal.density(x);
            return p > 0.0 ? f(x) / p : cd(0.0);
        },
        cfg);
}

struct OracleConfig {
    std::vector<double> lo, hi;
    std::vector<int> nodes;   // Gauss-Legendre nodes per panel, >= 8
    std::vector<int> panels;  // optional, defaults to 1
};

struct OracleResult {
    cd value;
    double error;
};

constexpr int kOracleMaxDim = 7;

namespace detail {

inline cd tensor_gl(const std::function<cd(const Eigen::VectorXd&)>& f, const OracleConfig& c, int mult) {
    const int d = int(c.lo.size());
    std::vector<Rule1D> rules;
    for (int i = 0; i < d; ++i) {
        int pan = c.panels.empty() ? 1 : c.panels[i];
        rules.push_back(composite_legendre(c.lo[i], c.hi[i], c.nodes[i] * mult, pan));
    }
    std::vector<size_t> idx(d, 0);
    Eigen::VectorXd x(d);
    cd sum = 0.0;
    while (true) {
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            x(i) = rules[i].x[idx[i]];
            w *= rules[i].w[idx[i]];
        }
        sum += w * f(x);
        int i = 0;
        while (i < d && ++idx[i] == rules[i].x.size()) idx[i++] = 0;
        if (i == d) break;
    }
    return sum;
}

}  // namespace detail

// Deterministic box quadrature; error = |value - value at doubled nodes|.
inline OracleResult oracle_integrate(const std::function<cd(const Eigen::VectorXd&)>& f, const OracleConfig& c) {
    const int d = int(c.lo.size());
    if (d > kOracleMaxDim) throw DimensionTooHigh("oracle dimension " + std::to_string(d) + " exceeds 7");
    if (d < 1 || int(c.hi.size()) != d || int(c.nodes.size()) != d || (!c.panels.empty() && int(c.panels.size()) != d))
        throw ConfigError("oracle config shape");
    for (int n : c.nodes)
        if (n < 8) throw ConfigError("oracle needs at least 8 nodes per axis");
    cd base = detail::tensor_gl(f, c, 1);
    cd fine = detail::tensor_gl(f, c, 2);
    return {fine, std::abs(fine - base)};
}

}  // namespace qkin
