#include <catch2/catch.hpp>

#include <qkin/studies.hpp>

using namespace qkin;

namespace {

EpsilonTermRequest base_request(TermId term, double eps, long long n) {
    StudySpec s = default_spec("cubic-vanishing");
    EpsilonTermRequest r = study_detail::request(s, term, eps, term == TermId::IV_quadratic ? 2 : 3);
    if (term == TermId::II || term == TermId::III) r.state = reference_state(2, s.spatial_precision);
    r.quad.n_samples = n;
    return r;
}

// Small, tight configuration where the deterministic oracle is affordable.
EpsilonTermRequest shrunk_request(TermId term) {
    EpsilonTermRequest r = base_request(term, 0.25, 4000);
    int k = term == TermId::V_cubic_1 || term == TermId::V_cubic_2 ? 3 : 2;
    std::vector<GaussianBlock> b(k);
    for (int j = 0; j < k; ++j) {
        b[j].precision = 2.0 * Mat6::Identity();
        b[j].mean(3) = 0.3 * (j == 0 ? 1 : -1);
    }
    r.state = make_tensor_state(b, 1.0, true);
    r.observable.mean.setZero();
    r.observable.precision = Mat6::Identity();
    r.t2 = 0.4;
    return r;
}

bool within(double a, double b, double sigma) { return std::abs(a - b) <= 3.0 * sigma; }

// Change of variables z_old = A z_new + c on a Gaussian form with polynomial factors.
IntegrandForm substitute(const IntegrandForm& F, const Eigen::MatrixXd& A, const Eigen::VectorXd& c) {
    IntegrandForm G{QuadForm(int(A.cols())), {}, F.weight * std::abs(A.determinant())};
    Eigen::MatrixXcd Ac = A.cast<cd>();
    Eigen::VectorXcd cc = c.cast<cd>();
    G.q.M = Ac.transpose() * F.q.M * Ac;
    G.q.b = Ac.transpose() * (F.q.b - F.q.M * cc);
    G.q.c = F.q.c + (F.q.b.transpose() * cc)(0, 0) - 0.5 * (cc.transpose() * F.q.M * cc)(0, 0);
    for (const auto& p : F.polys) G.polys.push_back(PolyFactor{Affine{p.y.G * A, p.y.G * c + p.y.g}, p.degree, p.eval});
    return G;
}

}  // namespace

TEST_CASE("exact zeros", "[hierarchy]") {
    auto r = base_request(TermId::II, 0.2, 400);
    r.state = reference_state(1, 0.2);
    REQUIRE(eval_term_II(r).value == 0.0);

    for (TermId t : {TermId::III, TermId::IV_quadratic, TermId::V_cubic_1}) {
        auto z = base_request(t, 0.2, 400);
        z.potential.amplitude = 0.0;
        auto e = eval_term(z);
        REQUIRE(e.value == 0.0);
        REQUIRE(e.std_error == 0.0);
    }
    auto j0 = base_request(TermId::IV_quadratic, 0.2, 400);
    j0.observable.amplitude = 0.0;
    REQUIRE(eval_quadratic_term(j0).value == 0.0);
    auto j3 = base_request(TermId::III, 0.2, 400);
    j3.observable.amplitude = 0.0;
    REQUIRE(eval_term_III(j3).value == 0.0);
    auto f0 = base_request(TermId::V_cubic_2, 0.2, 400);
    f0.state.amplitude = 0.0;
    REQUIRE(eval_cubic_term(f0).value == 0.0);
}

TEST_CASE("particle-count guards", "[hierarchy]") {
    auto r = base_request(TermId::IV_quadratic, 0.2, 400);
    r.state = reference_state(3, 0.2);
    REQUIRE_THROWS_AS(eval_quadratic_term(r), IncompatibleState);
    auto v = base_request(TermId::V_cubic_1, 0.2, 400);
    v.state = reference_state(2, 0.2);
    REQUIRE_THROWS_AS(eval_cubic_term(v), IncompatibleState);
    auto w = base_request(TermId::IV_quadratic, 0.2, 400);
    REQUIRE_THROWS_AS(eval_cubic_term(w), IncompatibleState);
    auto t3 = base_request(TermId::III, 0.2, 400);
    t3.state = reference_state(3, 0.2);
    REQUIRE_THROWS_AS(eval_term_III(t3), IncompatibleState);
}

TEST_CASE("cubic limit formula and necessity guard", "[hierarchy]") {
    auto f = reference_state(3, 0.2);
    auto J = reference_observable(0.2);
    PairPotential p;
    REQUIRE(eval_cubic_limit_formula(1, p, f, J) == 0.0);
    REQUIRE(eval_cubic_limit_formula(2, p, f, J) == 0.0);
    PairPotential c = p;
    c.offset = 1.0;
    REQUIRE_THROWS_AS(eval_cubic_limit_formula(1, c, f, J), DivergentLimit);
    REQUIRE_THROWS_AS(eval_cubic_limit_formula(2, c, f, J), DivergentLimit);
    REQUIRE(eval_cubic_limit_formula(1, c, scaled(f, 0.0), J) == 0.0);
    REQUIRE_THROWS_AS(necessity_scan(p, f, J, {0.1}, 0.5, QuadratureConfig{}), PotentialVanishes);
}

TEST_CASE("estimators are bit reproducible", "[hierarchy][property]") {
    auto r = base_request(TermId::IV_quadratic, 0.2, 400);
    auto a = eval_quadratic_term(r), b = eval_quadratic_term(r);
    REQUIRE(a.value == b.value);
    REQUIRE(a.std_error == b.std_error);
    auto v = base_request(TermId::V_cubic_1, 0.2, 400);
    REQUIRE(eval_cubic_term(v).value == eval_cubic_term(v).value);
}

TEST_CASE("pairings are real within error", "[hierarchy][property]") {
    for (TermId t : {TermId::IV_quadratic, TermId::V_cubic_1, TermId::V_cubic_2, TermId::III}) {
        auto e = eval_term(base_request(t, 0.2, 800));
        REQUIRE(std::abs(e.imag_value) <= 3.0 * e.imag_stderr + 1e-12 * std::abs(e.value));
    }
}

TEST_CASE("quadratic in the potential", "[hierarchy][property]") {
    for (TermId t : {TermId::IV_quadratic, TermId::V_cubic_1}) {
        auto r = base_request(t, 0.2, 800);
        auto base = eval_term(r);
        r.potential = r.potential.scaled(2.0);
        auto dbl = eval_term(r);
        REQUIRE(within(dbl.value, 4.0 * base.value, std::hypot(dbl.std_error, 4.0 * base.std_error)));
        // common random numbers: the proposal does not depend on the amplitude
        REQUIRE(dbl.value == Approx(4.0 * base.value).epsilon(1e-10));
    }
}

TEST_CASE("linear in the state and the observable", "[hierarchy][property]") {
    auto r = base_request(TermId::IV_quadratic, 0.2, 800);
    GaussianPhaseState g = r.state;
    g.blocks[0].mean(4) = 0.4;
    g.amplitude *= 0.7;
    TestObservable K = r.observable;
    K.mean(5) = -0.3;
    K.amplitude = 1.6;

    auto single = [&](const GaussianPhaseState& f, const TestObservable& J) {
        auto q = r;
        q.state = f;
        q.observable = J;
        return eval_quadratic_term(q);
    };
    auto sum_f = r;
    sum_f.extra_states = {g};
    auto a = eval_quadratic_term(sum_f), a1 = single(r.state, r.observable), a2 = single(g, r.observable);
    REQUIRE(within(a.value, a1.value + a2.value, std::sqrt(a.std_error * a.std_error + a1.std_error * a1.std_error +
                                                           a2.std_error * a2.std_error)));
    auto sum_j = r;
    sum_j.extra_observables = {K};
    auto b = eval_quadratic_term(sum_j), b2 = single(r.state, K);
    REQUIRE(within(b.value, a1.value + b2.value, std::sqrt(b.std_error * b.std_error + a1.std_error * a1.std_error +
                                                           b2.std_error * b2.std_error)));
}

TEST_CASE("elimination order does not change the inner value", "[hierarchy][property]") {
    auto r = base_request(TermId::IV_quadratic, 0.25, 400);
    Vec3 h2(0.5, -0.3, 0.8);
    auto ft = free_transport(r.state, r.t2 - r.epsilon * 0.7);
    for (const auto& F : terms::forms_IV(r.potential, ft, r.observable, r.epsilon, 0.7, h2, false)) {
        cd all_at_once = integrate_form(F);
        // x2 (indices 3..5) carries no polynomial factor: integrate it out first
        QuadForm rest = marginalize(F.q, {3, 4, 5});
        std::vector<PolyFactor> polys;
        std::vector<int> keep{0, 1, 2, 6, 7, 8, 9, 10, 11, 12, 13, 14};
        for (const auto& p : F.polys) {
            Eigen::MatrixXd G(p.y.G.rows(), int(keep.size()));
            for (size_t i = 0; i < keep.size(); ++i) G.col(i) = p.y.G.col(keep[i]);
            REQUIRE(p.y.G.middleCols(3, 3).norm() == 0.0);
            polys.push_back(PolyFactor{Affine{G, p.y.g}, p.degree, p.eval});
        }
        cd staged = F.weight * integrate(rest, polys);
        REQUIRE(std::abs(staged - all_at_once) <= 1e-10 * std::abs(all_at_once) + 1e-300);
    }
}

TEST_CASE("substituted and unsubstituted variables agree", "[hierarchy]") {
    // The quadratic term in (xi1) versus the pre-substitution momentum h1 = eps xi1 - h2.
    auto r = base_request(TermId::IV_quadratic, 0.25, 400);
    Vec3 h2(0.4, 0.6, -0.5);
    double s1 = 0.9;
    auto ft = free_transport(r.state, r.t2 - r.epsilon * s1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(15, 15);
    A.block(12, 12, 3, 3) *= 1.0 / r.epsilon;  // xi1 = (h1 + h2) / eps
    Eigen::VectorXd c = Eigen::VectorXd::Zero(15);
    c.tail<3>() = h2 / r.epsilon;
    cd xi_form = 0.0, h1_form = 0.0;
    for (const auto& F : terms::forms_IV(r.potential, ft, r.observable, r.epsilon, s1, h2, false)) {
        xi_form += integrate_form(F);
        h1_form += integrate_form(substitute(F, A, c));
    }
    REQUIRE(std::abs(h1_form - xi_form) <= 1e-9 * std::abs(xi_form));

    // and the time substitution t3 = t2 - eps s1: int_0^{t2/eps} ds1 g = (1/eps) int_0^{t2} dt3 g((t2 - t3)/eps)
    auto g = [&](double s) { return terms::inner_IV(r, s, h2); };
    Rule1D rs = composite_legendre(0.0, r.t2 / r.epsilon, 16, 4), rt = composite_legendre(0.0, r.t2, 16, 4);
    cd a = 0.0, b = 0.0;
    for (size_t i = 0; i < rs.x.size(); ++i) a += rs.w[i] * g(rs.x[i]);
    for (size_t i = 0; i < rt.x.size(); ++i) b += rt.w[i] * g((r.t2 - rt.x[i]) / r.epsilon) / r.epsilon;
    REQUIRE(std::abs(a - b) <= 1e-10 * std::abs(a));
}

TEST_CASE("quadratic term matches the deterministic oracle", "[hierarchy][oracle]") {
    auto r = shrunk_request(TermId::IV_quadratic);
    auto e = eval_quadratic_term(r);
    auto o = oracle_term(r, {8, 1, 1, 0.0});
    REQUIRE(within(e.value, o.value.real(), std::hypot(e.std_error, o.error)));
}

TEST_CASE("II and III shrink with eps", "[hierarchy]") {
    for (TermId t : {TermId::II, TermId::III}) {
        auto a = eval_term(base_request(t, 0.4, 800));
        auto b = eval_term(base_request(t, 0.1, 800));
        REQUIRE(std::abs(a.value) - std::abs(b.value) > 3.0 * std::hypot(a.std_error, b.std_error));
    }
}

TEST_CASE("necessity scan magnitude grows with the outer time", "[hierarchy]") {
    PairPotential p;
    p.offset = 1.0;
    QuadratureConfig q;
    q.n_samples = 400;
    auto f = reference_state(3, 0.2);
    auto J = reference_observable(0.2);
    auto a = necessity_scan(p, f, J, {0.1}, 0.5, q);
    auto b = necessity_scan(p, f, J, {0.1}, 1.0, q);
    REQUIRE(std::abs(b[0].value) > std::abs(a[0].value));
    REQUIRE(a[0].clip_bias_bound >= 0.0);
}
