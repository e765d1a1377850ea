#pragma once

// Study runners behind the command-line tool. Each study returns report rows
// and a summary whose criteria decide the exit status.

#include <chrono>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "gaussian_states.hpp"
#include "hierarchy_terms.hpp"
#include "homogeneous_solver.hpp"
#include "limit_operators.hpp"
#include "potentials.hpp"
#include "report.hpp"

namespace qkin {

inline const std::vector<std::string>& study_names() {
    static const std::vector<std::string> names = {"quadratic-convergence", "cubic-vanishing", "necessity-demo",
                                                   "uu-cubic-nonzero",      "solve-qb",        "solve-uu",
                                                   "diagnostics"};
    return names;
}

struct StudySpec {
    std::string study = "quadratic-convergence";
    std::vector<double> epsilons{0.4, 0.2, 0.1};
    double t2 = 0.5;
    PairPotential potential;
    int theta = 1;
    QuadratureConfig quad;
    double spatial_precision = 0.2;
    std::string out = "qkin_out";
    // solver studies
    int grid_points = 16;
    double grid_extent = 4.5;
    double dt = 0.05;
    int steps = 20;
    bool projection = false;
    int sphere_n_theta = 6;
};

// Study-specific defaults; the config file and flags are applied on top.
inline StudySpec default_spec(const std::string& study) {
    bool known = false;
    for (const auto& n : study_names()) known |= n == study;
    if (!known) throw ConfigError("unknown study '" + study + "'");
    StudySpec s;
    s.study = study;
    if (study == "quadratic-convergence") s.quad.n_samples = 60000;
    if (study == "cubic-vanishing") s.quad.n_samples = 2000;
    if (study == "necessity-demo") {
        s.epsilons = {0.1, 0.05};
        s.quad.n_samples = 2000;
        s.potential.offset = 1.0;
    }
    if (study == "solve-qb" || study == "solve-uu") {
        s.potential.vanishing_order = 1;
        s.potential.amplitude = 8.0;
    }
    if (study == "solve-uu") {
        s.grid_points = 10;
        s.dt = 0.1;
        s.steps = 3;
        s.sphere_n_theta = 4;
    }
    return s;
}

inline void apply_config(StudySpec& s, const ConfigMap& m) {
    for (const auto& [k, v] : m) {
        if (k == "epsilons") s.epsilons = parse_list(k, v);
        else if (k == "t2") s.t2 = parse_double(k, v);
        else if (k == "theta") s.theta = int(parse_int(k, v));
        else if (k == "out") s.out = v;
        else if (k == "potential.amplitude") s.potential.amplitude = parse_double(k, v);
        else if (k == "potential.order" || k == "potential.vanishing_order") s.potential.vanishing_order = int(parse_int(k, v));
        else if (k == "potential.width") s.potential.width = parse_double(k, v);
        else if (k == "potential.offset") s.potential.offset = parse_double(k, v);
        else if (k == "quadrature.n_samples") s.quad.n_samples = parse_int(k, v);
        else if (k == "quadrature.shards") s.quad.shard_count = int(parse_int(k, v));
        else if (k == "quadrature.seed") s.quad.seed = std::uint64_t(parse_int(k, v));
        else if (k == "quadrature.max_rel_stderr") s.quad.max_rel_stderr = parse_double(k, v);
        else if (k == "quadrature.clip_quantile") s.quad.clip_quantile = parse_double(k, v);
        else if (k == "state.spatial_precision") s.spatial_precision = parse_double(k, v);
        else if (k == "solver.points") s.grid_points = int(parse_int(k, v));
        else if (k == "solver.extent") s.grid_extent = parse_double(k, v);
        else if (k == "solver.dt") s.dt = parse_double(k, v);
        else if (k == "solver.steps") s.steps = int(parse_int(k, v));
        else if (k == "solver.projection") s.projection = parse_bool(k, v);
        else if (k == "solver.sphere_n_theta") s.sphere_n_theta = int(parse_int(k, v));
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

// Precedence: overrides (command-line flags) > config file > study defaults.
inline StudySpec build_spec(const std::string& study, const ConfigMap& file, const ConfigMap& overrides) {
    StudySpec s = default_spec(study);
    apply_config(s, file);
    apply_config(s, overrides);
    return s;
}

inline void validate(const StudySpec& s) {
    for (size_t i = 0; i < s.epsilons.size(); ++i) {
        double e = s.epsilons[i];
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("epsilons must lie in (0, 1]");
        if (i > 0 && !(e < s.epsilons[i - 1])) throw ConfigError("epsilons must be strictly decreasing");
    }
    if (s.theta != 1 && s.theta != -1) throw ConfigError("theta must be +1 or -1");
    if (s.quad.shard_count < 1 || s.quad.n_samples % s.quad.shard_count != 0)
        throw ConfigError("quadrature.n_samples must be a multiple of quadrature.shards");
    if (s.potential.vanishing_order < 0 || s.potential.width <= 0.0)
        throw ConfigError("potential needs order >= 0 and width > 0");
    if (!(s.t2 > 0.0)) throw ConfigError("t2 must be positive");
    if (!(s.spatial_precision > 0.0)) throw ConfigError("state.spatial_precision must be positive");
    const bool hierarchy = s.study == "quadratic-convergence" || s.study == "cubic-vanishing" ||
                           s.study == "uu-cubic-nonzero";
    if (hierarchy && !satisfies_theorem_class(s.potential))
        throw PotentialNonVanishing(s.study + " needs phi_hat vanishing to order >= 11 at 0");
    if (s.study == "necessity-demo" && s.potential.at_origin() == 0.0)
        throw ConfigError("necessity-demo needs phi_hat(0) != 0; set potential.offset > 0");
}

// ---- reference data ------------------------------------------------------------------

// Product Gaussian state with k particles; px is the spatial precision.
inline GaussianPhaseState reference_state(int k, double px) {
    std::vector<GaussianBlock> all(3);
    all[0].mean << 0, 0, 0, 0.5, 0, 0;
    all[1].mean << 0.1, 0, 0, -0.5, 0.2, 0;
    all[2].mean << -0.2, 0.1, 0, 0, 0, 0.3;
    for (auto& b : all) {
        b.precision = Mat6::Identity();
        for (int i = 0; i < 3; ++i) b.precision(i, i) = px;
    }
    all[0].precision(3, 3) = 1.5;
    all[1].precision(4, 4) = 0.8;
    all.resize(k);
    return make_tensor_state(all, 1.0, true);
}

inline TestObservable reference_observable(double px) {
    TestObservable J;
    J.mean << 0, 0, 0, 0.3, 0.1, 0;
    J.precision = Mat6::Zero();
    J.precision.diagonal() << 0.5 * px, 0.5 * px, 0.5 * px, 1, 1, 1;
    return J;
}

// Two drifting Maxwellians of total mass 1.
inline GaussianMixture3 bimodal_velocity_data() {
    const double T = 0.7, c = 0.5 / std::pow(2 * kPi * T, 1.5);
    return {{{c, Vec3(-1.2, 0, 0), Mat3::Identity() / T}, {c, Vec3(1.2, 0.3, 0), Mat3::Identity() / T}}};
}

// Bimodal data in the quantum regime: 8 pi^3 f stays below 1 (Pauli bound).
inline GaussianMixture3 quantum_bimodal_data() {
    const double c = 8 * kPi * kPi * kPi;
    return {{{0.5 / c, Vec3(-0.6, 0.2, 0), Mat3::Identity() * 1.4}, {0.5 / c, Vec3(0.5, -0.3, 0.2), Mat3::Identity() * 1.2}}};
}

// Non-equilibrium velocity profile for the cubic UU term.
inline GaussianMixture3 generic_uu_data() {
    const double c = 8 * kPi * kPi * kPi;
    GaussianMixture3 g = maxwellian(0.5 / c * std::pow(2 * kPi, 1.5), Vec3(0.4, 0, 0), 1.0);
    g.comps.push_back({0.3 / c, Vec3(-0.5, 0.3, 0), Mat3::Identity() * 1.5});
    return g;
}

// ---- criteria --------------------------------------------------------------------------

inline std::string fmt(double x) { return format_double(x); }

struct GapPoint {
    double eps, value, std_error;
};

// G(eps) = |IV(eps) - limit|: last gap below half the first beyond 3 combined stderr,
// and below max(0.1 |limit|, 3 stderr).
inline std::vector<Criterion> quadratic_gap_criteria(const std::vector<GapPoint>& pts, double limit, double limit_err) {
    const auto& a = pts.front();
    const auto& b = pts.back();
    double ga = std::abs(a.value - limit), gb = std::abs(b.value - limit);
    double sa = std::hypot(a.std_error, limit_err), sb = std::hypot(b.std_error, limit_err);
    double margin = 0.5 * ga - gb, comb = 3.0 * std::hypot(sb, 0.5 * sa);
    Criterion shrink{"gap_halves", margin > comb,
                     "G(" + fmt(b.eps) + ")=" + fmt(gb) + " vs 0.5*G(" + fmt(a.eps) + ")=" + fmt(0.5 * ga) +
                         ", margin " + fmt(margin) + " vs 3*combined stderr " + fmt(comb)};
    double bound = std::max(0.1 * std::abs(limit), 3.0 * sb);
    Criterion small{"gap_small", gb < bound, "G(" + fmt(b.eps) + ")=" + fmt(gb) + " vs bound " + fmt(bound)};
    return {shrink, small};
}

inline std::vector<Criterion> cubic_vanishing_criteria(const std::string& term, const MCEstimate& first,
                                                      const MCEstimate& last, double eps_first, double eps_last) {
    Criterion zero{term + "_consistent_with_zero", std::abs(last.value) <= 3.0 * last.std_error,
                   "|V(" + fmt(eps_last) + ")|=" + fmt(std::abs(last.value)) + " vs 3*stderr " + fmt(3.0 * last.std_error)};
    double margin = std::abs(first.value) - std::abs(last.value);
    double comb = 3.0 * std::hypot(first.std_error, last.std_error);
    Criterion dec{term + "_decreases", margin > comb,
                  "|V(" + fmt(eps_first) + ")|-|V(" + fmt(eps_last) + ")|=" + fmt(margin) + " vs " + fmt(comb)};
    return {zero, dec};
}

inline Criterion growth_criterion(const std::string& term, const MCEstimate& prev, const MCEstimate& last,
                                  double eps_prev, double eps_last) {
    double margin = std::abs(last.value) - 1.5 * std::abs(prev.value);
    double comb = 3.0 * std::hypot(last.std_error, 1.5 * prev.std_error);
    return {term + "_grows", margin > comb,
            "|V(" + fmt(eps_last) + ")|=" + fmt(std::abs(last.value)) + " vs 1.5*|V(" + fmt(eps_prev) +
                ")|=" + fmt(1.5 * std::abs(prev.value)) + ", margin " + fmt(margin) + " vs " + fmt(comb)};
}

// H non-increasing within slack, relative moment drift, clamped mass per step.
inline std::vector<Criterion> trajectory_criteria(const std::vector<TrajectoryRow>& rows, double h_slack = 1e-6,
                                                  double drift_tol = 1e-3, double clamp_tol = 1e-6) {
    double max_dh = -std::numeric_limits<double>::infinity(), max_clamp = 0.0;
    for (size_t i = 1; i < rows.size(); ++i) {
        max_dh = std::max(max_dh, rows[i].H - rows[i - 1].H);
        max_clamp = std::max(max_clamp, rows[i].clamped_mass);
    }
    const auto& a = rows.front().m;
    const auto& b = rows.back().m;
    double vscale = std::sqrt(2.0 * a.energy / a.mass);
    double dm = std::abs(b.mass - a.mass) / a.mass;
    double dp = (b.momentum - a.momentum).norm() / (a.mass * vscale);
    double de = std::abs(b.energy - a.energy) / a.energy;
    double drift = std::max({dm, dp, de});
    return {{"H_nonincreasing", max_dh <= h_slack, "max step increase " + fmt(max_dh) + " vs " + fmt(h_slack)},
            {"moment_drift", drift <= drift_tol,
             "mass " + fmt(dm) + ", momentum " + fmt(dp) + ", energy " + fmt(de) + " vs " + fmt(drift_tol)},
            {"clamped_mass", max_clamp <= clamp_tol, "max per step " + fmt(max_clamp)}};
}

// ---- studies ---------------------------------------------------------------------------

struct StudyResult {
    std::vector<ReportRow> rows;
    StudySummary summary;
};

namespace study_detail {

inline ReportRow mc_row(const StudySpec& s, const std::string& term, double eps, const MCEstimate& e,
                        double limit = std::numeric_limits<double>::quiet_NaN()) {
    ReportRow r;
    r.study = s.study;
    r.term = term;
    r.epsilon = eps;
    r.t = s.t2;
    r.value = e.value;
    r.std_error = e.std_error;
    r.limit_value = limit;
    r.n_samples = e.n_samples;
    r.seed = e.seed;
    r.wall_time_s = e.wall_time_s;
    return r;
}

inline EpsilonTermRequest request(const StudySpec& s, TermId term, double eps, int k) {
    EpsilonTermRequest r;
    r.term = term;
    r.epsilon = eps;
    r.t2 = s.t2;
    r.potential = s.potential;
    r.state = reference_state(k, s.spatial_precision);
    r.observable = reference_observable(s.spatial_precision);
    r.quad = s.quad;
    return r;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace study_detail

inline StudyResult run_quadratic_convergence(const StudySpec& s) {
    StudyResult res;
    res.summary.study = s.study;
    auto t0 = std::chrono::steady_clock::now();
    CollisionKernelConfig kc;
    kc.tolerance = 1e-4;
    QuadValue lim = boltzmann_pairing(reference_state(2, s.spatial_precision), reference_observable(s.spatial_precision),
                                      s.t2, s.potential, kc);
    ReportRow lr;
    lr.study = s.study;
    lr.term = "limit";
    lr.t = s.t2;
    lr.value = lim.value;
    lr.std_error = lim.error;
    lr.limit_value = lim.value;
    lr.wall_time_s = study_detail::seconds_since(t0);
    std::vector<GapPoint> pts;
    for (double eps : s.epsilons) {
        auto e = eval_quadratic_term(study_detail::request(s, TermId::IV_quadratic, eps, 2));
        res.rows.push_back(study_detail::mc_row(s, "IV_quadratic", eps, e, lim.value));
        pts.push_back({eps, e.value, e.std_error});
    }
    res.rows.push_back(lr);
    if (pts.size() >= 2) res.summary.criteria = quadratic_gap_criteria(pts, lim.value, lim.error);
    res.summary.extra = {{"limit", lim.value}, {"limit_error", lim.error}};
    return res;
}

inline StudyResult run_cubic_vanishing(const StudySpec& s) {
    StudyResult res;
    res.summary.study = s.study;
    for (TermId t : {TermId::V_cubic_1, TermId::V_cubic_2}) {
        std::vector<MCEstimate> es;
        for (double eps : s.epsilons) {
            es.push_back(eval_cubic_term(study_detail::request(s, t, eps, 3)));
            res.rows.push_back(study_detail::mc_row(s, to_string(t), eps, es.back(), 0.0));
        }
        if (es.size() >= 2) {
            auto c = cubic_vanishing_criteria(to_string(t), es.front(), es.back(), s.epsilons.front(), s.epsilons.back());
            res.summary.criteria.insert(res.summary.criteria.end(), c.begin(), c.end());
        }
        int variant = t == TermId::V_cubic_1 ? 1 : 2;
        double lim = eval_cubic_limit_formula(variant, s.potential, reference_state(3, s.spatial_precision),
                                              reference_observable(s.spatial_precision));
        res.summary.criteria.push_back({to_string(t) + "_limit_formula_zero", lim == 0.0, "limit " + fmt(lim)});
    }
    return res;
}

inline StudyResult run_necessity_demo(const StudySpec& s) {
    StudyResult res;
    res.summary.study = s.study;
    const auto f = reference_state(3, s.spatial_precision);
    const auto J = reference_observable(s.spatial_precision);
    std::vector<double> last_values;
    for (TermId t : {TermId::V_cubic_1, TermId::V_cubic_2}) {
        auto es = necessity_scan(s.potential, f, J, s.epsilons, s.t2, s.quad, t);
        for (size_t i = 0; i < es.size(); ++i)
            res.rows.push_back(study_detail::mc_row(s, to_string(t), s.epsilons[i], es[i]));
        if (es.size() >= 2)
            res.summary.criteria.push_back(growth_criterion(to_string(t), es[es.size() - 2], es.back(),
                                                            s.epsilons[es.size() - 2], s.epsilons.back()));
        last_values.push_back(es.back().value);
        bool divergent = false;
        try {
            eval_cubic_limit_formula(t == TermId::V_cubic_1 ? 1 : 2, s.potential, f, J);
        } catch (const DivergentLimit&) {
            divergent = true;
        }
        res.summary.criteria.push_back({to_string(t) + "_limit_divergent", divergent, divergent ? "DivergentLimit raised" : "no error"});
    }
    bool same = last_values[0] * last_values[1] > 0.0;
    res.summary.criteria.push_back({"variants_same_sign", same, "V1=" + fmt(last_values[0]) + ", V2=" + fmt(last_values[1])});
    return res;
}

inline StudyResult run_uu_cubic_nonzero(const StudySpec& s) {
    StudyResult res;
    res.summary.study = s.study;
    CollisionKernelConfig kc;
    kc.enforce_tolerance = false;
    kc.sphere_n_theta = 6;
    kc.plane_nodes = 12;
    auto t0 = std::chrono::steady_clock::now();
    QuadValue m = uu_M_cubic(VelocityFunction(generic_uu_data()), Vec3::Zero(), s.potential, s.theta, kc);
    ReportRow r;
    r.study = s.study;
    r.term = "M_cubic_at_0";
    r.value = m.value;
    r.std_error = m.error;
    r.wall_time_s = study_detail::seconds_since(t0);
    res.rows.push_back(r);
    res.summary.criteria.push_back({"M_nonzero", std::abs(m.value) > 5.0 * m.error,
                                    "|M(0)|=" + fmt(std::abs(m.value)) + " vs 5*error " + fmt(5.0 * m.error)});
    return res;
}

inline SolverConfig solver_config(const StudySpec& s, bool uu) {
    SolverConfig c;
    c.dt = s.dt;
    c.steps = s.steps;
    c.uu = uu;
    c.statistics.theta = s.theta;
    c.projection = s.projection;
    c.collision.sphere_n_theta = s.sphere_n_theta;
    return c;
}

inline StudyResult run_solver_study(const StudySpec& s, bool uu, std::vector<TrajectoryRow>* traj = nullptr) {
    StudyResult res;
    res.summary.study = s.study;
    auto data = uu ? quantum_bimodal_data() : bimodal_velocity_data();
    auto state = VelocityGridState::sample(s.grid_extent, s.grid_points, data);
    auto t0 = std::chrono::steady_clock::now();
    auto rows = run_solver(state, solver_config(s, uu), s.potential);
    double wall = study_detail::seconds_since(t0);
    for (const auto& tr : rows)
        for (auto [name, val] : {std::pair<const char*, double>{"H", tr.H}, {"mass", tr.m.mass}, {"energy", tr.m.energy}}) {
            ReportRow r;
            r.study = s.study;
            r.term = name;
            r.t = tr.t;
            r.value = val;
            r.wall_time_s = wall;
            res.rows.push_back(r);
        }
    res.summary.criteria = trajectory_criteria(rows);
    if (traj) *traj = rows;
    return res;
}

inline StudyResult run_diagnostics(const StudySpec& s, std::ostream& os) {
    StudyResult res;
    res.summary.study = s.study;
    auto f = reference_state(2, s.spatial_precision);
    double w = w41_norm(f);
    int order = check_vanishing_order(s.potential);
    double m = mass(f);
    os << "w41_norm " << fmt(w) << "\nvanishing_order " << order << "\nmass " << fmt(m) << "\n";
    for (auto [name, val] : {std::pair<const char*, double>{"w41_norm", w}, {"vanishing_order", double(order)}, {"mass", m}}) {
        ReportRow r;
        r.study = s.study;
        r.term = name;
        r.value = val;
        res.rows.push_back(r);
    }
    return res;
}

// Runs the study, writes <out>.csv and <out>.json (plus <out>_trajectory.csv for
// solver studies) and returns the process exit status.
inline int run_study(const StudySpec& s, std::ostream& log = std::cout) {
    validate(s);
    StudyResult res;
    std::vector<TrajectoryRow> traj;
    if (s.study == "quadratic-convergence") res = run_quadratic_convergence(s);
    else if (s.study == "cubic-vanishing") res = run_cubic_vanishing(s);
    else if (s.study == "necessity-demo") res = run_necessity_demo(s);
    else if (s.study == "uu-cubic-nonzero") res = run_uu_cubic_nonzero(s);
    else if (s.study == "solve-qb") res = run_solver_study(s, false, &traj);
    else if (s.study == "solve-uu") res = run_solver_study(s, true, &traj);
    else res = run_diagnostics(s, log);
    emit_report(res.rows, res.summary, s.out);
    if (!traj.empty()) write_trajectory_csv(traj, s.out + "_trajectory.csv");
    for (const auto& c : res.summary.criteria) log << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    return res.summary.pass() ? 0 : 1;
}

}  // namespace qkin
