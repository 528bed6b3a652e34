#include "descent/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace descent {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(Method m) {
    switch (m) {
        case Method::zarantonello: return "zarantonello";
        case Method::kacanov: return "kacanov";
        case Method::newton: return "newton";
    }
    return "?";
}

const char* to_string(RunMode m) {
    return m == RunMode::fixed_point ? "fp" : "pncg";
}

const char* to_string(BetaRule b) {
    return b == BetaRule::fletcher_reeves ? "fr" : "pr+";
}

Method method_from_string(const std::string& s) {
    if (s == "zarantonello") return Method::zarantonello;
    if (s == "kacanov") return Method::kacanov;
    if (s == "newton") return Method::newton;
    throw std::invalid_argument("unknown method: " + s);
}

RunMode run_mode_from_string(const std::string& s) {
    if (s == "fp" || s == "fixed_point") return RunMode::fixed_point;
    if (s == "pncg") return RunMode::pncg;
    throw std::invalid_argument("unknown run mode: " + s);
}

BetaRule beta_rule_from_string(const std::string& s) {
    if (s == "fr" || s == "fletcher_reeves") return BetaRule::fletcher_reeves;
    if (s == "pr+" || s == "pr_plus" || s == "polak_ribiere_plus") return BetaRule::polak_ribiere_plus;
    throw std::invalid_argument("unknown beta rule: " + s);
}

void SolverConfig::validate() const {
    if (!(delta_z > 0.0)) throw std::invalid_argument("SolverConfig: delta_z must be positive");
    if (!(delta_n > 0.0)) throw std::invalid_argument("SolverConfig: delta_n must be positive");
    if (!(tol_x > 0.0)) throw std::invalid_argument("SolverConfig: tol_x must be positive");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!(line_search.alpha_max > 0.0) || !(line_search.expansion > 1.0) ||
        !(line_search.tol_alpha > 0.0) || line_search.max_evals < 1)
        throw std::invalid_argument("SolverConfig: invalid line search parameters");
}

std::string SolverConfig::label() const {
    std::string s = to_string(method);
    s += "/";
    s += to_string(mode);
    if (mode == RunMode::pncg) {
        s += "-";
        s += to_string(beta_rule);
    }
    return s;
}

Preconditioner::Preconditioner(Method method, const FemSystem& sys, const SolverConfig& cfg)
    : method_(method), sys_(&sys) {
    switch (method_) {
        case Method::zarantonello:
            delta_ = cfg.delta_z;
            factor_.emplace(sys.riesz());
            break;
        case Method::kacanov:
            delta_ = 1.0;
            break;
        case Method::newton:
            delta_ = cfg.delta_n;
            break;
    }
}

void Preconditioner::update(std::span<const double> u) {
    switch (method_) {
        case Method::zarantonello:
            break;  // constant operator
        case Method::kacanov: {
            const auto A = sys_->weighted_stiffness(u);
            if (factor_) factor_->refactor(A);
            else factor_.emplace(A);
            break;
        }
        case Method::newton: {
            const auto J = sys_->newton_jacobian(u);
            if (factor_) factor_->refactor(J);
            else factor_.emplace(J);
            break;
        }
    }
}

std::vector<double> Preconditioner::apply_inverse(std::span<const double> rhs) const {
    if (!factor_) throw SolverError("Preconditioner: update() must run before apply_inverse()");
    auto x = factor_->solve(rhs);
    if (delta_ != 1.0)
        for (auto& v : x) v *= delta_;  // P = delta^{-1} M  =>  P^{-1} = delta M^{-1}
    return x;
}

std::vector<double> precond_apply(Method method, const FemSystem& sys, std::span<const double> u,
                                  std::span<const double> rhs, const SolverConfig& cfg) {
    Preconditioner prec(method, sys, cfg);
    prec.update(u);
    return prec.apply_inverse(rhs);
}

std::vector<double> fixed_point_step(Method method, const FemSystem& sys,
                                     std::span<const double> u, const SolverConfig& cfg) {
    const auto update = precond_apply(method, sys, u, sys.residual(u), cfg);
    std::vector<double> next(u.begin(), u.end());
    for (size_t i = 0; i < next.size(); ++i) next[i] -= update[i];
    return next;
}

LineSearchResult line_search(const EnergyLine& energy, const LineSearchConfig& cfg) {
    LineSearchResult result;
    auto eval = [&](double a) {
        ++result.evals;
        return energy(a);
    };

    const double h0 = eval(0.0);
    double best_a = 0.0, best_h = h0;
    // strict improvement wins; exact ties keep the earlier candidate (alpha = 0
    // is evaluated first, so flat energies deterministically return 0)
    auto consider = [&](double a, double h) {
        if (h < best_h) {
            best_h = h;
            best_a = a;
        }
    };
    // the parabola vertex beats the incumbent on noise-level ties at the end:
    // value comparisons cannot separate candidates closer than sqrt(eps) to the
    // minimiser, and on quadratic energies the vertex is the exact one
    double vertex_a = -1.0, vertex_h = 0.0;

    // bracketing: grow from 1 by the expansion factor until the energy exceeds
    // the best seen or alpha_max is reached
    double hi = std::min(1.0, cfg.alpha_max);
    double h_hi = eval(hi);
    consider(hi, h_hi);
    while (h_hi <= best_h && hi < cfg.alpha_max && result.evals < cfg.max_evals) {
        hi = std::min(hi * cfg.expansion, cfg.alpha_max);
        h_hi = eval(hi);
        consider(hi, h_hi);
    }

    // parabolic-fit candidate through the wide triple (0, hi/2, hi); exact to
    // rounding on quadratic energies (three distinct points pin the parabola)
    {
        const double xm = 0.5 * hi;
        const double fm = eval(xm);
        consider(xm, fm);
        const double denom = xm * (fm - h_hi) - (xm - hi) * (fm - h0);
        if (denom != 0.0) {
            const double cand =
                xm - 0.5 * (xm * xm * (fm - h_hi) - (xm - hi) * (xm - hi) * (fm - h0)) / denom;
            if (std::isfinite(cand) && cand >= 0.0 && cand <= cfg.alpha_max) {
                vertex_a = cand;
                vertex_h = eval(cand);
                consider(cand, vertex_h);
            }
        }
    }

    // golden section on [0, hi]
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0;
    double m1 = hi - inv_phi * (hi - lo);
    double m2 = lo + inv_phi * (hi - lo);
    double f1 = eval(m1), f2 = eval(m2);
    consider(m1, f1);
    consider(m2, f2);
    while (hi - lo > cfg.tol_alpha && result.evals < cfg.max_evals) {
        if (f1 <= f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = eval(m1);
            consider(m1, f1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = eval(m2);
            consider(m2, f2);
        }
    }
    result.hit_eval_budget = result.evals >= cfg.max_evals && hi - lo > cfg.tol_alpha;

    if (vertex_a >= 0.0 && vertex_h <= h0 &&
        vertex_h <= best_h + 1e-15 * (std::abs(vertex_h) + std::abs(best_h))) {
        best_a = vertex_a;
        best_h = vertex_h;
    }
    result.alpha = best_h < h0 ? best_a : 0.0;
    return result;
}

LineSearchResult line_search(const FemSystem& sys, std::span<const double> u,
                             std::span<const double> d, const LineSearchConfig& cfg) {
    bool zero_dir = true;
    for (double v : d)
        if (v != 0.0) { zero_dir = false; break; }
    if (zero_dir) return {0.0, 0, false};
    return line_search(sys.energy_line(u, d), cfg);
}

double beta_fletcher_reeves(const PrecondState& next, const PrecondState& prev) {
    if (prev.rho == 0.0)
        throw ZeroDenominator("beta_fletcher_reeves: F(u^n) vanished, iteration converged");
    return next.rho / prev.rho;
}

double beta_polak_ribiere_plus(const PrecondState& next, const PrecondState& prev) {
    if (prev.rho == 0.0)
        throw ZeroDenominator("beta_polak_ribiere_plus: F(u^n) vanished, iteration converged");
    double numer = 0.0;
    for (size_t i = 0; i < next.z.size(); ++i)
        numer += (next.residual[i] - prev.residual[i]) * next.z[i];
    return std::max(0.0, numer / prev.rho);
}

namespace {

struct RunState {
    IterationLog log;

    void record(const SolverConfig& cfg, int step, double err, double energy, double alpha,
                double beta, std::span<const double> u) {
        log.records.push_back({step, err, energy, alpha, beta});
        if (cfg.record_iterates) log.iterates.emplace_back(u.begin(), u.end());
        if (err <= cfg.tol_x && log.steps_to_tol < 0) {
            log.steps_to_tol = step;
            log.converged = true;
        }
    }
};

double run_error(const FemSystem& sys, const SolverConfig& cfg, std::span<const double> u,
                 std::span<const double> u_ref, double ref_norm) {
    std::vector<double> diff(u.size());
    for (size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - u_ref[i];
    double e = sys.x_norm(diff);
    if (cfg.relative_tol && ref_norm > 0.0) e /= ref_norm;
    return e;
}

}  // namespace

IterationLog fixed_point_run(Method method, const FemSystem& sys, const SolverConfig& cfg,
                             std::span<const double> u_ref) {
    cfg.validate();
    if (sys.num_dofs() < 1) throw SolverError("fixed_point_run: system has no dofs");
    const double ref_norm = sys.x_norm(u_ref);
    const double delta = method == Method::zarantonello ? cfg.delta_z
                         : method == Method::newton     ? cfg.delta_n
                                                        : 1.0;

    Preconditioner prec(method, sys, cfg);
    std::vector<double> u(sys.num_dofs(), 0.0);
    RunState state;
    state.record(cfg, 0, run_error(sys, cfg, u, u_ref, ref_norm), sys.energy(u), kNaN, kNaN, u);

    for (int n = 1; n <= cfg.max_iter && !state.log.converged; ++n) {
        try {
            prec.update(u);
            const auto update = prec.apply_inverse(sys.residual(u));
            for (size_t i = 0; i < u.size(); ++i) u[i] -= update[i];
        } catch (const NotSpd& e) {
            throw SolverError(std::string(e.what()) + " (at iterate " + std::to_string(n - 1) + ")");
        }
        state.record(cfg, n, run_error(sys, cfg, u, u_ref, ref_norm), sys.energy(u), delta, kNaN, u);
    }
    return state.log;
}

IterationLog pncg_run(Method method, const FemSystem& sys, const SolverConfig& cfg,
                      std::span<const double> u_ref) {
    cfg.validate();
    if (sys.num_dofs() < 1) throw SolverError("pncg_run: system has no dofs");
    const double ref_norm = sys.x_norm(u_ref);

    Preconditioner prec(method, sys, cfg);
    std::vector<double> u(sys.num_dofs(), 0.0);
    RunState state;
    state.record(cfg, 0, run_error(sys, cfg, u, u_ref, ref_norm), sys.energy(u), kNaN, kNaN, u);

    PrecondState cur;
    auto refresh = [&](std::span<const double> at) {
        prec.update(at);
        cur.residual = sys.residual(at);
        cur.z = prec.apply_inverse(cur.residual);
        cur.rho = dot(cur.residual, cur.z);
    };

    try {
        refresh(u);
    } catch (const NotSpd& e) {
        throw SolverError(std::string(e.what()) + " (at iterate 0)");
    }
    std::vector<double> d(cur.z.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = -cur.z[i];

    for (int n = 1; n <= cfg.max_iter && !state.log.converged; ++n) {
        double alpha;
        if (cfg.frozen_alpha) {
            alpha = *cfg.frozen_alpha;
        } else {
            const auto ls = line_search(sys, u, d, cfg.line_search);
            alpha = ls.alpha;
            if (ls.hit_eval_budget && state.log.note.empty())
                state.log.note = "line search hit max_evals at step " + std::to_string(n);
        }
        for (size_t i = 0; i < u.size(); ++i) u[i] += alpha * d[i];

        PrecondState prev = std::move(cur);
        try {
            refresh(u);
        } catch (const NotSpd& e) {
            throw SolverError(std::string(e.what()) + " (at iterate " + std::to_string(n) + ")");
        }

        double beta = 0.0;
        if (!cfg.force_beta_zero && prev.rho > 0.0) {
            beta = cfg.beta_rule == BetaRule::fletcher_reeves
                       ? beta_fletcher_reeves(cur, prev)
                       : beta_polak_ribiere_plus(cur, prev);
            if (!std::isfinite(beta)) beta = 0.0;
        }
        for (size_t i = 0; i < d.size(); ++i) d[i] = -cur.z[i] + beta * d[i];

        state.record(cfg, n, run_error(sys, cfg, u, u_ref, ref_norm), sys.energy(u), alpha, beta, u);
    }
    return state.log;
}

}  // namespace descent
