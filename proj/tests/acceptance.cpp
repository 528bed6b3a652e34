// Acceptance suite: end-to-end checks of the experiment protocol at the
// configured tolerances. Prints one PASS/FAIL line per criterion and exits
// with the number of failed criteria.

#include "descent/experiment.hpp"

#include "oracles.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

using namespace descent;

namespace {

struct SubCheck {
    std::string text;
    bool pass = false;
};

struct Criterion {
    std::string name;
    std::vector<SubCheck> checks;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add(bool ok, const std::string& text) { checks.push_back({text, ok}); }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::vector<double> random_unit(const FemSystem& sys, SplitMix64& rng) {
    std::vector<double> v(sys.num_dofs());
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    const double n = sys.x_norm(v);
    for (auto& x : v) x /= n;
    return v;
}

double xdiff(const FemSystem& sys, std::span<const double> a, std::span<const double> b) {
    std::vector<double> d(a.size());
    for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return sys.x_norm(d);
}

constexpr int kNoConvergence = 1000000;  // orders above any convergent count

// steps to tolerance for one table cell; kNoConvergence if not converged
int cell_steps(const TableResult& table, Method m, RunMode mode, BetaRule b) {
    for (const auto& cell : table.cells) {
        if (cell.config.method != m || cell.config.mode != mode) continue;
        if (mode == RunMode::pncg && cell.config.beta_rule != b) continue;
        if (cell.status != "ok") return -1;
        return cell.log.converged ? cell.log.steps_to_tol : kNoConvergence;
    }
    return -1;
}

std::string count_text(int steps) {
    if (steps == kNoConvergence) return "-";
    if (steps < 0) return "err";
    return std::to_string(steps);
}

ExperimentConfig table_config(const std::string& label, double r, double delta_z) {
    ExperimentConfig cfg;
    cfg.case_label = label;
    cfg.mesh_level = 6;
    cfg.diffusion.carreau_params = CarreauParams{1.0, 100.0, 2.0, r};
    cfg.delta_z = delta_z;
    cfg.delta_n = 1.0;
    cfg.tol_x = 1e-6;
    cfg.max_iter = 100;
    cfg.output_dir = "acceptance_out/case_" + label;
    return cfg;
}

Criterion criterion_table(const TableResult& table_a, const TableResult& table_b) {
    Criterion crit{"table-1 trend reproduction (level 6, tol 1e-6)"};

    struct PaperRow {
        Method method;
        int fp, fr, pr;  // -1 marks the paper's '-' entry
    };
    const std::vector<PaperRow> paper_a = {{Method::zarantonello, 61, 15, 15},
                                           {Method::kacanov, 25, 9, 10},
                                           {Method::newton, 5, 7, 6}};
    const std::vector<PaperRow> paper_b = {{Method::zarantonello, -1, 37, 37},
                                           {Method::kacanov, 90, 19, 24},
                                           {Method::newton, 7, 16, 8}};

    auto check_case = [&](const TableResult& table, const std::vector<PaperRow>& paper,
                          const std::string& label) {
        for (const auto& row : paper) {
            const std::array<std::pair<int, std::pair<RunMode, BetaRule>>, 3> entries = {{
                {row.fp, {RunMode::fixed_point, BetaRule::fletcher_reeves}},
                {row.fr, {RunMode::pncg, BetaRule::fletcher_reeves}},
                {row.pr, {RunMode::pncg, BetaRule::polak_ribiere_plus}},
            }};
            for (const auto& [paper_steps, key] : entries) {
                const int got = cell_steps(table, row.method, key.first, key.second);
                std::string cell = std::string(to_string(row.method)) + "/" +
                                   (key.first == RunMode::fixed_point
                                        ? "fp"
                                        : std::string("pncg-") + to_string(key.second)) +
                                   " (" + label + ")";
                if (paper_steps < 0) continue;  // handled by sub-check (ii)
                // (i) cells convergent in the paper converge here
                crit.add(got >= 0 && got != kNoConvergence,
                         "(i) " + cell + " converges within 100 steps [got " +
                             count_text(got) + ", paper " + std::to_string(paper_steps) + "]");
                // (iii) counts within +-50% of the paper
                const bool in_window = got >= 0 && got != kNoConvergence &&
                                       got >= 0.5 * paper_steps && got <= 1.5 * paper_steps;
                crit.add(in_window, "(iii) " + cell + " steps in [" +
                                        fmt(0.5 * paper_steps) + ", " +
                                        fmt(1.5 * paper_steps) + "] [got " +
                                        count_text(got) + "]");
            }
        }
    };
    check_case(table_a, paper_a, "a");
    check_case(table_b, paper_b, "b");

    // (ii) Zarantonello FP case (b) fails to converge within 100 steps
    const int zar_fp_b =
        cell_steps(table_b, Method::zarantonello, RunMode::fixed_point, BetaRule::fletcher_reeves);
    crit.add(zar_fp_b == kNoConvergence,
             "(ii) zarantonello/fp (b) does not converge within 100 steps [got " +
                 count_text(zar_fp_b) + "]");

    // (iv) orderings
    for (const auto& [table, label] : {std::make_pair(&table_a, "a"), {&table_b, "b"}}) {
        const int zar = cell_steps(*table, Method::zarantonello, RunMode::fixed_point,
                                   BetaRule::fletcher_reeves);
        const int kac =
            cell_steps(*table, Method::kacanov, RunMode::fixed_point, BetaRule::fletcher_reeves);
        const int newt =
            cell_steps(*table, Method::newton, RunMode::fixed_point, BetaRule::fletcher_reeves);
        crit.add(newt < kac && kac < zar,
                 std::string("(iv) newton fp < kacanov fp < zarantonello fp (") + label +
                     ") [" + count_text(newt) + " < " + count_text(kac) + " < " +
                     count_text(zar) + "]");
        for (Method m : {Method::kacanov, Method::zarantonello}) {
            const int fp = cell_steps(*table, m, RunMode::fixed_point, BetaRule::fletcher_reeves);
            for (BetaRule b : {BetaRule::fletcher_reeves, BetaRule::polak_ribiere_plus}) {
                const int cg = cell_steps(*table, m, RunMode::pncg, b);
                crit.add(cg >= 0 && cg < fp,
                         std::string("(iv) pncg-") + to_string(b) + "(" + to_string(m) +
                             ") < fp(" + to_string(m) + ") (" + label + ") [" + count_text(cg) +
                             " < " + count_text(fp) + "]");
            }
        }
    }
    return crit;
}

Criterion criterion_linear() {
    Criterion crit{"linear degeneration oracle (constant mu)"};
    const double c = 1.0;
    const FemSystem sys(build_lshape(3), constant_diffusion(c));
    const std::vector<double> zero(sys.num_dofs(), 0.0);
    const auto u_ref = spd_solve(sys.weighted_stiffness(zero), sys.load());

    for (Method m : {Method::kacanov, Method::newton}) {
        SolverConfig cfg;
        cfg.tol_x = 1e-9;
        const auto log = fixed_point_run(m, sys, cfg, u_ref);
        crit.add(log.converged && log.steps_to_tol == 1 && log.records[1].error_x <= 1e-9,
                 std::string(to_string(m)) + " fp converges in exactly 1 step to 1e-9 [steps " +
                     std::to_string(log.steps_to_tol) + ", err " +
                     fmt(log.records.size() > 1 ? log.records[1].error_x : -1.0) + "]");
    }
    {
        SolverConfig cfg;
        cfg.delta_z = 0.03;
        cfg.tol_x = 1e-30;
        cfg.max_iter = 5;
        const auto log = fixed_point_run(Method::zarantonello, sys, cfg, u_ref);
        const double expected = std::abs(1.0 - cfg.delta_z * c);
        bool ok = log.records.size() == 6;
        double worst = 0.0;
        for (size_t k = 1; k < log.records.size(); ++k) {
            const double ratio = log.records[k].error_x / log.records[k - 1].error_x;
            worst = std::max(worst, std::abs(ratio / expected - 1.0));
            if (std::abs(ratio / expected - 1.0) > 1e-6) ok = false;
        }
        crit.add(ok, "zarantonello fp contracts by |1 - delta c| = " + fmt(expected) +
                         " per step (rel dev " + fmt(worst) + ")");
    }
    {
        SolverConfig cfg;
        cfg.mode = RunMode::pncg;
        cfg.delta_z = 0.5;  // exact first step 1/(delta c) = 2, inside the bracket cap
        cfg.tol_x = 1e-30;
        cfg.max_iter = 5;
        cfg.record_iterates = true;
        cfg.line_search.tol_alpha = 1e-12;  // keep step-size jitter below the match tolerance
        // far reference: the run must not stop early, the comparison needs 5 steps
        const std::vector<double> far_ref(sys.num_dofs(), 1e3);
        const auto log = pncg_run(Method::zarantonello, sys, cfg, far_ref);
        const auto oracle = oracles::pcg_iterates(
            [&](const std::vector<double>& v) { return matvec(sys.weighted_stiffness(zero), v); },
            [&](const std::vector<double>& r) {
                auto z = spd_solve(sys.riesz(), r);
                for (auto& x : z) x *= cfg.delta_z;
                return z;
            },
            sys.load(), cfg.max_iter);
        bool ok = log.iterates.size() >= 6;
        double worst = 0.0;
        for (size_t k = 0; k < std::min<size_t>(6, log.iterates.size()); ++k) {
            const double d = xdiff(sys, log.iterates[k], oracle[k]);
            worst = std::max(worst, d);
            if (d > 1e-8) ok = false;
        }
        crit.add(ok, "pncg matches the preconditioned linear CG oracle for 5 steps (worst "
                     "X-norm gap " + fmt(worst) + ")");
    }
    return crit;
}

Criterion criterion_gradient() {
    Criterion crit{"potential/gradient consistency (level 4, 20 pairs)"};
    const FemSystem sys(build_lshape(4), carreau(CarreauParams{1.0, 100.0, 2.0, 1.4}));
    SplitMix64 rng(0xACCE01);
    const double eps = 1e-6;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto u = random_unit(sys, rng);
        const auto v = random_unit(sys, rng);
        std::vector<double> up(u), um(u);
        for (size_t i = 0; i < u.size(); ++i) {
            up[i] += eps * v[i];
            um[i] -= eps * v[i];
        }
        const double fd = (sys.energy(up) - sys.energy(um)) / (2.0 * eps);
        const double exact = dot(v, sys.residual(u));
        worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    crit.add(worst <= 1e-5, "central FD of H matches v.F(u) to rel 1e-5 (worst " +
                                fmt(worst) + ")");
    return crit;
}

Criterion criterion_operator() {
    Criterion crit{"operator properties: strong monotonicity and Lipschitz (level 4, 50 pairs)"};
    const FemSystem sys(build_lshape(4), carreau(CarreauParams{1.0, 100.0, 2.0, 1.4}));
    SplitMix64 rng(0xACCE02);
    int mono_viol = 0, lip_viol = 0;
    for (int k = 0; k < 50; ++k) {
        const auto u = random_unit(sys, rng);
        const auto v = random_unit(sys, rng);
        const auto w = random_unit(sys, rng);
        const auto fu = sys.residual(u);
        const auto fv = sys.residual(v);
        std::vector<double> df(fu.size()), duv(fu.size());
        for (size_t i = 0; i < fu.size(); ++i) {
            df[i] = fu[i] - fv[i];
            duv[i] = u[i] - v[i];
        }
        const double d = sys.x_norm(duv);
        if (dot(df, duv) < 1.0 * d * d) ++mono_viol;
        if (std::abs(dot(df, w)) > 3.0 * 100.0 * d) ++lip_viol;
    }
    crit.add(mono_viol == 0, "F(u)-F(v),u-v >= m_mu |u-v|_X^2: " + std::to_string(mono_viol) +
                                 " violations of 50");
    crit.add(lip_viol == 0, "|F(u)-F(v),w| <= 3 M_mu |u-v|_X |w|_X: " +
                                std::to_string(lip_viol) + " violations of 50");
    return crit;
}

Criterion criterion_energy_decay(const TableResult& table_a, const TableResult& table_b) {
    Criterion crit{"energy decay along kacanov FP and all PNCG table runs"};
    int checked = 0;
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const TableResult* table : {&table_a, &table_b}) {
        for (const auto& cell : table->cells) {
            const bool relevant =
                cell.config.mode == RunMode::pncg ||
                (cell.config.mode == RunMode::fixed_point && cell.config.method == Method::kacanov);
            if (!relevant || cell.status != "ok") continue;
            ++checked;
            for (size_t k = 1; k < cell.log.records.size(); ++k) {
                const double drop =
                    cell.log.records[k - 1].energy - cell.log.records[k].energy;
                worst = std::min(worst, drop);
                if (cell.log.records[k].energy > cell.log.records[k - 1].energy + 1e-12)
                    ok = false;
            }
        }
    }
    crit.add(ok && checked == 14, "H(u^{n+1}) <= H(u^n) + 1e-12 at every step of all " +
                                      std::to_string(checked) +
                                      " runs (worst drop " + fmt(worst) + ")");
    return crit;
}

Criterion criterion_sandwich() {
    Criterion crit{"spectral sandwich (level 4, 20 pairs, case (a) constants)"};
    const FemSystem sys(build_lshape(4), carreau(CarreauParams{1.0, 100.0, 2.0, 1.4}));
    SplitMix64 rng(0xACCE06);
    int violations = 0;
    for (int k = 0; k < 20; ++k) {
        std::vector<double> u(sys.num_dofs()), v(sys.num_dofs());
        for (auto& x : u) x = rng.uniform(-1.0, 1.0);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        const auto A = sys.weighted_stiffness(u);
        const double vav = dot(matvec(A, v), v);
        const double vrv = dot(matvec(sys.riesz(), v), v);
        if (!(1.0 * vrv <= vav && vav <= 100.0 * vrv)) ++violations;
    }
    crit.add(violations == 0,
             "1 vRv <= vA(u)v <= 100 vRv: " + std::to_string(violations) + " violations of 20");
    return crit;
}

Criterion criterion_probe() {
    Criterion crit{"FEM sanity: convergence probe ratios across levels 3->5"};
    ExperimentConfig cfg = table_config("a", 1.4, 0.03);
    cfg.output_dir = "acceptance_out/probe";
    const auto report = fem_convergence_probe(cfg, {3, 4, 5});
    for (size_t k = 0; k < report.ratios.size(); ++k) {
        const double r = report.ratios[k];
        crit.add(r >= 1.7 && r <= 2.3,
                 "ratio level " + std::to_string(report.rows[k].level) + "->" +
                     std::to_string(report.rows[k + 1].level) + " in [1.7, 2.3] [got " +
                     fmt(r) + "]");
    }
    return crit;
}

Criterion criterion_linalg() {
    Criterion crit{"linear algebra: solve residuals and the analytic local stiffness"};
    const auto stats = solve_stats();
    crit.add(stats.count > 0 && stats.max_rel_residual <= 1e-12,
             "relative residual <= 1e-12 on all " + std::to_string(stats.count) +
                 " solves in criteria 1-7 (worst " + fmt(stats.max_rel_residual) +
                 ")");
    const auto k = local_stiffness({0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0});
    const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    double worst = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) worst = std::max(worst, std::abs(k[a][b] - expected[a][b]));
    crit.add(worst <= 1e-14,
             "reference-triangle stiffness matches (1/2)[[2,-1,-1],[-1,1,0],[-1,0,1]] (worst " +
                 fmt(worst) + ")");
    return crit;
}

}  // namespace

int main() {
    reset_solve_stats();

    std::printf("computing case (a) table at level 6...\n");
    const auto table_a = run_table(table_config("a", 1.4, 0.03));
    write_table_outputs(table_a);
    std::fputs(format_table_text(table_a).c_str(), stdout);
    std::printf("computing case (b) table at level 6...\n");
    const auto table_b = run_table(table_config("b", 1.05, 0.02));
    write_table_outputs(table_b);
    std::fputs(format_table_text(table_b).c_str(), stdout);

    std::vector<Criterion> criteria;
    criteria.push_back(criterion_table(table_a, table_b));
    criteria.push_back(criterion_linear());
    criteria.push_back(criterion_gradient());
    criteria.push_back(criterion_operator());
    criteria.push_back(criterion_energy_decay(table_a, table_b));
    criteria.push_back(criterion_sandwich());
    criteria.push_back(criterion_probe());
    criteria.push_back(criterion_linalg());

    int failed = 0;
    for (size_t k = 0; k < criteria.size(); ++k) {
        const auto& crit = criteria[k];
        const bool ok = crit.pass();
        if (!ok) ++failed;
        std::printf("[%zu/8] %s  %s\n", k + 1, ok ? "PASS" : "FAIL", crit.name.c_str());
        for (const auto& sub : crit.checks)
            if (!sub.pass || crit.name.rfind("table-1", 0) != 0)
                std::printf("        %s  %s\n", sub.pass ? "pass" : "FAIL", sub.text.c_str());
    }
    std::printf("%d of 8 criteria passed\n", 8 - failed);
    return failed;
}
