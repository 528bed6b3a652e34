#pragma once

#include "descent/fem.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace descent {

enum class Method { zarantonello, kacanov, newton };
enum class RunMode { fixed_point, pncg };
enum class BetaRule { fletcher_reeves, polak_ribiere_plus };

const char* to_string(Method m);
const char* to_string(RunMode m);
const char* to_string(BetaRule b);
Method method_from_string(const std::string& s);
RunMode run_mode_from_string(const std::string& s);
BetaRule beta_rule_from_string(const std::string& s);

struct LineSearchConfig {
    double alpha_max = 4.0;   // bracket cap
    double expansion = 2.0;   // bracket growth factor
    double tol_alpha = 1e-8;  // golden-section absolute width
    int max_evals = 200;
};

struct SolverConfig {
    Method method = Method::kacanov;
    RunMode mode = RunMode::fixed_point;
    BetaRule beta_rule = BetaRule::fletcher_reeves;
    double delta_z = 0.03;  // Zarantonello damping
    double delta_n = 1.0;   // Newton damping
    double tol_x = 1e-6;    // X-norm error tolerance vs reference
    bool relative_tol = false;
    int max_iter = 100;
    LineSearchConfig line_search;
    // diagnostic knobs
    bool force_beta_zero = false;
    std::optional<double> frozen_alpha;
    bool record_iterates = false;

    void validate() const;
    std::string label() const;  // e.g. "kacanov/pncg-fr"
};

struct IterationRecord {
    int step = 0;
    double error_x = 0.0;
    double energy = 0.0;
    double alpha = 0.0;  // step size used to reach this iterate (delta for FP); NaN at step 0
    double beta = 0.0;   // conjugacy parameter computed at this iterate (PNCG); NaN otherwise
};

struct IterationLog {
    std::vector<IterationRecord> records;  // contiguous in step from 0
    bool converged = false;
    int steps_to_tol = -1;  // -1 marks did-not-converge
    std::string note;
    std::vector<std::vector<double>> iterates;  // filled iff record_iterates
};

// Thrown with the iterate index when an inner solve fails mid-run.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// P[u] application with cached factorisation: 1/delta_Z * riesz (Zarantonello),
// A(u) (Kacanov), 1/delta_N * F'(u) (Newton). The Zarantonello factor is built
// once; the others refactor per update.
class Preconditioner {
  public:
    Preconditioner(Method method, const FemSystem& sys, const SolverConfig& cfg);

    void update(std::span<const double> u);  // refactorise at the new iterate
    std::vector<double> apply_inverse(std::span<const double> rhs) const;

  private:
    Method method_;
    const FemSystem* sys_;
    double delta_ = 1.0;
    std::optional<CholeskyFactor> factor_;
};

// P[u]^{-1} rhs for a single iterate (convenience over Preconditioner).
std::vector<double> precond_apply(Method method, const FemSystem& sys, std::span<const double> u,
                                  std::span<const double> rhs, const SolverConfig& cfg);

// One step of the unified scheme: u - P[u]^{-1} F(u).
std::vector<double> fixed_point_step(Method method, const FemSystem& sys,
                                     std::span<const double> u, const SolverConfig& cfg);

struct LineSearchResult {
    double alpha = 0.0;
    int evals = 0;
    bool hit_eval_budget = false;
};

// Derivative-free 1D minimisation of H(u + alpha d) over alpha >= 0:
// doubling bracket capped at alpha_max, golden section to width tol_alpha,
// one final parabolic-fit candidate. Guarantees H(u + alpha d) <= H(u).
LineSearchResult line_search(const EnergyLine& energy, const LineSearchConfig& cfg);
LineSearchResult line_search(const FemSystem& sys, std::span<const double> u,
                             std::span<const double> d, const LineSearchConfig& cfg);

// Signals F(u^n) = 0 in a beta denominator, i.e. convergence already reached.
struct ZeroDenominator : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// State at one iterate entering the beta rules: F(u), z = P[u]^{-1} F(u),
// and the quadratic form rho = F(u) . z.
struct PrecondState {
    std::vector<double> residual;
    std::vector<double> z;
    double rho = 0.0;
};

double beta_fletcher_reeves(const PrecondState& next, const PrecondState& prev);
double beta_polak_ribiere_plus(const PrecondState& next, const PrecondState& prev);

// Plain unified iteration u^{n+1} = u^n - P[u^n]^{-1} F(u^n) until
// ||u^n - u_ref||_X <= tol or max_iter.
IterationLog fixed_point_run(Method method, const FemSystem& sys, const SolverConfig& cfg,
                             std::span<const double> u_ref);

// Preconditioned nonlinear conjugate gradient:
//   d^0 = -P(u^0)^{-1} F(u^0)
//   repeat: alpha via line search; u^{n+1} = u^n + alpha d^n;
//           beta via rule; d^{n+1} = -P(u^{n+1})^{-1} F(u^{n+1}) + beta d^n.
IterationLog pncg_run(Method method, const FemSystem& sys, const SolverConfig& cfg,
                      std::span<const double> u_ref);

}  // namespace descent
