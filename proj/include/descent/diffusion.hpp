#pragma once

#include <functional>
#include <string>

namespace descent {

// Nonlinear diffusion coefficient mu acting on t = |grad u|^2, together with
// its derivative, its potential psi(s) = 1/2 * int_0^s mu(tau) dtau, and the
// two-sided monotonicity constants: for all t >= s >= 0,
//     m_mu (t - s) <= mu(t^2) t - mu(s^2) s <= M_mu (t - s).
// Immutable and stateless; safe for concurrent evaluation.
struct DiffusionModel {
    std::function<double(double)> mu;
    std::function<double(double)> mu_prime;
    std::function<double(double)> psi;
    double m_mu = 0.0;
    double M_mu = 0.0;
    std::string name;
};

// mu(t) = mu_inf + (mu_0 - mu_inf) (1 + lambda t)^((r-2)/2), shear-thinning
// for r in (1,2), bounded between mu_inf and mu_0.
struct CarreauParams {
    double mu_inf = 1.0;
    double mu_0 = 100.0;
    double lambda = 2.0;
    double r = 1.4;

    void validate() const;  // throws std::invalid_argument on bad ranges
};

// Carreau model with closed-form psi; m_mu = mu_inf, M_mu = mu_0.
DiffusionModel carreau(const CarreauParams& params);

// Constant coefficient, the linear debug model; m_mu = M_mu = c.
DiffusionModel constant_diffusion(double c);

// Two-sided monotonicity sampled on a deterministic grid over [0, 1e4] plus
// pseudo-random pairs t >= s. Margins are reported relative to the difference
// quotient q = (mu(t^2) t - mu(s^2) s) / (t - s): worst_lower = min(q - m_mu),
// worst_upper = min(M_mu - q). Failure is a report, not an exception.
struct MonotonicityReport {
    bool pass = false;
    double worst_lower = 0.0;
    double worst_upper = 0.0;
    double worst_lower_t = 0.0, worst_lower_s = 0.0;
    double worst_upper_t = 0.0, worst_upper_s = 0.0;
};

MonotonicityReport check_monotonicity(const DiffusionModel& model, int samples);

}  // namespace descent
