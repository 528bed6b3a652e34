#include "descent/diffusion.hpp"

#include "descent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace descent {

void CarreauParams::validate() const {
    if (!(mu_inf > 0.0)) throw std::invalid_argument("carreau: mu_inf must be positive");
    if (!(mu_0 > mu_inf)) throw std::invalid_argument("carreau: mu_0 must exceed mu_inf");
    if (!(lambda > 0.0)) throw std::invalid_argument("carreau: lambda must be positive");
    if (!(r > 1.0 && r < 2.0)) throw std::invalid_argument("carreau: r must lie in (1,2)");
}

DiffusionModel carreau(const CarreauParams& params) {
    params.validate();
    const double mu_inf = params.mu_inf;
    const double dmu = params.mu_0 - params.mu_inf;
    const double lambda = params.lambda;
    const double r = params.r;

    DiffusionModel model;
    model.name = "carreau";
    model.m_mu = params.mu_inf;
    model.M_mu = params.mu_0;
    model.mu = [=](double t) { return mu_inf + dmu * std::pow(1.0 + lambda * t, (r - 2.0) / 2.0); };
    model.mu_prime = [=](double t) {
        return dmu * lambda * (r - 2.0) / 2.0 * std::pow(1.0 + lambda * t, (r - 4.0) / 2.0);
    };
    // psi(s) = 1/2 [ mu_inf s + dmu * 2/(lambda r) ((1+lambda s)^(r/2) - 1) ]
    model.psi = [=](double s) {
        return 0.5 * (mu_inf * s +
                      dmu * 2.0 / (lambda * r) * (std::pow(1.0 + lambda * s, r / 2.0) - 1.0));
    };
    return model;
}

DiffusionModel constant_diffusion(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("constant_diffusion: coefficient must be positive");
    DiffusionModel model;
    model.name = "constant";
    model.m_mu = c;
    model.M_mu = c;
    model.mu = [c](double) { return c; };
    model.mu_prime = [](double) { return 0.0; };
    model.psi = [c](double s) { return 0.5 * c * s; };
    return model;
}

MonotonicityReport check_monotonicity(const DiffusionModel& model, int samples) {
    if (samples < 2) throw std::invalid_argument("check_monotonicity: samples must be >= 2");

    constexpr double t_max = 1e4;
    std::vector<std::pair<double, double>> pairs;  // (t, s) with t > s

    // deterministic grid, quadratically clustered near 0 where mu varies most
    std::vector<double> grid(samples);
    for (int k = 0; k < samples; ++k) {
        const double x = static_cast<double>(k) / (samples - 1);
        grid[k] = t_max * x * x;
    }
    for (int k = 0; k + 1 < samples; ++k) pairs.emplace_back(grid[k + 1], grid[k]);
    for (int k = 0; k + 2 < samples; ++k) pairs.emplace_back(grid[k + 2], grid[k]);
    for (int k = 1; k < samples; ++k) pairs.emplace_back(grid[k], 0.0);

    SplitMix64 rng(0x5eedULL);
    for (int k = 0; k < samples; ++k) {
        double a = rng.uniform(0.0, t_max);
        double b = rng.uniform(0.0, t_max);
        if (a < b) std::swap(a, b);
        if (a > b) pairs.emplace_back(a, b);
    }

    MonotonicityReport report;
    report.worst_lower = std::numeric_limits<double>::infinity();
    report.worst_upper = std::numeric_limits<double>::infinity();
    auto flow = [&](double t) { return model.mu(t * t) * t; };
    for (const auto& [t, s] : pairs) {
        const double q = (flow(t) - flow(s)) / (t - s);
        if (q - model.m_mu < report.worst_lower) {
            report.worst_lower = q - model.m_mu;
            report.worst_lower_t = t;
            report.worst_lower_s = s;
        }
        if (model.M_mu - q < report.worst_upper) {
            report.worst_upper = model.M_mu - q;
            report.worst_upper_t = t;
            report.worst_upper_s = s;
        }
    }
    const double slack = 1e-10 * std::max(1.0, model.M_mu);
    report.pass = report.worst_lower >= -slack && report.worst_upper >= -slack;
    return report;
}

}  // namespace descent
