#include "descent/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace descent {

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be positive");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);  // descending x -> ascending node
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
}

std::vector<TriQuadPoint> triangle_quadrature(int degree) {
    if (degree < 0) throw std::invalid_argument("triangle_quadrature: degree must be >= 0");
    if (degree <= 5) {
        // symmetric 7-point rule, exact through degree 5
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
        const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
        return {
            {1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
            {a1, a1, w1}, {1.0 - 2.0 * a1, a1, w1}, {a1, 1.0 - 2.0 * a1, w1},
            {a2, a2, w2}, {1.0 - 2.0 * a2, a2, w2}, {a2, 1.0 - 2.0 * a2, w2},
        };
    }
    // Duffy map (l1,l2) = (xi, eta(1-xi)); Jacobian (1-xi). Tensor Gauss-Legendre
    // with n points is exact for l1-degree <= 2n-2 and l2-degree <= 2n-1 of the
    // mapped integrand, so n = degree/2 + 2 covers polynomials up to `degree`.
    const int n = degree / 2 + 2;
    std::vector<double> gx, gw;
    gauss_legendre_01(n, gx, gw);
    std::vector<TriQuadPoint> rule;
    rule.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double xi = gx[i], eta = gx[j];
            // factor 2: reference triangle has area 1/2, weights normalised to sum 1
            rule.push_back({xi, eta * (1.0 - xi), 2.0 * gw[i] * gw[j] * (1.0 - xi)});
        }
    }
    return rule;
}

}  // namespace descent
