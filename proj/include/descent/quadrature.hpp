#pragma once

#include <vector>

namespace descent {

// Quadrature point in barycentric coordinates (l0 = 1 - l1 - l2);
// weights sum to 1, so int_K f = |K| * sum_q w_q f(x_q).
struct TriQuadPoint {
    double l1, l2, weight;
};

// Rule exact for polynomials up to `degree` on a triangle. Degrees <= 5 use
// the symmetric 7-point rule; higher degrees use a Duffy-mapped tensor
// Gauss-Legendre rule.
std::vector<TriQuadPoint> triangle_quadrature(int degree);

// Gauss-Legendre nodes and weights on [0,1] (weights sum to 1).
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace descent
