#pragma once

#include "descent/diffusion.hpp"
#include "descent/linalg.hpp"
#include "descent/mesh.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace descent {

// Prescribed exact solution; its weak form manufactures the load vector.
struct ManufacturedSolution {
    std::function<double(double, double)> value;
    std::function<std::array<double, 2>(double, double)> gradient;

    static ManufacturedSolution sin_sin();  // sin(pi x) sin(pi y)
    static ManufacturedSolution zero();     // debug override
};

// Element stiffness int_K grad(phi_i).grad(phi_j) for an arbitrary triangle.
std::array<std::array<double, 3>, 3> local_stiffness(const std::array<double, 2>& p0,
                                                     const std::array<double, 2>& p1,
                                                     const std::array<double, 2>& p2);

// Energy restricted to a line: alpha -> H(u + alpha d). Per-triangle quadratic
// gradient coefficients are precomputed, so one evaluation is a single pass
// over the triangles.
class EnergyLine {
  public:
    double operator()(double alpha) const;

  private:
    friend class FemSystem;
    std::vector<double> c0_, c1_, c2_, area_;  // |g_u|^2, 2 g_u.g_d, |g_d|^2 per triangle
    double load_u_ = 0.0, load_d_ = 0.0;
    const DiffusionModel* model_ = nullptr;
};

// P1 discretisation of the quasilinear model problem on the L-shape with
// homogeneous Dirichlet conditions imposed by interior-dof elimination.
// Immutable after construction; all matrices share one sparsity pattern.
class FemSystem {
  public:
    FemSystem(Mesh mesh, DiffusionModel model,
              ManufacturedSolution exact = ManufacturedSolution::sin_sin(),
              int load_quad_degree = 5);

    const Mesh& mesh() const { return mesh_; }
    const DofMap& dofs() const { return dofs_; }
    int num_dofs() const { return dofs_.count; }
    const DiffusionModel& model() const { return model_; }
    const ManufacturedSolution& exact() const { return exact_; }

    // Matrix of the X inner product (grad.,grad.)_{L2} on interior dofs.
    const SparseSpdMatrix& riesz() const { return riesz_; }
    // b_i = int mu(|grad u*|^2) grad u* . grad xi_i, fixed-order Gauss quadrature.
    const std::vector<double>& load() const { return load_; }

    // Constant gradient of the P1 interpolant per triangle (boundary values 0).
    std::vector<std::array<double, 2>> element_gradients(std::span<const double> u) const;

    // A(u)_ij = sum_K mu(|grad u|K|^2) int_K grad xi_j . grad xi_i
    SparseSpdMatrix weighted_stiffness(std::span<const double> u) const;

    // F'(u): 2 mu'(g^2)(g.grad xi_j)(g.grad xi_i)|K| + mu(g^2) int_K grad xi_j . grad xi_i
    SparseSpdMatrix newton_jacobian(std::span<const double> u) const;

    // F_h(u) = A(u) u - b
    std::vector<double> residual(std::span<const double> u) const;

    // H(u) = sum_K psi(|grad u|K|^2)|K| - b.u
    double energy(std::span<const double> u) const;

    double x_norm(std::span<const double> v) const;  // sqrt(v^T R v)

    EnergyLine energy_line(std::span<const double> u, std::span<const double> d) const;

    // Nodal interpolation of a function at the interior vertices.
    std::vector<double> interpolate(const ManufacturedSolution& f) const;

    // ||u_h - f||_X with the gradient of f integrated by quadrature.
    double error_vs_exact(std::span<const double> u, const ManufacturedSolution& f,
                          int quad_degree = 5) const;

  private:
    void check_length(std::span<const double> u) const;
    template <class ElementWeights>
    SparseSpdMatrix assemble(ElementWeights&& weights) const;

    Mesh mesh_;
    DofMap dofs_;
    DiffusionModel model_;
    ManufacturedSolution exact_;
    std::vector<double> area_;                              // per triangle
    std::vector<std::array<std::array<double, 2>, 3>> grad_;  // basis gradients per triangle
    std::vector<std::array<int, 3>> tri_dofs_;              // dof or -1 per local vertex
    std::shared_ptr<const CsrPattern> pattern_;
    SparseSpdMatrix riesz_;
    std::vector<double> load_;
};

}  // namespace descent
