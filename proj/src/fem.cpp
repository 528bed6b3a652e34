#include "descent/fem.hpp"

#include "descent/quadrature.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace descent {

ManufacturedSolution ManufacturedSolution::sin_sin() {
    ManufacturedSolution ms;
    ms.value = [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
    ms.gradient = [](double x, double y) -> std::array<double, 2> {
        return {M_PI * std::cos(M_PI * x) * std::sin(M_PI * y),
                M_PI * std::sin(M_PI * x) * std::cos(M_PI * y)};
    };
    return ms;
}

ManufacturedSolution ManufacturedSolution::zero() {
    ManufacturedSolution ms;
    ms.value = [](double, double) { return 0.0; };
    ms.gradient = [](double, double) -> std::array<double, 2> { return {0.0, 0.0}; };
    return ms;
}

std::array<std::array<double, 3>, 3> local_stiffness(const std::array<double, 2>& p0,
                                                     const std::array<double, 2>& p1,
                                                     const std::array<double, 2>& p2) {
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    const double area = 0.5 * det;
    const std::array<std::array<double, 2>, 3> g = {{
        {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det},
        {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det},
        {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det},
    }};
    std::array<std::array<double, 3>, 3> k{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            k[a][b] = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
    return k;
}

namespace {

// compensated accumulation: energy comparisons in the line search sit close to
// the rounding floor of a naive sum over ~1e5 triangles
struct KahanAcc {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double kahan_dot(std::span<const double> a, std::span<const double> b) {
    KahanAcc acc;
    for (size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
    return acc.sum;
}

}  // namespace

double EnergyLine::operator()(double alpha) const {
    KahanAcc acc;
    for (size_t t = 0; t < area_.size(); ++t) {
        const double s = std::max(0.0, c0_[t] + alpha * (c1_[t] + alpha * c2_[t]));
        acc.add(model_->psi(s) * area_[t]);
    }
    return acc.sum - (load_u_ + alpha * load_d_);
}

FemSystem::FemSystem(Mesh mesh, DiffusionModel model, ManufacturedSolution exact,
                     int load_quad_degree)
    : mesh_(std::move(mesh)), model_(std::move(model)), exact_(std::move(exact)) {
    dofs_ = interior_dof_map(mesh_);
    const int nt = mesh_.num_triangles();
    area_.resize(nt);
    grad_.resize(nt);
    tri_dofs_.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh_.triangles[t];
        const auto& a = mesh_.vertices[tri[0]];
        const auto& b = mesh_.vertices[tri[1]];
        const auto& c = mesh_.vertices[tri[2]];
        const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if (det <= 0.0) throw std::invalid_argument("FemSystem: triangle with nonpositive area");
        area_[t] = 0.5 * det;
        grad_[t] = {{
            {(b[1] - c[1]) / det, (c[0] - b[0]) / det},
            {(c[1] - a[1]) / det, (a[0] - c[0]) / det},
            {(a[1] - b[1]) / det, (b[0] - a[0]) / det},
        }};
        for (int v = 0; v < 3; ++v) tri_dofs_[t][v] = dofs_.vertex_to_dof[tri[v]];
    }

    // one shared sparsity pattern for riesz, weighted stiffness and Jacobian
    std::vector<std::set<int>> adjacency(dofs_.count);
    for (int t = 0; t < nt; ++t) {
        for (int a = 0; a < 3; ++a) {
            const int i = tri_dofs_[t][a];
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const int j = tri_dofs_[t][b];
                if (j >= 0) adjacency[i].insert(j);
            }
        }
    }
    auto pattern = std::make_shared<CsrPattern>();
    pattern->n = dofs_.count;
    pattern->row_offsets.assign(dofs_.count + 1, 0);
    for (int i = 0; i < dofs_.count; ++i) {
        for (int j : adjacency[i]) pattern->col_indices.push_back(j);
        pattern->row_offsets[i + 1] = static_cast<int>(pattern->col_indices.size());
    }
    pattern_ = std::move(pattern);

    riesz_ = assemble([](int) { return 1.0; });

    // load: b_i = sum_K sum_q w_q mu(|grad u*|^2) grad u* . grad xi_i |K|
    load_.assign(dofs_.count, 0.0);
    const auto rule = triangle_quadrature(load_quad_degree);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh_.triangles[t];
        const auto& p0 = mesh_.vertices[tri[0]];
        const auto& p1 = mesh_.vertices[tri[1]];
        const auto& p2 = mesh_.vertices[tri[2]];
        for (const auto& q : rule) {
            const double l0 = 1.0 - q.l1 - q.l2;
            const double x = l0 * p0[0] + q.l1 * p1[0] + q.l2 * p2[0];
            const double y = l0 * p0[1] + q.l1 * p1[1] + q.l2 * p2[1];
            const auto g = exact_.gradient(x, y);
            const double mu = model_.mu(g[0] * g[0] + g[1] * g[1]);
            const double scale = mu * q.weight * area_[t];
            for (int a = 0; a < 3; ++a) {
                const int i = tri_dofs_[t][a];
                if (i >= 0) load_[i] += scale * (g[0] * grad_[t][a][0] + g[1] * grad_[t][a][1]);
            }
        }
    }
}

void FemSystem::check_length(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != dofs_.count)
        throw DimensionMismatch("FemSystem: coefficient vector length != number of dofs");
}

std::vector<std::array<double, 2>> FemSystem::element_gradients(std::span<const double> u) const {
    check_length(u);
    std::vector<std::array<double, 2>> g(mesh_.num_triangles(), {0.0, 0.0});
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        double gx = 0.0, gy = 0.0;
        for (int a = 0; a < 3; ++a) {
            const int i = tri_dofs_[t][a];
            if (i >= 0) {
                gx += u[i] * grad_[t][a][0];
                gy += u[i] * grad_[t][a][1];
            }
        }
        g[t] = {gx, gy};
    }
    return g;
}

template <class ElementWeights>
SparseSpdMatrix FemSystem::assemble(ElementWeights&& weights) const {
    SparseSpdMatrix A(pattern_);
    auto& vals = A.values();
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const double w = weights(t);
        for (int a = 0; a < 3; ++a) {
            const int i = tri_dofs_[t][a];
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const int j = tri_dofs_[t][b];
                if (j < 0) continue;
                const int k = pattern_->index_of(i, j);
                vals[k] += w * area_[t] *
                           (grad_[t][a][0] * grad_[t][b][0] + grad_[t][a][1] * grad_[t][b][1]);
            }
        }
    }
    return A;
}

SparseSpdMatrix FemSystem::weighted_stiffness(std::span<const double> u) const {
    check_length(u);
    const auto g = element_gradients(u);
    return assemble([&](int t) { return model_.mu(g[t][0] * g[t][0] + g[t][1] * g[t][1]); });
}

SparseSpdMatrix FemSystem::newton_jacobian(std::span<const double> u) const {
    check_length(u);
    const auto g = element_gradients(u);
    SparseSpdMatrix A = assemble([&](int t) { return model_.mu(g[t][0] * g[t][0] + g[t][1] * g[t][1]); });
    auto& vals = A.values();
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const double t2 = g[t][0] * g[t][0] + g[t][1] * g[t][1];
        const double w = 2.0 * model_.mu_prime(t2) * area_[t];
        if (w == 0.0) continue;
        std::array<double, 3> gb;  // grad u . grad xi_a
        for (int a = 0; a < 3; ++a)
            gb[a] = g[t][0] * grad_[t][a][0] + g[t][1] * grad_[t][a][1];
        for (int a = 0; a < 3; ++a) {
            const int i = tri_dofs_[t][a];
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const int j = tri_dofs_[t][b];
                if (j < 0) continue;
                vals[pattern_->index_of(i, j)] += w * gb[a] * gb[b];
            }
        }
    }
    return A;
}

std::vector<double> FemSystem::residual(std::span<const double> u) const {
    check_length(u);
    auto r = matvec(weighted_stiffness(u), u);
    for (int i = 0; i < dofs_.count; ++i) r[i] -= load_[i];
    return r;
}

double FemSystem::energy(std::span<const double> u) const {
    check_length(u);
    const auto g = element_gradients(u);
    KahanAcc acc;
    for (int t = 0; t < mesh_.num_triangles(); ++t)
        acc.add(model_.psi(g[t][0] * g[t][0] + g[t][1] * g[t][1]) * area_[t]);
    return acc.sum - kahan_dot(load_, u);
}

double FemSystem::x_norm(std::span<const double> v) const {
    check_length(v);
    if (dofs_.count == 0) return 0.0;
    return std::sqrt(std::max(0.0, dot(matvec(riesz_, v), v)));
}

EnergyLine FemSystem::energy_line(std::span<const double> u, std::span<const double> d) const {
    check_length(u);
    check_length(d);
    EnergyLine line;
    const auto gu = element_gradients(u);
    const auto gd = element_gradients(d);
    const int nt = mesh_.num_triangles();
    line.c0_.resize(nt);
    line.c1_.resize(nt);
    line.c2_.resize(nt);
    line.area_ = area_;
    for (int t = 0; t < nt; ++t) {
        line.c0_[t] = gu[t][0] * gu[t][0] + gu[t][1] * gu[t][1];
        line.c1_[t] = 2.0 * (gu[t][0] * gd[t][0] + gu[t][1] * gd[t][1]);
        line.c2_[t] = gd[t][0] * gd[t][0] + gd[t][1] * gd[t][1];
    }
    line.load_u_ = kahan_dot(load_, u);
    line.load_d_ = kahan_dot(load_, d);
    line.model_ = &model_;
    return line;
}

std::vector<double> FemSystem::interpolate(const ManufacturedSolution& f) const {
    std::vector<double> u(dofs_.count);
    for (int k = 0; k < dofs_.count; ++k) {
        const auto& p = mesh_.vertices[dofs_.dof_to_vertex[k]];
        u[k] = f.value(p[0], p[1]);
    }
    return u;
}

double FemSystem::error_vs_exact(std::span<const double> u, const ManufacturedSolution& f,
                                 int quad_degree) const {
    check_length(u);
    const auto gh = element_gradients(u);
    const auto rule = triangle_quadrature(quad_degree);
    double sum = 0.0;
    for (int t = 0; t < mesh_.num_triangles(); ++t) {
        const auto& tri = mesh_.triangles[t];
        const auto& p0 = mesh_.vertices[tri[0]];
        const auto& p1 = mesh_.vertices[tri[1]];
        const auto& p2 = mesh_.vertices[tri[2]];
        double acc = 0.0;
        for (const auto& q : rule) {
            const double l0 = 1.0 - q.l1 - q.l2;
            const double x = l0 * p0[0] + q.l1 * p1[0] + q.l2 * p2[0];
            const double y = l0 * p0[1] + q.l1 * p1[1] + q.l2 * p2[1];
            const auto g = f.gradient(x, y);
            const double dx = gh[t][0] - g[0];
            const double dy = gh[t][1] - g[1];
            acc += q.weight * (dx * dx + dy * dy);
        }
        sum += acc * area_[t];
    }
    return std::sqrt(sum);
}

}  // namespace descent
