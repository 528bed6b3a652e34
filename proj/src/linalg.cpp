#include "descent/linalg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace descent {

namespace {

SolveStats g_stats;

void record_residual(double rel) {
    ++g_stats.count;
    g_stats.max_rel_residual = std::max(g_stats.max_rel_residual, rel);
}

void record_solve(const SparseSpdMatrix& A, std::span<const double> b,
                  std::span<const double> x) {
    const auto Ax = matvec(A, x);
    double rnorm = 0.0, bnorm = 0.0;
    for (size_t i = 0; i < Ax.size(); ++i) {
        const double r = Ax[i] - b[i];
        rnorm += r * r;
        bnorm += b[i] * b[i];
    }
    record_residual(bnorm > 0.0 ? std::sqrt(rnorm / bnorm) : std::sqrt(rnorm));
}

}  // namespace

SolveStats solve_stats() { return g_stats; }
void reset_solve_stats() { g_stats = {}; }

int CsrPattern::index_of(int i, int j) const {
    const int* begin = col_indices.data() + row_offsets[i];
    const int* end = col_indices.data() + row_offsets[i + 1];
    const int* it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return -1;
    return static_cast<int>(it - col_indices.data());
}

double SparseSpdMatrix::entry(int i, int j) const {
    const int k = pattern_->index_of(i, j);
    return k < 0 ? 0.0 : values_[k];
}

bool SparseSpdMatrix::is_structurally_symmetric(double tol) const {
    const auto& p = *pattern_;
    for (int i = 0; i < p.n; ++i) {
        for (int k = p.row_offsets[i]; k < p.row_offsets[i + 1]; ++k) {
            const int j = p.col_indices[k];
            const int k2 = p.index_of(j, i);
            if (k2 < 0) return false;
            if (std::abs(values_[k] - values_[k2]) > tol) return false;
        }
    }
    return true;
}

bool SparseSpdMatrix::has_positive_diagonal() const {
    const auto& p = *pattern_;
    for (int i = 0; i < p.n; ++i) {
        const int k = p.index_of(i, i);
        if (k < 0 || values_[k] <= 0.0) return false;
    }
    return true;
}

SparseSpdMatrix csr_from_triplets(int n, const std::vector<Triplet>& triplets) {
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw DimensionMismatch("csr_from_triplets: index out of range");
        rows[t.row].emplace_back(t.col, t.value);
    }
    auto pattern = std::make_shared<CsrPattern>();
    pattern->n = n;
    pattern->row_offsets.assign(n + 1, 0);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
        auto& row = rows[i];
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t k = 0; k < row.size();) {
            double sum = 0.0;
            size_t k2 = k;
            while (k2 < row.size() && row[k2].first == row[k].first) sum += row[k2++].second;
            pattern->col_indices.push_back(row[k].first);
            values.push_back(sum);
            k = k2;
        }
        pattern->row_offsets[i + 1] = static_cast<int>(pattern->col_indices.size());
    }
    SparseSpdMatrix A(std::shared_ptr<const CsrPattern>(std::move(pattern)));
    A.values() = std::move(values);
    return A;
}

std::vector<double> matvec(const SparseSpdMatrix& A, std::span<const double> v) {
    const auto& p = A.pattern();
    if (static_cast<int>(v.size()) != p.n)
        throw DimensionMismatch("matvec: vector length does not match matrix dimension");
    std::vector<double> y(p.n, 0.0);
    const auto& vals = A.values();
    for (int i = 0; i < p.n; ++i) {
        double sum = 0.0;
        for (int k = p.row_offsets[i]; k < p.row_offsets[i + 1]; ++k)
            sum += vals[k] * v[p.col_indices[k]];
        y[i] = sum;
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct CholeskyFactor::Impl {
    EigenSparse mat;
    Eigen::SimplicialLLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
    bool analyzed = false;
    std::shared_ptr<const CsrPattern> pattern;

    void load(const SparseSpdMatrix& A) {
        const auto& p = A.pattern();
        if (pattern.get() != &p) {
            // CSR of a symmetric matrix with sorted columns is also its CSC,
            // so the value ordering transfers one-to-one.
            mat.resize(p.n, p.n);
            mat.makeCompressed();
            mat.resizeNonZeros(p.nnz());
            std::copy(p.row_offsets.begin(), p.row_offsets.end(), mat.outerIndexPtr());
            std::copy(p.col_indices.begin(), p.col_indices.end(), mat.innerIndexPtr());
            pattern = A.pattern_ptr();
            analyzed = false;
        }
        std::memcpy(mat.valuePtr(), A.values().data(), sizeof(double) * A.values().size());
        if (!analyzed) {
            llt.analyzePattern(mat);
            analyzed = true;
        }
        llt.factorize(mat);
        if (llt.info() != Eigen::Success)
            throw NotSpd("CholeskyFactor: nonpositive pivot, matrix is not SPD");
    }
};

CholeskyFactor::CholeskyFactor(const SparseSpdMatrix& A) : impl_(std::make_unique<Impl>()) {
    impl_->load(A);
}
CholeskyFactor::~CholeskyFactor() = default;
CholeskyFactor::CholeskyFactor(CholeskyFactor&&) noexcept = default;
CholeskyFactor& CholeskyFactor::operator=(CholeskyFactor&&) noexcept = default;

void CholeskyFactor::refactor(const SparseSpdMatrix& A) { impl_->load(A); }

int CholeskyFactor::dimension() const { return static_cast<int>(impl_->mat.rows()); }

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
    if (static_cast<int>(b.size()) != dimension())
        throw DimensionMismatch("CholeskyFactor::solve: right-hand side length mismatch");
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), b.size());
    Eigen::VectorXd x = impl_->llt.solve(bm);
    const double bnorm = bm.norm();
    auto rel_residual = [&] {
        const double r = (impl_->mat * x - bm).norm();
        return bnorm > 0.0 ? r / bnorm : r;
    };
    double rel = rel_residual();
    for (int pass = 0; pass < 2 && rel > 1e-12; ++pass) {  // iterative refinement
        x += impl_->llt.solve(bm - impl_->mat * x);
        rel = rel_residual();
    }
    record_residual(rel);
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> cg_solve(const SparseSpdMatrix& A, std::span<const double> b,
                             double rel_tol, int max_iter, std::span<const double> x0) {
    const int n = A.dimension();
    if (static_cast<int>(b.size()) != n)
        throw DimensionMismatch("cg_solve: right-hand side length mismatch");
    if (max_iter < 0) max_iter = 20 * n + 100;

    const double bnorm = norm2(b);
    std::vector<double> x(n, 0.0);
    if (bnorm == 0.0) return x;
    if (!x0.empty()) x.assign(x0.begin(), x0.end());

    std::vector<double> inv_diag(n);
    for (int i = 0; i < n; ++i) {
        const double d = A.entry(i, i);
        if (d <= 0.0) throw NotSpd("cg_solve: nonpositive diagonal entry");
        inv_diag[i] = 1.0 / d;
    }

    std::vector<double> r(n), z(n), p(n), Ap;
    const auto Ax = matvec(A, x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - Ax[i];
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        if (norm2(r) <= rel_tol * bnorm) break;
        Ap = matvec(A, p);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0) throw NotSpd("cg_solve: nonpositive curvature");
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    record_solve(A, b, x);
    return x;
}

std::vector<double> spd_solve(const SparseSpdMatrix& A, std::span<const double> b) {
    const int n = A.dimension();
    if (static_cast<int>(b.size()) != n)
        throw DimensionMismatch("spd_solve: right-hand side length mismatch");
    if (n == 0) return {};
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::vector<double> x(n, 0.0);
        record_solve(A, b, x);
        return x;
    }

    CholeskyFactor chol(A);
    auto x = chol.solve(b);

    auto residual = [&](const std::vector<double>& xv) {
        auto r = matvec(A, xv);
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return r;
    };

    constexpr double target = 1e-12;
    auto r = residual(x);
    if (norm2(r) > target * bnorm) {
        // iterative refinement, then CG polish as a last resort
        for (int pass = 0; pass < 3 && norm2(r) > target * bnorm; ++pass) {
            const auto dx = chol.solve(r);
            for (int i = 0; i < n; ++i) x[i] += dx[i];
            r = residual(x);
        }
        if (norm2(r) > target * bnorm) x = cg_solve(A, b, target, -1, x);
    }
    record_solve(A, b, x);
    return x;
}

}  // namespace descent
