#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace descent {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a Cholesky factorisation hits a nonpositive pivot.
struct NotSpd : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shared CSR sparsity, column indices sorted within each row.
struct CsrPattern {
    int n = 0;
    std::vector<int> row_offsets;  // size n+1
    std::vector<int> col_indices;  // size nnz

    int nnz() const { return static_cast<int>(col_indices.size()); }
    // Position of entry (i,j) in the value array; -1 if not present.
    int index_of(int i, int j) const;
};

// Sparse symmetric-positive-definite matrix: shared pattern + value array.
// Structural symmetry and positive diagonal are maintained by the assembly
// routines; is_structurally_symmetric() verifies the contract.
class SparseSpdMatrix {
  public:
    SparseSpdMatrix() = default;
    explicit SparseSpdMatrix(std::shared_ptr<const CsrPattern> pattern)
        : pattern_(std::move(pattern)), values_(pattern_->col_indices.size(), 0.0) {}

    int dimension() const { return pattern_ ? pattern_->n : 0; }
    const CsrPattern& pattern() const { return *pattern_; }
    const std::shared_ptr<const CsrPattern>& pattern_ptr() const { return pattern_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double entry(int i, int j) const;  // 0 if not stored
    bool is_structurally_symmetric(double tol = 0.0) const;
    bool has_positive_diagonal() const;

  private:
    std::shared_ptr<const CsrPattern> pattern_;
    std::vector<double> values_;
};

// Builds a CSR matrix from (i,j,v) triplets; duplicates are summed, columns sorted.
struct Triplet {
    int row, col;
    double value;
};
SparseSpdMatrix csr_from_triplets(int n, const std::vector<Triplet>& triplets);

// y = A*v, deterministic CSR traversal order.
std::vector<double> matvec(const SparseSpdMatrix& A, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

// Sparse Cholesky (fill-reducing ordering). Supports refactorisation with new
// values on the same pattern, reusing the symbolic analysis.
class CholeskyFactor {
  public:
    explicit CholeskyFactor(const SparseSpdMatrix& A);
    ~CholeskyFactor();
    CholeskyFactor(CholeskyFactor&&) noexcept;
    CholeskyFactor& operator=(CholeskyFactor&&) noexcept;

    void refactor(const SparseSpdMatrix& A);  // same pattern required
    std::vector<double> solve(std::span<const double> b) const;
    int dimension() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Direct solve with relative residual ||Ax-b||/||b|| <= 1e-12 (b = 0 gives x = 0).
// Cholesky by default; iterative refinement and a Jacobi-CG polish back the
// guarantee if the factored solve falls short. Throws NotSpd / DimensionMismatch.
std::vector<double> spd_solve(const SparseSpdMatrix& A, std::span<const double> b);

// Conjugate gradients with Jacobi preconditioning, the fallback backend.
std::vector<double> cg_solve(const SparseSpdMatrix& A, std::span<const double> b,
                             double rel_tol = 1e-12, int max_iter = -1,
                             std::span<const double> x0 = {});

// Instrumentation: worst relative residual over all spd_solve/CholeskyFactor::solve
// calls since the last reset. Used by the acceptance suite.
struct SolveStats {
    long long count = 0;
    double max_rel_residual = 0.0;
};
SolveStats solve_stats();
void reset_solve_stats();

}  // namespace descent
