#pragma once

#include "daflow/mls.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace daflow {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse rows; column ids strictly increasing within a row.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<double> vals;

    std::size_t nnz() const { return vals.size(); }
    /// Entry (i, j) or 0 when not stored.
    double at(std::size_t i, std::size_t j) const;
    /// Storage slot of the diagonal of row i, or npos.
    std::size_t diagonal_slot(std::size_t i) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct SparseSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;

    std::size_t n() const { return matrix.n; }
};

/// Sums duplicates and sorts rows. Throws AssemblyError on out-of-range indices.
CsrMatrix assemble(std::size_t n, std::span<const Triplet> triplets);

CsrMatrix transpose(const CsrMatrix& a);

/// y = A x (OpenMP). Throws AssemblyError on dimension mismatch.
std::vector<double> matvec(const CsrMatrix& a, std::span<const double> x);
void matvec(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

/// Fixed sparsity of a collocation matrix: row i holds the stencil neighbors
/// of node i in ascending order. `slot(i, s)` is the storage index of the
/// s-th stencil neighbor (stencil order) in row i.
class StencilPattern {
public:
    StencilPattern() = default;
    explicit StencilPattern(const StencilTable& stencils);

    std::size_t n() const { return n_; }
    std::size_t slot(NodeId i, std::size_t s) const { return slots_[row_ptr_[i] + s]; }
    std::size_t diagonal(NodeId i) const { return diag_[i]; }
    /// Zero-valued matrix with this pattern.
    CsrMatrix empty_matrix() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> cols_;
    std::vector<std::size_t> slots_;
    std::vector<std::size_t> diag_;
};

// ---------------------------------------------------------------------------
// Iterative solver
// ---------------------------------------------------------------------------

enum class Preconditioner { Jacobi, Ilu0 };

struct IterativeOptions {
    double tol = 1e-8;            // relative to ||b||
    std::size_t max_iter = 0;     // 0: 10 * n
    Preconditioner preconditioner = Preconditioner::Jacobi;
};

struct IterativeStats {
    std::size_t iterations = 0;
    double residual = 0.0;        // final ||b - A x||
    double rhs_norm = 0.0;
    bool converged = false;
    bool breakdown = false;
};

struct SolveResult {
    std::vector<double> x;
    IterativeStats stats;
};

/// Preconditioned BiCGStab. Non-convergence (breakdown or iteration cap) is
/// reported in the stats, not thrown. Throws PreconditionerError on a zero
/// diagonal / pivot.
SolveResult solve_bicgstab(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                           const IterativeOptions& opts = {});

/// Incomplete LU with the sparsity of A (unit lower, upper stored together).
class Ilu0 {
public:
    explicit Ilu0(const CsrMatrix& a);
    /// z = (LU)^-1 r
    void apply(std::span<const double> r, std::span<double> z) const;

private:
    CsrMatrix lu_;
    std::vector<std::size_t> diag_;
};

}  // namespace daflow
