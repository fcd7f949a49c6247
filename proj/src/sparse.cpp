#include "daflow/sparse.hpp"

#include "daflow/error.hpp"
#include "daflow/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

namespace daflow {

double CsrMatrix::at(std::size_t i, std::size_t j) const
{
    const auto b = cols.begin() + static_cast<long>(row_ptr[i]);
    const auto e = cols.begin() + static_cast<long>(row_ptr[i + 1]);
    const auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j) return 0.0;
    return vals[static_cast<std::size_t>(it - cols.begin())];
}

std::size_t CsrMatrix::diagonal_slot(std::size_t i) const
{
    const auto b = cols.begin() + static_cast<long>(row_ptr[i]);
    const auto e = cols.begin() + static_cast<long>(row_ptr[i + 1]);
    const auto it = std::lower_bound(b, e, i);
    if (it == e || *it != i) return npos;
    return static_cast<std::size_t>(it - cols.begin());
}

CsrMatrix assemble(std::size_t n, std::span<const Triplet> triplets)
{
    for (const auto& t : triplets)
        if (t.row >= n || t.col >= n)
            throw AssemblyError("assemble: entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                ") outside a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");

    std::vector<Triplet> sorted(triplets.begin(), triplets.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Triplet& a, const Triplet& b) { return a.row < b.row || (a.row == b.row && a.col < b.col); });

    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(n + 1, 0);
    for (std::size_t e = 0; e < sorted.size(); ++e) {
        const auto& t = sorted[e];
        if (e > 0 && sorted[e - 1].row == t.row && sorted[e - 1].col == t.col) {
            m.vals.back() += t.value;
            continue;
        }
        m.cols.push_back(t.col);
        m.vals.push_back(t.value);
        ++m.row_ptr[t.row + 1];
    }
    std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
    return m;
}

CsrMatrix transpose(const CsrMatrix& a)
{
    CsrMatrix t;
    t.n = a.n;
    t.row_ptr.assign(a.n + 1, 0);
    for (std::size_t c : a.cols) ++t.row_ptr[c + 1];
    std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
    t.cols.resize(a.nnz());
    t.vals.resize(a.nnz());
    std::vector<std::size_t> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
            const std::size_t dst = fill[a.cols[e]]++;
            t.cols[dst] = i;
            t.vals[dst] = a.vals[e];
        }
    return t;
}

void matvec(const CsrMatrix& a, std::span<const double> x, std::span<double> y)
{
    if (x.size() != a.n || y.size() != a.n)
        throw AssemblyError("matvec: vector length does not match matrix dimension " + std::to_string(a.n));
    kernels::parallel::csr_matvec(a.row_ptr, a.cols, a.vals, x, y);
}

std::vector<double> matvec(const CsrMatrix& a, std::span<const double> x)
{
    std::vector<double> y(a.n);
    matvec(a, x, y);
    return y;
}

StencilPattern::StencilPattern(const StencilTable& stencils) : n_(stencils.size())
{
    row_ptr_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) row_ptr_[i + 1] = row_ptr_[i] + stencils[i].size();
    cols_.resize(row_ptr_[n_]);
    slots_.resize(row_ptr_[n_]);
    diag_.resize(n_);

    const auto n = static_cast<std::int64_t>(n_);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& nb = stencils[i].neighbors;
        std::vector<std::size_t> order(nb.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nb[a] < nb[b]; });
        for (std::size_t pos = 0; pos < nb.size(); ++pos) {
            const std::size_t s = order[pos];
            cols_[row_ptr_[i] + pos] = nb[s];
            slots_[row_ptr_[i] + s] = row_ptr_[i] + pos;
            if (nb[s] == i) diag_[i] = row_ptr_[i] + pos;
        }
    }
}

CsrMatrix StencilPattern::empty_matrix() const
{
    CsrMatrix m;
    m.n = n_;
    m.row_ptr = row_ptr_;
    m.cols = cols_;
    m.vals.assign(cols_.size(), 0.0);
    return m;
}

}  // namespace daflow
