#include "daflow/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include <omp.h>

namespace daflow::kernels {

namespace serial {

double dot(std::span<const double> x, std::span<const double> y)
{
    assert(x.size() == y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y)
{
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y)
{
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + b * y[i];
}

void csr_matvec(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                std::span<const double> vals, std::span<const double> x, std::span<double> y)
{
    const std::size_t n = row_ptr.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) s += vals[e] * x[cols[e]];
        y[i] = s;
    }
}

}  // namespace serial

namespace parallel {

double dot(std::span<const double> x, std::span<const double> y)
{
    assert(x.size() == y.size());
    const std::size_t n = x.size();
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    if (nblocks <= 1) return serial::dot(x, y);

    std::vector<double> partial(nblocks);
    const auto nb = static_cast<std::int64_t>(nblocks);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < nb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
        partial[static_cast<std::size_t>(b)] = s;
    }
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y)
{
    assert(x.size() == y.size());
    const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y)
{
    assert(x.size() == y.size());
    const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void csr_matvec(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                std::span<const double> vals, std::span<const double> x, std::span<double> y)
{
    const auto n = static_cast<std::int64_t>(row_ptr.size() - 1);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) s += vals[e] * x[cols[e]];
        y[i] = s;
    }
}

}  // namespace parallel

int max_threads() { return omp_get_max_threads(); }

}  // namespace daflow::kernels
