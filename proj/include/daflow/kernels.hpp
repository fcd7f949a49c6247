#pragma once

// Data-parallel vector kernels. Every kernel exists twice: a plain serial
// loop kept as the reference, and an OpenMP version used by the solvers.
// Parallel reductions are blocked with a fixed block size so the result does
// not depend on the number of threads.

#include <cstddef>
#include <span>

namespace daflow::kernels {

inline constexpr std::size_t kReductionBlock = 2048;

namespace serial {

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y <- y + a*x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y <- x + b*y
void xpby(std::span<const double> x, double b, std::span<double> y);
void csr_matvec(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                std::span<const double> vals, std::span<const double> x, std::span<double> y);

}  // namespace serial

namespace parallel {

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double b, std::span<double> y);
void csr_matvec(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                std::span<const double> vals, std::span<const double> x, std::span<double> y);

}  // namespace parallel

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace daflow::kernels
