#include "daflow/error.hpp"
#include "daflow/kernels.hpp"
#include "daflow/sparse.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <omp.h>

using namespace daflow;

namespace {

CsrMatrix identity(std::size_t n)
{
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return assemble(n, t);
}

// -u'' on n interior points of (0,1) with h = 1/(n+1), scaled by h^2.
CsrMatrix poisson_1d(std::size_t n)
{
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return assemble(n, t);
}

CsrMatrix poisson_2d(std::size_t m)
{
    std::vector<Triplet> t;
    auto id = [m](std::size_t i, std::size_t j) { return i + m * j; };
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            t.push_back({id(i, j), id(i, j), 4.0});
            if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
            if (i + 1 < m) t.push_back({id(i, j), id(i + 1, j), -1.0});
            if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
            if (j + 1 < m) t.push_back({id(i, j), id(i, j + 1), -1.0});
        }
    return assemble(m * m, t);
}

std::vector<double> thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double> d)
{
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

double residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b)
{
    const auto ax = matvec(a, x);
    double r = 0;
    for (std::size_t i = 0; i < b.size(); ++i) r += (b[i] - ax[i]) * (b[i] - ax[i]);
    return std::sqrt(r);
}

}  // namespace

TEST(Assemble, SumsDuplicates)
{
    const std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}};
    const auto a = assemble(1, t);
    EXPECT_EQ(a.nnz(), 1u);
    EXPECT_EQ(a.at(0, 0), 3.0);
}

TEST(Assemble, EmptyAndSorted)
{
    const auto z = assemble(3, std::vector<Triplet>{});
    EXPECT_EQ(z.nnz(), 0u);
    EXPECT_EQ(matvec(z, std::vector<double>{1, 2, 3}), (std::vector<double>{0, 0, 0}));

    const std::vector<Triplet> t{{1, 2, 1.0}, {1, 0, 2.0}, {0, 1, 3.0}, {1, 1, 4.0}};
    const auto a = assemble(3, t);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t s = a.row_ptr[i] + 1; s < a.row_ptr[i + 1]; ++s) EXPECT_LT(a.cols[s - 1], a.cols[s]);
    EXPECT_EQ(a.diagonal_slot(2), CsrMatrix::npos);
    EXPECT_EQ(a.at(1, 1), 4.0);
}

TEST(Assemble, OutOfRange)
{
    EXPECT_THROW(assemble(2, std::vector<Triplet>{{2, 0, 1.0}}), AssemblyError);
    EXPECT_THROW(assemble(2, std::vector<Triplet>{{0, 5, 1.0}}), AssemblyError);
}

TEST(Matvec, IdentityAndDenseOracle)
{
    EXPECT_EQ(matvec(identity(3), std::vector<double>{1, 0, 0}), (std::vector<double>{1, 0, 0}));
    support::Gen g(1);
    for (int trial = 0; trial < 20; ++trial) {
        double dense[4][4];
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                dense[i][j] = g.uniform() < 0.6 ? g.uniform(-2, 2) : 0.0;
                if (dense[i][j] != 0.0) t.push_back({i, j, dense[i][j]});
            }
        const auto x = g.vector(4);
        const auto y = matvec(assemble(4, t), x);
        for (std::size_t i = 0; i < 4; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < 4; ++j) s += dense[i][j] * x[j];
            EXPECT_NEAR(y[i], s, 1e-13);
        }
    }
    EXPECT_THROW(matvec(identity(3), std::vector<double>{1, 2}), AssemblyError);
}

TEST(Transpose, RoundTrip)
{
    support::Gen g(2);
    std::vector<Triplet> t;
    for (int e = 0; e < 40; ++e)
        t.push_back({static_cast<std::size_t>(g.integer(0, 9)), static_cast<std::size_t>(g.integer(0, 9)), g.uniform()});
    const auto a = assemble(10, t);
    const auto at = transpose(a);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(a.at(i, j), at.at(j, i));
}

TEST(Bicgstab, Identity)
{
    const std::vector<double> b{3, -1, 2, 7};
    const auto r = solve_bicgstab(identity(4), b, std::vector<double>(4, 0.0));
    EXPECT_TRUE(r.stats.converged);
    EXPECT_LE(r.stats.iterations, 1u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.x[i], b[i], 1e-12);
}

TEST(Bicgstab, TwoByTwo)
{
    const auto a = assemble(2, std::vector<Triplet>{{0, 0, 4}, {0, 1, 1}, {1, 0, 1}, {1, 1, 3}});
    for (auto pc : {Preconditioner::Jacobi, Preconditioner::Ilu0}) {
        const auto r = solve_bicgstab(a, std::vector<double>{1, 2}, std::vector<double>{0, 0}, {1e-12, 0, pc});
        ASSERT_TRUE(r.stats.converged);
        EXPECT_NEAR(r.x[0], 1.0 / 11.0, 1e-11);
        EXPECT_NEAR(r.x[1], 7.0 / 11.0, 1e-11);
    }
}

TEST(Bicgstab, TridiagonalPoisson)
{
    const std::size_t n = 50;
    const double h = 1.0 / (n + 1);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (i + 1) * h;
        b[i] = h * h * (M_PI * M_PI * std::sin(M_PI * x) + 6.0 * x);
    }
    const auto exact = thomas(std::vector<double>(n, -1.0), std::vector<double>(n, 2.0), std::vector<double>(n, -1.0), b);
    const auto r = solve_bicgstab(poisson_1d(n), b, std::vector<double>(n, 0.0), {1e-12, 0, Preconditioner::Jacobi});
    ASSERT_TRUE(r.stats.converged);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r.x[i], exact[i], 1e-8);
}

TEST(Bicgstab, ConvergedMeansSmallResidual)
{
    support::Gen g(9);
    for (std::size_t m : {10u, 40u, 100u}) {
        const auto a = poisson_2d(m);
        const auto b = g.vector(m * m);
        for (auto pc : {Preconditioner::Jacobi, Preconditioner::Ilu0}) {
            const auto r = solve_bicgstab(a, b, std::vector<double>(m * m, 0.0), {1e-10, 0, pc});
            ASSERT_TRUE(r.stats.converged) << m;
            EXPECT_LE(r.stats.residual, 1e-10 * r.stats.rhs_norm);
            EXPECT_NEAR(residual(a, r.x, b), r.stats.residual, 1e-9 * r.stats.rhs_norm);
        }
    }
}

TEST(Bicgstab, NonsymmetricConvectionDiffusion)
{
    const std::size_t n = 200;
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, 2.5});
        if (i > 0) t.push_back({i, i - 1, -1.8});
        if (i + 1 < n) t.push_back({i, i + 1, -0.4});
    }
    const auto a = assemble(n, t);
    const std::vector<double> b(n, 1.0);
    const auto r = solve_bicgstab(a, b, std::vector<double>(n, 0.0), {1e-10, 0, Preconditioner::Ilu0});
    ASSERT_TRUE(r.stats.converged);
    EXPECT_LE(residual(a, r.x, b), 1e-9 * std::sqrt(double(n)));
}

TEST(Bicgstab, Deterministic)
{
    const auto a = poisson_2d(30);
    support::Gen g(10);
    const auto b = g.vector(900);
    const auto r1 = solve_bicgstab(a, b, std::vector<double>(900, 0.0));
    const auto r2 = solve_bicgstab(a, b, std::vector<double>(900, 0.0));
    EXPECT_EQ(r1.x, r2.x);
    EXPECT_EQ(r1.stats.iterations, r2.stats.iterations);
}

TEST(Bicgstab, IterationCapReported)
{
    const auto a = poisson_2d(30);
    const std::vector<double> b(900, 1.0);
    const auto r = solve_bicgstab(a, b, std::vector<double>(900, 0.0), {1e-14, 2, Preconditioner::Jacobi});
    EXPECT_FALSE(r.stats.converged);
    EXPECT_EQ(r.stats.iterations, 2u);
}

TEST(Bicgstab, ZeroDiagonal)
{
    const auto a = assemble(2, std::vector<Triplet>{{0, 1, 1}, {1, 0, 1}});
    EXPECT_THROW(solve_bicgstab(a, std::vector<double>{1, 1}, std::vector<double>{0, 0}), PreconditionerError);
    EXPECT_THROW(solve_bicgstab(a, std::vector<double>{1, 1}, std::vector<double>{0, 0}, {1e-8, 0, Preconditioner::Ilu0}),
                 PreconditionerError);
}

TEST(Bicgstab, ZeroRhs)
{
    const auto r = solve_bicgstab(poisson_1d(10), std::vector<double>(10, 0.0), std::vector<double>(10, 0.0));
    EXPECT_TRUE(r.stats.converged);
    for (double v : r.x) EXPECT_EQ(v, 0.0);
}

TEST(Kernels, SerialMatchesParallel)
{
    support::Gen g(14);
    for (std::size_t n : {0u, 1u, 7u, 2048u, 2049u, 10000u}) {
        const auto x = g.vector(n), y = g.vector(n);
        // blocked reductions sum in a different order
        const double d = kernels::serial::dot(x, y);
        EXPECT_NEAR(kernels::parallel::dot(x, y), d, 1e-13 * (1.0 + kernels::serial::dot(x, x))) << n;
        EXPECT_NEAR(kernels::parallel::norm2(x), kernels::serial::norm2(x), 1e-13 * (1.0 + kernels::serial::norm2(x)))
            << n;
        auto a = y, b = y;
        kernels::serial::axpy(0.3, x, a);
        kernels::parallel::axpy(0.3, x, b);
        EXPECT_EQ(a, b);
        kernels::serial::xpby(x, -1.7, a);
        kernels::parallel::xpby(x, -1.7, b);
        EXPECT_EQ(a, b);
    }
    const auto m = poisson_2d(60);
    const auto x = g.vector(m.n);
    std::vector<double> y1(m.n), y2(m.n);
    kernels::serial::csr_matvec(m.row_ptr, m.cols, m.vals, x, y1);
    kernels::parallel::csr_matvec(m.row_ptr, m.cols, m.vals, x, y2);
    EXPECT_EQ(y1, y2);
}

TEST(Kernels, ReductionIndependentOfThreadCount)
{
    support::Gen g(16);
    const auto x = g.vector(20000), y = g.vector(20000);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double d1 = kernels::parallel::dot(x, y);
    omp_set_num_threads(3);
    const double d3 = kernels::parallel::dot(x, y);
    omp_set_num_threads(saved);
    EXPECT_EQ(d1, d3);
}

TEST(Kernels, DotAgainstLongDouble)
{
    support::Gen g(15);
    const auto x = g.vector(5000), y = g.vector(5000);
    long double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * y[i];
    EXPECT_NEAR(kernels::parallel::dot(x, y), static_cast<double>(s), 1e-11);
}
