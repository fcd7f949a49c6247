#include "daflow/mls.hpp"

#include "daflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>

namespace daflow {

void WeightParams::validate() const
{
    if (!(sigma_factor > 1.0))
        throw ParameterError("sigma_factor must exceed 1 so the farthest neighbor keeps a nonzero weight");
    if (sigma && !(*sigma > 0.0)) throw ParameterError("sigma must be positive");
}

int deriv_row(Deriv d, int dim)
{
    switch (d) {
    case Deriv::Value: return 0;
    case Deriv::X: return 1;
    case Deriv::Y: return 2;
    case Deriv::XX: return 3;
    case Deriv::XY: return 4;
    case Deriv::YY: return 5;
    default: break;
    }
    if (dim != 3) throw UnsupportedError("z derivatives requested from a 2D stencil");
    switch (d) {
    case Deriv::Z: return 6;
    case Deriv::XZ: return 7;
    case Deriv::YZ: return 8;
    case Deriv::ZZ: return 9;
    default: break;
    }
    throw UnsupportedError("unknown derivative");
}

double weight(double distance, double sigma)
{
    if (!(sigma > 0.0)) throw ParameterError("weight: sigma must be positive");
    if (distance < 0.0) throw DomainError("weight: negative distance");
    if (distance * distance > sigma * sigma) return 0.0;
    const double r = distance / sigma;
    return std::exp(-3.0 * std::numbers::ln10 * r * r);
}

namespace {

// Fills the quadratic monomials of d into out[0..m).
void fill_basis(const Vec3& d, int dim, double* out)
{
    out[0] = 1.0;
    out[1] = d[0];
    out[2] = d[1];
    out[3] = d[0] * d[0];
    out[4] = d[0] * d[1];
    out[5] = d[1] * d[1];
    if (dim == 3) {
        out[6] = d[2];
        out[7] = d[0] * d[2];
        out[8] = d[1] * d[2];
        out[9] = d[2] * d[2];
    }
}

// Polynomial degree of each basis entry.
constexpr int kDegree[10] = {0, 1, 1, 2, 2, 2, 1, 2, 2, 2};
// Rows holding pure second derivatives (Taylor coefficient is f''/2).
constexpr bool kHalfSquare[10] = {false, false, false, true, false, true, false, false, false, true};

}  // namespace

std::vector<double> basis_vector(std::span<const double> dx)
{
    if (dx.size() != 2 && dx.size() != 3)
        throw DomainError("basis_vector: displacement must have 2 or 3 components");
    const int dim = static_cast<int>(dx.size());
    Vec3 d{dx[0], dx[1], dim == 3 ? dx[2] : 0.0};
    std::vector<double> out(static_cast<std::size_t>(basis_size(dim)));
    fill_basis(d, dim, out.data());
    return out;
}

double choose_sigma(std::span<const double> distances, const WeightParams& params)
{
    if (params.sigma) return *params.sigma;
    if (distances.empty() || !(distances.back() > 0.0))
        throw ParameterError("choose_sigma: need a positive farthest-neighbor distance");
    return params.sigma_factor * distances.back();
}

Eigen::MatrixXd moment_matrix(std::span<const Vec3> dx, std::span<const double> weights, int dim)
{
    const int m = basis_size(dim);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    double p[10];
    for (std::size_t i = 0; i < dx.size(); ++i) {
        fill_basis(dx[i], dim, p);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c <= r; ++c) a(r, c) += weights[i] * p[r] * p[c];
    }
    for (int r = 0; r < m; ++r)
        for (int c = r + 1; c < m; ++c) a(r, c) = a(c, r);
    return a;
}

DerivativeStencil build_stencil(const NodeSet& ns, NodeId center, std::size_t k, const WeightParams& params)
{
    const int dim = ns.dim();
    const int m = basis_size(dim);
    if (k < static_cast<std::size_t>(m))
        throw StencilError(center, std::to_string(k) + " neighbors cannot determine " + std::to_string(m) +
                                       " coefficients");

    DerivativeStencil st;
    st.center = center;
    st.dim = dim;
    st.neighbors = k_nearest(ns, center, k);

    const Vec3& xc = ns.position(center);
    std::vector<double> dist(k);
    for (std::size_t i = 0; i < k; ++i) dist[i] = distance(xc, ns.position(st.neighbors[i]));
    st.sigma = choose_sigma(dist, params);

    // Work in displacements scaled by sigma so the moment matrix is O(1).
    std::vector<Vec3> dx(k);
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Vec3& xi = ns.position(st.neighbors[i]);
        dx[i] = {(xi[0] - xc[0]) / st.sigma, (xi[1] - xc[1]) / st.sigma, (xi[2] - xc[2]) / st.sigma};
        w[i] = weight(dist[i], st.sigma);
    }

    const Eigen::MatrixXd a = moment_matrix(dx, w, dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > kMaxMomentCondition)
        throw StencilError(center, "moment matrix singular or ill-conditioned (condition " +
                                       std::to_string(lmin > 0.0 ? lmax / lmin : INFINITY) + ")");

    Eigen::MatrixXd rhs(m, static_cast<Eigen::Index>(k));
    double p[10];
    for (std::size_t i = 0; i < k; ++i) {
        fill_basis(dx[i], dim, p);
        for (int r = 0; r < m; ++r) rhs(r, static_cast<Eigen::Index>(i)) = w[i] * p[r];
    }
    const Eigen::MatrixXd sol = a.ldlt().solve(rhs);

    st.coeffs.resize(static_cast<std::size_t>(m) * k);
    for (int r = 0; r < m; ++r) {
        double scale = std::pow(st.sigma, -kDegree[r]);
        if (kHalfSquare[r]) scale *= 2.0;
        for (std::size_t i = 0; i < k; ++i)
            st.coeffs[static_cast<std::size_t>(r) * k + i] = scale * sol(r, static_cast<Eigen::Index>(i));
    }
    return st;
}

DerivativeStencil build_stencil_widening(const NodeSet& ns, NodeId center, std::size_t k,
                                         const WeightParams& params)
{
    try {
        return build_stencil(ns, center, k, params);
    } catch (const StencilError&) {
        if (k < static_cast<std::size_t>(basis_size(ns.dim()))) throw;
        const std::size_t limit = std::min(4 * k, ns.size());
        for (std::size_t kk = k + 1; kk <= limit; ++kk) {
            try {
                return build_stencil(ns, center, kk, params);
            } catch (const StencilError&) {
            }
        }
        throw;
    }
}

double apply_row(const DerivativeStencil& stencil, int row, std::span<const double> field)
{
    const auto c = stencil.row(row);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * field[stencil.neighbors[i]];
    return s;
}

std::vector<double> estimate(const DerivativeStencil& stencil, std::span<const double> field)
{
    std::vector<double> alpha(static_cast<std::size_t>(stencil.rows()));
    for (int r = 0; r < stencil.rows(); ++r) alpha[static_cast<std::size_t>(r)] = apply_row(stencil, r, field);
    return alpha;
}

StencilTable::StencilTable(const NodeSet& ns, std::size_t k, const WeightParams& params, Execution exec)
    : dim_(ns.dim()), k_(k), stencils_(ns.size())
{
    params.validate();
    const auto n = static_cast<std::int64_t>(ns.size());
    if (exec == Execution::Serial) {
        for (std::int64_t i = 0; i < n; ++i)
            stencils_[static_cast<std::size_t>(i)] = build_stencil_widening(ns, static_cast<NodeId>(i), k, params);
        return;
    }

    // Exceptions may not cross the parallel region; keep the lowest failing node.
    std::exception_ptr failure;
    std::int64_t failed_at = n;
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            stencils_[static_cast<std::size_t>(i)] = build_stencil_widening(ns, static_cast<NodeId>(i), k, params);
        } catch (...) {
#pragma omp critical(daflow_stencil_failure)
            if (i < failed_at) {
                failed_at = i;
                failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
}

double StencilTable::apply(NodeId i, Deriv d, std::span<const double> field) const
{
    return apply_row(stencils_[i], deriv_row(d, dim_), field);
}

double StencilTable::laplacian(NodeId i, std::span<const double> field) const
{
    const auto& st = stencils_[i];
    double s = apply_row(st, 3, field) + apply_row(st, 5, field);
    if (dim_ == 3) s += apply_row(st, 9, field);
    return s;
}

}  // namespace daflow
