#pragma once

// Diffuse approximation: a weighted least-squares fit of a second-order
// Taylor polynomial around each node, reduced to per-node linear functionals
// that map neighbor values to the value and derivatives at the node.

#include "daflow/nodeset.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace daflow {

/// Gaussian window parameters. The support radius of each stencil is
/// `sigma_factor` times the distance to its farthest neighbor unless a fixed
/// `sigma` is given.
struct WeightParams {
    double sigma_factor = 1.05;
    std::optional<double> sigma;

    void validate() const;
};

/// Quantities a stencil row estimates. Second derivatives are plain
/// derivatives (the 1/2 of the Taylor coefficient is already removed).
enum class Deriv { Value, X, Y, Z, XX, XY, YY, XZ, YZ, ZZ };

/// Number of monomials in the quadratic basis: 6 in 2D, 10 in 3D.
constexpr int basis_size(int dim) { return dim == 2 ? 6 : 10; }

/// Stencil row holding `d`. Basis order in 2D is
/// 1, x, y, x^2, xy, y^2 and in 3D additionally z, xz, yz, z^2.
int deriv_row(Deriv d, int dim);

/// exp(-3 ln(10) (distance/sigma)^2) inside the support, exactly 0 outside.
double weight(double distance, double sigma);

/// Quadratic monomials of a displacement; dimension taken from `dx.size()`.
std::vector<double> basis_vector(std::span<const double> dx);

/// sigma_factor * (largest distance).
double choose_sigma(std::span<const double> distances, const WeightParams& params);

/// Moment matrix sum_i w_i P_i P_i^T for displacements `dx` (already divided by
/// any length scale the caller wants). Symmetric by construction.
Eigen::MatrixXd moment_matrix(std::span<const Vec3> dx, std::span<const double> weights, int dim);

/// Per-node linear functionals. coeffs is m x k row-major: the estimate of
/// row r is sum_i coeffs(r, i) * phi[neighbors[i]].
struct DerivativeStencil {
    NodeId center = 0;
    int dim = 2;
    double sigma = 0.0;
    std::vector<NodeId> neighbors;
    std::vector<double> coeffs;

    std::size_t size() const { return neighbors.size(); }
    int rows() const { return basis_size(dim); }
    std::span<const double> row(int r) const
    {
        return {coeffs.data() + static_cast<std::size_t>(r) * neighbors.size(), neighbors.size()};
    }
    std::span<const double> row(Deriv d) const { return row(deriv_row(d, dim)); }
};

/// Condition number above which a moment matrix is rejected.
inline constexpr double kMaxMomentCondition = 1e12;

DerivativeStencil build_stencil(const NodeSet& ns, NodeId center, std::size_t k, const WeightParams& params);

/// As build_stencil, but when the k nearest neighbors leave the moment matrix
/// singular (e.g. all in one plane next to a stretched edge) the next nearest
/// are added one at a time, up to 4k. Throws the k-neighbor error otherwise.
DerivativeStencil build_stencil_widening(const NodeSet& ns, NodeId center, std::size_t k,
                                         const WeightParams& params);

/// Estimates of all m quantities at the stencil center.
std::vector<double> estimate(const DerivativeStencil& stencil, std::span<const double> field);

/// Applies one stencil row to a nodal field.
double apply_row(const DerivativeStencil& stencil, int row, std::span<const double> field);

/// Default neighbor count: 9 in 2D, 27 in 3D.
constexpr std::size_t default_neighbors(int dim) { return dim == 2 ? 9 : 27; }

enum class Execution { Serial, Parallel };

/// Stencils of every node, built once and then read-only.
class StencilTable {
public:
    StencilTable() = default;
    StencilTable(const NodeSet& ns, std::size_t k, const WeightParams& params,
                 Execution exec = Execution::Parallel);

    std::size_t size() const { return stencils_.size(); }
    int dim() const { return dim_; }
    /// Requested neighbor count; a widened stencil holds more.
    std::size_t neighbors_per_node() const { return k_; }
    const DerivativeStencil& operator[](NodeId i) const { return stencils_[i]; }

    /// Row `d` applied at node i.
    double apply(NodeId i, Deriv d, std::span<const double> field) const;
    /// Sum of the second-derivative rows at node i.
    double laplacian(NodeId i, std::span<const double> field) const;

private:
    int dim_ = 2;
    std::size_t k_ = 0;
    std::vector<DerivativeStencil> stencils_;
};

}  // namespace daflow
