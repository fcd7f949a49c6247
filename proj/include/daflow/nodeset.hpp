#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace daflow {

using Vec3 = std::array<double, 3>;
using NodeId = std::size_t;

// ---------------------------------------------------------------------------
// Boundary tags
// ---------------------------------------------------------------------------

struct Interior {};
/// No-slip wall, zero velocity.
struct Wall {};
struct MovingLid {
    Vec3 velocity{1.0, 0.0, 0.0};
};
enum class InletProfile { Parabolic };
struct Inlet {
    InletProfile profile = InletProfile::Parabolic;
};
/// Pressure is known here (p' = 0); velocity has zero normal gradient.
struct Outlet {};
/// Mirror plane normal to `axis`. Nodes on the rim of the plane that also lie
/// on a no-slip face carry that face's velocity in `pinned_velocity`.
struct SymmetryPlane {
    int axis = 2;
    std::optional<Vec3> pinned_velocity;
};

using BoundaryTag = std::variant<Interior, Wall, MovingLid, Inlet, Outlet, SymmetryPlane>;

inline bool is_interior(const BoundaryTag& t) { return std::holds_alternative<Interior>(t); }
std::string tag_name(const BoundaryTag& t);

// ---------------------------------------------------------------------------
// Grid description
// ---------------------------------------------------------------------------

enum class Stretching { Uniform, TanhStretched };

struct GridSpec {
    std::vector<int> counts;
    Stretching stretching = Stretching::Uniform;
};

/// Channel with a rectangular block mounted on the bottom wall. All lengths in
/// the same nondimensional unit; defaults give a uniform 361x21 grid equal
/// spacing in both directions.
struct ChannelGeom {
    double height = 1.0;            // H
    double obstacle_height = 0.5;   // h
    double obstacle_length = 0.5;
    double obstacle_x = 4.0;        // leading edge
    double length = 18.0;

    double reference_length() const { return height - obstacle_height; }
    double obstacle_rear() const { return obstacle_x + obstacle_length; }
};

/// Tanh clustering towards both ends of [0,1]: 0.5 * (1 + tanh(2x - 1) / tanh(1)).
double stretch_coordinate(double xr);

// ---------------------------------------------------------------------------
// NodeSet
// ---------------------------------------------------------------------------

/// Uniform bin grid over the node bounding box used for k-nearest queries.
class SpatialBins {
public:
    SpatialBins() = default;
    SpatialBins(std::span<const Vec3> positions, int dim);

    /// Candidate ids in the bins at Chebyshev ring `ring` around `cell`.
    template <class Visit>
    void visit_ring(const std::array<long, 3>& cell, long ring, Visit&& visit) const;

    std::array<long, 3> cell_of(const Vec3& x) const;
    double cell_size() const { return cell_; }
    long max_ring() const;
    bool empty() const { return starts_.empty(); }

private:
    int dim_ = 0;
    Vec3 lo_{};
    double cell_ = 1.0;
    std::array<long, 3> nbins_{1, 1, 1};
    std::vector<std::size_t> starts_;
    std::vector<NodeId> ids_;
};

class NodeSet {
public:
    /// Validates: finite coordinates, no coincident nodes, one tag per node,
    /// structured shape (if given) consistent with the node count. `normals`
    /// may be empty, in which case all normals are zero.
    NodeSet(int dim, std::vector<Vec3> positions, std::vector<BoundaryTag> tags,
            std::vector<Vec3> normals = {},
            std::optional<std::array<int, 3>> structured_shape = std::nullopt);

    int dim() const { return dim_; }
    std::size_t size() const { return positions_.size(); }

    const Vec3& position(NodeId i) const { return positions_[i]; }
    std::span<const Vec3> positions() const { return positions_; }
    const BoundaryTag& tag(NodeId i) const { return tags_[i]; }
    std::span<const BoundaryTag> tags() const { return tags_; }
    /// Unit outward normal at boundary nodes, zero at interior nodes.
    const Vec3& normal(NodeId i) const { return normals_[i]; }

    const std::optional<std::array<int, 3>>& structured_shape() const { return shape_; }
    /// Node id of structured index (i, j, k). Requires a structured shape.
    NodeId grid_index(int i, int j, int k = 0) const;

    const SpatialBins& bins() const { return bins_; }

private:
    int dim_;
    std::vector<Vec3> positions_;
    std::vector<BoundaryTag> tags_;
    std::vector<Vec3> normals_;
    std::optional<std::array<int, 3>> shape_;
    SpatialBins bins_;
};

/// The k nodes closest to node `center` (itself first), ordered by distance
/// with ties broken by lower id.
std::vector<NodeId> k_nearest(const NodeSet& ns, NodeId center, std::size_t k);

/// Same query for an arbitrary point.
std::vector<NodeId> k_nearest(const NodeSet& ns, const Vec3& point, std::size_t k);

double distance(const Vec3& a, const Vec3& b);
double distance_squared(const Vec3& a, const Vec3& b);

// ---------------------------------------------------------------------------
// Benchmark geometries
// ---------------------------------------------------------------------------

/// Unit square; lid y = 1 moves with (1,0); other sides no-slip. Corners are walls.
NodeSet generate_cavity_2d(const GridSpec& spec);

/// Half of the unit cube, z in [0, 0.5]. Lid y = 1 moves along +x; z = 0.5 is
/// the symmetry plane. The z spacing is the lower half of the full-cube grid
/// with 2*Nz - 1 points.
NodeSet generate_cavity_3d_half(const GridSpec& spec);

/// Channel [0, L] x [0, H] with the block removed. Left edge parabolic inlet,
/// right edge outlet, top/bottom and block perimeter no-slip.
NodeSet generate_channel(const GridSpec& spec, const ChannelGeom& geom);

void validate_grid(const GridSpec& spec, std::size_t expected_dims);

// ---------------------------------------------------------------------------

template <class Visit>
void SpatialBins::visit_ring(const std::array<long, 3>& cell, long ring, Visit&& visit) const
{
    const long rz = dim_ == 3 ? ring : 0;
    for (long dz = -rz; dz <= rz; ++dz) {
        const long cz = cell[2] + dz;
        if (cz < 0 || cz >= nbins_[2]) continue;
        for (long dy = -ring; dy <= ring; ++dy) {
            const long cy = cell[1] + dy;
            if (cy < 0 || cy >= nbins_[1]) continue;
            const bool on_shell = dy == -ring || dy == ring || (dim_ == 3 && (dz == -rz || dz == rz));
            // Off the y/z shell only the two x end cells belong to the ring.
            const long step = (on_shell || ring == 0) ? 1 : 2 * ring;
            for (long dx = -ring; dx <= ring; dx += step) {
                const long cx = cell[0] + dx;
                if (cx < 0 || cx >= nbins_[0]) continue;
                const auto b = static_cast<std::size_t>((cz * nbins_[1] + cy) * nbins_[0] + cx);
                for (std::size_t e = starts_[b]; e < starts_[b + 1]; ++e) visit(ids_[e]);
            }
        }
    }
}

}  // namespace daflow
