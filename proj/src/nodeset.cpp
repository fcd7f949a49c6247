#include "daflow/nodeset.hpp"

#include "daflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace daflow {

std::string tag_name(const BoundaryTag& t)
{
    struct Namer {
        std::string operator()(const Interior&) const { return "interior"; }
        std::string operator()(const Wall&) const { return "wall"; }
        std::string operator()(const MovingLid&) const { return "lid"; }
        std::string operator()(const Inlet&) const { return "inlet"; }
        std::string operator()(const Outlet&) const { return "outlet"; }
        std::string operator()(const SymmetryPlane&) const { return "symmetry"; }
    };
    return std::visit(Namer{}, t);
}

double stretch_coordinate(double xr)
{
    if (!(xr >= 0.0 && xr <= 1.0)) {
        std::ostringstream os;
        os << "stretch_coordinate: input " << xr << " outside [0,1]";
        throw DomainError(os.str());
    }
    return 0.5 * (1.0 + std::tanh(2.0 * xr - 1.0) / std::tanh(1.0));
}

double distance_squared(const Vec3& a, const Vec3& b)
{
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

double distance(const Vec3& a, const Vec3& b) { return std::sqrt(distance_squared(a, b)); }

// ---------------------------------------------------------------------------
// SpatialBins
// ---------------------------------------------------------------------------

SpatialBins::SpatialBins(std::span<const Vec3> positions, int dim) : dim_(dim)
{
    const std::size_t n = positions.size();
    if (n == 0) return;

    Vec3 lo = positions[0];
    Vec3 hi = positions[0];
    for (const auto& p : positions) {
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
    lo_ = lo;

    double volume = 1.0;
    double max_extent = 0.0;
    int nonflat = 0;
    for (int a = 0; a < dim; ++a) {
        const double e = hi[a] - lo[a];
        max_extent = std::max(max_extent, e);
        if (e > 0.0) {
            volume *= e;
            ++nonflat;
        }
    }
    if (max_extent == 0.0) {
        cell_ = 1.0;
    } else {
        // mean node spacing
        cell_ = std::pow(volume / static_cast<double>(n), 1.0 / std::max(nonflat, 1));
        cell_ = std::max(cell_, max_extent / static_cast<double>(n));
    }

    std::size_t total = 1;
    for (int a = 0; a < 3; ++a) {
        nbins_[a] = a < dim ? static_cast<long>(std::floor((hi[a] - lo[a]) / cell_)) + 1 : 1;
        total *= static_cast<std::size_t>(nbins_[a]);
    }

    // counting sort of node ids into bins
    std::vector<std::size_t> bin_of(n);
    starts_.assign(total + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = cell_of(positions[i]);
        bin_of[i] = static_cast<std::size_t>((c[2] * nbins_[1] + c[1]) * nbins_[0] + c[0]);
        ++starts_[bin_of[i] + 1];
    }
    std::partial_sum(starts_.begin(), starts_.end(), starts_.begin());
    ids_.resize(n);
    std::vector<std::size_t> fill(starts_.begin(), starts_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) ids_[fill[bin_of[i]]++] = i;
}

std::array<long, 3> SpatialBins::cell_of(const Vec3& x) const
{
    std::array<long, 3> c{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
        const long v = static_cast<long>(std::floor((x[a] - lo_[a]) / cell_));
        c[a] = std::clamp(v, 0L, nbins_[a] - 1);
    }
    return c;
}

long SpatialBins::max_ring() const { return *std::max_element(nbins_.begin(), nbins_.end()); }

// ---------------------------------------------------------------------------
// NodeSet
// ---------------------------------------------------------------------------

NodeSet::NodeSet(int dim, std::vector<Vec3> positions, std::vector<BoundaryTag> tags,
                 std::vector<Vec3> normals, std::optional<std::array<int, 3>> structured_shape)
    : dim_(dim),
      positions_(std::move(positions)),
      tags_(std::move(tags)),
      normals_(std::move(normals)),
      shape_(structured_shape)
{
    if (dim_ != 2 && dim_ != 3) throw GeometryError("node set dimension must be 2 or 3");
    if (positions_.empty()) throw GeometryError("node set is empty");
    if (tags_.size() != positions_.size())
        throw GeometryError("node set: tag count does not match node count");
    if (normals_.empty()) normals_.assign(positions_.size(), Vec3{0.0, 0.0, 0.0});
    if (normals_.size() != positions_.size())
        throw GeometryError("node set: normal count does not match node count");
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        for (double c : positions_[i])
            if (!std::isfinite(c))
                throw GeometryError("node set: non-finite coordinate at node " + std::to_string(i));
        if (dim_ == 2 && positions_[i][2] != 0.0)
            throw GeometryError("node set: 2D node with nonzero z at node " + std::to_string(i));
    }
    if (shape_) {
        const auto& s = *shape_;
        const std::size_t prod = static_cast<std::size_t>(s[0]) * static_cast<std::size_t>(s[1]) *
                                 static_cast<std::size_t>(dim_ == 3 ? s[2] : 1);
        if (prod != positions_.size() || (dim_ == 2 && s[2] != 1))
            throw GeometryError("node set: structured shape inconsistent with node count");
    }

    bins_ = SpatialBins(positions_, dim_);

    if (positions_.size() > 1) {
        for (NodeId i = 0; i < positions_.size(); ++i) {
            const auto nn = k_nearest(*this, i, 2);
            const NodeId other = nn[0] == i ? nn[1] : nn[0];
            if (distance_squared(positions_[i], positions_[other]) == 0.0)
                throw GeometryError("node set: nodes " + std::to_string(i) + " and " +
                                    std::to_string(other) + " coincide");
        }
    }
}

NodeId NodeSet::grid_index(int i, int j, int k) const
{
    if (!shape_) throw UnsupportedError("node set has no structured shape");
    const auto& s = *shape_;
    return static_cast<NodeId>(i) +
           static_cast<NodeId>(s[0]) * (static_cast<NodeId>(j) + static_cast<NodeId>(s[1]) * static_cast<NodeId>(k));
}

std::vector<NodeId> k_nearest(const NodeSet& ns, const Vec3& point, std::size_t k)
{
    if (k > ns.size())
        throw GeometryError("k_nearest: k = " + std::to_string(k) + " exceeds node count " +
                            std::to_string(ns.size()));
    if (k == 0) return {};

    struct Cand {
        double d2;
        NodeId id;
    };
    auto less = [](const Cand& a, const Cand& b) { return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id); };

    std::vector<Cand> cands;
    const auto& bins = ns.bins();
    const auto cell = bins.cell_of(point);
    const long last = bins.max_ring();
    for (long ring = 0; ring <= last; ++ring) {
        bins.visit_ring(cell, ring, [&](NodeId id) {
            cands.push_back({distance_squared(point, ns.position(id)), id});
        });
        if (cands.size() < k) continue;
        // Every unvisited node is farther than ring * cell from the point.
        const double covered = static_cast<double>(ring) * bins.cell_size() * (1.0 - 1e-12);
        const double cov2 = covered * covered;
        const auto inside = std::count_if(cands.begin(), cands.end(), [&](const Cand& c) { return c.d2 <= cov2; });
        if (static_cast<std::size_t>(inside) >= k) break;
    }

    std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(k), cands.end(), less);
    std::vector<NodeId> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = cands[i].id;
    return out;
}

std::vector<NodeId> k_nearest(const NodeSet& ns, NodeId center, std::size_t k)
{
    if (center >= ns.size()) throw GeometryError("k_nearest: center id out of range");
    return k_nearest(ns, ns.position(center), k);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

void validate_grid(const GridSpec& spec, std::size_t expected_dims)
{
    if (spec.counts.size() != expected_dims)
        throw GeometryError("grid: expected " + std::to_string(expected_dims) + " counts, got " +
                            std::to_string(spec.counts.size()));
    for (int c : spec.counts)
        if (c < 4) throw GeometryError("grid: every axis count must be at least 4");
}

namespace {

std::vector<double> axis_coordinates(int count, Stretching s, int full_count)
{
    std::vector<double> x(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double xr = static_cast<double>(i) / static_cast<double>(full_count - 1);
        x[static_cast<std::size_t>(i)] = s == Stretching::TanhStretched ? stretch_coordinate(xr) : xr;
    }
    return x;
}

// Outward normals on a (possibly holed) structured grid: sum of the axis
// directions whose neighbor is missing; for convex corners of a hole where
// all axis neighbors exist, fall back to missing diagonal neighbors.
std::vector<Vec3> structured_normals(const std::array<int, 3>& shape, int dim,
                                     const std::vector<char>& present,
                                     const std::vector<char>& boundary)
{
    const int nx = shape[0], ny = shape[1], nz = shape[2];
    auto idx = [&](int i, int j, int k) {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
    };
    auto exists = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return false;
        return present[idx(i, j, k)] != 0;
    };

    std::vector<Vec3> normals(present.size(), Vec3{0, 0, 0});
    const int kz = dim == 3 ? 1 : 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const auto g = idx(i, j, k);
                if (!present[g] || !boundary[g]) continue;
                Vec3 n{0, 0, 0};
                for (int dk = -kz; dk <= kz; ++dk)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int di = -1; di <= 1; ++di) {
                            if (std::abs(di) + std::abs(dj) + std::abs(dk) != 1) continue;
                            if (!exists(i + di, j + dj, k + dk)) {
                                n[0] += di;
                                n[1] += dj;
                                n[2] += dk;
                            }
                        }
                if (n == Vec3{0, 0, 0}) {
                    for (int dk = -kz; dk <= kz; ++dk)
                        for (int dj = -1; dj <= 1; ++dj)
                            for (int di = -1; di <= 1; ++di) {
                                if (std::abs(di) + std::abs(dj) + std::abs(dk) < 2) continue;
                                if (!exists(i + di, j + dj, k + dk)) {
                                    n[0] += di;
                                    n[1] += dj;
                                    n[2] += dk;
                                }
                            }
                }
                const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
                if (len > 0.0) normals[g] = {n[0] / len, n[1] / len, n[2] / len};
            }
    return normals;
}

}  // namespace

NodeSet generate_cavity_2d(const GridSpec& spec)
{
    validate_grid(spec, 2);
    const int nx = spec.counts[0], ny = spec.counts[1];
    const auto xs = axis_coordinates(nx, spec.stretching, nx);
    const auto ys = axis_coordinates(ny, spec.stretching, ny);

    const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<Vec3> pos;
    std::vector<BoundaryTag> tags;
    std::vector<char> boundary(n, 0);
    pos.reserve(n);
    tags.reserve(n);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            pos.push_back({xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)], 0.0});
            const bool on_x = i == 0 || i == nx - 1;
            const bool on_y = j == 0 || j == ny - 1;
            if (j == ny - 1 && !on_x)
                tags.emplace_back(MovingLid{{1.0, 0.0, 0.0}});
            else if (on_x || on_y)
                tags.emplace_back(Wall{});
            else
                tags.emplace_back(Interior{});
            boundary[pos.size() - 1] = (on_x || on_y) ? 1 : 0;
        }
    const std::array<int, 3> shape{nx, ny, 1};
    auto normals = structured_normals(shape, 2, std::vector<char>(n, 1), boundary);
    return NodeSet(2, std::move(pos), std::move(tags), std::move(normals), shape);
}

NodeSet generate_cavity_3d_half(const GridSpec& spec)
{
    if (spec.counts.size() != 3) throw GeometryError("grid: expected 3 counts for the half cavity");
    const int nx = spec.counts[0], ny = spec.counts[1], nz = spec.counts[2];
    if (nx < 4 || ny < 4 || nz < 3)
        throw GeometryError("grid: half cavity needs at least 4 x 4 x 3 nodes");
    const auto xs = axis_coordinates(nx, spec.stretching, nx);
    const auto ys = axis_coordinates(ny, spec.stretching, ny);
    const auto zs = axis_coordinates(nz, spec.stretching, 2 * nz - 1);

    const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    std::vector<Vec3> pos;
    std::vector<BoundaryTag> tags;
    std::vector<char> boundary(n, 0);
    pos.reserve(n);
    tags.reserve(n);
    const Vec3 lid{1.0, 0.0, 0.0};
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                pos.push_back({xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)],
                               zs[static_cast<std::size_t>(k)]});
                const bool on_x = i == 0 || i == nx - 1;
                const bool on_bottom = j == 0;
                const bool on_top = j == ny - 1;
                const bool on_back = k == 0;
                const bool on_sym = k == nz - 1;
                if (on_sym) {
                    SymmetryPlane s{2, std::nullopt};
                    if (on_x || on_bottom)
                        s.pinned_velocity = Vec3{0, 0, 0};
                    else if (on_top)
                        s.pinned_velocity = lid;
                    tags.emplace_back(s);
                } else if (on_top && !on_x && !on_back) {
                    tags.emplace_back(MovingLid{lid});
                } else if (on_x || on_bottom || on_top || on_back) {
                    tags.emplace_back(Wall{});
                } else {
                    tags.emplace_back(Interior{});
                }
                boundary[pos.size() - 1] = (on_x || on_bottom || on_top || on_back || on_sym) ? 1 : 0;
            }
    const std::array<int, 3> shape{nx, ny, nz};
    auto normals = structured_normals(shape, 3, std::vector<char>(n, 1), boundary);
    return NodeSet(3, std::move(pos), std::move(tags), std::move(normals), shape);
}

NodeSet generate_channel(const GridSpec& spec, const ChannelGeom& geom)
{
    validate_grid(spec, 2);
    if (!(geom.height > 0.0) || !(geom.length > 0.0))
        throw GeometryError("channel: height and length must be positive");
    if (!(geom.obstacle_height > 0.0) || geom.obstacle_height >= geom.height)
        throw GeometryError("channel: obstacle height must satisfy 0 < h < H");
    if (!(geom.obstacle_length > 0.0) || !(geom.obstacle_x > 0.0) || geom.obstacle_rear() >= geom.length)
        throw GeometryError("channel: obstacle must lie strictly inside the channel");

    const int nx = spec.counts[0], ny = spec.counts[1];
    auto xs = axis_coordinates(nx, spec.stretching, nx);
    auto ys = axis_coordinates(ny, spec.stretching, ny);
    for (auto& x : xs) x *= geom.length;
    for (auto& y : ys) y *= geom.height;

    const double eps = 1e-9 * geom.length;
    auto in_block = [&](int i, int j) {
        const double x = xs[static_cast<std::size_t>(i)], y = ys[static_cast<std::size_t>(j)];
        return x >= geom.obstacle_x - eps && x <= geom.obstacle_rear() + eps && y <= geom.obstacle_height + eps;
    };
    auto gidx = [&](int i, int j) { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * static_cast<std::size_t>(j); };

    const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<char> present(total, 1), boundary(total, 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!in_block(i, j)) continue;
            // keep block nodes that touch the fluid: they form the block's wall
            bool touches_fluid = false;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const int a = i + di[d], b = j + dj[d];
                if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
                if (!in_block(a, b)) touches_fluid = true;
            }
            present[gidx(i, j)] = touches_fluid ? 1 : 0;
            boundary[gidx(i, j)] = touches_fluid ? 1 : 0;
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) boundary[gidx(i, j)] = 1;

    auto full_normals = structured_normals({nx, ny, 1}, 2, present, boundary);

    std::vector<Vec3> pos;
    std::vector<BoundaryTag> tags;
    std::vector<Vec3> normals;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const auto g = gidx(i, j);
            if (!present[g]) continue;
            pos.push_back({xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)], 0.0});
            normals.push_back(full_normals[g]);
            const bool wall_row = j == 0 || j == ny - 1;
            if (wall_row || in_block(i, j))
                tags.emplace_back(Wall{});
            else if (i == 0)
                tags.emplace_back(Inlet{InletProfile::Parabolic});
            else if (i == nx - 1)
                tags.emplace_back(Outlet{});
            else
                tags.emplace_back(Interior{});
        }
    return NodeSet(2, std::move(pos), std::move(tags), std::move(normals));
}

}  // namespace daflow
