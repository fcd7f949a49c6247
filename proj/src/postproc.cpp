#include "daflow/postproc.hpp"

#include "daflow/error.hpp"
#include "daflow/sparse.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace daflow {

std::vector<double> solve_streamfunction(const FlowField& field, const NodeSet& nodes, const StencilTable& stencils,
                                         std::span<const double> boundary)
{
    if (nodes.dim() != 2 || field.dim != 2) throw UnsupportedError("streamfunction is only defined in 2D");
    const std::size_t n = nodes.size();
    if (field.size() != n || stencils.size() != n || boundary.size() != n)
        throw AssemblyError("solve_streamfunction: size mismatch");

    std::vector<Triplet> trip;
    trip.reserve(n * stencils.neighbors_per_node());
    std::vector<double> rhs(n, 0.0);
    for (NodeId i = 0; i < n; ++i) {
        if (!is_interior(nodes.tag(i))) {
            trip.push_back({i, i, 1.0});
            rhs[i] = boundary[i];
            continue;
        }
        const auto& st = stencils[i];
        const auto xx = st.row(Deriv::XX);
        const auto yy = st.row(Deriv::YY);
        for (std::size_t s = 0; s < st.size(); ++s) trip.push_back({i, st.neighbors[s], xx[s] + yy[s]});
        rhs[i] = stencils.apply(i, Deriv::Y, field.u()) - stencils.apply(i, Deriv::X, field.v());
    }
    const auto a = assemble(n, trip);
    auto res = solve_bicgstab(a, rhs, {}, {1e-12, 0, Preconditioner::Ilu0});
    if (!res.stats.converged) throw SingularityError("streamfunction solve did not converge");
    return std::move(res.x);
}

namespace {

// Trapezoid integral of u up a column of nodes, starting from psi0.
void integrate_column(std::vector<NodeId> column, const NodeSet& nodes, std::span<const double> u, double psi0,
                      std::vector<double>& psi)
{
    std::sort(column.begin(), column.end(),
              [&](NodeId a, NodeId b) { return nodes.position(a)[1] < nodes.position(b)[1]; });
    double acc = psi0;
    for (std::size_t j = 0; j < column.size(); ++j) {
        if (j > 0) {
            const double dy = nodes.position(column[j])[1] - nodes.position(column[j - 1])[1];
            acc += 0.5 * dy * (u[column[j]] + u[column[j - 1]]);
        }
        psi[column[j]] = acc;
    }
}

}  // namespace

std::vector<double> boundary_streamfunction(const FlowProblem& problem, const FlowField& field)
{
    const auto& nodes = problem.nodes();
    const std::size_t n = nodes.size();
    std::vector<double> psi(n, 0.0);

    bool has_inlet = false;
    std::vector<NodeId> outlet;
    for (NodeId i = 0; i < n; ++i) {
        if (std::holds_alternative<Inlet>(nodes.tag(i))) has_inlet = true;
        if (std::holds_alternative<Outlet>(nodes.tag(i))) outlet.push_back(i);
    }
    if (!has_inlet) return psi;

    const auto& in = problem.inlet();
    const double h = in.y1 - in.y0;
    auto inlet_psi = [&](double y) {
        const double s = std::clamp((y - in.y0) / h, 0.0, 1.0);
        return 4.0 * in.umax * h * (s * s / 2.0 - s * s * s / 3.0);
    };
    const double total = inlet_psi(in.y1);
    for (NodeId i = 0; i < n; ++i) {
        const auto& tag = nodes.tag(i);
        const double y = nodes.position(i)[1];
        if (std::holds_alternative<Inlet>(tag))
            psi[i] = inlet_psi(y);
        else if (std::holds_alternative<Wall>(tag) || std::holds_alternative<MovingLid>(tag))
            psi[i] = y >= in.y1 ? total : 0.0;
    }
    if (!outlet.empty()) {
        // Integrate the whole outlet column from the bottom corner; only the
        // outlet nodes take the result, the corners keep their wall values.
        const double xo = nodes.position(outlet.front())[0];
        std::vector<NodeId> column;
        for (NodeId i = 0; i < n; ++i)
            if (nodes.position(i)[0] == xo) column.push_back(i);
        std::vector<double> acc(n, 0.0);
        integrate_column(column, nodes, field.u(), 0.0, acc);
        for (NodeId i : outlet) psi[i] = acc[i];
    }
    return psi;
}

std::vector<double> solve_streamfunction(const FlowProblem& problem, const FlowField& field)
{
    if (problem.dim() != 2) throw UnsupportedError("streamfunction is only defined in 2D");
    const auto boundary = boundary_streamfunction(problem, field);
    return solve_streamfunction(field, problem.nodes(), problem.stencils(), boundary);
}

// ---------------------------------------------------------------------------
// Vortices
// ---------------------------------------------------------------------------

std::vector<VortexRecord> find_vortices(std::span<const double> psi, const NodeSet& nodes,
                                        const StencilTable& stencils)
{
    const std::size_t n = nodes.size();
    if (psi.size() != n || stencils.size() != n) throw AssemblyError("find_vortices: size mismatch");
    const int dim = nodes.dim();

    std::vector<VortexRecord> out;
    for (NodeId i = 0; i < n; ++i) {
        if (!is_interior(nodes.tag(i))) continue;
        const auto& st = stencils[i];
        bool is_min = true, is_max = true;
        for (NodeId j : st.neighbors) {
            if (j == i) continue;
            if (!(psi[i] < psi[j])) is_min = false;
            if (!(psi[i] > psi[j])) is_max = false;
        }
        if (!is_min && !is_max) continue;

        VortexRecord rec;
        rec.node = i;
        rec.location = nodes.position(i);
        rec.psi = psi[i];

        const auto alpha = estimate(st, psi);
        Eigen::VectorXd g(dim);
        Eigen::MatrixXd hess(dim, dim);
        for (int a = 0; a < dim; ++a) g[a] = alpha[static_cast<std::size_t>(deriv_row(static_cast<Deriv>(1 + a), dim))];
        hess(0, 0) = alpha[static_cast<std::size_t>(deriv_row(Deriv::XX, dim))];
        hess(1, 1) = alpha[static_cast<std::size_t>(deriv_row(Deriv::YY, dim))];
        hess(0, 1) = hess(1, 0) = alpha[static_cast<std::size_t>(deriv_row(Deriv::XY, dim))];
        if (dim == 3) {
            hess(2, 2) = alpha[static_cast<std::size_t>(deriv_row(Deriv::ZZ, dim))];
            hess(0, 2) = hess(2, 0) = alpha[static_cast<std::size_t>(deriv_row(Deriv::XZ, dim))];
            hess(1, 2) = hess(2, 1) = alpha[static_cast<std::size_t>(deriv_row(Deriv::YZ, dim))];
        }
        // Accept the stationary point only if the fit curves the right way and
        // the point stays inside the stencil support.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
        const auto ev = eig.eigenvalues();
        const bool definite = is_min ? ev.minCoeff() > 0.0 : ev.maxCoeff() < 0.0;
        if (definite) {
            const Eigen::VectorXd delta = -hess.ldlt().solve(g);
            if (delta.norm() <= st.sigma) {
                rec.psi = alpha[0] + 0.5 * g.dot(delta);
                for (int a = 0; a < dim; ++a) rec.location[static_cast<std::size_t>(a)] += delta[a];
            }
        }
        out.push_back(rec);
    }

    std::sort(out.begin(), out.end(), [](const VortexRecord& a, const VortexRecord& b) {
        if (std::abs(a.psi) != std::abs(b.psi)) return std::abs(a.psi) > std::abs(b.psi);
        return a.node < b.node;
    });

    if (out.empty()) return out;
    Vec3 lo = nodes.position(0), hi = lo;
    for (const auto& x : nodes.positions())
        for (int a = 0; a < 3; ++a) {
            lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)], x[static_cast<std::size_t>(a)]);
            hi[static_cast<std::size_t>(a)] = std::max(hi[static_cast<std::size_t>(a)], x[static_cast<std::size_t>(a)]);
        }
    const double xm = 0.5 * (lo[0] + hi[0]);
    const double ym = 0.5 * (lo[1] + hi[1]);
    out[0].label = "primary";
    std::map<std::string, int> count;
    for (std::size_t r = 1; r < out.size(); ++r) {
        const auto& x = out[r].location;
        std::string q = std::string(x[1] < ym ? "bottom" : "top") + (x[0] < xm ? "_left" : "_right");
        out[r].label = q + "_" + std::to_string(++count[q]);
    }
    return out;
}

std::optional<VortexRecord> find_label(std::span<const VortexRecord> vortices, const std::string& label)
{
    for (const auto& v : vortices)
        if (v.label == label) return v;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

std::vector<ProfileSample> extract_midline(const NodeSet& nodes, std::span<const double> values, Midline line)
{
    const auto& shape = nodes.structured_shape();
    if (!shape) throw UnsupportedError("midline extraction needs a structured node set");
    if (values.size() != nodes.size()) throw AssemblyError("extract_midline: size mismatch");
    const int nx = (*shape)[0], ny = (*shape)[1], nz = (*shape)[2];
    const int k = nz - 1;  // 2D: 0; half-domain 3D: symmetry plane

    // Along the line index t; across it index c.
    const bool vertical = line == Midline::Vertical;
    const int ncross = vertical ? nx : ny;
    const int nalong = vertical ? ny : nx;
    const std::size_t cross_axis = vertical ? 0 : 1;
    const std::size_t along_axis = vertical ? 1 : 0;
    auto id = [&](int c, int t) { return vertical ? nodes.grid_index(c, t, k) : nodes.grid_index(t, c, k); };

    std::vector<ProfileSample> out;
    out.reserve(static_cast<std::size_t>(nalong));
    const int c0 = (ncross - 1) / 2;
    const int c1 = ncross / 2;
    for (int t = 0; t < nalong; ++t) {
        const NodeId a = id(c0, t);
        const NodeId b = id(c1, t);
        ProfileSample s;
        s.coordinate = nodes.position(a)[along_axis];
        if (a == b) {
            s.value = values[a];
        } else {
            const double xa = nodes.position(a)[cross_axis];
            const double xb = nodes.position(b)[cross_axis];
            const double lo = nodes.position(id(0, t))[cross_axis];
            const double hi = nodes.position(id(ncross - 1, t))[cross_axis];
            const double w = (0.5 * (lo + hi) - xa) / (xb - xa);
            s.value = values[a] + w * (values[b] - values[a]);
        }
        out.push_back(s);
    }
    return out;
}

std::vector<ProfileSample> extract_station(const NodeSet& nodes, std::span<const double> values, double x)
{
    if (values.size() != nodes.size()) throw AssemblyError("extract_station: size mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : nodes.positions()) best = std::min(best, std::abs(p[0] - x));
    std::vector<ProfileSample> out;
    for (NodeId i = 0; i < nodes.size(); ++i) {
        const auto& p = nodes.position(i);
        if (std::abs(p[0] - x) == best) out.push_back({p[1], values[i]});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.coordinate < b.coordinate; });
    return out;
}

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

std::optional<double> reattachment_length(const FlowField& field, const NodeSet& nodes, const ChannelGeom& geom)
{
    if (field.size() != nodes.size()) throw AssemblyError("reattachment_length: size mismatch");
    const double rear = geom.obstacle_rear();

    double ywall = nodes.position(0)[1];
    for (const auto& x : nodes.positions()) ywall = std::min(ywall, x[1]);
    double yrow = std::numeric_limits<double>::infinity();
    for (const auto& x : nodes.positions())
        if (x[1] > ywall && x[0] >= rear) yrow = std::min(yrow, x[1]);
    if (!std::isfinite(yrow)) return std::nullopt;

    std::vector<NodeId> row;
    for (NodeId i = 0; i < nodes.size(); ++i) {
        const auto& x = nodes.position(i);
        if (x[1] == yrow && x[0] >= rear) row.push_back(i);
    }
    std::sort(row.begin(), row.end(), [&](NodeId a, NodeId b) { return nodes.position(a)[0] < nodes.position(b)[0]; });

    // The recirculation bubble is the longest stretch of reversed flow; short
    // sign flips next to the block corner are ignored.
    const auto& u = field.u();
    std::optional<double> best;
    double best_len = 0.0;
    std::optional<double> run_start;
    for (std::size_t j = 0; j + 1 < row.size(); ++j) {
        const double ua = u[row[j]];
        const double ub = u[row[j + 1]];
        const double xa = nodes.position(row[j])[0];
        const double xb = nodes.position(row[j + 1])[0];
        if (ua < 0.0 && !run_start) run_start = xa;
        if (run_start && ua < 0.0 && ub >= 0.0) {
            const double x0 = xa + (xb - xa) * ua / (ua - ub);
            if (x0 - *run_start > best_len) {
                best_len = x0 - *run_start;
                best = (x0 - rear) / geom.reference_length();
            }
            run_start.reset();
        }
    }
    return best;
}

double FluxBalance::relative_mismatch() const
{
    const double scale = std::max(std::abs(inlet), std::abs(outlet));
    return scale > 0.0 ? std::abs(inlet - outlet) / scale : 0.0;
}

FluxBalance channel_flux(const FlowProblem& problem, const FlowField& field)
{
    const auto& nodes = problem.nodes();
    double xin = std::numeric_limits<double>::infinity(), xout = -xin;
    for (const auto& x : nodes.positions()) {
        xin = std::min(xin, x[0]);
        xout = std::max(xout, x[0]);
    }
    auto column_flux = [&](double xc) {
        std::vector<NodeId> col;
        for (NodeId i = 0; i < nodes.size(); ++i)
            if (nodes.position(i)[0] == xc) col.push_back(i);
        std::vector<double> psi(nodes.size(), 0.0);
        integrate_column(col, nodes, field.u(), 0.0, psi);
        double top = 0.0;
        double ymax = -std::numeric_limits<double>::infinity();
        for (NodeId i : col)
            if (nodes.position(i)[1] > ymax) {
                ymax = nodes.position(i)[1];
                top = psi[i];
            }
        return top;
    };
    return {column_flux(xin), column_flux(xout)};
}

}  // namespace daflow
