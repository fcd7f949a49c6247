#include "daflow/error.hpp"
#include "daflow/postproc.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace daflow;

namespace {

// Grid nodes strictly inside the unit disc plus a ring of boundary nodes on it.
NodeSet disc_nodes(int n)
{
    const double h = 2.0 / (n - 1);
    std::vector<Vec3> pos;
    std::vector<BoundaryTag> tags;
    std::vector<Vec3> normals;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = -1.0 + i * h, y = -1.0 + j * h;
            if (std::hypot(x, y) < 1.0 - 0.5 * h) {
                pos.push_back({x, y, 0.0});
                tags.emplace_back(Interior{});
                normals.push_back({0, 0, 0});
            }
        }
    const int ring = static_cast<int>(std::ceil(2.0 * M_PI / h));
    for (int r = 0; r < ring; ++r) {
        const double t = 2.0 * M_PI * r / ring;
        pos.push_back({std::cos(t), std::sin(t), 0.0});
        tags.emplace_back(Wall{});
        normals.push_back({std::cos(t), std::sin(t), 0.0});
    }
    return NodeSet(2, pos, tags, normals);
}

std::vector<double> sample(const NodeSet& ns, double (*f)(double, double))
{
    std::vector<double> v(ns.size());
    for (NodeId i = 0; i < ns.size(); ++i) v[i] = f(ns.position(i)[0], ns.position(i)[1]);
    return v;
}

}  // namespace

TEST(Streamfunction, QuiescentField)
{
    const auto ns = support::square_nodes(11);
    const StencilTable st(ns, 9, WeightParams{});
    const FlowField f(2, ns.size());
    const auto psi = solve_streamfunction(f, ns, st, std::vector<double>(ns.size(), 0.0));
    for (double v : psi) EXPECT_EQ(v, 0.0);
}

TEST(Streamfunction, RigidRotationOnDisc)
{
    const auto ns = disc_nodes(41);
    const StencilTable st(ns, 9, WeightParams{});
    FlowField f(2, ns.size());
    f.u() = sample(ns, [](double, double y) { return -y; });
    f.v() = sample(ns, [](double x, double) { return x; });
    const auto exact = sample(ns, [](double x, double y) { return -0.5 * (x * x + y * y); });
    const auto psi = solve_streamfunction(f, ns, st, exact);
    double err = 0;
    for (NodeId i = 0; i < ns.size(); ++i) err = std::max(err, std::abs(psi[i] - exact[i]));
    EXPECT_LE(err, 1e-3);
}

TEST(Streamfunction, GaugeShift)
{
    const auto ns = support::square_nodes(15, Stretching::TanhStretched);
    const StencilTable st(ns, 9, WeightParams{});
    FlowField f(2, ns.size());
    f.u() = sample(ns, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
    f.v() = sample(ns, [](double x, double y) { return x * y * y; });
    support::Gen g(40);
    auto bc = g.vector(ns.size());
    const auto a = solve_streamfunction(f, ns, st, bc);
    for (auto& v : bc) v += 0.75;
    const auto b = solve_streamfunction(f, ns, st, bc);
    for (NodeId i = 0; i < ns.size(); ++i) EXPECT_NEAR(b[i] - a[i], 0.75, 1e-9);
}

TEST(Streamfunction, ThreeDimensionalUnsupported)
{
    const auto ns = generate_cavity_3d_half({{5, 5, 3}, Stretching::Uniform});
    const StencilTable st(ns, 27, WeightParams{});
    const FlowField f(3, ns.size());
    EXPECT_THROW(solve_streamfunction(f, ns, st, std::vector<double>(ns.size(), 0.0)), UnsupportedError);
}

TEST(Vortices, SingleMinimum)
{
    const auto ns = support::square_nodes(12);
    const StencilTable st(ns, 9, WeightParams{});
    // centre between grid nodes so the refinement has work to do
    const auto psi = sample(ns, [](double x, double y) { return (x - 0.47) * (x - 0.47) + (y - 0.52) * (y - 0.52) - 0.1; });
    const auto v = find_vortices(psi, ns, st);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].label, "primary");
    EXPECT_NEAR(v[0].location[0], 0.47, 1e-10);
    EXPECT_NEAR(v[0].location[1], 0.52, 1e-10);
    EXPECT_NEAR(v[0].psi, -0.1, 1e-10);
}

TEST(Vortices, ConstantHasNone)
{
    const auto ns = support::square_nodes(9);
    const StencilTable st(ns, 9, WeightParams{});
    EXPECT_TRUE(find_vortices(std::vector<double>(ns.size(), 2.0), ns, st).empty());
}

TEST(Vortices, NegationSymmetry)
{
    const auto ns = support::square_nodes(25, Stretching::TanhStretched);
    const StencilTable st(ns, 9, WeightParams{});
    const auto psi = sample(ns, [](double x, double y) {
        return std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y) * (1.0 + 0.3 * x) + 0.05 * y;
    });
    std::vector<double> neg(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) neg[i] = -psi[i];
    const auto a = find_vortices(psi, ns, st);
    const auto b = find_vortices(neg, ns, st);
    ASSERT_EQ(a.size(), b.size());
    ASSERT_GE(a.size(), 2u);
    for (std::size_t r = 0; r < a.size(); ++r) {
        EXPECT_EQ(a[r].node, b[r].node);
        EXPECT_EQ(a[r].location, b[r].location);
        EXPECT_EQ(a[r].psi, -b[r].psi);
        EXPECT_EQ(a[r].label, b[r].label);
    }
}

TEST(Vortices, RecordsAreLocalExtrema)
{
    const auto ns = support::square_nodes(25);
    const StencilTable st(ns, 9, WeightParams{});
    const auto psi = sample(ns, [](double x, double y) { return std::cos(3 * M_PI * x) * std::cos(3 * M_PI * y); });
    const auto v = find_vortices(psi, ns, st);
    ASSERT_FALSE(v.empty());
    for (std::size_t r = 0; r < v.size(); ++r) {
        const NodeId c = v[r].node;
        bool is_min = true, is_max = true;
        for (NodeId j : st[c].neighbors)
            if (j != c) {
                is_min = is_min && psi[c] < psi[j];
                is_max = is_max && psi[c] > psi[j];
            }
        EXPECT_TRUE(is_min || is_max);
        if (r > 0) EXPECT_LE(std::abs(v[r].psi), std::abs(v[r - 1].psi));
    }
}

TEST(Vortices, QuadrantLabels)
{
    const auto ns = support::square_nodes(41);
    const StencilTable st(ns, 9, WeightParams{});
    auto bump = [](double x, double y, double cx, double cy, double a) {
        return a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / 0.005);
    };
    std::vector<double> psi(ns.size());
    for (NodeId i = 0; i < ns.size(); ++i) {
        const double x = ns.position(i)[0], y = ns.position(i)[1];
        psi[i] = bump(x, y, 0.5, 0.6, -1.0) + bump(x, y, 0.85, 0.15, 0.01) + bump(x, y, 0.15, 0.15, 0.002) +
                 bump(x, y, 0.15, 0.85, 0.004);
    }
    const auto v = find_vortices(psi, ns, st);
    ASSERT_EQ(v.size(), 4u);
    EXPECT_EQ(v[0].label, "primary");
    EXPECT_LT(v[0].psi, 0.0);
    EXPECT_EQ(v[1].label, "bottom_right_1");
    EXPECT_EQ(v[2].label, "top_left_1");
    EXPECT_EQ(v[3].label, "bottom_left_1");
    ASSERT_TRUE(find_label(v, "top_left_1"));
    EXPECT_GT(find_label(v, "top_left_1")->psi, 0.0);
    EXPECT_FALSE(find_label(v, "top_right_1"));
}

TEST(Midline, LidAndWall)
{
    for (int n : {11, 12}) {
        const auto ns = support::square_nodes(n, Stretching::TanhStretched);
        std::vector<double> u(ns.size(), 0.0);
        for (NodeId i = 0; i < ns.size(); ++i)
            if (std::holds_alternative<MovingLid>(ns.tag(i))) u[i] = 1.0;
            else if (is_interior(ns.tag(i))) u[i] = 0.3 * ns.position(i)[1] - 0.2;
        const auto prof = extract_midline(ns, u, Midline::Vertical);
        ASSERT_EQ(prof.size(), static_cast<std::size_t>(n));
        EXPECT_EQ(prof.front().value, 0.0);
        EXPECT_EQ(prof.back().value, 1.0);
        EXPECT_EQ(prof.back().coordinate, 1.0);
        for (std::size_t s = 1; s < prof.size(); ++s) EXPECT_LT(prof[s - 1].coordinate, prof[s].coordinate);
        const auto h = extract_midline(ns, std::vector<double>(ns.size(), 0.0), Midline::Horizontal);
        ASSERT_EQ(h.size(), static_cast<std::size_t>(n));
        for (const auto& s : h) EXPECT_EQ(s.value, 0.0);
    }
}

TEST(Midline, InterpolatesLinearField)
{
    const auto ns = support::square_nodes(12, Stretching::TanhStretched);
    const auto f = sample(ns, [](double x, double y) { return 2 * x + y; });
    for (const auto& s : extract_midline(ns, f, Midline::Vertical)) EXPECT_NEAR(s.value, 1.0 + s.coordinate, 1e-14);
    for (const auto& s : extract_midline(ns, f, Midline::Horizontal)) EXPECT_NEAR(s.value, 2 * s.coordinate + 0.5, 1e-14);
}

TEST(Midline, HalfCavitySymmetryPlane)
{
    const auto ns = generate_cavity_3d_half({{7, 7, 4}, Stretching::TanhStretched});
    std::vector<double> z(ns.size());
    for (NodeId i = 0; i < ns.size(); ++i) z[i] = ns.position(i)[2];
    for (const auto& s : extract_midline(ns, z, Midline::Vertical)) EXPECT_EQ(s.value, 0.5);
}

TEST(Midline, UnstructuredRejected)
{
    support::Gen g(41);
    auto pos = g.jittered_square(6, 0.2);
    const NodeSet ns(2, pos, std::vector<BoundaryTag>(pos.size(), Interior{}));
    EXPECT_THROW(extract_midline(ns, std::vector<double>(ns.size()), Midline::Vertical), UnsupportedError);
}

namespace {

struct SyntheticChannel {
    ChannelGeom geom;
    NodeSet nodes;
    FlowField field;
};

SyntheticChannel channel_with(double (*u)(double x, double y))
{
    ChannelGeom geom;
    auto ns = generate_channel({{181, 11}, Stretching::Uniform}, geom);
    FlowField f(2, ns.size());
    for (NodeId i = 0; i < ns.size(); ++i) f.u()[i] = u(ns.position(i)[0], ns.position(i)[1]);
    return {geom, std::move(ns), std::move(f)};
}

}  // namespace

TEST(Reattachment, AttachedFlow)
{
    const auto c = channel_with([](double, double) { return 1.0; });
    EXPECT_FALSE(reattachment_length(c.field, c.nodes, c.geom).has_value());
}

TEST(Reattachment, LinearCrossing)
{
    // behind the block (rear at x = 4.5) u is -1 until 2 (H-h) downstream,
    // then rises linearly and crosses zero at 2.4 (H-h)
    const auto c = channel_with([](double x, double) {
        const double s = (x - 4.5) / 0.5;
        if (s < 0) return 1.0;
        if (s < 2) return -1.0;
        if (s < 3) return -1.0 + (s - 2.0) / 0.4;
        return 1.5;
    });
    const auto xr = reattachment_length(c.field, c.nodes, c.geom);
    ASSERT_TRUE(xr.has_value());
    // nodes every 0.1: linear interpolation between the nodes straddling the crossing
    const double xa = 5.7, xb = 5.8;
    auto u = [](double x) { return -1.0 + ((x - 4.5) / 0.5 - 2.0) / 0.4; };
    const double x0 = xa + (xb - xa) * u(xa) / (u(xa) - u(xb));
    EXPECT_NEAR(*xr, (x0 - 4.5) / 0.5, 1e-12);
    EXPECT_NEAR(*xr, 2.4, 1e-9);
}

TEST(Station, NearestColumn)
{
    const auto c = channel_with([](double x, double y) { return x + 10 * y; });
    const auto prof = extract_station(c.nodes, c.field.u(), 6.03);
    ASSERT_EQ(prof.size(), 11u);
    for (const auto& s : prof) EXPECT_NEAR(s.value, 6.0 + 10 * s.coordinate, 1e-12);
}

TEST(Flux, PoiseuilleInletBalances)
{
    const ChannelGeom geom;
    const FlowProblem problem(generate_channel({{361, 21}, Stretching::Uniform}, geom), 9, WeightParams{});
    FlowField f = initial_field(problem);
    for (NodeId i = 0; i < problem.size(); ++i) f.u()[i] = problem.inlet().velocity(problem.nodes().position(i)[1]);
    const auto flux = channel_flux(problem, f);
    // trapezoid of 4y(1-y) on 21 points: 2/3 - 4 h^2 / 6
    const double h = 0.05;
    EXPECT_NEAR(flux.inlet, 2.0 / 3.0 - 4.0 * h * h / 6.0, 1e-12);
    EXPECT_NEAR(flux.relative_mismatch(), 0.0, 1e-12);
    const auto psi = boundary_streamfunction(problem, f);
    double top = 0;
    for (NodeId i = 0; i < problem.size(); ++i)
        if (problem.nodes().position(i)[1] == 1.0) top = psi[i];
    EXPECT_NEAR(top, 2.0 / 3.0, 1e-12);
}
