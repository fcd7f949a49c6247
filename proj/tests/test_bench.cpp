#include "daflow/bench.hpp"
#include "daflow/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace daflow;
using namespace daflow::bench;

TEST(Cases, Builtins)
{
    for (const auto& id : builtin_case_ids()) {
        const auto c = builtin_case(id);
        EXPECT_EQ(c.id, id);
        EXPECT_EQ(c.params.dt, 0.05);
        EXPECT_EQ(c.params.relax.u, 0.4);
        EXPECT_EQ(c.params.relax.p, 0.4);
        EXPECT_EQ(c.params.conv_tol, 1e-4);
    }
    const auto c = builtin_case("cavity2d-re1000");
    EXPECT_EQ(c.grid_tag(), "61x61");
    EXPECT_EQ(c.grid.stretching, Stretching::TanhStretched);
    EXPECT_EQ(*c.reynolds, 1000.0);
    EXPECT_EQ(builtin_case("cavity3d-re1000").neighbor_count(), 27u);
    EXPECT_EQ(c.neighbor_count(), 9u);
    EXPECT_THROW(builtin_case("nope"), ConfigError);
}

TEST(Cases, ChannelNeedsReynolds)
{
    auto c = builtin_case("channel");
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "missing required field: reynolds");
    }
    c.reynolds = 100;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.effective_params().reference_length, 0.5);
    EXPECT_DOUBLE_EQ(c.effective_params().viscosity(), 0.005);
}

TEST(Cases, InvalidValues)
{
    auto c = builtin_case("cavity2d-re1000");
    c.params.relax = RelaxFactors::uniform(1.5);
    EXPECT_THROW(c.validate(), ParameterError);
    c = builtin_case("cavity2d-re1000");
    c.grid.counts = {3, 3};
    EXPECT_THROW(c.validate(), GeometryError);
    c = builtin_case("cavity2d-re1000");
    c.weights.sigma_factor = 0.9;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Reference, ParseKinds)
{
    std::stringstream ss(R"(# comment
a psi -0.1184 rel 0.05 src-a
a iterations 1129 factor 2 src-b   # trailing comment
b x 7.55 range 7.1:7.9 src-c
b y 1 abs 0.5 src-d
b z 2.28e-3 sign 1 src-e
)");
    const auto r = parse_reference(ss);
    ASSERT_EQ(r.size(), 5u);
    EXPECT_TRUE(r[0].accepts(-0.1184 * 1.049));
    EXPECT_FALSE(r[0].accepts(-0.1184 * 1.051));
    EXPECT_TRUE(r[1].accepts(565));
    EXPECT_TRUE(r[1].accepts(2258));
    EXPECT_FALSE(r[1].accepts(564));
    EXPECT_FALSE(r[1].accepts(2259));
    EXPECT_TRUE(r[2].accepts(7.1));
    EXPECT_FALSE(r[2].accepts(7.95));
    EXPECT_TRUE(r[3].accepts(1.5));
    EXPECT_FALSE(r[3].accepts(1.6));
    EXPECT_TRUE(r[4].accepts(1e-9));
    EXPECT_FALSE(r[4].accepts(-1e-9));
    EXPECT_FALSE(r[0].accepts(std::nan("")));
    EXPECT_EQ(r[2].source, "src-c");
}

TEST(Reference, ParseErrors)
{
    for (const char* bad : {"a psi 1 rel 0 src", "a psi 1 rel -1 src", "a psi 1 factor 0.5 src", "a psi 1 wat 1 src",
                            "a psi 1 rel", "a psi 1 range 3 src", "a psi 1 rel x src"}) {
        std::stringstream ss(bad);
        EXPECT_THROW(parse_reference(ss), IoError) << bad;
    }
}

TEST(Reference, DataFile)
{
    const auto recs = load_reference(default_reference_path());
    auto find = [&](const std::string& id, const std::string& q) -> const ReferenceRecord* {
        for (const auto& r : recs)
            if (r.ref_id == id && r.quantity == q) return &r;
        return nullptr;
    };
    const auto* psi = find("cavity2d-re1000", "psi_primary");
    ASSERT_NE(psi, nullptr);
    EXPECT_EQ(psi->value, -0.1184);
    EXPECT_EQ(psi->tolerance, 0.05);
    const auto* br = find("cavity2d-re1000", "psi_bottom_right_1");
    ASSERT_NE(br, nullptr);
    EXPECT_EQ(br->value, 1.73e-3);
    const auto* it = find("cavity2d-re1000/61x61", "iterations");
    ASSERT_NE(it, nullptr);
    EXPECT_EQ(it->value, 1129);
    const auto* xr = find("channel", "reattachment_length");
    ASSERT_NE(xr, nullptr);
    EXPECT_EQ(xr->value, 7.55);
    EXPECT_EQ(xr->lo, 7.1);
    EXPECT_EQ(xr->hi, 7.9);
    const auto* hi = find("cavity2d-re10000", "psi_primary");
    ASSERT_NE(hi, nullptr);
    EXPECT_EQ(hi->value, -0.1162);

    auto spec = builtin_case("cavity2d-re1000");
    const auto sel = select_records(recs, spec);
    bool has_grid = false;
    for (const auto& r : sel) {
        EXPECT_TRUE(r.ref_id == "cavity2d-re1000" || r.ref_id == "cavity2d-re1000/61x61");
        has_grid = has_grid || r.ref_id == "cavity2d-re1000/61x61";
    }
    EXPECT_TRUE(has_grid);
}

TEST(Reference, Compare)
{
    std::stringstream ss("a q1 1 abs 0.1 s\na q2 2 abs 0.1 s\n");
    const auto recs = parse_reference(ss);
    auto rep = compare_reference({{"q1", 1.05}, {"q2", 2.0}}, recs);
    EXPECT_TRUE(rep.passed);
    EXPECT_TRUE(rep.warnings.empty());

    rep = compare_reference({{"q1", 1.05}, {"q2", 2.5}}, recs);
    EXPECT_FALSE(rep.passed);
    EXPECT_EQ(rep.entries[1].verdict, Verdict::Fail);
    EXPECT_EQ(rep.entries[1].record.quantity, "q2");

    rep = compare_reference({{"q1", 1.0}}, recs);
    EXPECT_FALSE(rep.passed);
    EXPECT_EQ(rep.entries[1].verdict, Verdict::Unavailable);
    EXPECT_EQ(verdict_name(rep.entries[1].verdict), "unavailable");

    rep = compare_reference({{"q1", 1.0}}, {});
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.warnings.size(), 1u);
}

TEST(RunCase, SmallCavity)
{
    auto spec = builtin_case("cavity2d-re1000");
    spec.grid.counts = {21, 21};
    spec.reynolds = 100;
    const auto r = run_case(spec);
    EXPECT_TRUE(r.converged);
    ASSERT_FALSE(r.vortices.empty());
    EXPECT_EQ(r.vortices[0].label, "primary");
    EXPECT_LT(r.vortices[0].psi, 0.0);
    EXPECT_EQ(r.profiles.at("vertical_u").size(), 21u);
    EXPECT_EQ(r.profiles.at("vertical_u").back().value, 1.0);
    const auto q = quantities(r);
    EXPECT_EQ(q.at("iterations"), static_cast<double>(r.history.size()));
    EXPECT_EQ(q.at("psi_primary"), r.vortices[0].psi);
    EXPECT_EQ(q.count("reattachment_length"), 0u);

    const auto again = run_case(spec);
    EXPECT_EQ(again.field.u(), r.field.u());
    EXPECT_EQ(again.psi, r.psi);
}

TEST(RunCase, SmallChannel)
{
    auto spec = builtin_case("channel");
    spec.grid.counts = {181, 11};
    spec.reynolds = 50;
    const auto r = run_case(spec);
    EXPECT_TRUE(r.converged);
    ASSERT_TRUE(r.flux.has_value());
    // too coarse for mass balance; only the outputs are checked here
    EXPECT_GT(r.flux->inlet, 0.0);
    EXPECT_GT(r.flux->outlet, 0.0);
    EXPECT_TRUE(r.reattachment.has_value());
    EXPECT_TRUE(r.profiles.count("station_0_u"));
    EXPECT_TRUE(r.profiles.count("station_8_u"));
}

TEST(RunCase, DivergedRunReportsNan)
{
    // 21^2 is too coarse for Re 1000 and blows up within a few hundred steps
    auto spec = builtin_case("cavity2d-re1000");
    spec.grid.counts = {21, 21};
    const auto r = run_case(spec);
    EXPECT_FALSE(r.converged);
    EXPECT_LT(r.history.size(), spec.params.max_outer);
    EXPECT_TRUE(std::isnan(r.divergence.max));
    EXPECT_TRUE(std::isnan(r.history.back().change[0]));
}
