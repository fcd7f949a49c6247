#include "daflow/bench.hpp"

#include "daflow/error.hpp"
#include "daflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace daflow::bench {

std::string geometry_name(Geometry g)
{
    switch (g) {
    case Geometry::Cavity2D: return "cavity2d";
    case Geometry::Cavity3DHalf: return "cavity3d";
    case Geometry::Channel: return "channel";
    }
    return "unknown";
}

void CaseSpec::validate() const
{
    if (!reynolds) throw ConfigError("missing required field: reynolds");
    if (!(*reynolds > 0.0)) throw ParameterError("reynolds must be positive");
    validate_grid(grid, geometry == Geometry::Cavity3DHalf ? 3 : 2);
    weights.validate();
    effective_params().validate();
    if (geometry == Geometry::Channel) {
        const auto& g = channel;
        if (!(g.height > 0.0 && g.obstacle_height > 0.0 && g.obstacle_height < g.height))
            throw GeometryError("channel obstacle height must lie in (0, H)");
        if (!(g.obstacle_length > 0.0 && g.obstacle_x > 0.0 && g.obstacle_rear() < g.length))
            throw GeometryError("channel obstacle must lie inside the channel");
    }
}

SolverParams CaseSpec::effective_params() const
{
    SolverParams p = params;
    if (reynolds) p.reynolds = *reynolds;
    p.reference_length = geometry == Geometry::Channel ? channel.reference_length() : 1.0;
    return p;
}

std::size_t CaseSpec::neighbor_count() const
{
    return neighbors > 0 ? neighbors : default_neighbors(geometry == Geometry::Cavity3DHalf ? 3 : 2);
}

std::string CaseSpec::grid_tag() const
{
    std::string s;
    for (std::size_t i = 0; i < grid.counts.size(); ++i) s += (i ? "x" : "") + std::to_string(grid.counts[i]);
    return s;
}

std::vector<std::string> builtin_case_ids()
{
    return {"cavity2d-re1000", "cavity2d-re5000", "cavity2d-re10000", "cavity3d-re1000", "channel"};
}

CaseSpec builtin_case(const std::string& id)
{
    CaseSpec c;
    c.id = id;
    c.reference_id = id;
    c.params.dt = 0.05;
    c.params.relax = RelaxFactors::uniform(0.4);
    if (id == "cavity2d-re1000") {
        c.grid = {{61, 61}, Stretching::TanhStretched};
        c.reynolds = 1000.0;
    } else if (id == "cavity2d-re5000") {
        c.grid = {{101, 101}, Stretching::TanhStretched};
        c.reynolds = 5000.0;
    } else if (id == "cavity2d-re10000") {
        c.grid = {{151, 151}, Stretching::TanhStretched};
        c.reynolds = 10000.0;
    } else if (id == "cavity3d-re1000") {
        c.geometry = Geometry::Cavity3DHalf;
        c.grid = {{41, 41, 21}, Stretching::TanhStretched};
        c.reynolds = 1000.0;
    } else if (id == "channel") {
        c.geometry = Geometry::Channel;
        c.grid = {{361, 21}, Stretching::Uniform};
    } else {
        throw ConfigError("unknown case: " + id);
    }
    return c;
}

FlowProblem build_problem(const CaseSpec& spec)
{
    spec.validate();
    switch (spec.geometry) {
    case Geometry::Cavity2D:
        return FlowProblem(generate_cavity_2d(spec.grid), spec.neighbor_count(), spec.weights);
    case Geometry::Cavity3DHalf:
        return FlowProblem(generate_cavity_3d_half(spec.grid), spec.neighbor_count(), spec.weights);
    case Geometry::Channel: {
        InletSpec inlet{0.0, spec.channel.height, 1.0};
        return FlowProblem(generate_channel(spec.grid, spec.channel), spec.neighbor_count(), spec.weights, inlet);
    }
    }
    throw ConfigError("unknown geometry");
}

CaseResult run_case(const CaseSpec& spec, const StepObserver& observer)
{
    CaseResult r;
    r.spec = spec;
    auto problem = std::make_shared<const FlowProblem>(build_problem(spec));
    r.problem = problem;
    const SolverParams params = spec.effective_params();

    if (params.mode == SolveMode::Transient) {
        auto tr = run_transient(*problem, params, std::nullopt, observer);
        r.field = tr.snapshots.back();
        r.converged = tr.converged;
        r.history = std::move(tr.history);
        r.snapshot_times = std::move(tr.times);
        r.inner_iterations = std::move(tr.inner_iterations);
    } else {
        auto st = run_steady(*problem, params, std::nullopt, observer);
        r.field = std::move(st.field);
        r.converged = st.converged;
        r.history = std::move(st.history);
    }
    r.divergence = divergence_monitor(*problem, r.field);
    if (!r.field.all_finite()) {
        r.converged = false;
        return r;
    }

    const auto& nodes = problem->nodes();
    if (problem->dim() == 2) {
        r.psi = solve_streamfunction(*problem, r.field);
        r.vortices = find_vortices(r.psi, nodes, problem->stencils());
    }
    if (nodes.structured_shape()) {
        r.profiles["vertical_u"] = extract_midline(nodes, r.field.u(), Midline::Vertical);
        r.profiles["horizontal_v"] = extract_midline(nodes, r.field.v(), Midline::Horizontal);
    }
    if (spec.geometry == Geometry::Channel) {
        const auto& g = spec.channel;
        for (double d : {0.0, 1.0, 2.0, 4.0, 8.0}) {
            const double x = g.obstacle_rear() + d * g.reference_length();
            if (x > g.length) continue;
            char name[32];
            std::snprintf(name, sizeof name, "station_%g_u", d);
            r.profiles[name] = extract_station(nodes, r.field.u(), x);
        }
        r.reattachment = reattachment_length(r.field, nodes, g);
        r.flux = channel_flux(*problem, r.field);
    }
    return r;
}

std::map<std::string, double> quantities(const CaseResult& result)
{
    std::map<std::string, double> q;
    q["iterations"] = static_cast<double>(result.history.size());
    q["converged"] = result.converged ? 1.0 : 0.0;
    if (!result.field.all_finite()) return q;
    q["max_divergence"] = result.divergence.max;
    q["rms_divergence"] = result.divergence.rms;
    for (const auto& v : result.vortices) q["psi_" + v.label] = v.psi;
    if (result.reattachment) q["reattachment_length"] = *result.reattachment;
    if (result.flux) q["flux_mismatch"] = result.flux->relative_mismatch();
    return q;
}

// ---------------------------------------------------------------------------
// Reference data
// ---------------------------------------------------------------------------

bool ReferenceRecord::accepts(double actual) const
{
    if (!std::isfinite(actual)) return false;
    switch (kind) {
    case ToleranceKind::Absolute: return std::abs(actual - value) <= tolerance;
    case ToleranceKind::Relative: return std::abs(actual - value) <= tolerance * std::abs(value);
    case ToleranceKind::Factor: {
        const double a = value / tolerance, b = value * tolerance;
        return actual >= std::min(a, b) && actual <= std::max(a, b);
    }
    case ToleranceKind::Range: return actual >= lo && actual <= hi;
    case ToleranceKind::Sign: return (actual > 0.0 && value > 0.0) || (actual < 0.0 && value < 0.0);
    }
    return false;
}

std::string ReferenceRecord::describe() const
{
    std::ostringstream os;
    os << quantity << " ref " << value;
    switch (kind) {
    case ToleranceKind::Absolute: os << " +/- " << tolerance; break;
    case ToleranceKind::Relative: os << " +/- " << tolerance * 100.0 << "%"; break;
    case ToleranceKind::Factor: os << " within factor " << tolerance; break;
    case ToleranceKind::Range: os << " in [" << lo << ", " << hi << "]"; break;
    case ToleranceKind::Sign: os << " (sign only)"; break;
    }
    os << " [" << source << "]";
    return os.str();
}

std::vector<ReferenceRecord> parse_reference(std::istream& is)
{
    std::vector<ReferenceRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        ReferenceRecord r;
        std::string kind, tol;
        if (!(ls >> r.ref_id)) continue;
        auto fail = [&](const std::string& why) {
            return IoError("reference data line " + std::to_string(lineno) + ": " + why);
        };
        if (!(ls >> r.quantity >> r.value >> kind >> tol >> r.source)) throw fail("expected 6 fields");
        try {
            if (kind == "range") {
                const auto colon = tol.find(':');
                if (colon == std::string::npos) throw fail("range tolerance must be lo:hi");
                r.kind = ToleranceKind::Range;
                r.lo = std::stod(tol.substr(0, colon));
                r.hi = std::stod(tol.substr(colon + 1));
                r.tolerance = r.hi - r.lo;
            } else {
                r.tolerance = std::stod(tol);
                if (kind == "abs") r.kind = ToleranceKind::Absolute;
                else if (kind == "rel") r.kind = ToleranceKind::Relative;
                else if (kind == "factor") r.kind = ToleranceKind::Factor;
                else if (kind == "sign") r.kind = ToleranceKind::Sign;
                else throw fail("unknown tolerance kind " + kind);
            }
        } catch (const std::invalid_argument&) {
            throw fail("bad tolerance " + tol);
        }
        if (!(r.tolerance > 0.0)) throw fail("tolerance must be positive");
        if (r.kind == ToleranceKind::Factor && !(r.tolerance > 1.0)) throw fail("factor tolerance must exceed 1");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ReferenceRecord> load_reference(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open reference data " + path.string());
    return parse_reference(is);
}

std::filesystem::path default_reference_path()
{
    return std::filesystem::path(DAFLOW_DATA_DIR) / "reference_values.txt";
}

std::vector<ReferenceRecord> select_records(std::span<const ReferenceRecord> records, const CaseSpec& spec)
{
    const std::string with_grid = spec.reference_id + "/" + spec.grid_tag();
    std::vector<ReferenceRecord> out;
    for (const auto& r : records)
        if (r.ref_id == spec.reference_id || r.ref_id == with_grid) out.push_back(r);
    return out;
}

ComparisonReport compare_reference(const std::map<std::string, double>& actual,
                                   std::span<const ReferenceRecord> records)
{
    ComparisonReport rep;
    if (records.empty()) {
        rep.warnings.push_back("no reference records; comparison is vacuous");
        return rep;
    }
    for (const auto& r : records) {
        ComparisonEntry e{r, std::nullopt, Verdict::Unavailable};
        if (const auto it = actual.find(r.quantity); it != actual.end()) {
            e.actual = it->second;
            e.verdict = r.accepts(it->second) ? Verdict::Pass : Verdict::Fail;
        }
        if (e.verdict != Verdict::Pass) rep.passed = false;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Unavailable: return "unavailable";
    }
    return "?";
}

}  // namespace daflow::bench
