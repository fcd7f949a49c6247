#include "daflow/cli.hpp"

#include "daflow/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace daflow::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError("invalid value for " + key + ": '" + v + "'");
    return out;
}

long to_integer(const std::string& key, const std::string& v)
{
    long out = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || out < 0) throw ConfigError("invalid value for " + key + ": '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid value for " + key + ": '" + v + "'");
}

bench::Geometry to_geometry(const std::string& v)
{
    for (auto g : {bench::Geometry::Cavity2D, bench::Geometry::Cavity3DHalf, bench::Geometry::Channel})
        if (bench::geometry_name(g) == v) return g;
    throw ConfigError("invalid value for geometry: '" + v + "'");
}

// "61", "61x61" or "41x41x21". A single count is expanded per geometry.
std::vector<int> to_grid(const bench::CaseSpec& spec, const std::string& v)
{
    std::vector<int> counts;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, 'x')) counts.push_back(static_cast<int>(to_integer("grid", trim(part))));
    if (counts.empty() || counts.size() > 3 || v.back() == 'x') throw ConfigError("invalid value for grid: '" + v + "'");
    if (counts.size() == 1) {
        const int n = counts[0];
        switch (spec.geometry) {
        case bench::Geometry::Cavity2D: counts = {n, n}; break;
        case bench::Geometry::Cavity3DHalf: counts = {n, n, (n + 1) / 2}; break;
        case bench::Geometry::Channel: {
            const double aspect = spec.channel.length / spec.channel.height;
            counts = {static_cast<int>(std::lround((n - 1) * aspect)) + 1, n};
            break;
        }
        }
    }
    return counts;
}

std::string grid_string(const GridSpec& g)
{
    std::string s;
    for (std::size_t i = 0; i < g.counts.size(); ++i) s += (i ? "x" : "") + std::to_string(g.counts[i]);
    return s;
}

}  // namespace

void RunConfig::validate() const
{
    spec.validate();
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value)
{
    auto& s = cfg.spec;
    auto& p = s.params;
    auto num = [&] { return to_double(key, value); };
    auto count = [&] { return static_cast<std::size_t>(to_integer(key, value)); };

    if (key == "case") {
        const auto out_dir = cfg.output_dir;
        cfg.spec = bench::builtin_case(value);
        cfg.output_dir = out_dir;
    } else if (key == "geometry") s.geometry = to_geometry(value);
    else if (key == "grid") s.grid.counts = to_grid(s, value);
    else if (key == "stretching") {
        if (value == "uniform") s.grid.stretching = Stretching::Uniform;
        else if (value == "tanh") s.grid.stretching = Stretching::TanhStretched;
        else throw ConfigError("invalid value for stretching: '" + value + "'");
    } else if (key == "reynolds") s.reynolds = num();
    else if (key == "dt") p.dt = num();
    else if (key == "relax") p.relax = RelaxFactors::uniform(num());
    else if (key == "relax_u") p.relax.u = num();
    else if (key == "relax_v") p.relax.v = num();
    else if (key == "relax_w") p.relax.w = num();
    else if (key == "relax_p") p.relax.p = num();
    else if (key == "conv_tol") p.conv_tol = num();
    else if (key == "max_outer") p.max_outer = count();
    else if (key == "neighbors") s.neighbors = count();
    else if (key == "sigma_factor") s.weights.sigma_factor = num();
    else if (key == "mode") {
        if (value == "steady") p.mode = SolveMode::Steady;
        else if (value == "transient") p.mode = SolveMode::Transient;
        else throw ConfigError("invalid value for mode: '" + value + "'");
    } else if (key == "steps") p.transient.steps = count();
    else if (key == "inner_tol") p.transient.inner_tol = num();
    else if (key == "max_inner") p.transient.max_inner = count();
    else if (key == "snapshot_every") p.transient.snapshot_every = count();
    else if (key == "channel_height") s.channel.height = num();
    else if (key == "obstacle_height") s.channel.obstacle_height = num();
    else if (key == "obstacle_length") s.channel.obstacle_length = num();
    else if (key == "obstacle_x") s.channel.obstacle_x = num();
    else if (key == "channel_length") s.channel.length = num();
    else if (key == "reference_id") s.reference_id = value;
    else if (key == "id") s.id = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "write_fields") cfg.outputs.fields = to_bool(key, value);
    else if (key == "write_profiles") cfg.outputs.profiles = to_bool(key, value);
    else if (key == "write_streamfunction") cfg.outputs.streamfunction = to_bool(key, value);
    else if (key == "write_log") cfg.outputs.log = to_bool(key, value);
    else if (key == "compare_reference") cfg.compare_reference = to_bool(key, value);
    else if (key == "reference_file") cfg.reference_file = value;
    else throw ConfigError("unknown key: " + key);
}

RunConfig parse_config(std::istream& is, RunConfig base)
{
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

RunConfig load_case(const std::string& source)
{
    const auto ids = bench::builtin_case_ids();
    if (std::find(ids.begin(), ids.end(), source) != ids.end()) {
        RunConfig cfg;
        cfg.spec = bench::builtin_case(source);
        return cfg;
    }
    if (!std::filesystem::is_regular_file(source)) throw ConfigError("unknown case: " + source);
    std::ifstream is(source);
    if (!is) throw IoError("cannot read " + source);
    RunConfig base;
    base.spec.id = std::filesystem::path(source).stem().string();
    base.spec.reference_id = base.spec.id;
    return parse_config(is, base);
}

io::KeyValues effective_config(const RunConfig& cfg)
{
    using io::format_double;
    const auto& s = cfg.spec;
    const auto& p = s.params;
    io::KeyValues kv;
    kv.emplace_back("id", s.id);
    kv.emplace_back("geometry", bench::geometry_name(s.geometry));
    kv.emplace_back("grid", grid_string(s.grid));
    kv.emplace_back("stretching", s.grid.stretching == Stretching::Uniform ? "uniform" : "tanh");
    if (s.reynolds) kv.emplace_back("reynolds", format_double(*s.reynolds));
    kv.emplace_back("dt", format_double(p.dt));
    kv.emplace_back("relax_u", format_double(p.relax.u));
    kv.emplace_back("relax_v", format_double(p.relax.v));
    kv.emplace_back("relax_w", format_double(p.relax.w));
    kv.emplace_back("relax_p", format_double(p.relax.p));
    kv.emplace_back("conv_tol", format_double(p.conv_tol));
    kv.emplace_back("max_outer", std::to_string(p.max_outer));
    kv.emplace_back("neighbors", std::to_string(s.neighbor_count()));
    kv.emplace_back("sigma_factor", format_double(s.weights.sigma_factor));
    kv.emplace_back("mode", p.mode == SolveMode::Steady ? "steady" : "transient");
    kv.emplace_back("steps", std::to_string(p.transient.steps));
    kv.emplace_back("inner_tol", format_double(p.transient.inner_tol));
    kv.emplace_back("max_inner", std::to_string(p.transient.max_inner));
    kv.emplace_back("snapshot_every", std::to_string(p.transient.snapshot_every));
    kv.emplace_back("channel_height", format_double(s.channel.height));
    kv.emplace_back("obstacle_height", format_double(s.channel.obstacle_height));
    kv.emplace_back("obstacle_length", format_double(s.channel.obstacle_length));
    kv.emplace_back("obstacle_x", format_double(s.channel.obstacle_x));
    kv.emplace_back("channel_length", format_double(s.channel.length));
    kv.emplace_back("reference_id", s.reference_id);
    kv.emplace_back("output_dir", cfg.output_dir.string());
    kv.emplace_back("write_fields", cfg.outputs.fields ? "true" : "false");
    kv.emplace_back("write_profiles", cfg.outputs.profiles ? "true" : "false");
    kv.emplace_back("write_streamfunction", cfg.outputs.streamfunction ? "true" : "false");
    kv.emplace_back("write_log", cfg.outputs.log ? "true" : "false");
    kv.emplace_back("compare_reference", cfg.compare_reference ? "true" : "false");
    kv.emplace_back("reference_file", cfg.reference_file.string());
    return kv;
}

void write_config(std::ostream& os, const RunConfig& cfg)
{
    for (const auto& [k, v] : effective_config(cfg)) os << k << " = " << v << '\n';
}

void preflight_output(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto probe = dir / ".daflow-write-test";
    {
        std::ofstream os(probe);
        if (!os || !(os << "ok")) throw IoError("output directory " + dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

io::KeyValues summary(const bench::CaseResult& result, const std::optional<bench::ComparisonReport>& comparison)
{
    using io::format_double;
    io::KeyValues kv;
    const auto& s = result.spec;
    kv.emplace_back("case", s.id);
    kv.emplace_back("geometry", bench::geometry_name(s.geometry));
    kv.emplace_back("grid", grid_string(s.grid));
    if (s.reynolds) kv.emplace_back("reynolds", format_double(*s.reynolds));
    kv.emplace_back("converged", result.converged ? "true" : "false");
    kv.emplace_back("iterations", std::to_string(result.history.size()));
    if (!result.inner_iterations.empty()) kv.emplace_back("time_steps", std::to_string(result.inner_iterations.size()));
    if (!result.history.empty()) {
        const auto& last = result.history.back();
        kv.emplace_back("final_change_u", format_double(last.change[0]));
        kv.emplace_back("final_change_v", format_double(last.change[1]));
        if (result.field.dim == 3) kv.emplace_back("final_change_w", format_double(last.change[2]));
        kv.emplace_back("final_change_p", format_double(last.change[3]));
    }
    kv.emplace_back("max_divergence", format_double(result.divergence.max));
    kv.emplace_back("rms_divergence", format_double(result.divergence.rms));
    kv.emplace_back("vortex_count", std::to_string(result.vortices.size()));
    for (const auto& v : result.vortices) {
        kv.emplace_back("psi_" + v.label, format_double(v.psi));
        kv.emplace_back("x_" + v.label, format_double(v.location[0]));
        kv.emplace_back("y_" + v.label, format_double(v.location[1]));
    }
    if (s.geometry == bench::Geometry::Channel)
        kv.emplace_back("reattachment_length", result.reattachment ? format_double(*result.reattachment) : "attached");
    if (result.flux) {
        kv.emplace_back("inlet_flux", format_double(result.flux->inlet));
        kv.emplace_back("outlet_flux", format_double(result.flux->outlet));
        kv.emplace_back("flux_mismatch", format_double(result.flux->relative_mismatch()));
    }
    if (comparison) kv.emplace_back("reference_comparison", comparison->passed ? "pass" : "fail");
    return kv;
}

void write_outputs(const bench::CaseResult& result, const RunConfig& cfg,
                   const std::optional<bench::ComparisonReport>& comparison)
{
    const auto& dir = cfg.output_dir;
    preflight_output(dir);
    {
        auto os = io::open_output(dir / "config.txt");
        write_config(os, cfg);
    }
    if (cfg.outputs.fields && result.problem) {
        const std::span<const double> psi =
            cfg.outputs.streamfunction ? std::span<const double>(result.psi) : std::span<const double>();
        io::write_vtk(dir / "field.vtk", result.problem->nodes(), result.field, psi, result.spec.id);
    }
    if (cfg.outputs.profiles) {
        for (const auto& [name, samples] : result.profiles) {
            auto os = io::open_output(dir / ("profile_" + name + ".csv"));
            const bool vertical = name.rfind("vertical", 0) == 0 || name.rfind("station", 0) == 0;
            const auto value = name.substr(name.rfind('_') + 1);
            io::write_profile_csv(os, samples, vertical ? "y" : "x", value);
        }
    }
    if (cfg.outputs.streamfunction && !result.psi.empty()) {
        auto os = io::open_output(dir / "vortices.csv");
        io::write_vortices_csv(os, result.vortices);
    }
    if (cfg.outputs.log) {
        auto os = io::open_output(dir / "convergence.log");
        io::write_convergence_log(os, result.history, result.field.dim);
    }
    if (comparison) {
        auto os = io::open_output(dir / "comparison.txt");
        for (const auto& e : comparison->entries)
            os << bench::verdict_name(e.verdict) << ' ' << e.record.ref_id << ' ' << e.record.describe() << " actual "
               << (e.actual ? io::format_double(*e.actual) : std::string("n/a")) << '\n';
        for (const auto& w : comparison->warnings) os << "warning " << w << '\n';
    }
    auto os = io::open_output(dir / "summary.txt");
    io::write_key_values(os, summary(result, comparison));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Meshless incompressible flow solver"};
    app.require_subcommand(1);
    auto* run_cmd = app.add_subcommand("run", "Solve a built-in case or a case file");
    auto* list_cmd = app.add_subcommand("list", "List built-in cases");

    std::string case_arg;
    std::optional<int> grid;
    std::optional<double> re, dt, relax;
    std::optional<std::string> out_dir;
    bool transient = false, compare = false, quiet = false;
    run_cmd->add_option("case", case_arg, "Built-in case id or configuration file")->required();
    run_cmd->add_option("--grid", grid, "Nodes per side (channel: across the channel)");
    run_cmd->add_option("--re", re, "Reynolds number");
    run_cmd->add_option("--dt", dt, "Time step");
    run_cmd->add_option("--relax", relax, "Under-relaxation factor for every variable");
    run_cmd->add_option("--out", out_dir, "Output directory");
    run_cmd->add_flag("--transient", transient, "Time-accurate run with inner iterations");
    run_cmd->add_flag("--compare-reference", compare, "Compare against the stored reference values");
    run_cmd->add_flag("-q,--quiet", quiet, "No progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    if (*list_cmd) {
        for (const auto& id : bench::builtin_case_ids()) out << id << '\n';
        return kOk;
    }

    RunConfig cfg;
    try {
        cfg = load_case(case_arg);
        if (grid) apply_setting(cfg, "grid", std::to_string(*grid));
        if (re) cfg.spec.reynolds = *re;
        if (dt) cfg.spec.params.dt = *dt;
        if (relax) cfg.spec.params.relax = RelaxFactors::uniform(*relax);
        if (out_dir) cfg.output_dir = *out_dir;
        if (transient) cfg.spec.params.mode = SolveMode::Transient;
        if (compare) cfg.compare_reference = true;
        cfg.validate();
        preflight_output(cfg.output_dir);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    std::vector<bench::ReferenceRecord> records;
    if (cfg.compare_reference) {
        try {
            records = bench::select_records(bench::load_reference(cfg.reference_file), cfg.spec);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return kUsage;
        }
    }

    const int dim = cfg.spec.geometry == bench::Geometry::Cavity3DHalf ? 3 : 2;
    StepObserver observer;
    if (!quiet)
        observer = [&err, dim](const StepReport& r) {
            if (r.iteration % 100 == 0) err << format_log_line(r, dim) << '\n';
        };

    bench::CaseResult result;
    try {
        result = bench::run_case(cfg.spec, observer);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    std::optional<bench::ComparisonReport> comparison;
    if (cfg.compare_reference) comparison = bench::compare_reference(bench::quantities(result), records);
    try {
        write_outputs(result, cfg, comparison);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    for (const auto& [k, v] : summary(result, comparison)) out << k << '=' << v << '\n';
    if (comparison)
        for (const auto& e : comparison->entries)
            out << "reference " << bench::verdict_name(e.verdict) << ": " << e.record.describe() << " actual "
                << (e.actual ? io::format_double(*e.actual) : std::string("n/a")) << '\n';

    if (!result.converged) return kNotConverged;
    if (comparison && !comparison->passed) return kReferenceFailed;
    return kOk;
}

}  // namespace daflow::cli
