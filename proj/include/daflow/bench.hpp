#pragma once

// Canned benchmark cases and comparison against stored reference values.

#include "daflow/nodeset.hpp"
#include "daflow/postproc.hpp"
#include "daflow/projection.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace daflow::bench {

enum class Geometry { Cavity2D, Cavity3DHalf, Channel };

std::string geometry_name(Geometry g);

struct CaseSpec {
    std::string id;
    Geometry geometry = Geometry::Cavity2D;
    GridSpec grid;
    SolverParams params;
    /// Unset means the case cannot run until a value is configured.
    std::optional<double> reynolds;
    ChannelGeom channel;
    std::size_t neighbors = 0;  // 0: 9 in 2D, 27 in 3D
    WeightParams weights;
    std::string reference_id;

    /// Throws ConfigError / ParameterError / GeometryError.
    void validate() const;
    /// Solver parameters with the Reynolds number and reference length applied.
    SolverParams effective_params() const;
    std::size_t neighbor_count() const;
    /// "61x61", "41x41x21".
    std::string grid_tag() const;
};

/// Ids accepted by builtin_case.
std::vector<std::string> builtin_case_ids();
/// Throws ConfigError on an unknown id.
CaseSpec builtin_case(const std::string& id);

struct CaseResult {
    CaseSpec spec;
    std::shared_ptr<const FlowProblem> problem;
    FlowField field;
    bool converged = false;
    std::vector<StepReport> history;
    DivergenceStats divergence;
    std::vector<double> psi;  // empty in 3D
    std::vector<VortexRecord> vortices;
    std::map<std::string, std::vector<ProfileSample>> profiles;
    std::optional<double> reattachment;
    std::optional<FluxBalance> flux;
    // transient runs
    std::vector<double> snapshot_times;
    std::vector<std::size_t> inner_iterations;
};

FlowProblem build_problem(const CaseSpec& spec);

/// Builds the node set, solves, and derives every post-processed quantity.
CaseResult run_case(const CaseSpec& spec, const StepObserver& observer = {});

/// Named scalars available for comparison: iterations, converged,
/// max_divergence, rms_divergence, psi_<vortex label>, reattachment_length,
/// flux_mismatch.
std::map<std::string, double> quantities(const CaseResult& result);

// ---------------------------------------------------------------------------
// Reference data
// ---------------------------------------------------------------------------

enum class ToleranceKind {
    Absolute,  // |actual - value| <= tol
    Relative,  // |actual - value| <= tol * |value|
    Factor,    // value / tol <= actual <= value * tol
    Range,     // lo <= actual <= hi
    Sign,      // actual has the sign of value
};

struct ReferenceRecord {
    std::string ref_id;
    std::string quantity;
    double value = 0.0;
    ToleranceKind kind = ToleranceKind::Relative;
    double tolerance = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::string source;

    bool accepts(double actual) const;
    std::string describe() const;
};

/// One record per non-comment line: `ref_id quantity value kind tolerance source`
/// with kind one of abs, rel, factor, range (tolerance "lo:hi") or sign.
std::vector<ReferenceRecord> parse_reference(std::istream& is);
std::vector<ReferenceRecord> load_reference(const std::filesystem::path& path);
std::filesystem::path default_reference_path();

/// Records that apply to `spec`: ref_id equal to the case's reference id or
/// to "<reference id>/<grid tag>".
std::vector<ReferenceRecord> select_records(std::span<const ReferenceRecord> records, const CaseSpec& spec);

enum class Verdict { Pass, Fail, Unavailable };

struct ComparisonEntry {
    ReferenceRecord record;
    std::optional<double> actual;
    Verdict verdict = Verdict::Unavailable;
};

struct ComparisonReport {
    std::vector<ComparisonEntry> entries;
    std::vector<std::string> warnings;
    bool passed = true;
};

/// Overall pass iff every entry passes. An empty record list passes with a warning.
ComparisonReport compare_reference(const std::map<std::string, double>& actual,
                                   std::span<const ReferenceRecord> records);

std::string verdict_name(Verdict v);

}  // namespace daflow::bench
