#pragma once

// Equal-order projection scheme on diffuse-approximation stencils.
//
// Each outer step:
//   1. implicit momentum predictor  (V* - V^n)/dt = nu lap V* - V^n . grad V* - grad p^n
//   2. pressure correction          lap p' = div V* / dt
//   3. correction                   V = V* - dt grad p',  p = p^n + p'
//   4. under-relaxation of every variable against the previous iterate.

#include "daflow/mls.hpp"
#include "daflow/nodeset.hpp"
#include "daflow/sparse.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace daflow {

struct FlowField {
    int dim = 2;
    std::array<std::vector<double>, 3> vel;  // u, v, w (w empty in 2D)
    std::vector<double> p;

    FlowField() = default;
    FlowField(int dim, std::size_t n);

    std::size_t size() const { return p.size(); }
    std::vector<double>& u() { return vel[0]; }
    std::vector<double>& v() { return vel[1]; }
    std::vector<double>& w() { return vel[2]; }
    const std::vector<double>& u() const { return vel[0]; }
    const std::vector<double>& v() const { return vel[1]; }
    const std::vector<double>& w() const { return vel[2]; }

    /// Variable by index: 0..dim-1 velocity components, dim = pressure.
    const std::vector<double>& variable(int i) const { return i < dim ? vel[static_cast<std::size_t>(i)] : p; }
    int variables() const { return dim + 1; }
    bool all_finite() const;
};

struct RelaxFactors {
    double u = 0.4;
    double v = 0.4;
    double w = 0.4;
    double p = 0.4;

    double velocity(int c) const { return c == 0 ? u : (c == 1 ? v : w); }
    static RelaxFactors uniform(double f) { return {f, f, f, f}; }
};

enum class SolveMode { Steady, Transient };

struct TransientParams {
    double inner_tol = 1e-4;
    std::size_t max_inner = 50;
    std::size_t steps = 100;
    std::size_t snapshot_every = 1;
};

struct SolverParams {
    double reynolds = 1000.0;
    double dt = 0.05;
    RelaxFactors relax;
    double conv_tol = 1e-4;
    std::size_t max_outer = 20000;
    SolveMode mode = SolveMode::Steady;
    TransientParams transient;
    /// Length the Reynolds number is built on, in node-coordinate units.
    /// Kinematic viscosity in solver units is reference_length / reynolds.
    double reference_length = 1.0;
    IterativeOptions momentum_solver{1e-8, 0, Preconditioner::Jacobi};
    IterativeOptions pressure_solver{1e-8, 0, Preconditioner::Ilu0};

    double viscosity() const { return reference_length / reynolds; }
    void validate() const;
};

/// Parabolic inlet u = 4 umax (y - y0)(y1 - y) / (y1 - y0)^2.
struct InletSpec {
    double y0 = 0.0;
    double y1 = 1.0;
    double umax = 1.0;

    double velocity(double y) const;
};

/// Per-node, per-component boundary treatment.
struct BoundaryRow {
    enum class Kind { Equation, Dirichlet, Neumann };
    Kind kind = Kind::Equation;
    double value = 0.0;
    Vec3 direction{0, 0, 0};  // for Neumann: derivative along this unit vector is zero
};

/// A node set with its stencils, matrix pattern and boundary treatment.
class FlowProblem {
public:
    FlowProblem(NodeSet nodes, std::size_t k, const WeightParams& weights, InletSpec inlet = {});

    const NodeSet& nodes() const { return nodes_; }
    const StencilTable& stencils() const { return stencils_; }
    const StencilPattern& pattern() const { return pattern_; }
    const InletSpec& inlet() const { return inlet_; }
    int dim() const { return nodes_.dim(); }
    std::size_t size() const { return nodes_.size(); }

    const BoundaryRow& velocity_row(NodeId i, int c) const { return velocity_rows_[static_cast<std::size_t>(c) * size() + i]; }
    const BoundaryRow& pressure_row(NodeId i) const { return pressure_rows_[i]; }
    /// True when no node fixes the pressure level (no outlet).
    bool enclosed() const { return enclosed_; }
    /// Enclosed domains: left null vector of the pure-Neumann pressure
    /// operator, normalised to 1 at the pin node. Empty otherwise.
    std::span<const double> compatibility() const { return compatibility_; }
    static constexpr NodeId kPressurePin = 0;

private:
    NodeSet nodes_;
    StencilTable stencils_;
    StencilPattern pattern_;
    InletSpec inlet_;
    std::vector<BoundaryRow> velocity_rows_;
    std::vector<BoundaryRow> pressure_rows_;
    bool enclosed_ = true;
    std::vector<double> compatibility_;
};

/// V = 0, p = 0 with Dirichlet velocities imposed.
FlowField initial_field(const FlowProblem& problem);

/// One implicit momentum system per velocity component, linearised about
/// the current iterate `convecting`, which also supplies the lagged pressure
/// gradient. `time_level` supplies V^n in the time derivative.
std::vector<SparseSystem> assemble_momentum(const FlowProblem& problem, const FlowField& convecting,
                                            const FlowField& time_level, const SolverParams& params);
std::vector<SparseSystem> assemble_momentum(const FlowProblem& problem, const FlowField& field_n,
                                            const SolverParams& params);

struct PressureOptions {
    /// Node whose correction is fixed to zero; required when the domain is enclosed.
    std::optional<NodeId> pin;
    /// With a pin on an enclosed domain, shift the interior right-hand side by
    /// a constant so it lies in the range of the Neumann operator. Without
    /// this the pinned row absorbs the mismatch as a point source.
    bool project_rhs = true;
};

SparseSystem assemble_pressure_correction(const FlowProblem& problem, const FlowField& vstar,
                                          const SolverParams& params, const PressureOptions& opts = {});

/// Velocity correction, pressure update and relaxation against `previous`.
/// `predicted` holds V* and the lagged pressure.
FlowField correct(const FlowProblem& problem, const FlowField& previous, const FlowField& predicted,
                  std::span<const double> pprime, const SolverParams& params);

struct DivergenceStats {
    double max = 0.0;
    double rms = 0.0;
};

/// |div V| over interior nodes using the stencil first-derivative rows.
DivergenceStats divergence_monitor(const FlowProblem& problem, const FlowField& field);
std::vector<double> divergence(const FlowProblem& problem, const FlowField& field);

struct ConvergenceCheck {
    std::array<double, 4> change{0, 0, 0, 0};  // u, v, w, p (w = 0 in 2D)
    bool converged = false;
};

inline constexpr double kChangeFloor = 1e-12;

/// change = max|next - prev| / max(max|next|, floor) for every variable.
ConvergenceCheck convergence_check(const FlowField& prev, const FlowField& next, double conv_tol);

struct StepReport {
    std::size_t iteration = 0;
    std::array<double, 4> change{0, 0, 0, 0};
    double div_predicted = 0.0;   // max |div V*|
    double div_projected = 0.0;   // max |div (V* - dt grad p')| before relaxation
    double max_divergence = 0.0;  // max |div V| of the new iterate
    std::vector<IterativeStats> inner;  // momentum components then pressure
    std::size_t inner_iterations() const;
};

std::string format_log_line(const StepReport& r, int dim);

using StepObserver = std::function<void(const StepReport&)>;

struct SteadyResult {
    FlowField field;
    std::vector<StepReport> history;
    bool converged = false;
};

/// Predictor + pressure correction + relaxation, repeated until every nodal
/// variable changes by at most conv_tol (relative) between iterations.
SteadyResult run_steady(const FlowProblem& problem, const SolverParams& params,
                        const std::optional<FlowField>& initial = std::nullopt,
                        const StepObserver& observer = {});

struct TransientResult {
    std::vector<FlowField> snapshots;
    std::vector<double> times;
    std::vector<std::size_t> inner_iterations;  // outer iterations per time step
    std::vector<StepReport> history;
    bool converged = true;                      // every step reached inner_tol
};

/// At every physical time step repeat predictor/correction until the inner
/// iterates change by at most inner_tol, then advance time.
TransientResult run_transient(const FlowProblem& problem, const SolverParams& params,
                              const std::optional<FlowField>& initial = std::nullopt,
                              const StepObserver& observer = {});

/// One outer iteration starting from `current`, with `time_level` as V^n.
FlowField projection_step(const FlowProblem& problem, const FlowField& current, const FlowField& time_level,
                          const SolverParams& params, StepReport& report);

}  // namespace daflow
