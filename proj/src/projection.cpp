#include "daflow/projection.hpp"

#include "daflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace daflow {

FlowField::FlowField(int d, std::size_t n) : dim(d), p(n, 0.0)
{
    for (int c = 0; c < dim; ++c) vel[static_cast<std::size_t>(c)].assign(n, 0.0);
}

bool FlowField::all_finite() const
{
    for (int i = 0; i < variables(); ++i)
        for (double x : variable(i))
            if (!std::isfinite(x)) return false;
    return true;
}

void SolverParams::validate() const
{
    if (!(reynolds > 0.0)) throw ParameterError("reynolds must be positive");
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    for (double r : {relax.u, relax.v, relax.w, relax.p})
        if (!(r > 0.0 && r <= 1.0)) throw ParameterError("relaxation factors must lie in (0, 1]");
    if (!(conv_tol > 0.0)) throw ParameterError("conv_tol must be positive");
    if (max_outer == 0) throw ParameterError("max_outer must be positive");
    if (!(reference_length > 0.0)) throw ParameterError("reference_length must be positive");
    if (mode == SolveMode::Transient) {
        if (!(transient.inner_tol > 0.0)) throw ParameterError("inner_tol must be positive");
        if (transient.max_inner == 0 || transient.snapshot_every == 0)
            throw ParameterError("max_inner and snapshot_every must be positive");
    }
}

double InletSpec::velocity(double y) const
{
    const double h = y1 - y0;
    return 4.0 * umax * (y - y0) * (y1 - y) / (h * h);
}

// ---------------------------------------------------------------------------
// FlowProblem
// ---------------------------------------------------------------------------

FlowProblem::FlowProblem(NodeSet nodes, std::size_t k, const WeightParams& weights, InletSpec inlet)
    : nodes_(std::move(nodes)), stencils_(nodes_, k, weights), pattern_(stencils_), inlet_(inlet)
{
    const std::size_t n = nodes_.size();
    const int dim = nodes_.dim();
    velocity_rows_.assign(static_cast<std::size_t>(dim) * n, {});
    pressure_rows_.assign(n, {});

    auto dirichlet = [](double v) { return BoundaryRow{BoundaryRow::Kind::Dirichlet, v, {0, 0, 0}}; };
    auto neumann = [](const Vec3& d) { return BoundaryRow{BoundaryRow::Kind::Neumann, 0.0, d}; };

    for (NodeId i = 0; i < n; ++i) {
        const auto& tag = nodes_.tag(i);
        const Vec3& normal = nodes_.normal(i);
        auto set_vel = [&](int c, BoundaryRow r) { velocity_rows_[static_cast<std::size_t>(c) * n + i] = r; };

        if (std::holds_alternative<Interior>(tag)) continue;

        if (std::holds_alternative<Outlet>(tag)) {
            enclosed_ = false;
            const Vec3 d = normal == Vec3{0, 0, 0} ? Vec3{1, 0, 0} : normal;
            for (int c = 0; c < dim; ++c) set_vel(c, neumann(d));
            pressure_rows_[i] = dirichlet(0.0);
            continue;
        }

        if (normal == Vec3{0, 0, 0})
            throw GeometryError("boundary node " + std::to_string(i) + " has no outward normal");
        pressure_rows_[i] = neumann(normal);

        if (std::holds_alternative<Wall>(tag)) {
            for (int c = 0; c < dim; ++c) set_vel(c, dirichlet(0.0));
        } else if (const auto* lid = std::get_if<MovingLid>(&tag)) {
            for (int c = 0; c < dim; ++c) set_vel(c, dirichlet(lid->velocity[static_cast<std::size_t>(c)]));
        } else if (std::holds_alternative<Inlet>(tag)) {
            set_vel(0, dirichlet(inlet_.velocity(nodes_.position(i)[1])));
            for (int c = 1; c < dim; ++c) set_vel(c, dirichlet(0.0));
        } else if (const auto* sym = std::get_if<SymmetryPlane>(&tag)) {
            Vec3 axis{0, 0, 0};
            axis[static_cast<std::size_t>(sym->axis)] = 1.0;
            for (int c = 0; c < dim; ++c) {
                if (sym->pinned_velocity)
                    set_vel(c, dirichlet((*sym->pinned_velocity)[static_cast<std::size_t>(c)]));
                else if (c == sym->axis)
                    set_vel(c, dirichlet(0.0));
                else
                    set_vel(c, neumann(axis));
            }
        }
    }

    if (enclosed_) {
        // l^T N = 0 with l_pin = 1: solve A^T z = -N_pin^T where A is N with the
        // pin row replaced by the identity row; then l = z with l_pin = 1.
        const NodeId pin = kPressurePin;
        FlowField zero(dim, n);
        SolverParams unit;
        const auto pinned = assemble_pressure_correction(*this, zero, unit, {pin, false});
        std::vector<double> rhs(n, 0.0);
        const auto& st = stencils_[pin];
        for (std::size_t s = 0; s < st.size(); ++s) {
            double v = 0.0;
            for (int a = 0; a < dim; ++a)
                v += pressure_rows_[pin].direction[static_cast<std::size_t>(a)] *
                     st.row(a == 0 ? Deriv::X : (a == 1 ? Deriv::Y : Deriv::Z))[s];
            rhs[st.neighbors[s]] -= v;
        }
        auto res = solve_bicgstab(transpose(pinned.matrix), rhs, {}, {1e-12, 0, Preconditioner::Ilu0});
        if (!res.stats.converged)
            throw SingularityError("pressure compatibility vector did not converge");
        compatibility_ = std::move(res.x);
        compatibility_[pin] = 1.0;
    }
}

FlowField initial_field(const FlowProblem& problem)
{
    FlowField f(problem.dim(), problem.size());
    for (int c = 0; c < problem.dim(); ++c)
        for (NodeId i = 0; i < problem.size(); ++i) {
            const auto& row = problem.velocity_row(i, c);
            if (row.kind == BoundaryRow::Kind::Dirichlet) f.vel[static_cast<std::size_t>(c)][i] = row.value;
        }
    return f;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace {

constexpr Deriv kFirst[3] = {Deriv::X, Deriv::Y, Deriv::Z};

// Coefficient of stencil neighbor s in the directional derivative along d.
double directional(const DerivativeStencil& st, const Vec3& d, std::size_t s)
{
    double v = 0.0;
    for (int a = 0; a < st.dim; ++a)
        if (d[static_cast<std::size_t>(a)] != 0.0) v += d[static_cast<std::size_t>(a)] * st.row(kFirst[a])[s];
    return v;
}

double laplacian_coeff(const DerivativeStencil& st, std::size_t s)
{
    double v = st.row(3)[s] + st.row(5)[s];
    if (st.dim == 3) v += st.row(9)[s];
    return v;
}

}  // namespace

std::vector<SparseSystem> assemble_momentum(const FlowProblem& problem, const FlowField& convecting,
                                            const FlowField& time_level, const SolverParams& params)
{
    const std::size_t n = problem.size();
    const int dim = problem.dim();
    if (convecting.size() != n || time_level.size() != n)
        throw AssemblyError("assemble_momentum: field size does not match the node set");
    if (problem.stencils().size() != n) throw AssemblyError("assemble_momentum: stencil table incomplete");

    const double nu = params.viscosity();
    const double inv_dt = 1.0 / params.dt;
    const auto& stencils = problem.stencils();
    const auto& pattern = problem.pattern();

    std::vector<SparseSystem> systems(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        auto& sys = systems[static_cast<std::size_t>(c)];
        sys.matrix = pattern.empty_matrix();
        sys.rhs.assign(n, 0.0);
        auto& vals = sys.matrix.vals;
        const auto& vn = time_level.vel[static_cast<std::size_t>(c)];

        const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
        for (std::int64_t ii = 0; ii < nn; ++ii) {
            const auto i = static_cast<NodeId>(ii);
            const auto& st = stencils[i];
            const auto& row = problem.velocity_row(i, c);
            switch (row.kind) {
            case BoundaryRow::Kind::Dirichlet:
                vals[pattern.diagonal(i)] = 1.0;
                sys.rhs[i] = row.value;
                break;
            case BoundaryRow::Kind::Neumann:
                for (std::size_t s = 0; s < st.size(); ++s) vals[pattern.slot(i, s)] = directional(st, row.direction, s);
                break;
            case BoundaryRow::Kind::Equation: {
                Vec3 conv{0, 0, 0};
                for (int a = 0; a < dim; ++a) conv[static_cast<std::size_t>(a)] = convecting.vel[static_cast<std::size_t>(a)][i];
                for (std::size_t s = 0; s < st.size(); ++s)
                    vals[pattern.slot(i, s)] = -nu * laplacian_coeff(st, s) + directional(st, conv, s);
                vals[pattern.diagonal(i)] += inv_dt;
                sys.rhs[i] = vn[i] * inv_dt - apply_row(st, deriv_row(kFirst[c], dim), convecting.p);
                break;
            }
            }
        }
    }
    return systems;
}

std::vector<SparseSystem> assemble_momentum(const FlowProblem& problem, const FlowField& field_n,
                                            const SolverParams& params)
{
    return assemble_momentum(problem, field_n, field_n, params);
}

std::vector<double> divergence(const FlowProblem& problem, const FlowField& field)
{
    const std::size_t n = problem.size();
    const int dim = problem.dim();
    std::vector<double> div(n, 0.0);
    const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < nn; ++ii) {
        const auto i = static_cast<NodeId>(ii);
        double d = 0.0;
        for (int a = 0; a < dim; ++a)
            d += problem.stencils().apply(i, kFirst[a], field.vel[static_cast<std::size_t>(a)]);
        div[i] = d;
    }
    return div;
}

SparseSystem assemble_pressure_correction(const FlowProblem& problem, const FlowField& vstar,
                                          const SolverParams& params, const PressureOptions& opts)
{
    const std::size_t n = problem.size();
    if (vstar.size() != n) throw AssemblyError("assemble_pressure_correction: field size does not match");
    if (problem.enclosed() && !opts.pin)
        throw SingularityError("pressure correction: enclosed domain needs a pinned reference node");
    if (opts.pin && *opts.pin >= n) throw AssemblyError("pressure correction: pin node out of range");

    const auto& stencils = problem.stencils();
    const auto& pattern = problem.pattern();
    const auto div = divergence(problem, vstar);
    const double inv_dt = 1.0 / params.dt;

    SparseSystem sys;
    sys.matrix = pattern.empty_matrix();
    sys.rhs.assign(n, 0.0);
    auto& vals = sys.matrix.vals;
    const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < nn; ++ii) {
        const auto i = static_cast<NodeId>(ii);
        const auto& st = stencils[i];
        const auto& row = problem.pressure_row(i);
        if (opts.pin && *opts.pin == i) {
            vals[pattern.diagonal(i)] = 1.0;
            continue;
        }
        switch (row.kind) {
        case BoundaryRow::Kind::Dirichlet:
            vals[pattern.diagonal(i)] = 1.0;
            sys.rhs[i] = row.value;
            break;
        case BoundaryRow::Kind::Neumann:
            for (std::size_t s = 0; s < st.size(); ++s) vals[pattern.slot(i, s)] = directional(st, row.direction, s);
            break;
        case BoundaryRow::Kind::Equation:
            for (std::size_t s = 0; s < st.size(); ++s) vals[pattern.slot(i, s)] = laplacian_coeff(st, s);
            sys.rhs[i] = div[i] * inv_dt;
            break;
        }
    }

    const auto ell = problem.compatibility();
    if (opts.pin && opts.project_rhs && !ell.empty()) {
        double num = 0.0, den = 0.0;
        for (NodeId i = 0; i < n; ++i) {
            if (problem.pressure_row(i).kind != BoundaryRow::Kind::Equation || i == *opts.pin) continue;
            num += ell[i] * sys.rhs[i];
            den += ell[i];
        }
        if (den != 0.0) {
            const double shift = num / den;
            for (NodeId i = 0; i < n; ++i)
                if (problem.pressure_row(i).kind == BoundaryRow::Kind::Equation && i != *opts.pin) sys.rhs[i] -= shift;
        }
    }
    return sys;
}

FlowField correct(const FlowProblem& problem, const FlowField& previous, const FlowField& predicted,
                  std::span<const double> pprime, const SolverParams& params)
{
    const std::size_t n = problem.size();
    const int dim = problem.dim();
    if (pprime.size() != n || previous.size() != n || predicted.size() != n)
        throw AssemblyError("correct: size mismatch");

    FlowField out(dim, n);
    const auto nn = static_cast<std::int64_t>(n);
    for (int c = 0; c < dim; ++c) {
        const double r = params.relax.velocity(c);
        const auto& prev = previous.vel[static_cast<std::size_t>(c)];
        const auto& pred = predicted.vel[static_cast<std::size_t>(c)];
        auto& dst = out.vel[static_cast<std::size_t>(c)];
        const Deriv d = kFirst[c];
#pragma omp parallel for schedule(static)
        for (std::int64_t ii = 0; ii < nn; ++ii) {
            const auto i = static_cast<NodeId>(ii);
            const auto& row = problem.velocity_row(i, c);
            if (row.kind == BoundaryRow::Kind::Dirichlet) {
                dst[i] = row.value;
                continue;
            }
            double cand = pred[i];
            if (row.kind == BoundaryRow::Kind::Equation) cand -= params.dt * problem.stencils().apply(i, d, pprime);
            dst[i] = r == 1.0 ? cand : prev[i] + r * (cand - prev[i]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) out.p[i] = previous.p[i] + params.relax.p * pprime[i];
    return out;
}

DivergenceStats divergence_monitor(const FlowProblem& problem, const FlowField& field)
{
    const auto div = divergence(problem, field);
    DivergenceStats s;
    double sum2 = 0.0;
    std::size_t count = 0;
    for (NodeId i = 0; i < problem.size(); ++i) {
        if (!is_interior(problem.nodes().tag(i))) continue;
        s.max = std::isnan(div[i]) || std::isnan(s.max) ? NAN : std::max(s.max, std::abs(div[i]));
        sum2 += div[i] * div[i];
        ++count;
    }
    s.rms = count > 0 ? std::sqrt(sum2 / static_cast<double>(count)) : 0.0;
    return s;
}

ConvergenceCheck convergence_check(const FlowField& prev, const FlowField& next, double conv_tol)
{
    if (prev.size() != next.size() || prev.dim != next.dim)
        throw AssemblyError("convergence_check: fields differ in size");
    ConvergenceCheck out;
    out.converged = true;
    const bool finite = next.all_finite();
    for (int v = 0; v < next.variables(); ++v) {
        const auto& a = prev.variable(v);
        const auto& b = next.variable(v);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            diff = std::max(diff, std::abs(b[i] - a[i]));
            scale = std::max(scale, std::abs(b[i]));
        }
        const double change = finite ? diff / std::max(scale, kChangeFloor) : NAN;
        // pressure always reported in the last slot
        const std::size_t slot = v == next.dim ? 3 : static_cast<std::size_t>(v);
        out.change[slot] = change;
        if (!(change <= conv_tol)) out.converged = false;
    }
    return out;
}

std::size_t StepReport::inner_iterations() const
{
    std::size_t s = 0;
    for (const auto& st : inner) s += st.iterations;
    return s;
}

std::string format_log_line(const StepReport& r, int dim)
{
    char buf[256];
    if (dim == 3)
        std::snprintf(buf, sizeof buf, "%zu %.6e %.6e %.6e %.6e %.6e %zu", r.iteration, r.change[0], r.change[1],
                      r.change[2], r.change[3], r.max_divergence, r.inner_iterations());
    else
        std::snprintf(buf, sizeof buf, "%zu %.6e %.6e %.6e %.6e %zu", r.iteration, r.change[0], r.change[1],
                      r.change[3], r.max_divergence, r.inner_iterations());
    return buf;
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

FlowField projection_step(const FlowProblem& problem, const FlowField& current, const FlowField& time_level,
                          const SolverParams& params, StepReport& report)
{
    const std::size_t n = problem.size();
    const int dim = problem.dim();
    report.inner.clear();

    const auto systems = assemble_momentum(problem, current, time_level, params);
    FlowField vstar(dim, n);
    vstar.p = current.p;
    for (int c = 0; c < dim; ++c) {
        const auto& sys = systems[static_cast<std::size_t>(c)];
        auto res = solve_bicgstab(sys.matrix, sys.rhs, current.vel[static_cast<std::size_t>(c)], params.momentum_solver);
        report.inner.push_back(res.stats);
        auto& dst = vstar.vel[static_cast<std::size_t>(c)];
        dst = std::move(res.x);
        for (NodeId i = 0; i < n; ++i) {
            const auto& row = problem.velocity_row(i, c);
            if (row.kind == BoundaryRow::Kind::Dirichlet) dst[i] = row.value;
        }
    }
    // a diverged predictor leaves nothing to project; the drivers stop on it
    if (!vstar.all_finite()) return vstar;

    PressureOptions popts;
    if (problem.enclosed()) popts.pin = FlowProblem::kPressurePin;
    const auto psys = assemble_pressure_correction(problem, vstar, params, popts);
    auto pres = solve_bicgstab(psys.matrix, psys.rhs, {}, params.pressure_solver);
    report.inner.push_back(pres.stats);

    SolverParams unrelaxed = params;
    unrelaxed.relax = RelaxFactors::uniform(1.0);
    report.div_predicted = divergence_monitor(problem, vstar).max;
    report.div_projected = divergence_monitor(problem, correct(problem, current, vstar, pres.x, unrelaxed)).max;

    FlowField next = correct(problem, current, vstar, pres.x, params);
    report.max_divergence = divergence_monitor(problem, next).max;
    return next;
}

SteadyResult run_steady(const FlowProblem& problem, const SolverParams& params,
                        const std::optional<FlowField>& initial, const StepObserver& observer)
{
    params.validate();
    SteadyResult out;
    out.field = initial ? *initial : initial_field(problem);
    for (std::size_t it = 1; it <= params.max_outer; ++it) {
        StepReport report;
        FlowField next = projection_step(problem, out.field, out.field, params, report);
        const auto check = convergence_check(out.field, next, params.conv_tol);
        report.iteration = it;
        report.change = check.change;
        out.history.push_back(report);
        if (observer) observer(report);
        out.field = std::move(next);
        if (!out.field.all_finite()) break;
        if (check.converged) {
            out.converged = true;
            break;
        }
    }
    return out;
}

TransientResult run_transient(const FlowProblem& problem, const SolverParams& params,
                              const std::optional<FlowField>& initial, const StepObserver& observer)
{
    params.validate();
    TransientResult out;
    FlowField field = initial ? *initial : initial_field(problem);
    out.snapshots.push_back(field);
    out.times.push_back(0.0);

    std::size_t counter = 0;
    for (std::size_t step = 1; step <= params.transient.steps; ++step) {
        const FlowField time_level = field;
        bool inner_converged = false;
        std::size_t inner = 0;
        while (inner < params.transient.max_inner) {
            StepReport report;
            FlowField next = projection_step(problem, field, time_level, params, report);
            const auto check = convergence_check(field, next, params.transient.inner_tol);
            report.iteration = ++counter;
            report.change = check.change;
            out.history.push_back(report);
            if (observer) observer(report);
            field = std::move(next);
            ++inner;
            if (!field.all_finite()) break;
            if (check.converged) {
                inner_converged = true;
                break;
            }
        }
        out.inner_iterations.push_back(inner);
        if (!inner_converged) out.converged = false;
        if (!field.all_finite()) {
            out.converged = false;
            break;
        }
        if (step % params.transient.snapshot_every == 0 || step == params.transient.steps) {
            out.snapshots.push_back(field);
            out.times.push_back(static_cast<double>(step) * params.dt);
        }
    }
    return out;
}

}  // namespace daflow
