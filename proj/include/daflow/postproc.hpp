#pragma once

// Quantities derived from a converged velocity field. 2D uses (x, y) with
// velocity (u, v); the streamfunction satisfies u = dpsi/dy, v = -dpsi/dx.

#include "daflow/mls.hpp"
#include "daflow/nodeset.hpp"
#include "daflow/projection.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace daflow {

/// Collocation solve of lap psi = du/dy - dv/dx with psi fixed to
/// `boundary[i]` at every non-interior node. Throws UnsupportedError in 3D.
std::vector<double> solve_streamfunction(const FlowField& field, const NodeSet& nodes, const StencilTable& stencils,
                                         std::span<const double> boundary);

/// Dirichlet psi for the built-in geometries: 0 on cavity walls; for a
/// channel the inlet flux integral, 0 on the bottom wall and obstacle, the
/// total flux on the top wall and a trapezoid integral of u up the outlet.
std::vector<double> boundary_streamfunction(const FlowProblem& problem, const FlowField& field);

std::vector<double> solve_streamfunction(const FlowProblem& problem, const FlowField& field);

struct VortexRecord {
    Vec3 location{0, 0, 0};
    double psi = 0.0;
    NodeId node = 0;
    std::string label;
};

/// Strict local extrema of psi over each interior node's stencil
/// neighborhood, moved to the stationary point of the local quadratic fit.
/// Sorted by |psi| descending. The largest is labelled "primary", the rest
/// by quadrant of the bounding box ("bottom_left_1", "bottom_left_2", ...)
/// in order of |psi| within the quadrant.
std::vector<VortexRecord> find_vortices(std::span<const double> psi, const NodeSet& nodes,
                                        const StencilTable& stencils);

/// The record with `label`, if any.
std::optional<VortexRecord> find_label(std::span<const VortexRecord> vortices, const std::string& label);

struct ProfileSample {
    double coordinate = 0.0;
    double value = 0.0;
};

enum class Midline {
    Vertical,    // x = mid, samples along y
    Horizontal,  // y = mid, samples along x
};

/// Samples of `values` along a midline of a structured set. Half-domain 3D
/// sets are sampled on their symmetry plane (last z layer). With an even
/// node count across the line the two straddling columns are interpolated.
std::vector<ProfileSample> extract_midline(const NodeSet& nodes, std::span<const double> values, Midline line);

/// Values along the node column nearest to x = `x`, sorted by y. Works on
/// any 2D node set.
std::vector<ProfileSample> extract_station(const NodeSet& nodes, std::span<const double> values, double x);

/// Distance from the obstacle's rear face to the negative-to-positive change
/// of u that closes the longest reversed-flow run along the node row closest
/// above the bottom wall, in units of H - h. nullopt when the flow does not
/// separate and reattach.
std::optional<double> reattachment_length(const FlowField& field, const NodeSet& nodes, const ChannelGeom& geom);

/// Net volume flux through the inlet and outlet columns (trapezoid in y).
struct FluxBalance {
    double inlet = 0.0;
    double outlet = 0.0;
    double relative_mismatch() const;
};
FluxBalance channel_flux(const FlowProblem& problem, const FlowField& field);

}  // namespace daflow
