#pragma once

#include "daflow/nodeset.hpp"
#include "daflow/postproc.hpp"
#include "daflow/projection.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace daflow::io {

// Legacy VTK, ASCII. Structured node sets are written as STRUCTURED_GRID,
// anything else as POLYDATA with one vertex cell per node. Point data:
// "velocity" (3 components, w = 0 in 2D), "pressure", and "psi" when given.
void write_vtk(std::ostream& os, const NodeSet& nodes, const FlowField& field, std::span<const double> psi = {},
               const std::string& title = "daflow");
void write_vtk(const std::filesystem::path& path, const NodeSet& nodes, const FlowField& field,
               std::span<const double> psi = {}, const std::string& title = "daflow");

struct VtkData {
    std::string dataset;
    std::array<int, 3> dims{0, 0, 0};
    std::vector<Vec3> points;
    std::map<std::string, std::vector<double>> scalars;
    std::map<std::string, std::vector<Vec3>> vectors;
};

/// Reads what write_vtk produces. Throws IoError on malformed input.
VtkData read_vtk(std::istream& is);
VtkData read_vtk(const std::filesystem::path& path);

void write_profile_csv(std::ostream& os, std::span<const ProfileSample> samples, const std::string& coordinate,
                       const std::string& value);
void write_vortices_csv(std::ostream& os, std::span<const VortexRecord> vortices);

/// One line per outer step: index, per-variable change, max divergence,
/// inner iterations (the format of format_log_line).
void write_convergence_log(std::ostream& os, std::span<const StepReport> history, int dim);

/// Ordered key=value lines.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
void write_key_values(std::ostream& os, const KeyValues& kv);
KeyValues read_key_values(std::istream& is);

/// %.17g, enough to round-trip a double.
std::string format_double(double v);

/// Opens `path` for writing or throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace daflow::io
