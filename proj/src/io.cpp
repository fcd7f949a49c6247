#include "daflow/io.hpp"

#include "daflow/error.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace daflow::io {

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

void write_vtk(std::ostream& os, const NodeSet& nodes, const FlowField& field, std::span<const double> psi,
               const std::string& title)
{
    const std::size_t n = nodes.size();
    if (field.size() != n || (!psi.empty() && psi.size() != n)) throw IoError("write_vtk: field size mismatch");

    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
    const auto& shape = nodes.structured_shape();
    if (shape)
        os << "DATASET STRUCTURED_GRID\nDIMENSIONS " << (*shape)[0] << ' ' << (*shape)[1] << ' ' << (*shape)[2] << '\n';
    else
        os << "DATASET POLYDATA\n";
    os << "POINTS " << n << " double\n";
    for (const auto& x : nodes.positions())
        os << format_double(x[0]) << ' ' << format_double(x[1]) << ' ' << format_double(x[2]) << '\n';
    if (!shape) {
        os << "VERTICES " << n << ' ' << 2 * n << '\n';
        for (std::size_t i = 0; i < n; ++i) os << "1 " << i << '\n';
    }

    os << "POINT_DATA " << n << "\nVECTORS velocity double\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            const double v = c < field.dim ? field.vel[static_cast<std::size_t>(c)][i] : 0.0;
            os << format_double(v) << (c < 2 ? ' ' : '\n');
        }
    }
    auto scalar = [&](const char* name, std::span<const double> v) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double x : v) os << format_double(x) << '\n';
    };
    scalar("pressure", field.p);
    if (!psi.empty()) scalar("psi", psi);
    if (!os) throw IoError("write_vtk: stream error");
}

void write_vtk(const std::filesystem::path& path, const NodeSet& nodes, const FlowField& field,
               std::span<const double> psi, const std::string& title)
{
    auto os = open_output(path);
    write_vtk(os, nodes, field, psi, title);
}

namespace {

template <class T>
T read_token(std::istream& is, const char* what)
{
    T v{};
    if (!(is >> v)) throw IoError(std::string("read_vtk: expected ") + what);
    return v;
}

void expect(std::istream& is, const std::string& word)
{
    const auto got = read_token<std::string>(is, word.c_str());
    if (got != word) throw IoError("read_vtk: expected '" + word + "', got '" + got + "'");
}

}  // namespace

VtkData read_vtk(std::istream& is)
{
    VtkData d;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# vtk DataFile", 0) != 0) throw IoError("read_vtk: missing header");
    std::getline(is, line);  // title
    if (!std::getline(is, line) || line != "ASCII") throw IoError("read_vtk: only ASCII files are supported");

    expect(is, "DATASET");
    d.dataset = read_token<std::string>(is, "dataset type");
    if (d.dataset == "STRUCTURED_GRID") {
        expect(is, "DIMENSIONS");
        for (auto& v : d.dims) v = read_token<int>(is, "dimension");
    } else if (d.dataset != "POLYDATA") {
        throw IoError("read_vtk: unsupported dataset " + d.dataset);
    }
    expect(is, "POINTS");
    const auto n = read_token<std::size_t>(is, "point count");
    read_token<std::string>(is, "point type");
    d.points.resize(n);
    for (auto& x : d.points)
        for (auto& c : x) c = read_token<double>(is, "coordinate");

    std::string word;
    while (is >> word) {
        if (word == "VERTICES") {
            const auto cells = read_token<std::size_t>(is, "cell count");
            const auto size = read_token<std::size_t>(is, "cell list size");
            (void)cells;
            for (std::size_t i = 0; i < size; ++i) read_token<std::size_t>(is, "cell entry");
        } else if (word == "POINT_DATA") {
            if (read_token<std::size_t>(is, "point data count") != n) throw IoError("read_vtk: point data count mismatch");
        } else if (word == "VECTORS") {
            const auto name = read_token<std::string>(is, "array name");
            read_token<std::string>(is, "array type");
            auto& v = d.vectors[name];
            v.resize(n);
            for (auto& x : v)
                for (auto& c : x) c = read_token<double>(is, "vector component");
        } else if (word == "SCALARS") {
            const auto name = read_token<std::string>(is, "array name");
            read_token<std::string>(is, "array type");
            read_token<int>(is, "component count");
            expect(is, "LOOKUP_TABLE");
            read_token<std::string>(is, "table name");
            auto& v = d.scalars[name];
            v.resize(n);
            for (auto& x : v) x = read_token<double>(is, "scalar");
        } else {
            throw IoError("read_vtk: unexpected keyword " + word);
        }
    }
    return d;
}

VtkData read_vtk(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_vtk(is);
}

void write_profile_csv(std::ostream& os, std::span<const ProfileSample> samples, const std::string& coordinate,
                       const std::string& value)
{
    os << coordinate << ',' << value << '\n';
    for (const auto& s : samples) os << format_double(s.coordinate) << ',' << format_double(s.value) << '\n';
}

void write_vortices_csv(std::ostream& os, std::span<const VortexRecord> vortices)
{
    os << "x,y,psi,label\n";
    for (const auto& v : vortices)
        os << format_double(v.location[0]) << ',' << format_double(v.location[1]) << ',' << format_double(v.psi) << ','
           << v.label << '\n';
}

void write_convergence_log(std::ostream& os, std::span<const StepReport> history, int dim)
{
    for (const auto& r : history) os << format_log_line(r, dim) << '\n';
}

void write_key_values(std::ostream& os, const KeyValues& kv)
{
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

KeyValues read_key_values(std::istream& is)
{
    KeyValues out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("malformed key=value line: " + line);
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

}  // namespace daflow::io
