#pragma once

// CSV / JSON / binary artifacts.  Every number goes through format_real so
// identical runs give byte-identical files.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "blowup/verify.hpp"

namespace blowup {

namespace fs = std::filesystem;

inline std::string format_real(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_real(const std::string& s)
{
    if (s == "nan") return kNaN;
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::stod(s);
}

// 64-bit FNV-1a of the compact dump; nlohmann keeps object keys sorted, so
// the dump is canonical
inline std::string config_hash(const json& j)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

inline void write_file(const fs::path& p, const std::string& text)
{
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) fail(ErrorCode::InvalidArgument, "cannot write " + p.string());
    os << text;
}

inline std::string read_file(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is) fail(ErrorCode::InvalidArgument, "cannot read " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// ------------------------------------------------------------------ fields

// i, j, x, y, w over the cells of the domain (boundary layer included)
inline void write_field_csv(std::ostream& os, const ScalarField& w)
{
    const GridDomain& d = *w.dom;
    os << "i,j,x,y,w\n";
    for (int idx = 0; idx < d.size(); ++idx) {
        if (!d.inside(idx)) continue;
        os << d.col(idx) << ',' << d.row(idx) << ',' << format_real(d.cx(idx)) << ',' << format_real(d.cy(idx)) << ','
           << format_real(w.values[idx]) << '\n';
    }
}

inline json field_sidecar(const ScalarField& w, const Nonlinearity& nl)
{
    json j = {{"domain", w.dom->descriptor},
              {"nl", nl.to_json()},
              {"h", w.dom->h},
              {"tag", to_string(w.tag)},
              {"residual_inf", w.residual_inf},
              {"tolerance", w.tolerance}};
    if (std::isfinite(w.boundary_value)) j["k"] = w.boundary_value;
    else j["ladder"] = w.meta;
    return j;
}

// reads values back into a field shaped like `like`
inline ScalarField read_field_csv(std::istream& is, const ScalarField& like)
{
    ScalarField out = like;
    std::fill(out.values.begin(), out.values.end(), kNaN);
    std::string line;
    std::getline(is, line);
    if (line != "i,j,x,y,w") fail(ErrorCode::InvalidArgument, "unexpected field header '" + line + "'");
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string c[5];
        for (auto& s : c) std::getline(ss, s, ',');
        const int idx = like.dom->index(std::stoi(c[0]), std::stoi(c[1]));
        out.values[idx] = parse_real(c[4]);
    }
    return out;
}

inline void save_field(const fs::path& stem, const ScalarField& w, const Nonlinearity& nl)
{
    std::ostringstream csv;
    write_field_csv(csv, w);
    write_file(stem.string() + ".csv", csv.str());
    write_file(stem.string() + ".json", field_sidecar(w, nl).dump(2) + "\n");
}

// ------------------------------------------------------------------ series

inline json series_index(const TimeSeriesField& u, const Nonlinearity& nl, const std::string& stem, bool binary)
{
    json j = {{"domain", u.dom->descriptor},
              {"nl", nl.to_json()},
              {"h", u.dom->h},
              {"T", u.T},
              {"dt", u.dt},
              {"times", u.times},
              {"tag", to_string(u.tag)},
              {"residual_inf", u.residual_inf},
              {"tolerance", u.tolerance},
              {"ladder", u.meta}};
    if (std::isfinite(u.boundary_value)) j["k"] = u.boundary_value;
    if (binary) {
        j["binary"] = stem + ".bin";
    } else {
        json files = json::array();
        char name[64];
        for (int m = 0; m < u.size(); ++m) {
            std::snprintf(name, sizeof name, "_%04d.csv", m);
            files.push_back(stem + name);
        }
        j["slices"] = files;
    }
    return j;
}

// binary layout: "BLWSER01", int32 nx, ny, slices, then the times, then each
// slice as nx*ny doubles (NaN outside the domain), native little-endian
inline void write_series_binary(std::ostream& os, const TimeSeriesField& u)
{
    const char magic[8] = {'B', 'L', 'W', 'S', 'E', 'R', '0', '1'};
    os.write(magic, 8);
    const std::int32_t hdr[3] = {u.dom->nx, u.dom->ny, static_cast<std::int32_t>(u.size())};
    os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    os.write(reinterpret_cast<const char*>(u.times.data()), sizeof(double) * u.times.size());
    for (const auto& s : u.slices)
        os.write(reinterpret_cast<const char*>(s.values.data()), sizeof(double) * s.values.size());
}

struct SeriesBlob {
    int nx = 0, ny = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> slices;
};

inline SeriesBlob read_series_binary(std::istream& is)
{
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "BLWSER01", 8) != 0) fail(ErrorCode::InvalidArgument, "not a series file");
    std::int32_t hdr[3];
    is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    SeriesBlob b;
    b.nx = hdr[0];
    b.ny = hdr[1];
    if (hdr[0] <= 0 || hdr[1] <= 0 || hdr[2] <= 0) fail(ErrorCode::InvalidArgument, "bad series header");
    b.times.resize(hdr[2]);
    is.read(reinterpret_cast<char*>(b.times.data()), sizeof(double) * b.times.size());
    b.slices.assign(hdr[2], std::vector<double>(static_cast<size_t>(b.nx) * b.ny));
    for (auto& s : b.slices) is.read(reinterpret_cast<char*>(s.data()), sizeof(double) * s.size());
    if (!is) fail(ErrorCode::InvalidArgument, "truncated series file");
    return b;
}

inline void save_series(const fs::path& dir, const std::string& stem, const TimeSeriesField& u, const Nonlinearity& nl,
                        bool binary)
{
    fs::create_directories(dir);
    if (binary) {
        std::ostringstream os;
        write_series_binary(os, u);
        write_file(dir / (stem + ".bin"), os.str());
    } else {
        char name[64];
        for (int m = 0; m < u.size(); ++m) {
            std::snprintf(name, sizeof name, "_%04d.csv", m);
            std::ostringstream os;
            write_field_csv(os, u.slices[m]);
            write_file(dir / (stem + name), os.str());
        }
    }
    write_file(dir / (stem + "_index.json"), series_index(u, nl, stem, binary).dump(2) + "\n");
}

// ------------------------------------------------------------ plot pairs

inline void write_pairs(std::ostream& os, const std::string& xname, const std::string& yname,
                        const std::vector<double>& x, const std::vector<double>& y)
{
    os << xname << ',' << yname << '\n';
    for (size_t i = 0; i < x.size(); ++i) os << format_real(x[i]) << ',' << format_real(y[i]) << '\n';
}

// 1D: (x, value) along the line; 2D: (x, value) along the row through the
// deepest cell
inline void write_profile_pairs(std::ostream& os, const ScalarField& w)
{
    const GridDomain& d = *w.dom;
    const auto df = distance_field(d);
    int deep = -1;
    for (int idx = 0; idx < d.size(); ++idx)
        if (d.inside(idx) && (deep < 0 || df.values[idx] > df.values[deep])) deep = idx;
    std::vector<double> x, v;
    for (int i = 0; i < d.nx; ++i) {
        const int idx = d.index(i, deep < 0 ? 0 : d.row(deep));
        if (!d.inside(idx)) continue;
        x.push_back(d.cx(idx));
        v.push_back(w.values[idx]);
    }
    write_pairs(os, "x", "value", x, v);
}

// (t, value) at the deepest cell
inline void write_time_pairs(std::ostream& os, const TimeSeriesField& u)
{
    const auto df = distance_field(*u.dom);
    int deep = -1;
    for (int idx = 0; idx < u.dom->size(); ++idx)
        if (u.dom->inside(idx) && (deep < 0 || df.values[idx] > df.values[deep])) deep = idx;
    std::vector<double> t, v;
    for (int m = 1; m < u.size(); ++m) {
        t.push_back(u.times[m]);
        v.push_back(u.slices[m].values[deep]);
    }
    write_pairs(os, "t", "value", t, v);
}

} // namespace blowup
