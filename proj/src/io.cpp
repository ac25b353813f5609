#include "sja/io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace sja {

using nlohmann::json;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

std::string meta_path(const std::string& path) { return path + ".meta.json"; }

void write_meta(const std::string& path, const json& j) {
    std::ofstream out(meta_path(path));
    if (!out) throw std::runtime_error("cannot open " + meta_path(path));
    out << j.dump(2) << "\n";
}

json read_meta(const std::string& path) {
    std::ifstream in(meta_path(path));
    if (!in) throw std::runtime_error("cannot open " + meta_path(path));
    return json::parse(in);
}

json grid_to_json(const EnergyGrid& g) {
    return json{{"e_min", g.e_min}, {"de", g.de}, {"n_e", g.n_e}};
}

EnergyGrid grid_from_json(const json& j) {
    EnergyGrid g;
    g.e_min = j.at("e_min").get<double>();
    g.de = j.at("de").get<double>();
    g.n_e = j.at("n_e").get<int>();
    return g;
}

std::vector<std::vector<double>> read_rows(const std::string& path, size_t cols) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {  // header
            first = false;
            continue;
        }
        std::vector<double> r;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) r.push_back(std::stod(tok));
        if (r.size() != cols) throw std::runtime_error("bad row in " + path);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    uint64_t h = 14695981039346656037ULL;
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= uint64_t(uint8_t(buf[i]));
            h *= 1099511628211ULL;
        }
    }
    return h;
}

uint64_t fnv1a64_bytes(const std::string& data) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= uint64_t(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void save_field1_csv(const Field1& f, const std::string& path) {
    auto fp = open_or_throw(path, "w");
    std::fprintf(fp.get(), "E,value\n");
    for (int i = 0; i < f.g.n_e; ++i)
        std::fprintf(fp.get(), "%.17g,%.17g\n", f.g.e_center(i), f.v[i]);
    write_meta(path, json{{"kind", "field1"}, {"grid", grid_to_json(f.g)}});
}

Field1 load_field1_csv(const std::string& path) {
    json meta = read_meta(path);
    Field1 f(grid_from_json(meta.at("grid")));
    auto rows = read_rows(path, 2);
    if (int(rows.size()) != f.g.n_e) throw std::runtime_error("row count mismatch in " + path);
    for (int i = 0; i < f.g.n_e; ++i) f.v[i] = rows[i][1];
    return f;
}

void save_field2_csv(const Field2& f, const std::string& path) {
    auto fp = open_or_throw(path, "w");
    std::fprintf(fp.get(), "E,omega,value\n");
    for (int i = 0; i < f.g.n_e; ++i)
        for (int m = -f.g.m_max(); m <= f.g.m_max(); ++m)
            std::fprintf(fp.get(), "%.17g,%.17g,%.17g\n", f.g.e_center(i), f.g.omega(m),
                         f.at(i, m));
    write_meta(path, json{{"kind", "field2"}, {"grid", grid_to_json(f.g)}});
}

Field2 load_field2_csv(const std::string& path) {
    json meta = read_meta(path);
    Field2 f(grid_from_json(meta.at("grid")));
    auto rows = read_rows(path, 3);
    if (rows.size() != f.v.size()) throw std::runtime_error("row count mismatch in " + path);
    size_t k = 0;
    for (int i = 0; i < f.g.n_e; ++i)
        for (int m = -f.g.m_max(); m <= f.g.m_max(); ++m) f.at(i, m) = rows[k++][2];
    return f;
}

void save_series_csv(const TimeSeries& s, const std::string& path) {
    save_series_csv(s, path, "{}");
}

void save_series_csv(const TimeSeries& s, const std::string& path, const std::string& extra_json) {
    auto fp = open_or_throw(path, "w");
    std::fprintf(fp.get(), "t,value\n");
    for (size_t i = 0; i < s.t.size(); ++i)
        std::fprintf(fp.get(), "%.17g,%.17g\n", s.t[i], s.v[i]);
    json meta{{"kind", "series"}, {"label", s.label}, {"samples", s.t.size()}};
    meta.update(json::parse(extra_json));
    write_meta(path, meta);
}

TimeSeries load_series_csv(const std::string& path) {
    json meta = read_meta(path);
    TimeSeries s;
    s.label = meta.value("label", "");
    for (auto& r : read_rows(path, 2)) {
        s.t.push_back(r[0]);
        s.v.push_back(r[1]);
    }
    return s;
}

void save_kernel_csv(const KernelTable& t, const std::string& path) {
    auto fp = open_or_throw(path, "w");
    std::fprintf(fp.get(), "slice,w_hi,w_lo,E,delta,weight,count\n");
    const EnergyGrid& g = t.grid;
    for (size_t s = 0; s < t.slices.size(); ++s) {
        const KernelSlice& sl = t.slices[s];
        for (int i = 0; i < g.n_e; ++i)
            for (int m = -g.m_max(); m <= g.m_max(); ++m) {
                double w = sl.weight.at(i, m), c = sl.count.at(i, m);
                if (w == 0.0 && c == 0.0) continue;
                std::fprintf(fp.get(), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s, sl.w_hi,
                             sl.w_lo, g.e_center(i), g.omega(m), w, c);
            }
    }
    json slices = json::array();
    for (const auto& sl : t.slices) slices.push_back({{"w_hi", sl.w_hi}, {"w_lo", sl.w_lo}});
    write_meta(path, json{{"kind", "kernel"},
                          {"grid", grid_to_json(g)},
                          {"nu", t.nu.v},
                          {"events", t.events},
                          {"slices", slices}});
}

KernelTable load_kernel_csv(const std::string& path) {
    json meta = read_meta(path);
    KernelTable t;
    t.grid = grid_from_json(meta.at("grid"));
    t.nu = Field1(t.grid);
    auto nu = meta.at("nu").get<std::vector<double>>();
    if (int(nu.size()) != t.grid.n_e) throw std::runtime_error("nu size mismatch in " + path);
    t.nu.v = nu;
    t.events = meta.at("events").get<int64_t>();
    for (const auto& js : meta.at("slices")) {
        KernelSlice sl;
        sl.w_hi = js.at("w_hi").get<double>();
        sl.w_lo = js.at("w_lo").get<double>();
        sl.weight = Field2(t.grid);
        sl.count = Field2(t.grid);
        t.slices.push_back(std::move(sl));
    }
    for (auto& r : read_rows(path, 7)) {
        size_t s = size_t(r[0]);
        if (s >= t.slices.size()) throw std::runtime_error("bad slice index in " + path);
        int i = t.grid.e_bin(r[3]);
        int m = t.grid.omega_bin(r[4]);
        t.slices[s].weight.at(i, m) = r[5];
        t.slices[s].count.at(i, m) = r[6];
    }
    return t;
}

void Manifest::write(const std::string& path) const {
    json out;
    out["version"] = "sja 1.0";
    if (!config_text.empty()) {
        out["config"] = json::parse(config_text);
        out["config_fnv1a64"] = hex64(fnv1a64_bytes(config_text));
    }
    json fl = json::array();
    for (const auto& [label, p] : files)
        fl.push_back({{"label", label}, {"path", p}, {"fnv1a64", hex64(fnv1a64_file(p))}});
    out["files"] = fl;
    json ab = json::array();
    for (const auto& [stage, err] : aborts) ab.push_back({{"stage", stage}, {"error", err}});
    out["aborts"] = ab;
    out["warnings"] = warnings;
    std::ofstream o(path);
    if (!o) throw std::runtime_error("cannot open " + path);
    o << out.dump(2) << "\n";
}

} // namespace sja
