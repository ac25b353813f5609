#pragma once
#include "sja/decimation.hpp"
#include "sja/dynamics.hpp"
#include "sja/grid.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sja {

uint64_t fnv1a64_file(const std::string& path);
uint64_t fnv1a64_bytes(const std::string& data);
std::string hex64(uint64_t v);

// Tabular formats; every file gets a ".meta.json" sidecar carrying the grid or
// label so it can be reloaded without guessing. Doubles are written with 17
// significant digits and round-trip exactly.
void save_field1_csv(const Field1& f, const std::string& path);   // E,value
Field1 load_field1_csv(const std::string& path);

void save_field2_csv(const Field2& f, const std::string& path);   // E,omega,value
Field2 load_field2_csv(const std::string& path);

void save_series_csv(const TimeSeries& s, const std::string& path);  // t,value
// extra_json: a JSON object whose keys are merged into the sidecar
void save_series_csv(const TimeSeries& s, const std::string& path, const std::string& extra_json);
TimeSeries load_series_csv(const std::string& path);

// slice,w_hi,w_lo,E,delta,weight,count; only populated cells are written
void save_kernel_csv(const KernelTable& t, const std::string& path);
KernelTable load_kernel_csv(const std::string& path);

// Output inventory with content hashes, written as JSON. No timestamps, so a
// rerun with the same configuration produces byte-identical files.
struct Manifest {
    std::string config_text;  // resolved configuration as JSON text
    std::vector<std::pair<std::string, std::string>> files;   // label, path
    std::vector<std::pair<std::string, std::string>> aborts;  // stage/context, error
    std::vector<std::string> warnings;

    void add(const std::string& label, const std::string& path) { files.emplace_back(label, path); }
    void write(const std::string& path) const;
};

} // namespace sja
