#include "dnprobe/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace dnprobe {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("csv row width mismatch");
    rows_.push_back(std::move(row));
}

std::string CsvTable::render(const std::string& config_hash, const std::string& norm_flag) const {
    std::string s = "# config_hash=" + config_hash + ", norm=" + norm_flag + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            if (cells[i].find_first_of(",\"\n") != std::string::npos) {
                s += '"';
                for (char c : cells[i]) {
                    if (c == '"') s += '"';
                    s += c;
                }
                s += '"';
            } else {
                s += cells[i];
            }
        }
        s += '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return s;
}

void write_field(const std::filesystem::path& base, const SpaceTimeField& f, const Grid& g,
                 const std::string& config_hash) {
    std::string bytes(f.values.size() * sizeof(double), '\0');
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double v = f.values[i];
        unsigned char b[sizeof(double)];
        std::memcpy(b, &v, sizeof v);
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof b);
        std::memcpy(bytes.data() + i * sizeof(double), b, sizeof b);
    }
    std::filesystem::path bin = base, meta = base;
    bin += ".bin";
    meta += ".json";
    write_atomic(bin, bytes);
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["kind"] = field_kind_name(f.kind);
    j["dtype"] = "float64-le";
    j["layout"] = "level-major, node id = i + (N+1)(j + (N+1)k)";
    j["dim"] = g.dim;
    j["nodes_per_axis"] = g.nodes_per_axis();
    j["h"] = g.h;
    j["dt"] = g.dt;
    j["levels"] = f.levels;
    j["nodes"] = f.nodes;
    write_atomic(meta, j.dump(2) + "\n");
}

}  // namespace dnprobe
