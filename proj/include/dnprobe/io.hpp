#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dnprobe/fields.hpp"
#include "dnprobe/grid.hpp"

namespace dnprobe {

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Round-trippable decimal text for a double.
std::string format_double(double v);

/// CSV with a leading "# config_hash=..., norm=..." line.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
    void add(std::vector<std::string> row);
    std::string render(const std::string& config_hash, const std::string& norm_flag) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Raw little-endian doubles (level-major) plus a JSON sidecar describing the layout.
void write_field(const std::filesystem::path& base, const SpaceTimeField& f, const Grid& g,
                 const std::string& config_hash);

}  // namespace dnprobe
