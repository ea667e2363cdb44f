#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bandflow/band.hpp"
#include "bandflow/signal.hpp"

namespace bandflow::io {

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);
double parse_double(std::string_view s);

/// Minimal CSV table: header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const;
    static CsvTable parse(std::string_view text);
    std::size_t column(std::string_view name) const;
};

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

nlohmann::json to_json(const UniformGrid& g);
UniformGrid grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BandSpec& b);
BandSpec band_from_json(const nlohmann::json& j);

/// Writes `<stem>.csv` (t, re, im) and `<stem>.json` (grid, band, bound).
void write_signal(const std::filesystem::path& stem, const Signal& s);
Signal read_signal(const std::filesystem::path& stem);

}  // namespace bandflow::io
