#include "bandflow/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "bandflow/error.hpp"

namespace bandflow::io {

std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw Error(ErrorCode::Io, "cannot format double");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorCode::ConfigParse, "not a number: '" + std::string(s) + "'");
    return v;
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

void append_row(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += row[i];
    }
    out += '\n';
}

}  // namespace

std::string CsvTable::to_string() const {
    std::string out;
    append_row(out, header);
    for (const auto& r : rows) append_row(out, r);
    return out;
}

CsvTable CsvTable::parse(std::string_view text) {
    CsvTable t;
    bool first = true;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw Error(ErrorCode::Io, "CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                               std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw Error(ErrorCode::Io, "CSV has no column '" + std::string(name) + "'");
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json to_json(const UniformGrid& g) {
    return {{"t_min", g.t_min()}, {"spacing", g.spacing()}, {"count", g.count()}};
}

UniformGrid grid_from_json(const nlohmann::json& j) {
    return UniformGrid(j.at("t_min").get<double>(), j.at("spacing").get<double>(), j.at("count").get<std::size_t>());
}

nlohmann::json to_json(const BandSpec& b) {
    auto arr = nlohmann::json::array();
    for (const auto& iv : b.intervals()) arr.push_back({iv.lo, iv.hi});
    return arr;
}

BandSpec band_from_json(const nlohmann::json& j) {
    std::vector<Interval> parts;
    for (const auto& iv : j) parts.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
    return BandSpec(std::move(parts));
}

void write_signal(const std::filesystem::path& stem, const Signal& s) {
    CsvTable t{{"t", "re", "im"}, {}};
    t.rows.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        t.rows.push_back({format_double(s.grid().time(i)), format_double(s[i].real()), format_double(s[i].imag())});
    auto csv = stem;
    csv += ".csv";
    write_text(csv, t.to_string());
    nlohmann::json meta = {{"grid", to_json(s.grid())}, {"bound", s.value_bound()}};
    meta["band"] = s.band() ? to_json(*s.band()) : nlohmann::json("unbounded");
    auto js = stem;
    js += ".json";
    write_text(js, meta.dump(2) + "\n");
}

Signal read_signal(const std::filesystem::path& stem) {
    auto js = stem;
    js += ".json";
    auto csv = stem;
    csv += ".csv";
    const auto meta = nlohmann::json::parse(read_text(js));
    const auto grid = grid_from_json(meta.at("grid"));
    const auto t = CsvTable::parse(read_text(csv));
    const auto re = t.column("re");
    const auto im = t.column("im");
    if (t.rows.size() != grid.count()) throw Error(ErrorCode::Io, "signal CSV length does not match its header");
    std::vector<cplx> v;
    v.reserve(t.rows.size());
    for (const auto& r : t.rows) v.emplace_back(parse_double(r[re]), parse_double(r[im]));
    std::optional<BandSpec> band;
    if (!meta.at("band").is_string()) band = band_from_json(meta.at("band"));
    return Signal(grid, std::move(v), std::move(band), meta.at("bound").get<double>());
}

}  // namespace bandflow::io
