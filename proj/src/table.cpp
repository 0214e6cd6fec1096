#include "bsdelab/table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bsdelab {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ResultTable::add_row(std::vector<Cell> cells) {
    if (cells.size() != columns.size())
        throw std::invalid_argument("ResultTable: row width does not match column count");
    rows.push_back(std::move(cells));
}

std::string to_csv(const ResultTable& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << ',';
            out << row[c].csv();
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::ordered_json to_json(const ResultTable& table) {
    nlohmann::ordered_json j;
    j["kind"] = table.kind;
    j["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        auto jr = nlohmann::ordered_json::array();
        for (const auto& cell : row) jr.push_back(cell.json());
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    j["metadata"] = table.metadata;
    if (table.invariant_failure) j["invariant_failure"] = *table.invariant_failure;
    return j;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> write_artifacts(const ResultTable& table,
                                                   const std::filesystem::path& dir,
                                                   const std::string& format) {
    if (format != "csv" && format != "json" && format != "both")
        throw std::invalid_argument("write_artifacts: format must be csv, json or both");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string());

    std::vector<std::filesystem::path> written;
    if (format == "csv" || format == "both") {
        const auto path = dir / (table.kind + ".csv");
        write_file(path, to_csv(table));
        written.push_back(path);
    }
    if (format == "json" || format == "both") {
        const auto path = dir / (table.kind + ".json");
        write_file(path, to_json(table).dump(2) + "\n");
        written.push_back(path);
    }
    return written;
}

}  // namespace bsdelab
