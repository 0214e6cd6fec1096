#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bsdelab {

inline constexpr const char* kVersion = "0.1.0";

// 17 significant digits: enough for exact double round-trips.
std::string format_double(double v);

// A table cell is either a number or a literal token (DIVERGENT, PASS, ...).
class Cell {
public:
    static Cell number(double v) {
        Cell c;
        c.is_number_ = true;
        c.number_ = v;
        return c;
    }
    static Cell token(std::string t) {
        Cell c;
        c.text_ = std::move(t);
        return c;
    }
    static Cell empty() { return token(""); }

    bool is_number() const { return is_number_; }
    double as_number() const { return number_; }
    const std::string& as_token() const { return text_; }

    std::string csv() const { return is_number_ ? format_double(number_) : text_; }
    nlohmann::ordered_json json() const {
        if (is_number_) return number_;
        return nlohmann::ordered_json{{"token", text_}};
    }

private:
    bool is_number_ = false;
    double number_ = 0.0;
    std::string text_;
};

struct ResultTable {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::ordered_json metadata;  // config echo, seed, version, wall clock
    std::optional<std::string> invariant_failure;

    void add_row(std::vector<Cell> cells);
};

// Header plus one line per row, '.' decimal separator, UTF-8, '\n' endings.
// The CSV body carries no timing or environment data, so identical configs
// reproduce identical bytes.
std::string to_csv(const ResultTable& table);

nlohmann::ordered_json to_json(const ResultTable& table);

// Writes <dir>/<kind>.csv and/or <dir>/<kind>.json; format is one of
// "csv", "json", "both". Returns the paths written.
std::vector<std::filesystem::path> write_artifacts(const ResultTable& table,
                                                   const std::filesystem::path& dir,
                                                   const std::string& format);

}  // namespace bsdelab
