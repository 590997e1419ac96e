#pragma once

// Minimal CSV reader for the design format: header row, comma-separated,
// UTF-8, '.' decimal point. Quoting is not supported (stratum ids and column
// names must not contain commas).

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sensi/error.hpp"

namespace sensi {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return static_cast<int>(c);
        throw input_error("missing column '" + name + "'");
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        auto fields = detail::split_csv_line(t);
        for (auto& f : fields) f = detail::trim(f);
        if (first) {
            table.header = fields;
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw input_error("row " + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw input_error("no strata: '" + path + "' is empty");
    return table;
}

inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw input_error(where + ": non-numeric value '" + s + "'");
    return v;
}

} // namespace sensi
