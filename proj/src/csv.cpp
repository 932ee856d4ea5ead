#include "rkhs/csv.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "rkhs/error.hpp"

namespace rkhs::csv {

std::string format_double(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return {buf, static_cast<std::size_t>(n)};
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) { return i; }
    }
    fail(ErrorCode::IoError, "missing CSV column '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) { return {}; }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) { out.push_back(trim(cell)); }
    return out;
}

}  // namespace

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
    Table table;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::IoError, path.string() + " is empty");
    table.header = split(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) { continue; }
        const auto cells = split(line);
        require(cells.size() == table.header.size(), ErrorCode::IoError,
                path.string() + ":" + std::to_string(line_no) + ": wrong number of columns");
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), row[i]);
            require(ec == std::errc() && ptr == c.data() + c.size(), ErrorCode::IoError,
                    path.string() + ":" + std::to_string(line_no) + ": not a number '" + c + "'");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    require(static_cast<bool>(out_), ErrorCode::IoError, "cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) { out_ << (i ? "," : "") << header[i]; }
    out_ << '\n';
}

void Writer::row(std::span<const double> values) {
    require(values.size() == columns_, ErrorCode::IoError, "CSV row has the wrong number of columns");
    for (std::size_t i = 0; i < values.size(); ++i) { out_ << (i ? "," : "") << format_double(values[i]); }
    out_ << '\n';
}

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    Writer w(path, header);
    for (const auto& r : rows) { w.row(r); }
}

}  // namespace rkhs::csv
