#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace rkhs::csv {

/// 17 significant digits: round-trips every double exactly.
[[nodiscard]] std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Headered, comma-separated numeric table.
[[nodiscard]] Table read(const std::filesystem::path& path);

class Writer {
public:
    Writer(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(std::span<const double> values);

private:
    std::ofstream out_;
    std::size_t columns_;
};

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows);

}  // namespace rkhs::csv
