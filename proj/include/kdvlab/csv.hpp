#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "kdvlab/error.hpp"

namespace kdv {

/// Shortest round-trip decimal form, independent of the C locale.
inline std::string format_number(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Comma-separated table with a header row and LF line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& values)
    {
        require(values.size() == header_.size(), "csv: row width does not match header");
        std::string line;
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (k) line += ',';
            line += format_number(values[k]);
        }
        rows_.push_back(std::move(line));
    }

    void add_row(std::initializer_list<double> values) { add_row(std::vector<double>(values)); }

    // mixed rows: labels are written verbatim and must not contain commas
    void add_text_row(const std::vector<std::string>& cells)
    {
        require(cells.size() == header_.size(), "csv: row width does not match header");
        std::string line;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            require(cells[k].find_first_of(",\n") == std::string::npos, "csv: cell contains a separator");
            if (k) line += ',';
            line += cells[k];
        }
        rows_.push_back(std::move(line));
    }

    [[nodiscard]] std::size_t rows() const { return rows_.size(); }

    [[nodiscard]] std::string str() const
    {
        std::string out;
        for (std::size_t k = 0; k < header_.size(); ++k) {
            if (k) out += ',';
            out += header_[k];
        }
        out += '\n';
        for (const auto& r : rows_) {
            out += r;
            out += '\n';
        }
        return out;
    }

    void write(const std::filesystem::path& path) const
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot open " + path.string() + " for writing");
        const auto s = str();
        os.write(s.data(), static_cast<std::streamsize>(s.size()));
        if (!os) throw Error("write failed for " + path.string());
    }

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

} // namespace kdv
