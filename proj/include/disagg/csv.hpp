#pragma once

#include <map>
#include <string>
#include <vector>

namespace disagg {

// Minimal CSV support for the file schemas used by the pipeline: comma
// separated, no quoting, '#'-prefixed comment lines skipped, first
// non-comment line is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // column index by name; throws if absent
    std::size_t col(const std::string& name) const;
    // column index or npos if absent
    std::size_t col_opt(const std::string& name) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

std::vector<std::string> split_csv_line(const std::string& line);

CsvTable read_csv(const std::string& path);

// writes comment lines (already '#'-prefixed by the caller), header, rows
void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string fmt_double(double v);       // short form for summaries
std::string fmt_double_full(double v);  // round-trip form

}  // namespace disagg
