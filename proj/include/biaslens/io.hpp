#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace biaslens::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to "<path>.tmp" and renames over path, creating parent
/// directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Splits on '\n', dropping a trailing '\r' from each line. A final line
/// without a newline is included.
std::vector<std::string_view> split_lines(std::string_view contents);

/// RFC 4180 CSV. Records whose first field starts with '#' outside quotes
/// are comments and skipped.
struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

std::vector<CsvRecord> parse_csv(std::string_view contents);

std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

/// ISO-8601 UTC with second precision, e.g. 2024-10-03T12:00:00Z.
std::string utc_timestamp_now();

}  // namespace biaslens::io
