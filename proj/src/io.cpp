#include "biaslens/io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include "biaslens/error.hpp"

namespace biaslens::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

std::vector<std::string_view> split_lines(std::string_view contents) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    auto line = contents.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<CsvRecord> parse_csv(std::string_view contents) {
  std::vector<CsvRecord> records;
  std::size_t i = 0;
  std::size_t line = 1;
  const std::size_t n = contents.size();
  while (i < n) {
    CsvRecord rec;
    rec.line = line;
    if (contents[i] == '#') {
      while (i < n && contents[i] != '\n') ++i;
      ++i;
      ++line;
      continue;
    }
    std::string field;
    bool in_quotes = false;
    bool done = false;
    while (i < n && !done) {
      const char c = contents[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && contents[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty()) {
            throw ValidationError("csv line " + std::to_string(line) +
                                  ": quote inside unquoted field");
          }
          in_quotes = true;
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          ++i;
          break;
        case '\r':
          ++i;
          break;
        case '\n':
          done = true;
          ++i;
          ++line;
          break;
        default:
          field += c;
          ++i;
      }
    }
    if (in_quotes) {
      throw ValidationError("csv record starting at line " + std::to_string(rec.line) +
                            ": unterminated quoted field");
    }
    rec.fields.push_back(std::move(field));
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // blank line
    records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos &&
      (field.empty() || field.front() != '#')) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace biaslens::io
