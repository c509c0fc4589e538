#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hopflab {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal representation; identical output for
/// identical doubles, which keeps reports byte-stable across runs.
std::string format_double(double x);

/// Write-temp-then-rename so readers never observe partial files.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

/// Row-oriented CSV accumulator with a fixed header.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
  std::size_t width_;
};

}  // namespace hopflab
