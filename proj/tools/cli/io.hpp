#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace kowalevski::cli {

// 17 significant digits: doubles round-trip through the text.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  // Row with leading text cells, then numbers.
  void add_row(const std::vector<std::string>& text, const std::vector<double>& values);

  std::size_t rows() const { return rows_.size(); }
  // Header line plus one line per row, LF endings.
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

// Writes to a temporary file in the same directory, then renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string json_text(const nlohmann::ordered_json& j);

}  // namespace kowalevski::cli
