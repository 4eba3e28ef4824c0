#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfldp::cli {

using Json = nlohmann::json;

// Shortest text that is stable across runs: 17 significant digits, or the
// strings "inf", "-inf", "nan" for non-finite values.
std::string format_real(double x);

// Keys sorted, two-space indent, reals via format_real, newline-terminated.
std::string to_json_text(const Json& j);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string text() const;
};

// Writes to `path`, or to `fallback` when the path is empty.
void write_text(const std::filesystem::path& path, const std::string& text, std::ostream& fallback);

}  // namespace mfldp::cli
