#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace rwre {

inline constexpr const char* kToolVersion = "0.1.0";

// Shortest deterministic decimal form that round-trips (%.17g).
std::string format_double(double v);

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// Key-sorted single-line dump; the config hash is taken over this form.
std::string canonical_json(const nlohmann::json& j);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<std::string>& cells);
  const std::string& str() const { return buffer_; }

 private:
  std::string buffer_;
  size_t width_;
};

// Log-scale decay plot: -log p against the transformed scale, CI whiskers per
// point and the fitted through-origin line. Hand-emitted SVG, no plot library.
std::string decay_plot_svg(const std::string& title, const std::string& x_label,
                           const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& y_lo, const std::vector<double>& y_hi,
                           double fitted_rate);

}  // namespace rwre
