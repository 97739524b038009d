#pragma once

// Error type with machine-readable codes, CSV formatting (17 significant
// digits, locale-independent), and config loading (JSON, or the TOML subset
// the shipped configs use: [tables], key = value with numbers, strings,
// booleans and flat arrays).

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace horo::io {

struct Error : std::runtime_error {
  std::string code;
  nlohmann::json detail;

  Error(std::string code_, const std::string& message,
        nlohmann::json detail_ = nlohmann::json::object())
      : std::runtime_error(message), code(std::move(code_)),
        detail(std::move(detail_)) {}

  nlohmann::json to_json() const {
    return {{"code", code}, {"message", what()}, {"detail", detail}};
  }
};

// "%.17g" formatting; round-trips doubles exactly and never depends on the
// global locale.
std::string fmt17(double x);

struct CsvWriter {
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  void raw_line(const std::string& line);           // e.g. the version header
  void row(const std::vector<std::string>& cells);  // joined with commas
  void close();

 private:
  struct Impl;
  Impl* impl;
};

inline constexpr const char* kCsvVersionHeader = "# horocount-csv-v1";

// Load a config file as JSON.  *.json parses directly; anything else goes
// through the TOML-subset reader (tables become nested objects).
nlohmann::json load_config(const std::string& path);

// The TOML-subset parser, exposed for tests.
nlohmann::json parse_toml_subset(const std::string& text);

std::string word_to_string(const std::vector<int>& word);

}  // namespace horo::io
