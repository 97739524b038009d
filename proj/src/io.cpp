#include "horocount/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace horo::io {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // guard against a comma decimal separator from an inherited locale
  for (char* p = buf; *p; ++p)
    if (*p == ',') *p = '.';
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path) : impl(new Impl) {
  impl->out.open(path, std::ios::binary);
  if (!impl->out)
    throw Error("E_IO", "cannot open output file", {{"path", path}});
}

CsvWriter::~CsvWriter() {
  close();
  delete impl;
}

void CsvWriter::raw_line(const std::string& line) {
  impl->out << line << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl->out << ',';
    impl->out << cells[i];
  }
  impl->out << '\n';
}

void CsvWriter::close() {
  if (impl->out.is_open()) impl->out.close();
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("E_CONFIG_NOT_FOUND", "config file not found",
                {{"path", path}});
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    try {
      return nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw Error("E_CONFIG_INVALID", std::string("bad JSON config: ") + e.what(),
                  {{"path", path}});
    }
  }
  try {
    return parse_toml_subset(text);
  } catch (const Error& err) {
    throw Error(err.code, err.what(),
                nlohmann::json{{"path", path}, {"inner", err.detail}});
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// cut a '#' comment, respecting double-quoted strings
std::string strip_comment(const std::string& line) {
  bool inStr = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) inStr = !inStr;
    if (c == '#' && !inStr) return line.substr(0, i);
  }
  return line;
}

}  // namespace

nlohmann::json parse_toml_subset(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* current = &root;
  std::istringstream in(text);
  std::string rawLine;
  int lineNo = 0;
  while (std::getline(in, rawLine)) {
    ++lineNo;
    const std::string line = trim(strip_comment(rawLine));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error("E_CONFIG_INVALID", "unterminated table header",
                    {{"line", lineNo}});
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty())
        throw Error("E_CONFIG_INVALID", "empty table name", {{"line", lineNo}});
      current = &root;
      std::size_t pos = 0;
      while (pos != std::string::npos) {
        const std::size_t dot = name.find('.', pos);
        const std::string part =
            trim(dot == std::string::npos ? name.substr(pos)
                                          : name.substr(pos, dot - pos));
        if (part.empty())
          throw Error("E_CONFIG_INVALID", "empty table name component",
                      {{"line", lineNo}});
        current = &((*current)[part]);
        pos = dot == std::string::npos ? dot : dot + 1;
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("E_CONFIG_INVALID", "expected key = value",
                  {{"line", lineNo}});
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error("E_CONFIG_INVALID", "empty key or value", {{"line", lineNo}});
    // numbers, booleans, double-quoted strings and flat arrays are all valid
    // JSON fragments; anything else is taken as a bare string
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(value);
    } catch (const std::exception&) {
      if (value.size() >= 2 && value.front() == '\'' && value.back() == '\'')
        value = value.substr(1, value.size() - 2);
      parsed = value;
    }
    (*current)[key] = parsed;
  }
  return root;
}

std::string word_to_string(const std::vector<int>& word) {
  if (word.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(word[i]);
  }
  return out;
}

}  // namespace horo::io
