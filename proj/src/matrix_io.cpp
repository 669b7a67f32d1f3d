#include "matblow/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "matblow/errors.hpp"
#include "matblow/integrator.hpp"

namespace matblow {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_rows(std::ostream& out, const Matrix& m) {
  out << "\"rows\": [";
  for (std::size_t i = 0; i < m.n(); ++i) {
    out << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.n(); ++j) out << (j ? ", " : "") << format_double(m(i, j));
    out << ']';
  }
  out << ']';
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) throw ParseError("matrix has no rows");
  std::vector<double> entries;
  entries.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw ParseError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                       " entries, expected " + std::to_string(n));
    }
    for (double v : rows[i]) {
      if (!std::isfinite(v)) throw ParseError("matrix entries must be finite");
      entries.push_back(v);
    }
  }
  return Matrix(n, std::move(entries));
}

Matrix parse_json_matrix(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON matrix: ") + e.what());
  }
  if (!j.is_object() || !j.contains("rows")) throw ParseError("JSON matrix needs a \"rows\" array");
  std::vector<std::vector<double>> rows;
  try {
    rows = j.at("rows").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("JSON matrix rows must be arrays of numbers: ") + e.what());
  }
  if (j.contains("n")) {
    if (!j["n"].is_number_integer() || j["n"].get<long long>() != static_cast<long long>(rows.size())) {
      throw ParseError("JSON matrix \"n\" does not match the number of rows");
    }
  }
  return from_rows(rows);
}

Matrix parse_text_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == ';') c = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      // from_chars accepts subnormals, which std::stod rejects as out of range
      double v = 0.0;
      const char* begin = tok.data() + (tok.front() == '+' ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(begin, tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError("not a number: '" + tok + "'");
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return from_rows(rows);
}

}  // namespace

std::string matrix_to_json(const Matrix& m) {
  std::ostringstream out;
  out << "{\"n\": " << m.n() << ", ";
  write_rows(out, m);
  out << "}\n";
  return out.str();
}

Matrix parse_matrix(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw ParseError("empty matrix input");
  if (text[first] == '{') return parse_json_matrix(text);
  return parse_text_matrix(text);
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_matrix(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << matrix_to_json(m);
}

void write_snapshots_json(std::ostream& out, std::span<const Snapshot> snapshots) {
  out << "{\"snapshots\": [";
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const Snapshot& s = snapshots[k];
    out << (k ? ",\n  " : "\n  ") << "{\"step\": " << s.step << ", \"t\": " << format_double(s.t)
        << ", \"n\": " << s.x.n() << ", ";
    write_rows(out, s.x);
    out << '}';
  }
  out << "\n]}\n";
}

}  // namespace matblow
