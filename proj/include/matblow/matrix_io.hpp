#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "matblow/matrix.hpp"

namespace matblow {

struct Snapshot;

/// 17 significant digits: every double survives a write/read round trip.
std::string format_double(double v);

/// {"n": N, "rows": [[...], ...]} with 17-significant-digit entries.
std::string matrix_to_json(const Matrix& m);

/// Parses either the JSON matrix format or plain text with one row per line
/// (whitespace or comma separated, '#' starts a comment). Throws ParseError.
Matrix parse_matrix(std::string_view text);

Matrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);

/// {"snapshots": [{"step": k, "t": t, "n": N, "rows": [...]}, ...]}
void write_snapshots_json(std::ostream& out, std::span<const Snapshot> snapshots);

}  // namespace matblow
