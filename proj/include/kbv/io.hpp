#pragma once

// Field files, PGM import/export and JSON report plumbing.
//
// Field file: one JSON header line {"nx":..,"ny":..,"h":..} terminated by '\n',
// followed by nx*ny little-endian float64 values in row-major order.

#include <string>

#include "json.hpp"
#include "kbv/grid.hpp"

namespace kbv::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

void write_field(const std::string& path, const ScalarField& u);
ScalarField read_field(const std::string& path);

/// Affine map between stored bytes and values: value = offset + scale * byte.
struct PgmScaling {
  double offset = 0.0;
  double scale = 1.0;
};

/// 8-bit binary PGM of u mapped onto [0, 255], plus `path + ".json"` holding the
/// grid and the scaling. Returns the scaling used.
PgmScaling write_pgm(const std::string& path, const ScalarField& u);
/// Reads a P5 PGM. The sidecar (if present) supplies h and the scaling; otherwise
/// values are byte / 255 and h = `default_h`.
ScalarField read_pgm(const std::string& path, double default_h = 1.0);

/// Reads either format, chosen by the .pgm extension.
ScalarField read_any(const std::string& path, double default_h = 1.0);

/// {"schema_version", "command", "timestamp"}.
json report_header(const std::string& command);
void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

/// Writes (x, y) rows with a header line.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace kbv::io
