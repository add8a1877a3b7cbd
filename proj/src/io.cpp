#include "kbv/io.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace kbv::io {
namespace {

std::uint64_t to_little(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t y = 0;
    for (int b = 0; b < 8; ++b) y |= ((x >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return y;
  }
  return x;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return in;
}

GridSpec grid_from_json(const json& j, const std::string& path) {
  try {
    GridSpec g{j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("h").get<double>()};
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, path + ": bad header: " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::Io, path + ": " + e.what());
  }
}

}  // namespace

void write_field(const std::string& path, const ScalarField& u) {
  const GridSpec& g = u.grid();
  std::ofstream out = open_out(path);
  out << json{{"nx", g.nx}, {"ny", g.ny}, {"h", g.h}}.dump() << '\n';
  std::vector<std::uint64_t> raw(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) raw[k] = to_little(std::bit_cast<std::uint64_t>(u[k]));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

ScalarField read_field(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::Io, path + ": missing header line");
  json j;
  try {
    j = json::parse(header);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, path + ": header is not JSON: " + e.what());
  }
  const GridSpec g = grid_from_json(j, path);
  std::vector<std::uint64_t> raw(g.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
  if (in.gcount() != static_cast<std::streamsize>(raw.size() * 8)) {
    throw Error(ErrorKind::Io, path + ": truncated field data");
  }
  std::vector<double> values(g.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = std::bit_cast<double>(to_little(raw[k]));
  ScalarField u(g, std::move(values));
  if (!u.all_finite()) throw Error(ErrorKind::Io, path + ": non-finite values");
  return u;
}

PgmScaling write_pgm(const std::string& path, const ScalarField& u) {
  const GridSpec& g = u.grid();
  PgmScaling s;
  s.offset = u.min();
  const double range = u.max() - s.offset;
  s.scale = range > 0.0 ? range / 255.0 : 1.0;
  std::ofstream out = open_out(path);
  out << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
  // PGM rows run top to bottom; the grid's j grows with y.
  std::vector<unsigned char> row(g.nx);
  for (int j = g.ny - 1; j >= 0; --j) {
    for (int i = 0; i < g.nx; ++i) {
      const double b = std::round((u(i, j) - s.offset) / s.scale);
      row[i] = static_cast<unsigned char>(std::clamp(b, 0.0, 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), g.nx);
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
  write_json(path + ".json", json{{"nx", g.nx}, {"ny", g.ny}, {"h", g.h}, {"offset", s.offset}, {"scale", s.scale}});
  return s;
}

ScalarField read_pgm(const std::string& path, double default_h) {
  std::ifstream in = open_in(path);
  auto token = [&]() {
    std::string t;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> t)) throw Error(ErrorKind::Io, path + ": truncated PGM header");
    return t;
  };
  if (token() != "P5") throw Error(ErrorKind::Io, path + ": not a binary PGM (P5)");
  int nx = 0, ny = 0, maxval = 0;
  try {
    nx = std::stoi(token());
    ny = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error(ErrorKind::Io, path + ": malformed PGM header");
  }
  if (maxval <= 0 || maxval > 255) throw Error(ErrorKind::Io, path + ": only 8-bit PGM is supported");
  in.get();

  PgmScaling s{0.0, 1.0 / maxval};
  double h = default_h;
  std::ifstream side(path + ".json");
  if (side) {
    const json j = read_json(path + ".json");
    h = j.value("h", h);
    s.offset = j.value("offset", s.offset);
    s.scale = j.value("scale", s.scale);
  }
  GridSpec g{nx, ny, h};
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Io, path + ": " + e.what());
  }
  ScalarField u(g);
  std::vector<unsigned char> row(nx);
  for (int j = ny - 1; j >= 0; --j) {
    in.read(reinterpret_cast<char*>(row.data()), nx);
    if (in.gcount() != nx) throw Error(ErrorKind::Io, path + ": truncated PGM data");
    for (int i = 0; i < nx; ++i) u(i, j) = s.offset + s.scale * row[i];
  }
  return u;
}

ScalarField read_any(const std::string& path, double default_h) {
  const bool pgm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0;
  return pgm ? read_pgm(path, default_h) : read_field(path);
}

json report_header(const std::string& command) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return json{{"schema_version", kSchemaVersion}, {"command", command}, {"timestamp", ts.str()}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

json read_json(const std::string& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, path + ": " + e.what());
  }
}

void write_csv(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  out << header << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << r[k];
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace kbv::io
