#pragma once

// Trajectory files.
//
// CSV: metadata as '#' header lines ("# nx=256", "# nt=34", "# dx=...", "# dt=...",
// "# x0=...", "# t0=..."), then one comma-separated row per spatial index with
// one column per time sample. Values are written with 17 significant digits.
//
// Binary (little-endian): "FIDT", u32 version, u32 nx, u32 nt, f64 dx, f64 dt,
// f64 x0, f64 t0, then nx*nt float64 values in row-major (spatial-major) order.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fourierident/grid.hpp"

namespace fident {

enum class TrajectoryFormat { Csv, Binary };

inline constexpr std::array<char, 4> kBinaryMagic{'F', 'I', 'D', 'T'};
inline constexpr std::uint32_t kBinaryVersion = 1;

/// Picks the format from the extension: ".bin"/".fidt" are binary, everything else CSV.
inline TrajectoryFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".bin" || ext == ".fidt") return TrajectoryFormat::Binary;
  return TrajectoryFormat::Csv;
}

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary trajectory I/O assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* field) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw Error(ErrorKind::Parse, std::string("truncated binary header at field '") + field + "'");
  return v;
}

inline double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, context + ": cannot parse '" + text + "' as a number");
  }
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline Trajectory load_csv(std::istream& is) {
  std::map<std::string, std::string> meta;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(parse_double(trim(cell), "row " + std::to_string(rows.size()) + " (line " +
                                                 std::to_string(line_no) + ")"));
    rows.push_back(std::move(row));
  }

  for (const char* key : {"nx", "nt", "dx", "dt", "x0", "t0"})
    if (!meta.count(key)) throw Error(ErrorKind::Parse, std::string("missing metadata key '") + key + "'");

  Grid g;
  g.n_x = static_cast<int>(parse_double(meta["nx"], "metadata nx"));
  g.n_t = static_cast<int>(parse_double(meta["nt"], "metadata nt"));
  g.dx = parse_double(meta["dx"], "metadata dx");
  g.dt = parse_double(meta["dt"], "metadata dt");
  g.x0 = parse_double(meta["x0"], "metadata x0");
  g.t0 = parse_double(meta["t0"], "metadata t0");
  g.validate();

  if (static_cast<int>(rows.size()) != g.n_x)
    throw Error(ErrorKind::ShapeMismatch, "header says nx=" + std::to_string(g.n_x) + " but file has " +
                                              std::to_string(rows.size()) + " data rows");
  Eigen::MatrixXd values(g.n_x, g.n_t);
  for (int i = 0; i < g.n_x; ++i) {
    if (static_cast<int>(rows[i].size()) != g.n_t)
      throw Error(ErrorKind::Parse, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                        " columns, expected nt=" + std::to_string(g.n_t));
    for (int n = 0; n < g.n_t; ++n) {
      if (!std::isfinite(rows[i][n]))
        throw Error(ErrorKind::InvalidData, "non-finite value at row " + std::to_string(i) + ", column " +
                                                std::to_string(n));
      values(i, n) = rows[i][n];
    }
  }
  return Trajectory(g, std::move(values));
}

inline void save_csv(const Trajectory& traj, std::ostream& os) {
  const Grid& g = traj.grid();
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "# nx=" << g.n_x << "\n# nt=" << g.n_t << "\n# dx=" << num(g.dx) << "\n# dt=" << num(g.dt)
     << "\n# x0=" << num(g.x0) << "\n# t0=" << num(g.t0) << "\n";
  for (int i = 0; i < g.n_x; ++i) {
    for (int n = 0; n < g.n_t; ++n) {
      if (n) os << ',';
      os << num(traj(i, n));
    }
    os << '\n';
  }
}

inline Trajectory load_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kBinaryMagic)
    throw Error(ErrorKind::Parse, "not a FIDT binary trajectory (bad magic)");
  const auto version = read_pod<std::uint32_t>(is, "version");
  if (version != kBinaryVersion)
    throw Error(ErrorKind::Parse, "unsupported binary trajectory version " + std::to_string(version));
  Grid g;
  g.n_x = static_cast<int>(read_pod<std::uint32_t>(is, "nx"));
  g.n_t = static_cast<int>(read_pod<std::uint32_t>(is, "nt"));
  g.dx = read_pod<double>(is, "dx");
  g.dt = read_pod<double>(is, "dt");
  g.x0 = read_pod<double>(is, "x0");
  g.t0 = read_pod<double>(is, "t0");
  g.validate();
  Eigen::MatrixXd values(g.n_x, g.n_t);
  std::vector<double> payload(static_cast<std::size_t>(g.n_x) * g.n_t);
  if (!is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * 8)))
    throw Error(ErrorKind::ShapeMismatch, "binary payload shorter than nx*nt values");
  if (is.peek() != std::char_traits<char>::eof())
    throw Error(ErrorKind::ShapeMismatch, "binary payload longer than nx*nt values");
  for (int i = 0; i < g.n_x; ++i)
    for (int n = 0; n < g.n_t; ++n) {
      const double v = payload[static_cast<std::size_t>(i) * g.n_t + n];
      if (!std::isfinite(v))
        throw Error(ErrorKind::InvalidData, "non-finite value at row " + std::to_string(i) + ", column " +
                                                std::to_string(n));
      values(i, n) = v;
    }
  return Trajectory(g, std::move(values));
}

inline void save_binary(const Trajectory& traj, std::ostream& os) {
  const Grid& g = traj.grid();
  os.write(kBinaryMagic.data(), 4);
  write_pod(os, kBinaryVersion);
  write_pod(os, static_cast<std::uint32_t>(g.n_x));
  write_pod(os, static_cast<std::uint32_t>(g.n_t));
  write_pod(os, g.dx);
  write_pod(os, g.dt);
  write_pod(os, g.x0);
  write_pod(os, g.t0);
  for (int i = 0; i < g.n_x; ++i)
    for (int n = 0; n < g.n_t; ++n) write_pod(os, traj(i, n));
}

}  // namespace detail

inline Trajectory load_trajectory(std::istream& is, TrajectoryFormat format) {
  return format == TrajectoryFormat::Binary ? detail::load_binary(is) : detail::load_csv(is);
}

inline Trajectory load_trajectory(const std::filesystem::path& path, TrajectoryFormat format) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Parse, "cannot open '" + path.string() + "'");
  return load_trajectory(is, format);
}

inline Trajectory load_trajectory(const std::filesystem::path& path) {
  return load_trajectory(path, format_from_path(path));
}

inline void save_trajectory(const Trajectory& traj, std::ostream& os, TrajectoryFormat format) {
  if (format == TrajectoryFormat::Binary)
    detail::save_binary(traj, os);
  else
    detail::save_csv(traj, os);
}

inline void save_trajectory(const Trajectory& traj, const std::filesystem::path& path, TrajectoryFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Parse, "cannot write '" + path.string() + "'");
  save_trajectory(traj, os, format);
}

inline void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  save_trajectory(traj, path, format_from_path(path));
}

}  // namespace fident
