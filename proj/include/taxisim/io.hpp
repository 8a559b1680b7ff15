// Persistence: the diagnostics CSV, flat binary field snapshots with a text
// header, and the snapshot manifest.
#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxisim/diagnostics.hpp"
#include "taxisim/grid.hpp"

namespace taxisim {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const char* diagnostics_csv_header() {
  return "t,mass_u,mass_v,sup_u,sup_v,sup_w,grad_w_sq,lap_w_sq,dirichlet_u,"
         "entropy_u,energy_F,combined_y,v_beta,v_sq,gradroot_r,dt_used";
}

inline void write_diagnostics_csv(const std::string& path,
                                  const DiagnosticsSeries& series) {
  std::ofstream out(path, std::ios::binary);  // binary: newline determinism
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << diagnostics_csv_header() << "\n";
  char buf[512];
  for (const auto& r : series) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.t, r.mass_u, r.mass_v, r.sup_u, r.sup_v, r.sup_w,
                  r.grad_w_sq, r.lap_w_sq, r.dirichlet_u, r.entropy_u,
                  r.energy_F, r.combined_y, r.v_beta, r.v_sq, r.gradroot_r,
                  r.dt_used);
    out << buf;
  }
}

// Reads the series back; u_sq is not a CSV column and comes back as 0.
inline DiagnosticsSeries read_diagnostics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty diagnostics file " + path);
  if (line != diagnostics_csv_header())
    throw IoError(path + ": unexpected diagnostics header");
  DiagnosticsSeries series;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    DiagnosticsRecord r;
    double* slots[] = {&r.t,         &r.mass_u,     &r.mass_v,   &r.sup_u,
                       &r.sup_v,     &r.sup_w,      &r.grad_w_sq, &r.lap_w_sq,
                       &r.dirichlet_u, &r.entropy_u, &r.energy_F, &r.combined_y,
                       &r.v_beta,    &r.v_sq,       &r.gradroot_r, &r.dt_used};
    std::stringstream ss(line);
    std::string cell;
    for (double* slot : slots) {
      if (!std::getline(ss, cell, ','))
        throw IoError(path + ":" + std::to_string(lineno) + ": short row");
      *slot = std::stod(cell);
    }
    series.push_back(r);
  }
  return series;
}

namespace detail {

inline std::uint64_t to_le_bits(double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | ((bits >> (8 * i)) & 0xff);
    bits = s;
  }
  return bits;
}

inline double from_le_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | ((bits >> (8 * i)) & 0xff);
    bits = s;
  }
  return std::bit_cast<double>(bits);
}

}  // namespace detail

// Snapshot format: one text header line "field nx ny t", then nx*ny
// little-endian 64-bit floats, row-major.
inline void write_snapshot(const std::string& path, const std::string& field,
                           const ScalarField& f, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char head[128];
  std::snprintf(head, sizeof head, "%s %d %d %.17g\n", field.c_str(),
                f.grid.nx, f.grid.ny, t);
  out << head;
  std::vector<std::uint64_t> bits(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i)
    bits[i] = detail::to_le_bits(f.values[i]);
  out.write(reinterpret_cast<const char*>(bits.data()),
            static_cast<std::streamsize>(bits.size() * sizeof(std::uint64_t)));
}

struct Snapshot {
  std::string field;
  ScalarField data;
  double t = 0.0;
};

inline Snapshot read_snapshot(const std::string& path, const GridSpec& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string head;
  if (!std::getline(in, head)) throw IoError(path + ": missing header");
  Snapshot snap;
  int nx = 0, ny = 0;
  {
    std::istringstream hs(head);
    if (!(hs >> snap.field >> nx >> ny >> snap.t))
      throw IoError(path + ": malformed snapshot header '" + head + "'");
  }
  if (nx != grid.nx || ny != grid.ny)
    throw IoError(path + ": snapshot shape does not match grid");
  snap.data = ScalarField(grid);
  std::vector<std::uint64_t> bits(snap.data.values.size());
  in.read(reinterpret_cast<char*>(bits.data()),
          static_cast<std::streamsize>(bits.size() * sizeof(std::uint64_t)));
  if (in.gcount() !=
      static_cast<std::streamsize>(bits.size() * sizeof(std::uint64_t)))
    throw IoError(path + ": truncated snapshot payload");
  for (std::size_t i = 0; i < bits.size(); ++i)
    snap.data.values[i] = detail::from_le_bits(bits[i]);
  return snap;
}

struct ManifestEntry {
  std::string file;
  std::string field;
  double t = 0.0;
  int step = 0;
};

inline void write_manifest(const std::string& path,
                           const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "file field t step\n";
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%s %s %.17g %d\n", e.file.c_str(),
                  e.field.c_str(), e.t, e.step);
    out << buf;
  }
}

inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "file field t step")
    throw IoError(path + ": unexpected manifest header");
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.file >> e.field >> e.t >> e.step))
      throw IoError(path + ": malformed manifest row '" + line + "'");
    entries.push_back(e);
  }
  return entries;
}

}  // namespace taxisim
