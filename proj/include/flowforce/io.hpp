#pragma once
//------------------------------------------------------------------------------
// On-disk containers.
//
// A container is a directory holding manifest.json ("format": 1, a "kind",
// scalar metadata) and one wide CSV block per grid: one row per horizontal
// node, first the abscissa, then the values at every vertical level. Grid
// values are written in shortest round-trip form; summary tables use 15
// significant digits. Every file is written to a temporary name and renamed.
//------------------------------------------------------------------------------

#include <flowforce/dj_solver.hpp>
#include <flowforce/errors.hpp>
#include <flowforce/flow_force.hpp>
#include <flowforce/format.hpp>
#include <flowforce/hodograph.hpp>
#include <flowforce/theorem_checks.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace flowforce {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr int container_format = 1;

inline void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Wide block: header "<name>,v_0,...,v_{n-1}", rows "abscissa,values...".
inline std::string grid_block(const Grid2& g, const std::vector<double>& abscissa, const char* name,
                              const std::vector<double>* extra = nullptr, const char* extra_name = nullptr) {
  std::string s = name;
  if (extra) s += std::string(",") + extra_name;
  for (std::size_t j = 0; j < g.nz(); ++j) s += ",v_" + std::to_string(j);
  s += '\n';
  for (std::size_t i = 0; i < g.nx(); ++i) {
    s += format_exact(abscissa[i]);
    if (extra) s += "," + format_exact((*extra)[i]);
    for (std::size_t j = 0; j < g.nz(); ++j) s += "," + format_exact(g(i, j));
    s += '\n';
  }
  return s;
}

struct ParsedBlock {
  std::vector<double> abscissa;
  std::vector<double> extra;
  Grid2 values;
};

inline ParsedBlock parse_grid_block(const std::string& text, const std::string& file, std::size_t rows,
                                    std::size_t levels, bool has_extra) {
  ParsedBlock out;
  out.values = Grid2(rows, levels);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw SchemaError(file + ": empty block");
  ++lineno;
  const std::size_t expected = levels + 1 + (has_extra ? 1 : 0);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (row >= rows) throw SchemaError(file + " line " + std::to_string(lineno) + ": more rows than declared");
    std::vector<double> vals;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      double v = 0.0;
      if (!parse_number(cell, v))
        throw SchemaError(file + " line " + std::to_string(lineno) + ", field " + std::to_string(vals.size() + 1) +
                          ": not a number");
      vals.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (vals.size() != expected)
      throw SchemaError(file + " line " + std::to_string(lineno) + ": expected " + std::to_string(expected) +
                        " fields, found " + std::to_string(vals.size()));
    out.abscissa.push_back(vals[0]);
    if (has_extra) out.extra.push_back(vals[1]);
    const std::size_t off = has_extra ? 2 : 1;
    for (std::size_t j = 0; j < levels; ++j) out.values(row, j) = vals[off + j];
    ++row;
  }
  if (row != rows)
    throw SchemaError(file + ": expected " + std::to_string(rows) + " rows, found " + std::to_string(row));
  return out;
}

namespace detail {

template <class T>
T field(const json& m, const char* key, const std::string& file) {
  if (!m.contains(key)) throw SchemaError(file + ": missing field '" + key + "'");
  try {
    return m.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(file + ": field '" + std::string(key) + "' has the wrong type");
  }
}

inline double optional_number(const json& m, const char* key) {
  if (!m.contains(key) || m.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return m.at(key).get<double>();
}

inline json read_manifest(const fs::path& dir) {
  const fs::path mp = dir / "manifest.json";
  json m;
  try {
    m = json::parse(read_file(mp));
  } catch (const json::parse_error& e) {
    throw SchemaError(mp.string() + ": " + e.what());
  }
  if (field<int>(m, "format", mp.string()) != container_format)
    throw SchemaError(mp.string() + ": unsupported format version");
  return m;
}

}  // namespace detail

// Height field with the solver scalars that travel with it.
struct StoredHeightField {
  HeightField h;
  double residual = 0.0;
  double amplitude = 0.0;
  double flow_force = std::numeric_limits<double>::quiet_NaN();
};

inline void write_height_container(const fs::path& dir, const StoredHeightField& s) {
  const HeightField& h = s.h;
  std::vector<double> q(h.nq());
  for (std::size_t i = 0; i < h.nq(); ++i) q[i] = h.q(i);
  json m;
  m["format"] = container_format;
  m["kind"] = "height_field";
  m["problem"] = to_string(h.tag);
  m["head"] = h.head;
  m["period"] = h.period;
  m["nq"] = h.nq();
  m["np"] = h.np();
  m["residual"] = s.residual;
  m["amplitude"] = s.amplitude;
  m["flow_force"] = number_or_null(s.flow_force);
  m["blocks"] = {{"h", "h.csv"}};
  write_file_atomic(dir / "h.csv", grid_block(h.h, q, "q"));
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

inline StoredHeightField stored(const WaveSolution& s) {
  return StoredHeightField{s.h, s.residual_norm, s.amplitude, s.flow_force};
}

inline StoredHeightField read_height_container(const fs::path& dir) {
  const json m = detail::read_manifest(dir);
  const std::string mf = (dir / "manifest.json").string();
  if (detail::field<std::string>(m, "kind", mf) != "height_field")
    throw SchemaError(mf + ": kind is not height_field");
  StoredHeightField s;
  s.h.tag = problem_tag_from_string(detail::field<std::string>(m, "problem", mf));
  s.h.head = detail::field<double>(m, "head", mf);
  s.h.period = detail::field<double>(m, "period", mf);
  const auto nq = detail::field<std::size_t>(m, "nq", mf);
  const auto np = detail::field<std::size_t>(m, "np", mf);
  if (nq < 4 || np < 4) throw SchemaError(mf + ": grid too small");
  if (!(s.h.period > 0.0)) throw SchemaError(mf + ": field 'period' must be positive");
  s.residual = detail::field<double>(m, "residual", mf);
  s.amplitude = detail::field<double>(m, "amplitude", mf);
  s.flow_force = detail::optional_number(m, "flow_force");
  const fs::path block = dir / "h.csv";
  s.h.h = parse_grid_block(read_file(block), block.string(), nq, np + 1, false).values;
  return s;
}

inline void write_wave_container(const fs::path& dir, const WaveField& w) {
  std::vector<double> x(w.psi.nx());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = w.psi.x(i);
  json m;
  m["format"] = container_format;
  m["kind"] = "wave_field";
  m["bernoulli"] = w.bernoulli;
  m["period"] = w.psi.period;
  m["nx"] = w.psi.nx();
  m["nz"] = w.psi.nz();
  m["tolerance"] = w.tolerance;
  m["blocks"] = {{"psi", "psi.csv"}};
  write_file_atomic(dir / "psi.csv", grid_block(w.psi.values, x, "x", &w.psi.surface, "eta"));
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

inline WaveField read_wave_container(const fs::path& dir) {
  const json m = detail::read_manifest(dir);
  const std::string mf = (dir / "manifest.json").string();
  if (detail::field<std::string>(m, "kind", mf) != "wave_field") throw SchemaError(mf + ": kind is not wave_field");
  WaveField w;
  w.bernoulli = detail::field<double>(m, "bernoulli", mf);
  w.psi.period = detail::field<double>(m, "period", mf);
  w.tolerance = detail::field<double>(m, "tolerance", mf);
  const auto nx = detail::field<std::size_t>(m, "nx", mf);
  const auto nz = detail::field<std::size_t>(m, "nz", mf);
  if (nx < 4 || nz < 5) throw SchemaError(mf + ": grid too small");
  const fs::path block = dir / "psi.csv";
  ParsedBlock b = parse_grid_block(read_file(block), block.string(), nx, nz, true);
  w.psi.surface = std::move(b.extra);
  w.psi.values = std::move(b.values);
  return w;
}

inline std::string container_kind(const fs::path& dir) {
  const json m = detail::read_manifest(dir);
  return detail::field<std::string>(m, "kind", (dir / "manifest.json").string());
}

inline std::vector<InputProvenance> container_provenance(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() != ".tmp") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<InputProvenance> out;
  for (const fs::path& f : files) out.push_back({f.filename().string(), sha256_hex(read_file(f))});
  return out;
}

inline json branch_summary(const Branch& br) {
  json b;
  b["format"] = container_format;
  b["kind"] = "branch";
  b["problem"] = to_string(br.tag);
  b["depth"] = br.depth;
  b["wavenumber"] = br.wavenumber;
  b["period"] = br.period;
  b["bifurcation_depth"] = br.bifurcation_depth;
  b["bifurcation_head"] = br.bifurcation_head;
  b["truncated"] = br.truncated;
  b["near_stagnation"] = br.near_stagnation;
  b["diagnostic"] = br.diagnostic;
  json pts = json::array();
  for (std::size_t n = 0; n < br.points.size(); ++n) {
    const WaveSolution& s = br.points[n];
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", n);
    json p;
    p["index"] = n;
    p["container"] = name;
    p["amplitude"] = s.amplitude;
    p["head"] = s.head;
    p["flow_force"] = number_or_null(s.flow_force);
    p["min_hp"] = s.min_hp;
    p["residual"] = s.residual_norm;
    p["arclength"] = n < br.arclength.size() ? br.arclength[n] : 0.0;
    p["iterations"] = s.diagnostics.iterations;
    pts.push_back(std::move(p));
  }
  b["points"] = std::move(pts);
  return b;
}

inline void write_branch(const fs::path& dir, const Branch& br) {
  for (std::size_t n = 0; n < br.points.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", n);
    write_height_container(dir / name, stored(br.points[n]));
  }
  write_file_atomic(dir / "branch.json", branch_summary(br).dump(2) + "\n");
}

inline json report_json(const CheckReport& rep) {
  json r;
  r["format"] = container_format;
  r["verdict"] = rep.pass() ? "pass" : "fail";
  r["grid"] = {{"nq", rep.nq}, {"np", rep.np}};
  json inputs = json::array();
  for (const InputProvenance& p : rep.inputs) inputs.push_back({{"file", p.path}, {"sha256", p.sha256}});
  r["inputs"] = std::move(inputs);
  json entries = json::array();
  for (const CheckEntry& e : rep.entries) {
    json j;
    j["name"] = e.name;
    j["status"] = to_string(e.status);
    j["value"] = number_or_null(e.value);
    j["threshold"] = number_or_null(e.threshold);
    j["reference"] = e.reference;
    j["note"] = e.note;
    entries.push_back(std::move(j));
  }
  r["checks"] = std::move(entries);
  return r;
}

inline std::string report_table(const CheckReport& rep) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-7s %-22s %-22s\n", "check", "status", "value", "threshold");
  s += line;
  for (const CheckEntry& e : rep.entries) {
    std::snprintf(line, sizeof line, "%-22s %-7s %-22s %-22s %s\n", e.name.c_str(), to_string(e.status),
                  format_number(e.value).c_str(), format_number(e.threshold).c_str(), e.note.c_str());
    s += line;
  }
  s += std::string("verdict: ") + (rep.pass() ? "pass" : "fail") + "\n";
  return s;
}

}  // namespace flowforce
