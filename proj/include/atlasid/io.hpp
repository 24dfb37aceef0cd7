#pragma once

// File formats.
//
// Raw path dump (binary, little-endian), 64-byte header:
//   offset  size  field
//        0     8  magic "ATLASTOP"
//        8     4  u32 version (1)
//       12     4  u32 flags (bit 0: mean series follows the top series)
//       16     8  u64 n (depth)
//       24     8  f64 dt
//       32     8  u64 steps (number of recorded values per series)
//       40     8  u64 seed (per-path seed)
//       48     8  f64 sigma2
//       56     8  u64 burn_in
// followed by `steps` f64 values of X(1), then `steps` f64 values of Xbar
// when flag bit 0 is set.
//
// CSV files start with '#' comment lines of the form "# key=value" carrying
// parameters and provenance, then a header row and data rows.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "atlasid/config.hpp"
#include "atlasid/engine.hpp"
#include "atlasid/error.hpp"
#include "atlasid/ident.hpp"
#include "atlasid/stats.hpp"

namespace atlasid::io {

inline constexpr std::array<char, 8> kPathMagic = {'A', 'T', 'L', 'A',
                                                   'S', 'T', 'O', 'P'};
inline constexpr std::uint32_t kPathVersion = 1;
inline constexpr std::size_t kPathHeaderBytes = 64;

struct PathHeader {
  std::uint32_t version = kPathVersion;
  bool has_mean = false;
  std::uint64_t n = 1;
  double dt = 1.0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  double sigma2 = 1.0;
  std::uint64_t burn_in = 0;
};

namespace detail {
inline void put_u64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
inline void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}
inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
  return v;
}

inline void write_f64_block(std::ostream& out, std::span<const double> xs) {
  std::vector<unsigned char> buf(xs.size() * 8);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    put_u64(buf.data() + 8 * i, std::bit_cast<std::uint64_t>(xs[i]));
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

inline std::vector<double> read_f64_block(std::istream& in, std::uint64_t count) {
  std::vector<unsigned char> buf(count * 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != buf.size()) {
    throw Error(Errc::parse, "path dump truncated");
  }
  std::vector<double> xs(count);
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = std::bit_cast<double>(get_u64(buf.data() + 8 * i));
  }
  return xs;
}

inline std::ofstream open_out(const std::filesystem::path& path,
                              std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path,
                             std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  return in;
}

inline void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(Errc::io, "write to '" + path.string() + "' failed");
}
}  // namespace detail

inline std::array<unsigned char, kPathHeaderBytes> encode_header(const PathHeader& h) {
  std::array<unsigned char, kPathHeaderBytes> b{};
  std::memcpy(b.data(), kPathMagic.data(), 8);
  detail::put_u32(b.data() + 8, h.version);
  detail::put_u32(b.data() + 12, h.has_mean ? 1u : 0u);
  detail::put_u64(b.data() + 16, h.n);
  detail::put_u64(b.data() + 24, std::bit_cast<std::uint64_t>(h.dt));
  detail::put_u64(b.data() + 32, h.steps);
  detail::put_u64(b.data() + 40, h.seed);
  detail::put_u64(b.data() + 48, std::bit_cast<std::uint64_t>(h.sigma2));
  detail::put_u64(b.data() + 56, h.burn_in);
  return b;
}

inline PathHeader decode_header(std::span<const unsigned char, kPathHeaderBytes> b) {
  if (std::memcmp(b.data(), kPathMagic.data(), 8) != 0) {
    throw Error(Errc::parse, "not an Atlas path dump (bad magic)");
  }
  PathHeader h;
  h.version = detail::get_u32(b.data() + 8);
  if (h.version != kPathVersion) {
    throw Error(Errc::parse, "unsupported path dump version " + std::to_string(h.version));
  }
  h.has_mean = (detail::get_u32(b.data() + 12) & 1u) != 0;
  h.n = detail::get_u64(b.data() + 16);
  h.dt = std::bit_cast<double>(detail::get_u64(b.data() + 24));
  h.steps = detail::get_u64(b.data() + 32);
  h.seed = detail::get_u64(b.data() + 40);
  h.sigma2 = std::bit_cast<double>(detail::get_u64(b.data() + 48));
  h.burn_in = detail::get_u64(b.data() + 56);
  return h;
}

inline void write_path_binary(const std::filesystem::path& path, const TopSeries& s,
                              std::uint64_t burn_in) {
  auto out = detail::open_out(path, std::ios::binary);
  PathHeader h;
  h.has_mean = s.mean_values.has_value();
  h.n = s.params.n();
  h.dt = s.dt;
  h.steps = s.values.size();
  h.seed = s.seed;
  h.sigma2 = s.params.sigma2();
  h.burn_in = burn_in;
  const auto hdr = encode_header(h);
  out.write(reinterpret_cast<const char*>(hdr.data()), hdr.size());
  detail::write_f64_block(out, s.values);
  if (s.mean_values) detail::write_f64_block(out, *s.mean_values);
  detail::check_written(out, path);
}

struct LoadedPath {
  TopSeries series;
  std::uint64_t burn_in = 0;
  bool params_known = false;  // binary dumps carry only n and sigma2
};

inline LoadedPath read_path_binary(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::binary);
  std::array<unsigned char, kPathHeaderBytes> hdr{};
  in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (in.gcount() != static_cast<std::streamsize>(hdr.size())) {
    throw Error(Errc::parse, "path dump header truncated");
  }
  const PathHeader h = decode_header(hdr);
  LoadedPath lp;
  lp.burn_in = h.burn_in;
  lp.series.dt = h.dt;
  lp.series.seed = h.seed;
  lp.series.values = detail::read_f64_block(in, h.steps);
  if (h.has_mean) lp.series.mean_values = detail::read_f64_block(in, h.steps);
  // Depth and variance are known; the drift vector is not stored.
  if (h.n >= 1 && h.sigma2 > 0.0) {
    lp.series.params = h.n == 1 ? make_atlas_params({0.0}, h.sigma2)
                                : make_simple({static_cast<std::size_t>(h.n), 1.0, h.sigma2});
  }
  return lp;
}

/// Comment block shared by all CSV outputs.
using CommentMap = std::vector<std::pair<std::string, std::string>>;

inline void write_comments(std::ostream& out, const CommentMap& comments) {
  for (const auto& [k, v] : comments) out << "# " << k << '=' << v << '\n';
}

struct CsvTable {
  std::map<std::string, std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(Errc::parse, "missing CSV column '" + name + "'");
  }
  const std::string* comment(const std::string& key) const {
    auto it = comments.find(key);
    return it == comments.end() ? nullptr : &it->second;
  }
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(',', pos);
    if (next == std::string_view::npos) {
      cells.emplace_back(trim(line.substr(pos)));
      break;
    }
    cells.emplace_back(trim(line.substr(pos, next - pos)));
    pos = next + 1;
  }
  return cells;
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      sv = trim(sv.substr(1));
      if (auto eq = sv.find('='); eq != std::string_view::npos) {
        t.comments[std::string(trim(sv.substr(0, eq)))] = std::string(trim(sv.substr(eq + 1)));
      }
      continue;
    }
    auto cells = split_csv_line(sv);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) {
        throw Error(Errc::parse, "CSV row has " + std::to_string(cells.size()) +
                                     " cells, header has " + std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw Error(Errc::parse, "CSV has no header row");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_csv(in);
}

inline void write_path_csv(std::ostream& out, const TopSeries& s, std::uint64_t burn_in) {
  CommentMap c = params_to_kv(s.params);
  c.emplace_back("dt", format_double(s.dt));
  c.emplace_back("seed", std::to_string(s.seed));
  c.emplace_back("burn_in", std::to_string(burn_in));
  c.emplace_back("steps", std::to_string(s.values.size()));
  write_comments(out, c);
  out << (s.mean_values ? "step,t,x_top,x_mean\n" : "step,t,x_top\n");
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    const double t = static_cast<double>(burn_in + k + 1) * s.dt;
    out << k << ',' << format_double(t) << ',' << format_double(s.values[k]);
    if (s.mean_values) out << ',' << format_double((*s.mean_values)[k]);
    out << '\n';
  }
}

inline void write_path_csv(const std::filesystem::path& path, const TopSeries& s,
                           std::uint64_t burn_in) {
  auto out = detail::open_out(path);
  write_path_csv(out, s, burn_in);
  detail::check_written(out, path);
}

inline LoadedPath read_path_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  LoadedPath lp;
  KeyValueConfig kv;
  for (const auto& [k, v] : t.comments) kv.set(k, v);
  lp.series.params = params_from_config(kv);
  lp.params_known = true;
  if (auto* dt = t.comment("dt")) lp.series.dt = parse_double("dt", *dt);
  if (auto* seed = t.comment("seed")) lp.series.seed = parse_count("seed", *seed);
  if (auto* b = t.comment("burn_in")) lp.burn_in = parse_count("burn_in", *b);
  const std::size_t top = t.column("x_top");
  std::optional<std::size_t> mean;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == "x_mean") mean = i;
  }
  if (mean) lp.series.mean_values.emplace();
  for (const auto& row : t.rows) {
    lp.series.values.push_back(parse_double("x_top", row[top]));
    if (mean) lp.series.mean_values->push_back(parse_double("x_mean", row[*mean]));
  }
  return lp;
}

/// Reads either format, detected from the magic bytes.
inline LoadedPath read_path(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::binary);
  char magic[8] = {};
  in.read(magic, 8);
  if (in.gcount() == 8 && std::memcmp(magic, kPathMagic.data(), 8) == 0) {
    return read_path_binary(path);
  }
  return read_path_csv(path);
}

inline std::string optional_cell(const std::vector<double>& xs, std::size_t i) {
  return xs.empty() ? std::string() : format_double(xs[i]);
}

/// One row per lag: lag_steps, lag_time, variogram, rel_variogram,
/// stderr_variogram, stderr_rel. Standard-error cells are empty when the
/// variogram comes from a single path. Relative cells are empty when the
/// anchor is zero (constant input).
inline void write_variogram_csv(std::ostream& out, const Variogram& v,
                                const CommentMap& extra = {}) {
  const bool anchored = v.v0 > 0.0;
  const Variogram rel = anchored ? relative_variogram(v) : Variogram{};
  CommentMap c;
  if (!v.meta.params.empty()) c.emplace_back("params", v.meta.params);
  c.emplace_back("dt", format_double(v.dt));
  c.emplace_back("v0", format_double(v.v0));
  c.emplace_back("paths", std::to_string(v.meta.paths));
  c.emplace_back("steps", std::to_string(v.meta.steps));
  c.emplace_back("burn_in", std::to_string(v.meta.burn_in));
  c.emplace_back("seed", std::to_string(v.meta.seed));
  for (const auto& kv : extra) c.push_back(kv);
  write_comments(out, c);
  out << "lag_steps,lag_time,variogram,rel_variogram,stderr_variogram,stderr_rel\n";
  for (std::size_t i = 0; i < v.lags.size(); ++i) {
    out << v.lags[i] << ',' << format_double(v.lag_time(i)) << ','
        << format_double(v.values[i]) << ',' << optional_cell(rel.values, i) << ','
        << optional_cell(v.std_errors, i) << ',' << optional_cell(rel.std_errors, i)
        << '\n';
  }
}

inline void write_variogram_csv(const std::filesystem::path& path, const Variogram& v,
                                const CommentMap& extra = {}) {
  auto out = detail::open_out(path);
  write_variogram_csv(out, v, extra);
  detail::check_written(out, path);
}

inline Variogram read_variogram_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  Variogram v;
  const std::size_t c_lag = t.column("lag_steps");
  const std::size_t c_val = t.column("variogram");
  const std::size_t c_se = t.column("stderr_variogram");
  if (t.rows.empty()) throw Error(Errc::parse, "variogram CSV has no rows");
  if (auto* dt = t.comment("dt")) {
    v.dt = parse_double("dt", *dt);
  } else {
    const std::size_t c_t = t.column("lag_time");
    v.dt = parse_double("lag_time", t.rows[0][c_t]) /
           static_cast<double>(parse_count("lag_steps", t.rows[0][c_lag]));
  }
  bool have_se = true;
  for (const auto& row : t.rows) {
    v.lags.push_back(parse_count("lag_steps", row[c_lag]));
    v.values.push_back(parse_double("variogram", row[c_val]));
    if (row[c_se].empty()) {
      have_se = false;
    } else {
      v.std_errors.push_back(parse_double("stderr_variogram", row[c_se]));
    }
  }
  if (!have_se) v.std_errors.clear();
  validate_lags(v.lags);
  if (auto* v0 = t.comment("v0")) {
    v.v0 = parse_double("v0", *v0);
  } else {
    v.v0 = small_lag_anchor(v.values, v.lags, v.dt);
  }
  if (auto* p = t.comment("params")) v.meta.params = *p;
  if (auto* p = t.comment("paths")) v.meta.paths = parse_count("paths", *p);
  if (auto* p = t.comment("steps")) v.meta.steps = parse_count("steps", *p);
  if (auto* p = t.comment("burn_in")) v.meta.burn_in = parse_count("burn_in", *p);
  if (auto* p = t.comment("seed")) v.meta.seed = parse_count("seed", *p);
  return v;
}

inline Variogram read_variogram_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_variogram_csv(in);
}

inline CommentMap curve_provenance(const CanonicalCurve& c) {
  const CurveQuality& q = c.provenance;
  return {{"depth", std::to_string(c.n)},
          {"paths", std::to_string(q.paths)},
          {"steps", std::to_string(q.steps)},
          {"dt", format_double(q.dt)},
          {"burn_in", std::to_string(q.burn_in)},
          {"seed", std::to_string(q.seed)}};
}

inline void write_curve_csv(std::ostream& out, const CanonicalCurve& c) {
  write_comments(out, curve_provenance(c));
  out << "lag_time,log_lag,rel_variogram,stderr_rel\n";
  for (std::size_t i = 0; i < c.log_lags.size(); ++i) {
    out << format_double(std::exp(c.log_lags[i])) << ',' << format_double(c.log_lags[i])
        << ',' << format_double(c.rel_values[i]) << ','
        << optional_cell(c.rel_std_errors, i) << '\n';
  }
}

inline void write_curve_csv(const std::filesystem::path& path, const CanonicalCurve& c) {
  auto out = detail::open_out(path);
  write_curve_csv(out, c);
  detail::check_written(out, path);
}

inline CanonicalCurve read_curve_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  CanonicalCurve c;
  auto need = [&](const char* key) -> const std::string& {
    const std::string* v = t.comment(key);
    if (!v) throw Error(Errc::parse, std::string("curve CSV lacks '") + key + "' comment");
    return *v;
  };
  c.n = parse_count("depth", need("depth"));
  c.provenance.paths = parse_count("paths", need("paths"));
  c.provenance.steps = parse_count("steps", need("steps"));
  c.provenance.dt = parse_double("dt", need("dt"));
  c.provenance.burn_in = parse_count("burn_in", need("burn_in"));
  c.provenance.seed = parse_count("seed", need("seed"));
  const std::size_t c_log = t.column("log_lag");
  const std::size_t c_rel = t.column("rel_variogram");
  const std::size_t c_se = t.column("stderr_rel");
  bool have_se = true;
  for (const auto& row : t.rows) {
    c.log_lags.push_back(parse_double("log_lag", row[c_log]));
    c.rel_values.push_back(parse_double("rel_variogram", row[c_rel]));
    if (row[c_se].empty()) {
      have_se = false;
    } else {
      c.rel_std_errors.push_back(parse_double("stderr_rel", row[c_se]));
    }
  }
  if (!have_se) c.rel_std_errors.clear();
  if (c.log_lags.size() < 2) throw Error(Errc::parse, "curve CSV has fewer than 2 rows");
  return c;
}

inline CanonicalCurve read_curve_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_curve_csv(in);
}

inline std::filesystem::path curve_file(const std::filesystem::path& dir, std::size_t n) {
  return dir / ("canonical_n" + std::to_string(n) + ".csv");
}

/// Curve cache persisted under `dir`: a stored curve is reused only when its
/// provenance matches the requested quality.
inline CurveCache directory_curve_cache(const std::filesystem::path& dir,
                                        const CurveQuality& q) {
  auto loader = [dir](std::size_t n, const CurveQuality& want)
      -> std::shared_ptr<const CanonicalCurve> {
    const auto file = curve_file(dir, n);
    if (!std::filesystem::exists(file)) return nullptr;
    auto c = read_curve_csv(file);
    if (c.n != n || !(c.provenance == want)) return nullptr;
    return std::make_shared<const CanonicalCurve>(std::move(c));
  };
  auto saver = [dir](const CanonicalCurve& c) {
    std::filesystem::create_directories(dir);
    write_curve_csv(curve_file(dir, c.n), c);
  };
  return CurveCache(q, loader, saver);
}

inline std::vector<std::pair<std::string, std::string>> report_kv(
    const IdentificationResult& r) {
  return {{"n_hat", std::to_string(r.n_hat)},
          {"sigma2_hat", format_double(r.sigma2_hat)},
          {"g_hat", format_double(r.g_hat)},
          {"a_hat", format_double(r.a_hat)},
          {"fit_rmse", format_double(r.fit_rmse)},
          {"plateau_ok", r.plateau_ok ? "true" : "false"},
          {"asymptote", format_double(r.asymptote)}};
}

inline std::string format_report(const IdentificationResult& r) {
  std::string out;
  for (const auto& [k, v] : report_kv(r)) out += k + '=' + v + '\n';
  return out;
}

inline std::string report_csv_header() {
  return "source,n_hat,sigma2_hat,g_hat,a_hat,fit_rmse,plateau_ok,asymptote";
}

inline std::string report_csv_row(const std::string& source,
                                  const IdentificationResult& r) {
  std::string out = source;
  for (const auto& [k, v] : report_kv(r)) out += ',' + v;
  return out;
}

}  // namespace atlasid::io
