// atlasid: simulate Atlas models, estimate top-rank variograms, identify
// simple Atlas models and reproduce the two-parameter-set variogram figure.
//
// Exit codes: 0 success, 2 config/usage, 3 I/O, 4 numerical failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "atlasid/atlasid.hpp"

namespace {

using namespace atlasid;
namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::io: return kExitIo;
    case Errc::non_finite:
    case Errc::no_bracket:
    case Errc::too_few_lags: return kExitNumeric;
    default: return kExitUsage;
  }
}

/// Config error that already names the offending key.
Error key_error(const std::string& key, const std::string& what) {
  return Error(Errc::parse, "config key '" + key + "': " + what);
}

const std::set<std::string> kModelKeys = {"depth", "g", "simple_g", "sigma2"};

/// One command's settings: built-in defaults, then config-file keys, then
/// command-line flags. Only declared keys are accepted.
class Settings {
 public:
  Settings(std::string command, std::map<std::string, std::string> defaults,
           bool accepts_model)
      : command_(std::move(command)), defaults_(std::move(defaults)),
        accepts_model_(accepts_model) {}

  void add_flags(CLI::App& app) {
    app.add_option("--config", config_file_, "key=value config file");
    for (const auto& [key, value] : defaults_) add_flag(app, key);
    if (accepts_model_) {
      for (const auto& key : kModelKeys) add_flag(app, key);
    }
  }

  void resolve() {
    KeyValueConfig merged;
    for (const auto& [k, v] : defaults_) merged.set(k, v);
    KeyValueConfig model;
    if (config_file_) {
      std::ifstream in(*config_file_);
      if (!in) throw Error(Errc::io, "cannot open config file '" + *config_file_ + "'");
      const auto file = KeyValueConfig::parse(in);
      for (const auto& [k, v] : file.entries()) {
        if (accepts_model_ && kModelKeys.count(k)) {
          model.set(k, v);
        } else if (defaults_.count(k)) {
          merged.set(k, v);
        } else if (k != "out") {
          throw key_error(k, "unknown key for '" + command_ + "'");
        }
      }
    }
    for (const auto& [k, v] : flag_values_) {
      if (!v) continue;
      if (accepts_model_ && kModelKeys.count(k)) {
        // Flags describing the drift replace any drift given in the file.
        if (k == "g") model = KeyValueConfig{};
        if (k == "simple_g" && model.has("g")) model = KeyValueConfig{};
        model.set(k, *v);
      } else {
        merged.set(k, *v);
      }
    }
    if (accepts_model_) {
      if (model.entries().empty()) {
        model.set("depth", "10");
        model.set("simple_g", "0.0001");
        model.set("sigma2", "0.0001");
      }
      for (const auto& [k, v] : model.entries()) merged.set(k, v);
    }
    resolved_ = merged;
  }

  const KeyValueConfig& resolved() const { return resolved_; }

  std::string str(const std::string& key) const {
    const std::string* v = resolved_.find(key);
    if (!v) throw key_error(key, "missing");
    return *v;
  }
  std::uint64_t count(const std::string& key) const {
    try {
      return parse_count(key, str(key));
    } catch (const Error& e) {
      throw key_error(key, e.what());
    }
  }
  std::uint64_t positive_count(const std::string& key) const {
    const auto v = count(key);
    if (v < 1) throw key_error(key, key + " must be ≥ 1");
    return v;
  }
  double real(const std::string& key) const {
    try {
      return parse_double(key, str(key));
    } catch (const Error& e) {
      throw key_error(key, e.what());
    }
  }
  double positive_real(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0) || !std::isfinite(v)) throw key_error(key, key + " must be > 0");
    return v;
  }
  bool flag(const std::string& key) const {
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw key_error(key, "expected true or false, got '" + v + "'");
  }

  AtlasParams params() const {
    KeyValueConfig kv;
    for (const auto& k : kModelKeys) {
      if (auto* v = resolved_.find(k)) kv.set(k, *v);
    }
    try {
      return params_from_config(kv);
    } catch (const Error& e) {
      std::string key = "g";
      if (e.code() == Errc::non_positive_variance) key = "sigma2";
      else if (!kv.has("g")) key = "simple_g";
      if (e.code() == Errc::parse) throw;
      throw key_error(key, e.what());
    }
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : resolved_.entries()) j[k] = v;
    return j;
  }

  /// Writes the resolved settings so `--config run.cfg` reproduces the run.
  void write_cfg(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
    out << "# atlasid " << command_ << " resolved settings\n";
    for (const auto& [k, v] : resolved_.entries()) out << k << '=' << v << '\n';
    if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  }

 private:
  void add_flag(CLI::App& app, const std::string& key) {
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    app.add_option(flag, flag_values_[key], "overrides key '" + key + "'");
  }

  std::string command_;
  std::map<std::string, std::string> defaults_;
  bool accepts_model_;
  std::optional<std::string> config_file_;
  std::map<std::string, std::optional<std::string>> flag_values_;
  KeyValueConfig resolved_;
};

struct Context {
  fs::path out_dir;
  bool quiet = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  void log(const std::string& msg) const {
    if (!quiet) std::cerr << msg << '\n';
  }
};

fs::path default_out_dir() {
  if (const char* env = std::getenv("ATLASID_OUT_DIR"); env && *env) return env;
  return "atlasid_out";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(Errc::io, "cannot create output directory '" + dir.string() + "'");
  }
}

void write_manifest(const Context& ctx, const std::string& command, const Settings& s,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double particle_steps,
                    const json& results) {
  json m;
  m["command"] = command;
  m["config"] = s.to_json();
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  const double wall = ctx.elapsed();
  m["wall_seconds"] = wall;
  m["steps_per_second"] = wall > 0 ? particle_steps / wall : 0.0;
  m["results"] = results;
  const fs::path path = ctx.out_dir / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  out << m.dump(2) << '\n';
  s.write_cfg(ctx.out_dir / "run.cfg");
}

SimConfig sim_config(const Settings& s) {
  SimConfig cfg;
  cfg.dt = s.positive_real("dt");
  cfg.steps = s.positive_count("steps");
  cfg.burn_in = s.count("burn_in");
  cfg.paths = s.positive_count("paths");
  cfg.master_seed = s.count("seed");
  try {
    cfg.init_mode = parse_init_mode(s.str("init_mode"));
  } catch (const Error& e) {
    throw key_error("init_mode", e.what());
  }
  return cfg;
}

CurveQuality curve_quality(const Settings& s, const std::string& prefix) {
  CurveQuality q;
  q.paths = s.positive_count(prefix + "paths");
  q.steps = s.positive_count(prefix + "steps");
  q.dt = s.positive_real(prefix + "dt");
  q.burn_in = s.count(prefix + "burn_in");
  q.seed = s.count(prefix + "seed");
  q.threads = s.count("threads");
  return q;
}

std::map<std::string, std::string> curve_defaults(const std::string& prefix) {
  const CurveQuality q;
  return {{prefix + "paths", std::to_string(q.paths)},
          {prefix + "steps", std::to_string(q.steps)},
          {prefix + "dt", format_double(q.dt)},
          {prefix + "burn_in", std::to_string(q.burn_in)},
          {prefix + "seed", std::to_string(q.seed)}};
}

/// "dyadic:MAX" (clipped to the series length) or an explicit list "1,2,8".
std::vector<std::uint64_t> resolve_lags(const std::string& spec, std::uint64_t length) {
  if (length < 2) throw key_error("lags", "series too short for any lag");
  if (spec.rfind("dyadic:", 0) == 0) {
    std::uint64_t max_lag = 0;
    try {
      max_lag = parse_count("lags", spec.substr(7));
    } catch (const Error& e) {
      throw key_error("lags", e.what());
    }
    if (max_lag < 1) throw key_error("lags", "dyadic maximum must be ≥ 1");
    return dyadic_lags(std::min<std::uint64_t>(max_lag, length - 1));
  }
  std::vector<std::uint64_t> lags;
  try {
    for (double v : parse_double_list("lags", spec)) {
      if (!(v >= 1.0) || v != std::floor(v)) throw Error(Errc::parse, "lags must be integers ≥ 1");
      lags.push_back(static_cast<std::uint64_t>(v));
    }
    validate_lags(lags);
  } catch (const Error& e) {
    throw key_error("lags", e.what());
  }
  if (lags.back() >= length) {
    throw key_error("lags", "lag " + std::to_string(lags.back()) +
                                " does not fit series of length " + std::to_string(length));
  }
  return lags;
}

AnchorRule anchor_rule(const Settings& s) {
  const std::string v = s.str("anchor");
  if (v == "first_lag") return AnchorRule::first_lag;
  if (v == "sqrt_extrapolation") return AnchorRule::sqrt_extrapolation;
  throw key_error("anchor", "expected first_lag or sqrt_extrapolation");
}

/// Streams an ensemble into per-path variograms and pools them.
Variogram ensemble_variogram(const Context& ctx, const AtlasParams& p, const SimConfig& cfg,
                             const std::string& lag_spec, AnchorRule rule,
                             std::size_t threads, const std::string& label) {
  const auto lags = resolve_lags(lag_spec, cfg.steps);
  auto per_path = parallel_map(
      cfg.paths,
      [&](std::size_t k) {
        const auto t0 = std::chrono::steady_clock::now();
        StreamingVariogram acc(lags, cfg.dt);
        simulate_into(p, cfg, k, [&](double top, double) { acc.push(top); });
        Variogram v = acc.finish(rule);
        v.meta.params = params_echo(p);
        v.meta.burn_in = cfg.burn_in;
        v.meta.seed = cfg.master_seed;
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ctx.log("[" + label + "] path " + std::to_string(k + 1) + "/" +
                std::to_string(cfg.paths) + " done, " +
                format_double(std::round(static_cast<double>(cfg.burn_in + cfg.steps) / secs)) +
                " steps/s");
        return v;
      },
      threads);
  return pool(per_path);
}

// ---------------------------------------------------------------------------

int cmd_simulate(Context& ctx, Settings& s) {
  const AtlasParams p = s.params();
  SimConfig cfg = sim_config(s);
  cfg.record_mean = s.flag("record_mean");
  const std::string format = s.str("format");
  if (format != "csv" && format != "binary") {
    throw key_error("format", "expected csv or binary");
  }
  ensure_dir(ctx.out_dir);

  auto files = parallel_map(
      cfg.paths,
      [&](std::size_t k) {
        const TopSeries series = simulate(p, cfg, k);
        char name[64];
        std::snprintf(name, sizeof name, "path_%04zu.%s", k,
                      format == "csv" ? "csv" : "bin");
        const fs::path file = ctx.out_dir / name;
        if (format == "csv") {
          io::write_path_csv(file, series, cfg.burn_in);
        } else {
          io::write_path_binary(file, series, cfg.burn_in);
        }
        ctx.log("[simulate] wrote " + file.string());
        return file.string();
      },
      s.count("threads"));

  json results;
  results["params"] = params_echo(p);
  results["path_seeds"] = json::array();
  for (std::size_t k = 0; k < cfg.paths; ++k) {
    results["path_seeds"].push_back(derive_path_seed(cfg.master_seed, k));
  }
  const double particle_steps = static_cast<double>(cfg.paths) *
                                static_cast<double>(cfg.burn_in + cfg.steps) *
                                static_cast<double>(p.n());
  write_manifest(ctx, "simulate", s, {}, files, particle_steps, results);
  return kExitOk;
}

int cmd_variogram(Context& ctx, Settings& s, const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw Error(Errc::parse, "variogram needs at least one input path file");
  const AnchorRule rule = anchor_rule(s);
  const std::string lag_spec = s.str("lags");
  ensure_dir(ctx.out_dir);

  std::vector<Variogram> vs;
  std::optional<double> dt;
  std::optional<std::size_t> depth;
  for (const auto& input : inputs) {
    io::LoadedPath lp = io::read_path(input);
    const auto lags = resolve_lags(lag_spec, lp.series.values.size());
    Variogram v = estimate_variogram(lp.series.values, lp.series.dt, lags, rule);
    v.meta.params = lp.params_known ? params_echo(lp.series.params)
                                    : "depth=" + std::to_string(lp.series.params.n()) +
                                          " sigma2=" + format_double(lp.series.params.sigma2());
    v.meta.burn_in = lp.burn_in;
    v.meta.seed = lp.series.seed;
    if (dt && (*dt != lp.series.dt || *depth != lp.series.params.n())) {
      throw Error(Errc::invalid_argument, "inputs do not share dt and depth: '" + input + "'");
    }
    if (!vs.empty() && (vs.front().lags != v.lags || vs.front().meta.params != v.meta.params)) {
      throw Error(Errc::invalid_argument,
                  "inputs do not share lag grid and parameters: '" + input + "'");
    }
    dt = lp.series.dt;
    depth = lp.series.params.n();
    vs.push_back(std::move(v));
  }
  const Variogram pooled = pool(vs);
  const fs::path out = ctx.out_dir / "variogram.csv";
  io::write_variogram_csv(out, pooled);
  ctx.log("[variogram] wrote " + out.string());

  json results;
  results["paths"] = pooled.meta.paths;
  results["v0"] = pooled.v0;
  results["last_rel"] = pooled.values.back() / pooled.v0;
  write_manifest(ctx, "variogram", s, inputs, {out.string()}, 0.0, results);
  return kExitOk;
}

CurveCache make_cache(const Context& ctx, const Settings& s, const std::string& prefix) {
  const CurveQuality q = curve_quality(s, prefix);
  std::string dir = s.str("curve_dir");
  return io::directory_curve_cache(dir.empty() ? ctx.out_dir / "curves" : fs::path(dir), q);
}

int cmd_identify(Context& ctx, Settings& s, const std::vector<std::string>& inputs) {
  ensure_dir(ctx.out_dir);
  CurveCache cache = make_cache(ctx, s, "curve_");

  std::vector<std::pair<std::string, Variogram>> jobs;
  double particle_steps = 0.0;
  if (inputs.empty()) {
    const AtlasParams p = s.params();
    const SimConfig cfg = sim_config(s);
    Variogram v = ensemble_variogram(ctx, p, cfg, s.str("lags"), AnchorRule::sqrt_extrapolation,
                                     s.count("threads"), "identify");
    const fs::path vfile = ctx.out_dir / "variogram.csv";
    io::write_variogram_csv(vfile, v);
    jobs.emplace_back("simulated", std::move(v));
    particle_steps = static_cast<double>(cfg.paths) *
                     static_cast<double>(cfg.burn_in + cfg.steps) * static_cast<double>(p.n());
  } else {
    for (const auto& in : inputs) jobs.emplace_back(in, io::read_variogram_csv(in));
  }

  std::string report_txt;
  std::string csv = io::report_csv_header() + "\n";
  json results = json::array();
  for (const auto& [source, v] : jobs) {
    const IdentificationResult r = identify(v, cache);
    if (jobs.size() > 1) report_txt += "# source=" + source + "\n";
    report_txt += io::format_report(r);
    csv += io::report_csv_row(source, r) + "\n";
    json j;
    j["source"] = source;
    for (const auto& [k, val] : io::report_kv(r)) j[k] = val;
    results.push_back(j);
  }
  std::cout << report_txt;

  const fs::path txt = ctx.out_dir / "identify.txt";
  const fs::path row = ctx.out_dir / "identify.csv";
  {
    std::ofstream out(txt, std::ios::trunc);
    out << report_txt;
    std::ofstream out2(row, std::ios::trunc);
    out2 << csv;
    if (!out || !out2) throw Error(Errc::io, "cannot write identification report");
  }
  write_manifest(ctx, "identify", s, inputs, {txt.string(), row.string()}, particle_steps,
                 results);
  return kExitOk;
}

int cmd_reproduce_fig1(Context& ctx, Settings& s) {
  ensure_dir(ctx.out_dir);
  SimConfig cfg = sim_config(s);
  const std::string lag_spec = s.str("lags");
  const bool do_identify = s.flag("identify");
  const std::size_t threads = s.count("threads");

  struct Run {
    std::string name;
    std::string label;
    std::string color;
    double g;
  };
  const std::vector<Run> runs = {{"eq10", "g = 0.0001 (black)", "black", 1e-4},
                                 {"eq13", "g = 0.0002 (red)", "red", 2e-4}};
  CurveCache cache = make_cache(ctx, s, "curve_");  // curves are built lazily

  plot::Figure fig;
  fig.title = "Estimated relative variograms of the top-ranked process";
  fig.reference_y = 0.1;
  std::vector<std::string> outputs;
  json results = json::object();
  double particle_steps = 0.0;
  for (const Run& run : runs) {
    const AtlasParams p = make_simple({10, run.g, 1e-4});
    const Variogram v = ensemble_variogram(ctx, p, cfg, lag_spec, AnchorRule::sqrt_extrapolation,
                                           threads, run.name);
    particle_steps += static_cast<double>(cfg.paths) *
                      static_cast<double>(cfg.burn_in + cfg.steps) * 10.0;
    const Variogram rv = relative_variogram(v);

    json r;
    io::CommentMap extra;
    if (rv.values.size() >= 4) {
      const DepthEstimate d = estimate_depth(rv);
      r["n_hat"] = d.n_hat;
      r["plateau_ok"] = d.plateau_ok;
      r["asymptote"] = d.asymptote;
      extra.emplace_back("n_hat", std::to_string(d.n_hat));
      extra.emplace_back("plateau_ok", d.plateau_ok ? "true" : "false");
    } else {
      r["plateau_ok"] = false;
      extra.emplace_back("plateau_ok", "false");
    }
    r["last_rel"] = rv.values.back();
    if (do_identify && rv.values.size() >= 4) {
      try {
        const IdentificationResult id = identify(v, cache);
        r["a_hat"] = id.a_hat;
        r["g_hat"] = id.g_hat;
        r["sigma2_hat"] = id.sigma2_hat;
        r["fit_rmse"] = id.fit_rmse;
      } catch (const Error& e) {
        r["identify_error"] = e.what();
      }
    }
    const fs::path file = ctx.out_dir / ("fig1_" + run.name + ".csv");
    io::write_variogram_csv(file, v, extra);
    outputs.push_back(file.string());
    results[run.name] = r;

    plot::Series ser;
    ser.label = run.label;
    ser.color = run.color;
    for (std::size_t i = 0; i < rv.lags.size(); ++i) {
      ser.t.push_back(rv.lag_time(i));
      ser.y.push_back(rv.values[i]);
    }
    fig.series.push_back(std::move(ser));
  }
  if (results["eq10"].contains("a_hat") && results["eq13"].contains("a_hat")) {
    results["a_ratio"] = results["eq13"]["a_hat"].get<double>() /
                         results["eq10"]["a_hat"].get<double>();
  }
  const fs::path svg = ctx.out_dir / "fig1.svg";
  plot::write_svg(svg, fig);
  outputs.push_back(svg.string());
  ctx.log("[reproduce-fig1] wrote " + svg.string());
  write_manifest(ctx, "reproduce-fig1", s, {}, outputs, particle_steps, results);
  std::cout << results.dump(2) << '\n';
  return kExitOk;
}

int cmd_build_curve(Context& ctx, Settings& s) {
  const std::uint64_t depth = s.count("depth");
  if (depth < 2) throw key_error("depth", "canonical curve needs depth ≥ 2");
  ensure_dir(ctx.out_dir);
  const CurveQuality q = curve_quality(s, "");
  const CanonicalCurve c = build_canonical_curve(depth, q);
  const fs::path file = io::curve_file(ctx.out_dir, depth);
  io::write_curve_csv(file, c);
  ctx.log("[build-curve] wrote " + file.string());
  json results;
  results["first_rel"] = c.rel_values.front();
  results["last_rel"] = c.rel_values.back();
  const double particle_steps =
      static_cast<double>(q.paths) * static_cast<double>(q.burn_in + q.steps) *
      static_cast<double>(depth);
  write_manifest(ctx, "build-curve", s, {}, {file.string()}, particle_steps, results);
  return kExitOk;
}

std::map<std::string, std::string> sim_defaults(const std::string& steps,
                                                const std::string& paths,
                                                const std::string& seed) {
  return {{"dt", "1"},        {"steps", steps},
          {"burn_in", "100000"}, {"init_mode", "exponential_gaps"},
          {"paths", paths},   {"seed", seed},
          {"threads", "0"}};
}

template <class M>
M merged(M a, const M& b) {
  for (const auto& [k, v] : b) a[k] = v;
  return a;
}

int run(int argc, char** argv) {
  CLI::App app{"Simulation and identification of rank-based Atlas models"};
  app.require_subcommand(1);
  std::string out_dir;
  bool quiet = false;
  app.add_option("--out", out_dir, "output directory (default $ATLASID_OUT_DIR or ./atlasid_out)");
  app.add_flag("--quiet", quiet, "suppress progress on stderr");

  auto sim_keys = merged(sim_defaults("1000000", "1", "0"),
                         std::map<std::string, std::string>{{"record_mean", "false"},
                                                            {"format", "binary"}});
  Settings simulate_s("simulate", sim_keys, true);
  Settings variogram_s("variogram",
                       {{"lags", "dyadic:524288"}, {"anchor", "sqrt_extrapolation"}, {"threads", "0"}},
                       false);
  Settings identify_s("identify",
                      merged(merged(sim_defaults("10000000", "8", "0"), curve_defaults("curve_")),
                             std::map<std::string, std::string>{{"lags", "dyadic:524288"},
                                                                {"curve_dir", ""}}),
                      true);
  Settings fig_s("reproduce-fig1",
                 merged(merged(sim_defaults("10000000", "8", "1"), curve_defaults("curve_")),
                        std::map<std::string, std::string>{{"lags", "dyadic:524288"},
                                                           {"identify", "true"},
                                                           {"curve_dir", ""}}),
                 false);
  Settings curve_s("build-curve",
                   merged(curve_defaults(""),
                          std::map<std::string, std::string>{{"depth", "10"}, {"threads", "0"}}),
                   false);

  std::vector<std::string> variogram_inputs, identify_inputs;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate top-rank paths");
  simulate_s.add_flags(*sim_cmd);
  auto* var_cmd = app.add_subcommand("variogram", "pooled variogram of path files");
  variogram_s.add_flags(*var_cmd);
  var_cmd->add_option("inputs", variogram_inputs, "path files (binary or CSV)");
  auto* id_cmd = app.add_subcommand("identify", "identify a simple Atlas model");
  identify_s.add_flags(*id_cmd);
  id_cmd->add_option("inputs", identify_inputs, "variogram CSV files (omit to simulate)");
  auto* fig_cmd = app.add_subcommand("reproduce-fig1", "relative variograms for g = 1e-4 and 2e-4");
  fig_s.add_flags(*fig_cmd);
  auto* curve_cmd = app.add_subcommand("build-curve", "build a canonical reference curve");
  curve_s.add_flags(*curve_cmd);
  for (auto* sub : {sim_cmd, var_cmd, id_cmd, fig_cmd, curve_cmd}) {
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--quiet", quiet, "suppress progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  Context ctx;
  ctx.out_dir = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
  ctx.quiet = quiet;
  try {
    if (sim_cmd->parsed()) {
      simulate_s.resolve();
      return cmd_simulate(ctx, simulate_s);
    }
    if (var_cmd->parsed()) {
      variogram_s.resolve();
      return cmd_variogram(ctx, variogram_s, variogram_inputs);
    }
    if (id_cmd->parsed()) {
      identify_s.resolve();
      return cmd_identify(ctx, identify_s, identify_inputs);
    }
    if (fig_cmd->parsed()) {
      fig_s.resolve();
      return cmd_reproduce_fig1(ctx, fig_s);
    }
    curve_s.resolve();
    return cmd_build_curve(ctx, curve_s);
  } catch (const Error& e) {
    std::cerr << "atlasid: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "atlasid: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
