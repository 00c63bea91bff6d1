#pragma once

// Experiment sweeps over (target, family, layers), persisted as a JSON
// report, plus CSV export and re-evaluation of stored fits.
//
// Report files are a pure function of the canonical config: cells are
// seeded from the master seed and their own key, records are written in
// config order, and wall-clock timings go to a separate sidecar.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qapprox/baselines.hpp"
#include "qapprox/encodings.hpp"
#include "qapprox/fit.hpp"
#include "qapprox/gateset.hpp"
#include "qapprox/parallel.hpp"
#include "qapprox/sampler.hpp"
#include "qapprox/targets.hpp"

namespace qapprox::bench {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kReportFormat = "qapprox-report/1";

/// Rejected configuration; nothing has been written when this is thrown.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Family { Fourier, Uat, ClassicalFourier, ClassicalUat };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Fourier: return "fourier";
    case Family::Uat: return "uat";
    case Family::ClassicalFourier: return "classical_fourier";
    case Family::ClassicalUat: return "classical_uat";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  for (Family f : {Family::Fourier, Family::Uat, Family::ClassicalFourier, Family::ClassicalUat}) {
    if (to_string(f) == s) return f;
  }
  throw ConfigError("unknown family '" + std::string(s) +
                    "' (expected fourier, uat, classical_fourier, classical_uat)");
}

inline bool is_quantum(Family f) { return f == Family::Fourier || f == Family::Uat; }

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  /// Registry names, "re+i*im" compositions, or "file:<csv path>".
  std::vector<std::string> targets;
  std::vector<Family> families;
  std::size_t layers_min = 1;
  std::size_t layers_max = 6;
  std::size_t layer_limit = 6;
  Benchmark benchmark = Benchmark::Z;
  /// Training points per dimension.
  std::size_t grid_1d = 101;
  std::size_t grid_2d = 31;
  OptimizerKind optimizer = OptimizerKind::Lbfgs;
  GradientMethod gradient = GradientMethod::ParameterShift;
  QnOptions qn;
  EsOptions es;
  std::size_t quadrature = kDefaultQuadrature;
  std::size_t restarts = 10;
  std::optional<std::size_t> shots;
  std::uint64_t seed = 0;
  /// Overrides each family's own starting state.
  std::optional<InitialState> initial_state;
  /// Not part of the canonical form: moving the output does not change results.
  std::string output_dir = "results";

  static ExperimentConfig from_json(const json& j);
  json canonical() const;
  std::string hash() const { return hex64(fnv1a(canonical().dump())); }
  /// Structural checks that need no target evaluation.
  void check() const;
};

namespace detail {

template <typename T>
T get_as(const json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + std::string(key) + "' has the wrong type");
  }
}

inline std::size_t get_count(const json& j, std::string_view key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("config field '" + std::string(key) + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline double get_real(const json& j, std::string_view key) {
  if (!j.is_number()) throw ConfigError("config field '" + std::string(key) + "' must be a number");
  return j.get<double>();
}

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                           std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError("unknown " + std::string(where) + " field '" + it.key() + "'");
    }
  }
}

inline Benchmark parse_benchmark(std::string_view s) {
  if (s == "Z" || s == "z") return Benchmark::Z;
  if (s == "XY" || s == "xy") return Benchmark::XY;
  throw ConfigError("benchmark must be Z or XY, got '" + std::string(s) + "'");
}

inline InitialState parse_initial_state(std::string_view s) {
  if (s == "zero") return InitialState::Zero;
  if (s == "plus") return InitialState::Plus;
  throw ConfigError("initial_state must be zero or plus, got '" + std::string(s) + "'");
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"targets", "families", "layers", "layer_limit", "benchmark", "grid",
                  "optimizer", "restarts", "shots", "seed", "output_dir", "initial_state"},
                 "config");
  ExperimentConfig c;
  if (!j.contains("targets")) throw ConfigError("config needs a 'targets' list");
  c.targets = get_as<std::vector<std::string>>(j.at("targets"), "targets");
  if (!j.contains("families")) throw ConfigError("config needs a 'families' list");
  for (const auto& f : get_as<std::vector<std::string>>(j.at("families"), "families")) {
    c.families.push_back(parse_family(f));
  }
  if (j.contains("layer_limit")) c.layer_limit = get_count(j.at("layer_limit"), "layer_limit");
  if (j.contains("layers")) {
    const json& l = j.at("layers");
    if (l.is_array() && l.size() == 2) {
      c.layers_min = get_count(l[0], "layers");
      c.layers_max = get_count(l[1], "layers");
    } else if (l.is_number_integer()) {
      c.layers_min = c.layers_max = get_count(l, "layers");
    } else {
      throw ConfigError("'layers' must be an integer or a [min, max] pair");
    }
  }
  if (j.contains("benchmark")) {
    c.benchmark = parse_benchmark(get_as<std::string>(j.at("benchmark"), "benchmark"));
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (g.is_number_integer()) {
      c.grid_1d = c.grid_2d = get_count(g, "grid");
    } else if (g.is_object()) {
      reject_unknown(g, {"1d", "2d"}, "grid");
      if (g.contains("1d")) c.grid_1d = get_count(g.at("1d"), "grid.1d");
      if (g.contains("2d")) c.grid_2d = get_count(g.at("2d"), "grid.2d");
    } else {
      throw ConfigError("'grid' must be an integer or {\"1d\": n, \"2d\": n}");
    }
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    if (!o.is_object()) throw ConfigError("'optimizer' must be an object");
    reject_unknown(o,
                   {"method", "gradient", "max_iters", "grad_tol", "f_tol", "memory",
                    "population", "sigma0", "budget", "x_tol", "quadrature"},
                   "optimizer");
    if (o.contains("method")) {
      const auto m = get_as<std::string>(o.at("method"), "optimizer.method");
      if (m == "lbfgs") {
        c.optimizer = OptimizerKind::Lbfgs;
      } else if (m == "cma") {
        c.optimizer = OptimizerKind::Cma;
      } else {
        throw ConfigError("optimizer.method must be lbfgs or cma, got '" + m + "'");
      }
    }
    if (o.contains("gradient")) {
      const auto g = get_as<std::string>(o.at("gradient"), "optimizer.gradient");
      if (g == "shift") {
        c.gradient = GradientMethod::ParameterShift;
      } else if (g == "fd") {
        c.gradient = GradientMethod::FiniteDiff;
      } else {
        throw ConfigError("optimizer.gradient must be shift or fd, got '" + g + "'");
      }
    }
    if (o.contains("max_iters")) c.qn.max_iters = get_count(o.at("max_iters"), "optimizer.max_iters");
    if (o.contains("grad_tol")) c.qn.grad_tol = get_real(o.at("grad_tol"), "optimizer.grad_tol");
    if (o.contains("f_tol")) {
      c.qn.f_tol = get_real(o.at("f_tol"), "optimizer.f_tol");
      c.es.f_tol = c.qn.f_tol;
    }
    if (o.contains("memory")) c.qn.memory = get_count(o.at("memory"), "optimizer.memory");
    if (o.contains("population")) {
      c.es.population = get_count(o.at("population"), "optimizer.population");
    }
    if (o.contains("sigma0")) c.es.sigma0 = get_real(o.at("sigma0"), "optimizer.sigma0");
    if (o.contains("budget")) c.es.budget = get_count(o.at("budget"), "optimizer.budget");
    if (o.contains("x_tol")) c.es.x_tol = get_real(o.at("x_tol"), "optimizer.x_tol");
    if (o.contains("quadrature")) c.quadrature = get_count(o.at("quadrature"), "optimizer.quadrature");
  }
  if (j.contains("restarts")) c.restarts = get_count(j.at("restarts"), "restarts");
  if (j.contains("shots") && !j.at("shots").is_null()) c.shots = get_count(j.at("shots"), "shots");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw ConfigError("'seed' must be an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j.at("output_dir"), "output_dir");
  if (j.contains("initial_state") && !j.at("initial_state").is_null()) {
    c.initial_state = parse_initial_state(get_as<std::string>(j.at("initial_state"), "initial_state"));
  }
  c.check();
  return c;
}

inline json ExperimentConfig::canonical() const {
  json fam = json::array();
  for (Family f : families) fam.push_back(std::string(to_string(f)));
  json opt = {
      {"method", std::string(to_string(optimizer))},
      {"gradient", gradient == GradientMethod::ParameterShift ? "shift" : "fd"},
      {"max_iters", qn.max_iters},
      {"grad_tol", qn.grad_tol},
      {"f_tol", qn.f_tol},
      {"memory", qn.memory},
      {"population", es.population},
      {"sigma0", es.sigma0},
      {"budget", es.budget},
      {"x_tol", es.x_tol},
      {"quadrature", quadrature},
  };
  return json{
      {"targets", targets},
      {"families", fam},
      {"layers", {layers_min, layers_max}},
      {"layer_limit", layer_limit},
      {"benchmark", std::string(to_string(benchmark))},
      {"grid", {{"1d", grid_1d}, {"2d", grid_2d}}},
      {"optimizer", opt},
      {"restarts", restarts},
      {"shots", shots ? json(*shots) : json(nullptr)},
      {"seed", seed},
      {"initial_state",
       initial_state ? json(std::string(to_string(*initial_state))) : json(nullptr)},
  };
}

inline void ExperimentConfig::check() const {
  if (targets.empty()) throw ConfigError("config lists no targets");
  if (families.empty()) throw ConfigError("config lists no families");
  if (std::set<std::string>(targets.begin(), targets.end()).size() != targets.size()) {
    throw ConfigError("config lists a target twice");
  }
  if (std::set<Family>(families.begin(), families.end()).size() != families.size()) {
    throw ConfigError("config lists a family twice");
  }
  if (layers_min < 1 || layers_min > layers_max) {
    throw ConfigError("layer range [" + std::to_string(layers_min) + ", " +
                      std::to_string(layers_max) + "] is empty or starts below 1");
  }
  if (layers_max > layer_limit) {
    throw ConfigError("layer range exceeds layer_limit " + std::to_string(layer_limit));
  }
  if (grid_1d < 2 || grid_2d < 2) throw ConfigError("grids need at least 2 points per dimension");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (shots && *shots < 1) throw ConfigError("shots must be >= 1");
  if (qn.memory < 1) throw ConfigError("optimizer.memory must be >= 1");
  if (optimizer == OptimizerKind::Cma) {
    if (es.budget < 1) throw ConfigError("optimizer.budget must be >= 1");
    if (es.population != 0 && es.population < 4) throw ConfigError("optimizer.population must be >= 4");
    if (!(es.sigma0 > 0.0)) throw ConfigError("optimizer.sigma0 must be positive");
  }
}

inline ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Targets and datasets

inline constexpr std::string_view kFilePrefix = "file:";

inline bool is_file_target(std::string_view name) { return name.starts_with(kFilePrefix); }

inline std::size_t grid_points_for(const ExperimentConfig& c, std::size_t dim) {
  return dim == 1 ? c.grid_1d : c.grid_2d;
}

inline bool has_complex_values(const Dataset& d) {
  return std::any_of(d.points.begin(), d.points.end(),
                     [](const DataPoint& p) { return std::abs(p.target.imag()) > kInputTol; });
}

/// Training data for one target, normalized into the unit disc.
inline Dataset build_dataset(const std::string& name, const ExperimentConfig& c) {
  if (is_file_target(name)) {
    Dataset d = load_tabulated(name.substr(kFilePrefix.size()));
    d.meta.target_name = name;
    return d;
  }
  const std::size_t dim = make_target(name).dim;
  const std::size_t n = grid_points_for(c, dim);
  const GridSpec grid = dim == 1 ? GridSpec::line(n) : GridSpec::square(n);
  return make_dataset(prepare_target(name, grid), grid);
}

/// Resolves every target and rejects invalid combinations before any
/// optimization starts.
inline std::map<std::string, Dataset> prepare_datasets(const ExperimentConfig& c) {
  c.check();
  std::map<std::string, Dataset> out;
  for (const auto& name : c.targets) {
    Dataset d;
    try {
      d = build_dataset(name, c);
    } catch (const std::exception& e) {
      throw ConfigError("target '" + name + "': " + e.what());
    }
    const std::size_t dim = d.input_dim();
    for (Family f : c.families) {
      if ((f == Family::Fourier || f == Family::ClassicalFourier) && dim != 1) {
        throw ConfigError("family " + std::string(to_string(f)) + " needs a 1D target, '" + name +
                          "' has " + std::to_string(dim) + " inputs");
      }
      if (f == Family::ClassicalFourier && is_file_target(name)) {
        throw ConfigError("classical_fourier needs a closed-form target, not '" + name + "'");
      }
    }
    if (c.benchmark == Benchmark::Z && has_complex_values(d)) {
      throw ConfigError("Z benchmark needs a real target, '" + name + "' is complex");
    }
    try {
      d.validate(c.benchmark);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("target '" + name + "': " + e.what());
    }
    out.emplace(name, std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records and reports

struct Record {
  std::string target;
  Family family = Family::Uat;
  std::size_t layers = 1;
  double chi2 = 0.0;
  /// Finite-shot chi-square of the fitted quantum model, when shots are set.
  std::optional<double> chi2_sampled;
  std::optional<double> noise_floor;
  std::vector<double> params;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t restart = 0;
  bool converged = false;
  std::string status;
  /// Quantum families only.
  InitialState initial_state = InitialState::Plus;
};

struct Failure {
  std::string target;
  Family family = Family::Uat;
  std::size_t layers = 1;
  std::string message;
};

struct Report {
  json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  Benchmark benchmark = Benchmark::Z;
  std::map<std::string, Dataset> datasets;
  std::vector<Record> records;
  std::vector<Failure> failures;

  const Dataset& dataset(const std::string& target) const {
    const auto it = datasets.find(target);
    if (it == datasets.end()) {
      throw std::runtime_error("report has no dataset for target '" + target + "'");
    }
    return it->second;
  }
};

inline std::string cell_key(std::string_view target, Family f, std::size_t layers) {
  return std::string(target) + "|" + std::string(to_string(f)) + "|" + std::to_string(layers);
}

inline std::uint64_t cell_seed(std::uint64_t master, std::string_view target, Family f,
                               std::size_t layers) {
  return derive_seed(master, fnv1a(cell_key(target, f, layers)));
}

inline CircuitModel record_model(const Record& r, std::size_t input_dim) {
  CircuitModel m = r.family == Family::Fourier ? CircuitModel::fourier(r.layers)
                                               : CircuitModel::uat(r.layers, input_dim);
  m.initial_state = r.initial_state;
  return m;
}

inline FourierSeries record_series(const Record& r, const Dataset& d) {
  FourierSeries s;
  s.order = static_cast<int>(r.layers);
  s.period = d.meta.bounds.at(0).second - d.meta.bounds.at(0).first;
  if (r.params.size() != 2 * (2 * r.layers + 1)) {
    throw std::runtime_error("classical_fourier record has " + std::to_string(r.params.size()) +
                             " parameters");
  }
  for (std::size_t k = 0; k < r.params.size(); k += 2) s.coeffs.emplace_back(r.params[k], r.params[k + 1]);
  return s;
}

inline Activation activation_for(Benchmark b) {
  return b == Benchmark::Z ? Activation::Cosine : Activation::ComplexExp;
}

/// Model output compared against the target; real for the Z benchmark.
inline Complex predict(const Record& r, const Dataset& d, Benchmark b, std::span<const double> x) {
  switch (r.family) {
    case Family::Fourier:
    case Family::Uat: {
      const CircuitModel m = record_model(r, d.input_dim());
      return readout(encode_state(m, ParameterVector(m, r.params), x), b);
    }
    case Family::ClassicalFourier: {
      const Complex v = fourier_eval(record_series(r, d), x[0]);
      return b == Benchmark::Z ? Complex{v.real(), 0.0} : v;
    }
    case Family::ClassicalUat:
      return classical_uat_eval(UatModel::from_params(activation_for(b), d.input_dim(), r.params), x);
  }
  return {};
}

/// Chi-square of the stored parameters against the stored grid.
inline double evaluate_chi2(const Record& r, const Dataset& d, Benchmark b) {
  switch (r.family) {
    case Family::Fourier:
    case Family::Uat: {
      const CircuitModel m = record_model(r, d.input_dim());
      return chi2(m, ParameterVector(m, r.params), d, b);
    }
    case Family::ClassicalFourier:
      return fourier_chi2(record_series(r, d), d, b);
    case Family::ClassicalUat:
      return classical_uat_chi2(UatModel::from_params(activation_for(b), d.input_dim(), r.params), d);
  }
  return 0.0;
}

// JSON conversion ------------------------------------------------------------

inline json dataset_to_json(const Dataset& d) {
  json bounds = json::array();
  for (const auto& [lo, hi] : d.meta.bounds) bounds.push_back({lo, hi});
  json xs = json::array(), re = json::array(), im = json::array();
  for (const auto& p : d.points) {
    xs.push_back(p.x);
    re.push_back(p.target.real());
    im.push_back(p.target.imag());
  }
  return json{{"bounds", bounds}, {"shape", d.meta.shape}, {"scale", d.meta.scale},
              {"x", xs},          {"re", re},              {"im", im}};
}

inline Dataset dataset_from_json(const std::string& name, const json& j) {
  Dataset d;
  d.meta.target_name = name;
  for (const auto& b : j.at("bounds")) d.meta.bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  d.meta.shape = j.at("shape").get<std::vector<std::size_t>>();
  d.meta.scale = j.at("scale").get<double>();
  const auto& xs = j.at("x");
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (xs.size() != re.size() || xs.size() != im.size()) {
    throw std::runtime_error("dataset '" + name + "' has ragged columns");
  }
  for (std::size_t k = 0; k < xs.size(); ++k) {
    d.points.push_back({xs[k].get<std::vector<double>>(),
                        Complex{re[k].get<double>(), im[k].get<double>()}});
  }
  return d;
}

inline json record_to_json(const Record& r, const std::string& config_hash) {
  json j{{"target", r.target},
         {"family", std::string(to_string(r.family))},
         {"layers", r.layers},
         {"chi2", r.chi2},
         {"params", r.params},
         {"evaluations", r.evaluations},
         {"iterations", r.iterations},
         {"seed", r.seed},
         {"restart", r.restart},
         {"converged", r.converged},
         {"status", r.status},
         {"config_hash", config_hash}};
  if (is_quantum(r.family)) j["initial_state"] = std::string(to_string(r.initial_state));
  if (r.chi2_sampled) j["chi2_sampled"] = *r.chi2_sampled;
  if (r.noise_floor) j["noise_floor"] = *r.noise_floor;
  return j;
}

inline Record record_from_json(const json& j) {
  Record r;
  r.target = j.at("target").get<std::string>();
  r.family = parse_family(j.at("family").get<std::string>());
  r.layers = j.at("layers").get<std::size_t>();
  r.chi2 = j.at("chi2").get<double>();
  r.params = j.at("params").get<std::vector<double>>();
  r.evaluations = j.at("evaluations").get<std::size_t>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.restart = j.at("restart").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  r.status = j.at("status").get<std::string>();
  if (j.contains("initial_state")) {
    r.initial_state = detail::parse_initial_state(j.at("initial_state").get<std::string>());
  }
  if (j.contains("chi2_sampled")) r.chi2_sampled = j.at("chi2_sampled").get<double>();
  if (j.contains("noise_floor")) r.noise_floor = j.at("noise_floor").get<double>();
  return r;
}

inline json report_to_json(const Report& rep) {
  json datasets = json::object();
  for (const auto& [name, d] : rep.datasets) datasets[name] = dataset_to_json(d);
  json records = json::array();
  for (const auto& r : rep.records) records.push_back(record_to_json(r, rep.config_hash));
  json failures = json::array();
  for (const auto& f : rep.failures) {
    failures.push_back({{"target", f.target},
                        {"family", std::string(to_string(f.family))},
                        {"layers", f.layers},
                        {"message", f.message}});
  }
  return json{{"format", std::string(kReportFormat)},
              {"config", rep.config},
              {"config_hash", rep.config_hash},
              {"seed", rep.seed},
              {"benchmark", std::string(to_string(rep.benchmark))},
              {"datasets", datasets},
              {"records", records},
              {"failures", failures}};
}

inline Report report_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kReportFormat) {
    throw std::runtime_error("not a qapprox report (format tag missing or unknown)");
  }
  Report rep;
  rep.config = j.at("config");
  rep.config_hash = j.at("config_hash").get<std::string>();
  rep.seed = j.at("seed").get<std::uint64_t>();
  rep.benchmark = detail::parse_benchmark(j.at("benchmark").get<std::string>());
  for (auto it = j.at("datasets").begin(); it != j.at("datasets").end(); ++it) {
    rep.datasets.emplace(it.key(), dataset_from_json(it.key(), it.value()));
  }
  for (const auto& r : j.at("records")) rep.records.push_back(record_from_json(r));
  for (const auto& f : j.at("failures")) {
    rep.failures.push_back({f.at("target").get<std::string>(),
                            parse_family(f.at("family").get<std::string>()),
                            f.at("layers").get<std::size_t>(), f.at("message").get<std::string>()});
  }
  return rep;
}

/// Writes through a temporary file so readers never see a partial report.
inline void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot write '" + path.string() + "': " + ec.message());
}

inline void save_report(const Report& rep, const fs::path& path) {
  write_text_atomic(path, report_to_json(rep).dump(1) + "\n");
}

inline Report load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report '" + path.string() + "'");
  try {
    return report_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("report '" + path.string() + "' is malformed: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Running a sweep

struct Cell {
  std::string target;
  Family family;
  std::size_t layers;
};

inline std::vector<Cell> sweep_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  for (const auto& t : c.targets) {
    for (Family f : c.families) {
      for (std::size_t l = c.layers_min; l <= c.layers_max; ++l) cells.push_back({t, f, l});
    }
  }
  return cells;
}

inline FitSettings fit_settings(const ExperimentConfig& c, std::uint64_t seed) {
  FitSettings s;
  s.optimizer = c.optimizer;
  s.qn = c.qn;
  s.es = c.es;
  s.restarts = c.restarts;
  s.seed = seed;
  s.workers = 1;
  s.gradient = c.gradient;
  return s;
}

/// Fits one (target, family, layers) cell.
inline Record run_cell(const ExperimentConfig& c, const Cell& cell, const Dataset& data) {
  Record r;
  r.target = cell.target;
  r.family = cell.family;
  r.layers = cell.layers;
  r.seed = cell_seed(c.seed, cell.target, cell.family, cell.layers);
  const FitSettings s = fit_settings(c, r.seed);

  switch (cell.family) {
    case Family::Fourier:
    case Family::Uat: {
      CircuitModel m = cell.family == Family::Fourier ? CircuitModel::fourier(cell.layers)
                                                      : CircuitModel::uat(cell.layers, data.input_dim());
      if (c.initial_state) m.initial_state = *c.initial_state;
      r.initial_state = m.initial_state;
      const FitResult fit = fit_circuit(m, data, c.benchmark, s);
      r.params = fit.best_params;
      r.evaluations = fit.evaluations;
      r.iterations = fit.iterations;
      r.restart = fit.restart_index;
      r.converged = fit.converged;
      r.status = fit.status;
      if (c.shots) {
        const ParameterVector pv(m, r.params);
        const ShotConfig shots{*c.shots, derive_seed(r.seed, 0x5107)};
        r.chi2_sampled = sampled_chi2(m, pv, data, c.benchmark, shots);
        r.noise_floor = shot_noise_floor(m, pv, data, c.benchmark, *c.shots);
      }
      break;
    }
    case Family::ClassicalFourier: {
      const TargetFunction t = prepare_target(cell.target, GridSpec{data.meta.shape});
      const FourierSeries series =
          fourier_fit(t, static_cast<int>(cell.layers), c.quadrature);
      for (const Complex& v : series.coeffs) {
        r.params.push_back(v.real());
        r.params.push_back(v.imag());
      }
      r.evaluations = c.quadrature + 1;
      r.converged = true;
      r.status = "quadrature";
      break;
    }
    case Family::ClassicalUat: {
      const ClassicalUatFit fit = classical_uat_fit(data, cell.layers, activation_for(c.benchmark), s);
      r.params = fit.fit.best_params;
      r.evaluations = fit.fit.evaluations;
      r.iterations = fit.fit.iterations;
      r.restart = fit.fit.restart_index;
      r.converged = fit.fit.converged;
      r.status = fit.fit.status;
      break;
    }
  }
  r.chi2 = evaluate_chi2(r, data, c.benchmark);
  return r;
}

struct RunOptions {
  std::size_t workers = 1;
  bool resume = true;
  /// Progress lines; may be null.
  std::ostream* log = nullptr;
};

struct RunOutcome {
  Report report;
  fs::path report_path;
  std::size_t computed = 0;
  std::size_t resumed = 0;
  bool ok() const { return report.failures.empty(); }
};

inline fs::path report_path(const ExperimentConfig& c) { return fs::path(c.output_dir) / "report.json"; }
inline fs::path timings_path(const ExperimentConfig& c) { return fs::path(c.output_dir) / "timings.json"; }

namespace detail {

/// Records in config order: targets, then families, then layers.
inline void normalize_order(Report& rep, const ExperimentConfig& c) {
  auto rank = [&c](const std::string& t, Family f, std::size_t l) {
    const auto ti = static_cast<std::size_t>(
        std::find(c.targets.begin(), c.targets.end(), t) - c.targets.begin());
    const auto fi = static_cast<std::size_t>(
        std::find(c.families.begin(), c.families.end(), f) - c.families.begin());
    return std::tuple{ti, fi, l};
  };
  std::sort(rep.records.begin(), rep.records.end(), [&](const Record& a, const Record& b) {
    return rank(a.target, a.family, a.layers) < rank(b.target, b.family, b.layers);
  });
  std::sort(rep.failures.begin(), rep.failures.end(), [&](const Failure& a, const Failure& b) {
    return rank(a.target, a.family, a.layers) < rank(b.target, b.family, b.layers);
  });
}

}  // namespace detail

/// Executes every cell not already present in an existing report for the
/// same config. The report is rewritten after each finished cell.
inline RunOutcome run_experiment(const ExperimentConfig& c, const RunOptions& opt = {}) {
  std::map<std::string, Dataset> datasets = prepare_datasets(c);

  RunOutcome out;
  out.report_path = report_path(c);
  Report& rep = out.report;
  rep.config = c.canonical();
  rep.config_hash = c.hash();
  rep.seed = c.seed;
  rep.benchmark = c.benchmark;
  rep.datasets = std::move(datasets);

  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + c.output_dir + "': " + ec.message());

  std::set<std::string> done;
  if (opt.resume && fs::exists(out.report_path)) {
    Report old = load_report(out.report_path);
    if (old.config_hash != rep.config_hash) {
      throw std::runtime_error("'" + out.report_path.string() +
                               "' belongs to a different config (hash " + old.config_hash +
                               "); remove it or choose another output_dir");
    }
    for (auto& r : old.records) {
      done.insert(cell_key(r.target, r.family, r.layers));
      rep.records.push_back(std::move(r));
    }
    out.resumed = rep.records.size();
  }

  json timings = json::object();
  if (fs::exists(timings_path(c))) {
    std::ifstream in(timings_path(c));
    timings = json::parse(in, nullptr, false);
    if (!timings.is_object()) timings = json::object();
  }

  std::vector<Cell> pending;
  for (const auto& cell : sweep_cells(c)) {
    if (!done.count(cell_key(cell.target, cell.family, cell.layers))) pending.push_back(cell);
  }

  std::mutex mu;
  detail::normalize_order(rep, c);
  save_report(rep, out.report_path);
  parallel_for(pending.size(), opt.workers, [&](std::size_t i) {
    const Cell& cell = pending[i];
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Record> rec;
    std::string error;
    try {
      rec = run_cell(c, cell, rep.dataset(cell.target));
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::lock_guard lock(mu);
    const std::string key = cell_key(cell.target, cell.family, cell.layers);
    if (rec) {
      rep.records.push_back(std::move(*rec));
      ++out.computed;
      timings[key] = secs;
      if (opt.log) {
        *opt.log << key << "  chi2=" << format_double(rep.records.back().chi2) << "  ("
                 << format_double(std::round(secs * 100.0) / 100.0) << " s)\n";
      }
    } else {
      rep.failures.push_back({cell.target, cell.family, cell.layers, error});
      if (opt.log) *opt.log << key << "  FAILED: " << error << "\n";
    }
    detail::normalize_order(rep, c);
    save_report(rep, out.report_path);
    write_text_atomic(timings_path(c), timings.dump(1) + "\n");
  });
  return out;
}

// ---------------------------------------------------------------------------
// Verification and export

struct Check {
  std::string key;
  double stored = 0.0;
  double recomputed = 0.0;
  bool ok = false;
};

struct Verification {
  bool hash_ok = false;
  std::vector<Check> checks;

  bool ok() const {
    return hash_ok && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
  }
};

inline constexpr double kSelfCheckTol = 1e-10;

/// Re-evaluates every stored parameter vector against the stored grid.
inline Verification verify_report(const Report& rep) {
  Verification v;
  v.hash_ok = hex64(fnv1a(rep.config.dump())) == rep.config_hash;
  for (const auto& r : rep.records) {
    Check c;
    c.key = cell_key(r.target, r.family, r.layers);
    c.stored = r.chi2;
    try {
      c.recomputed = evaluate_chi2(r, rep.dataset(r.target), rep.benchmark);
      c.ok = std::abs(c.recomputed - c.stored) <= kSelfCheckTol;
    } catch (const std::exception&) {
      c.recomputed = std::numeric_limits<double>::quiet_NaN();
      c.ok = false;
    }
    v.checks.push_back(c);
  }
  return v;
}

enum class ExportFormat { Table, Curves };

inline ExportFormat parse_export_format(std::string_view s) {
  if (s == "table") return ExportFormat::Table;
  if (s == "curves") return ExportFormat::Curves;
  throw std::invalid_argument("format must be table or curves, got '" + std::string(s) + "'");
}

/// File-name-safe version of a target name.
inline std::string slug(std::string_view name) {
  std::string s;
  for (char ch : name) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '-' || ch == '_';
    s += keep ? ch : '_';
  }
  return s;
}

inline std::string curve_file_name(const Record& r) {
  return slug(r.target) + "__" + std::string(to_string(r.family)) + "__L" +
         std::to_string(r.layers) + ".csv";
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline std::string table_csv(const Report& rep) {
  std::ostringstream os;
  os << "target,family,layers,benchmark,chi2,chi2_sampled,noise_floor,evaluations,iterations,"
        "restart,seed,status\n";
  for (const auto& r : rep.records) {
    os << csv_field(r.target) << ',' << to_string(r.family) << ',' << r.layers << ','
       << to_string(rep.benchmark) << ',' << format_double(r.chi2) << ','
       << (r.chi2_sampled ? format_double(*r.chi2_sampled) : "") << ','
       << (r.noise_floor ? format_double(*r.noise_floor) : "") << ',' << r.evaluations << ','
       << r.iterations << ',' << r.restart << ',' << r.seed << ',' << csv_field(r.status) << '\n';
  }
  return os.str();
}

inline std::string curve_csv(const Report& rep, const Record& r) {
  const Dataset& d = rep.dataset(r.target);
  const bool two_d = d.input_dim() == 2;
  const bool complex_out = rep.benchmark == Benchmark::XY;
  std::ostringstream os;
  os << (two_d ? "x,y," : "x,");
  os << (complex_out ? "target_re,target_im,prediction_re,prediction_im\n" : "target,prediction\n");
  for (const auto& p : d.points) {
    const Complex pred = predict(r, d, rep.benchmark, p.x);
    for (double v : p.x) os << format_double(v) << ',';
    if (complex_out) {
      os << format_double(p.target.real()) << ',' << format_double(p.target.imag()) << ','
         << format_double(pred.real()) << ',' << format_double(pred.imag()) << '\n';
    } else {
      os << format_double(p.target.real()) << ',' << format_double(pred.real()) << '\n';
    }
  }
  return os.str();
}

}  // namespace detail

/// Writes `table.csv` or `curves/*.csv` plus a JSON sidecar into `out_dir`.
/// Fails without writing if any stored chi-square does not reproduce.
inline std::vector<fs::path> export_report(const Report& rep, ExportFormat fmt,
                                           const fs::path& out_dir) {
  if (rep.records.empty()) throw std::runtime_error("report has no records to export");
  const Verification v = verify_report(rep);
  for (const auto& c : v.checks) {
    if (!c.ok) {
      throw std::runtime_error("self-check failed for " + c.key + ": stored chi2 " +
                               format_double(c.stored) + ", recomputed " +
                               format_double(c.recomputed));
    }
  }
  if (!v.hash_ok) throw std::runtime_error("self-check failed: config hash does not match config");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<fs::path> written;
  json files = json::array();
  if (fmt == ExportFormat::Table) {
    const fs::path p = out_dir / "table.csv";
    write_text_atomic(p, detail::table_csv(rep));
    written.push_back(p);
    files.push_back("table.csv");
  } else {
    const fs::path dir = out_dir / "curves";
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
    for (const auto& r : rep.records) {
      const fs::path p = dir / curve_file_name(r);
      write_text_atomic(p, detail::curve_csv(rep, r));
      written.push_back(p);
      files.push_back("curves/" + curve_file_name(r));
    }
  }

  json seeds = json::array();
  for (const auto& r : rep.records) {
    seeds.push_back({{"cell", cell_key(r.target, r.family, r.layers)}, {"seed", r.seed}});
  }
  const json sidecar{{"format", fmt == ExportFormat::Table ? "table" : "curves"},
                     {"files", files},
                     {"config", rep.config},
                     {"config_hash", rep.config_hash},
                     {"seed", rep.seed},
                     {"seeds", seeds},
                     {"versions", {{"qapprox", std::string(kVersion)},
                                   {"report_format", std::string(kReportFormat)}}}};
  const fs::path side = out_dir / (fmt == ExportFormat::Table ? "table.json" : "curves.json");
  write_text_atomic(side, sidecar.dump(1) + "\n");
  written.push_back(side);
  return written;
}

}  // namespace qapprox::bench
