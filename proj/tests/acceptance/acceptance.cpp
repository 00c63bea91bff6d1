// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qapprox/qapprox.hpp"

using namespace qapprox;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qapprox_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<double> grid50(double lo, double hi) {
  std::vector<double> xs(50);
  for (int k = 0; k < 50; ++k) xs[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / 49.0;
  return xs;
}

// --- 1 ---------------------------------------------------------------------
Outcome series_fourier() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 5; ++n) {
    // N+1 gates: a constant gate followed by N gates on a shared frequency.
    const CircuitModel model = CircuitModel::fourier(n + 1);
    for (int draw = 0; draw < 100; ++draw) {
      const double w = uniform(rng, 0.1, 5.0);
      std::vector<double> v;
      std::vector<FourierParams> gates;
      for (std::size_t g = 0; g <= n; ++g) {
        const double omega = g == 0 ? 0.0 : (rng() % 2 ? w : -w);
        FourierParams p{omega, uniform(rng, -kPi, kPi), uniform(rng, -kPi, kPi), uniform(rng, -kPi, kPi),
                        uniform(rng, -kPi, kPi)};
        gates.push_back(p);
        v.insert(v.end(), {p.omega, p.alpha, p.beta, p.phi, p.lambda});
      }
      const FourierTable table = fourier_expansion(gates);
      const ParameterVector params(model, v);
      for (double x : grid50(-1.0, 1.0)) {
        const double err = std::abs(series_eval(table, x) - amplitude_10(model, params, std::vector<double>{x}));
        worst = std::max(worst, err);
      }
    }
  }
  return {worst < 1e-9, "max |series - <1|U|0>| = " + sci(worst)};
}

// --- 2 ---------------------------------------------------------------------
Outcome series_uat() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (std::size_t m = 1; m <= 2; ++m) {
    for (std::size_t n = 1; n <= 5; ++n) {
      const CircuitModel model = CircuitModel::uat(n, m);
      for (int draw = 0; draw < 100; ++draw) {
        std::vector<double> v;
        std::vector<UatParams> gates;
        for (std::size_t g = 0; g < n; ++g) {
          UatParams p;
          for (std::size_t j = 0; j < m; ++j) p.omega.push_back(uniform(rng, -3, 3));
          p.alpha = uniform(rng, -kPi, kPi);
          p.phi = uniform(rng, -kPi, kPi);
          v.insert(v.end(), p.omega.begin(), p.omega.end());
          v.insert(v.end(), {p.alpha, p.phi});
          gates.push_back(std::move(p));
        }
        const UatExpansion e = uat_expansion(gates);
        const ParameterVector params(model, v);
        for (double t : grid50(-1.0, 1.0)) {
          std::vector<double> x{t};
          if (m == 2) x.push_back(uniform(rng, -1, 1));
          worst = std::max(worst, std::abs(series_eval(e, x) - amplitude_10(model, params, x)));
        }
      }
    }
  }
  return {worst < 1e-9, "max |series - <1|U|0>| = " + sci(worst)};
}

// --- 3 ---------------------------------------------------------------------
Outcome gradients() {
  std::mt19937_64 rng(3);
  const GridSpec grid = GridSpec::line(31);
  const Dataset real = make_dataset(prepare_target("tanh5", grid), grid);
  const Dataset cplx = make_dataset(make_complex("tanh5", "relu"), grid);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t layers = 1 + static_cast<std::size_t>(k % 4);
    const bool fourier = (k / 4) % 2 == 0;
    const Benchmark b = (k / 8) % 2 == 0 ? Benchmark::Z : Benchmark::XY;
    const CircuitModel m = fourier ? CircuitModel::fourier(layers) : CircuitModel::uat(layers);
    const CircuitLoss loss(m, b == Benchmark::Z ? real : cplx, b);
    std::vector<double> p(m.parameter_count());
    for (double& v : p) v = uniform(rng, -kPi, kPi);
    const Vector ps = loss.gradient(p, GradientMethod::ParameterShift);
    const Vector fd = loss.gradient(p, GradientMethod::FiniteDiff);
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      scale = std::max(scale, std::abs(ps[i]));
      err = std::max(err, std::abs(ps[i] - fd[i]));
    }
    worst = std::max(worst, err / std::max(scale, 1e-300));
  }
  return {worst < 1e-5, "max relative error = " + sci(worst)};
}

// --- 4 ---------------------------------------------------------------------
Outcome fourier_oracle() {
  const FourierSeries s = fourier_fit([](double x) { return Complex(x); }, -1.0, 1.0, 10, 10000);
  double worst = std::abs(s.c(0));
  for (int n = 1; n <= 10; ++n) {
    const Complex expected{0.0, (n % 2 ? -1.0 : 1.0) / (n * kPi)};
    worst = std::max({worst, std::abs(s.c(n) - expected), std::abs(s.c(-n) - std::conj(expected))});
  }
  return {worst < 1e-6, "max |c_n - i(-1)^n/(n pi)| = " + sci(worst)};
}

bench::Report sweep(const std::string& name, const std::string& config_text) {
  bench::json j = bench::json::parse(config_text);
  j["output_dir"] = scratch_dir(name).string();
  const bench::ExperimentConfig c = bench::ExperimentConfig::from_json(j);
  bench::RunOptions opt;
  opt.workers = default_workers();
  bench::RunOutcome out = bench::run_experiment(c, opt);
  if (!out.ok()) throw std::runtime_error(name + ": sweep had failed cells");
  return out.report;
}

double chi2_of(const bench::Report& rep, const std::string& target, bench::Family f, std::size_t layers) {
  for (const auto& r : rep.records) {
    if (r.target == target && r.family == f && r.layers == layers) return r.chi2;
  }
  throw std::runtime_error("missing record " + bench::cell_key(target, f, layers));
}

// --- 5 ---------------------------------------------------------------------
Outcome layer_trend() {
  const bench::Report rep = sweep("ac5", R"({"targets": ["tanh5", "relu"], "families": ["uat"],
                                             "layers": [1, 6], "benchmark": "Z", "restarts": 10, "seed": 5})");
  bool pass = true;
  std::ostringstream detail;
  for (const char* t : {"tanh5", "relu"}) {
    std::vector<double> c;
    for (std::size_t l = 1; l <= 6; ++l) c.push_back(chi2_of(rep, t, bench::Family::Uat, l));
    const double factor = c[0] / c[5];
    bool monotone = true;
    for (std::size_t l = 1; l < c.size(); ++l) monotone = monotone && c[l] <= 1.1 * c[l - 1];
    pass = pass && factor >= 10.0 && monotone;
    detail << t << ": chi2 L1..6 =";
    for (double v : c) detail << ' ' << sci(v);
    detail << ", L1/L6 = " << sci(factor) << (monotone ? ", monotone" : ", NOT monotone") << "; ";
  }
  return {pass, detail.str()};
}

// --- 6 ---------------------------------------------------------------------
Outcome quantum_vs_classical_fourier() {
  const bench::Report rep = sweep("ac6", R"({"targets": ["relu"], "families": ["fourier", "classical_fourier"],
                                             "layers": 3, "benchmark": "Z", "restarts": 10, "seed": 6})");
  const double q = chi2_of(rep, "relu", bench::Family::Fourier, 3);
  const double c = chi2_of(rep, "relu", bench::Family::ClassicalFourier, 3);
  return {q <= c, "quantum " + sci(q) + " vs classical " + sci(c)};
}

// --- 7 ---------------------------------------------------------------------
Outcome complex_trend() {
  const bench::Report rep = sweep("ac7", R"({"targets": ["tanh5+i*relu"], "families": ["uat"],
                                             "layers": [1, 5], "benchmark": "XY", "restarts": 10, "seed": 7})");
  const double one = chi2_of(rep, "tanh5+i*relu", bench::Family::Uat, 1);
  const double five = chi2_of(rep, "tanh5+i*relu", bench::Family::Uat, 5);
  return {five < 0.5 * one, "L1 " + sci(one) + ", L5 " + sci(five) + ", ratio " + sci(five / one)};
}

// --- 8 ---------------------------------------------------------------------
Outcome himmelblau_trend() {
  const bench::Report rep = sweep("ac8", R"({"targets": ["himmelblau"], "families": ["uat"],
                                             "layers": [1, 5], "benchmark": "Z", "restarts": 10, "seed": 8})");
  const double one = chi2_of(rep, "himmelblau", bench::Family::Uat, 1);
  const double five = chi2_of(rep, "himmelblau", bench::Family::Uat, 5);
  return {five < one, "L1 " + sci(one) + ", L5 " + sci(five)};
}

// --- 9 ---------------------------------------------------------------------
Outcome shot_floor() {
  // A constant target is exactly representable by one UAT layer.
  Dataset data;
  data.meta.bounds = {{-1.0, 1.0}};
  data.meta.shape = {101};
  for (const auto& x : grid_points(data.meta.bounds, GridSpec::line(101))) data.points.push_back({x, Complex(0.5)});
  const CircuitModel model = CircuitModel::uat(1);
  FitSettings s;
  s.restarts = 10;
  s.seed = 9;
  const FitResult fit = fit_circuit(model, data, Benchmark::Z, s);
  const ParameterVector params(model, fit.best_params);

  const std::size_t shots = 50000;
  const double exact = chi2(model, params, data, Benchmark::Z);
  const double floor = exact + shot_noise_floor(model, params, data, Benchmark::Z, shots);
  const double sampled = sampled_chi2(model, params, data, Benchmark::Z, {shots, 99});
  const bool within = sampled > 0.0 && sampled > floor / 3.0 && sampled < floor * 3.0;

  // Spread of the single-point estimator against the shot count.
  const State2 state = encode_state(model, params, data.points[0].x);
  std::vector<double> lx, ly;
  for (std::size_t n : {100, 1000, 10000}) {
    Rng rng(derive_seed(9, n));
    double sum = 0.0, sq = 0.0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
      const double v = sample_expectation(state, Observable::Z, n, rng);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / reps;
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(0.5 * std::log((sq - reps * mean * mean) / (reps - 1)));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (lx[static_cast<std::size_t>(i)] - mx) * (ly[static_cast<std::size_t>(i)] - my);
    den += (lx[static_cast<std::size_t>(i)] - mx) * (lx[static_cast<std::size_t>(i)] - mx);
  }
  const double slope = num / den;
  const bool slope_ok = std::abs(slope + 0.5) <= 0.1;
  return {within && slope_ok, "exact " + sci(exact) + ", sampled " + sci(sampled) + ", floor " + sci(floor) +
                                  ", ratio " + sci(sampled / floor) + ", slope " + sci(slope)};
}

// --- 10 --------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = scratch_dir("ac10");
  fs::create_directories(root);
  const std::string body =
      R"({"targets": ["tanh5", "relu", "adjiman"], "families": ["uat", "classical_uat"],
          "layers": [1, 3], "restarts": 3, "seed": 10, "shots": 2000, "output_dir": ")";
  std::vector<fs::path> outs;
  int worker_count = 1;
  for (const char* name : {"first", "second"}) {
    const fs::path cfg = root / (std::string(name) + ".json");
    std::ofstream(cfg) << body << (root / name).string() << "\"}";
    const std::string cmd = "QAPPROX_WORKERS=" + std::to_string(worker_count) + " \"" QAPPROX_CLI_PATH "\" run " +
                            cfg.string() + " > /dev/null 2>&1 && \"" QAPPROX_CLI_PATH "\" export " +
                            (root / name / "report.json").string() + " --format table > /dev/null 2>&1 && \"" +
                            QAPPROX_CLI_PATH "\" export " + (root / name / "report.json").string() +
                            " --format curves > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run/export failed for " + std::string(name)};
    outs.push_back(root / name);
    worker_count = 3;
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(outs[0])) {
    if (!e.is_regular_file() || e.path().filename() == "timings.json") continue;
    const fs::path other = outs[1] / fs::relative(e.path(), outs[0]);
    if (slurp(e.path()) != slurp(other)) return {false, "files differ: " + fs::relative(e.path(), outs[0]).string()};
    ++compared;
  }
  return {compared > 2, std::to_string(compared) + " report/export files byte-identical (workers 1 vs 3)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Fourier gate series equals circuit amplitude", 10, series_fourier},
      {2, "UAT gate series equals circuit amplitude", 10, series_uat},
      {3, "parameter-shift gradient matches finite differences", 30, gradients},
      {4, "classical Fourier coefficients of f(x)=x", 5, fourier_oracle},
      {5, "UAT layer-capacity trend on tanh5 and relu", 600, layer_trend},
      {6, "quantum Fourier beats classical truncated Fourier on relu", 300, quantum_vs_classical_fourier},
      {7, "complex fit tanh5+i*relu improves with depth", 600, complex_trend},
      {8, "Himmelblau 2D fit improves with depth", 900, himmelblau_trend},
      {9, "shot-noise floor and 1/sqrt(shots) scaling", 120, shot_floor},
      {10, "end-to-end determinism of report files", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] AC%d %s: %s (%.1f s of %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
