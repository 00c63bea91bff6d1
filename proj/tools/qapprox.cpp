// Command-line front end for experiment sweeps.
//
//   qapprox run <config.json> [--fresh]
//   qapprox export <report.json> --format table|curves [--out DIR]
//   qapprox verify <report.json>
//
// QAPPROX_WORKERS sets the worker-pool size. Exit codes: 0 success,
// 1 failed cells or failed checks, 2 invalid input.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qapprox/bench.hpp"

namespace {

namespace bench = qapprox::bench;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInvalid = 2;

int cmd_run(const std::string& config_path, bool fresh) {
  bench::ExperimentConfig cfg;
  try {
    cfg = bench::load_config(config_path);
    bench::prepare_datasets(cfg);
  } catch (const bench::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kInvalid;
  }
  bench::RunOptions opt;
  opt.workers = qapprox::default_workers();
  opt.resume = !fresh;
  opt.log = &std::cout;
  if (fresh) std::filesystem::remove(bench::report_path(cfg));

  const bench::RunOutcome out = bench::run_experiment(cfg, opt);
  std::cout << "report: " << out.report_path.string() << "  (" << out.computed << " computed, "
            << out.resumed << " resumed, " << out.report.failures.size() << " failed)\n";
  for (const auto& f : out.report.failures) {
    std::cerr << "failed: " << bench::cell_key(f.target, f.family, f.layers) << ": " << f.message
              << "\n";
  }
  return out.ok() ? kOk : kFailed;
}

int cmd_export(const std::string& report_path, const std::string& format, std::string out_dir) {
  bench::ExportFormat fmt;
  try {
    fmt = bench::parse_export_format(format);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  }
  const bench::Report rep = bench::load_report(report_path);
  if (out_dir.empty()) out_dir = std::filesystem::path(report_path).parent_path().string();
  if (out_dir.empty()) out_dir = ".";
  for (const auto& p : bench::export_report(rep, fmt, out_dir)) std::cout << p.string() << "\n";
  return rep.failures.empty() ? kOk : kFailed;
}

int cmd_verify(const std::string& report_path) {
  const bench::Report rep = bench::load_report(report_path);
  const bench::Verification v = bench::verify_report(rep);
  std::cout << (v.hash_ok ? "ok  " : "BAD ") << "config hash " << rep.config_hash << "\n";
  for (const auto& c : v.checks) {
    std::cout << (c.ok ? "ok  " : "BAD ") << c.key << "  stored=" << bench::format_double(c.stored)
              << "  recomputed=" << bench::format_double(c.recomputed) << "\n";
  }
  for (const auto& f : rep.failures) {
    std::cout << "MISSING " << bench::cell_key(f.target, f.family, f.layers) << ": " << f.message
              << "\n";
  }
  return v.ok() && rep.failures.empty() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-qubit re-uploading approximation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  bool fresh = false;
  auto* run = app.add_subcommand("run", "Run a sweep described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_flag("--fresh", fresh, "Ignore an existing report instead of resuming it");

  std::string report_path, format, out_dir;
  auto* exp = app.add_subcommand("export", "Write CSV tables or fit curves from a report");
  exp->add_option("report", report_path, "Report file")->required();
  exp->add_option("--format", format, "table or curves")->required();
  exp->add_option("--out", out_dir, "Output directory (default: the report's directory)");

  auto* ver = app.add_subcommand("verify", "Re-evaluate every stored fit");
  ver->add_option("report", report_path, "Report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(config_path, fresh);
    if (*exp) return cmd_export(report_path, format, out_dir);
    if (*ver) return cmd_verify(report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kInvalid;
}
