#pragma once

// Command-line front end. Subcommands:
//   validate       structural + premise report for a system file
//   reduce         slow/fast reduced data, transforms, generator dump
//   exponent       lambda estimate for a chosen target
//   simulate       trajectory CSV along a signal
//   sweep          eps sweep of exponent estimates (CSV)
//   complementary  Prop-style closed-form checks on an M-set file
//   approx         two-scale approximation deviation report
//   example        built-in demo family: diagnostics, r-sweep, trajectory
//
// Exit codes: 0 success, 2 premise violations only, 1 errors. Every
// subcommand honors --dry-run (prints the plan, writes nothing). Reports are
// JSON with a schema_version field; tables are CSV. Timestamps only ever go
// to run_metadata.json so the analysis outputs stay byte-reproducible.
// SINGSTAB_LOG=error|warn|info|debug controls stderr logging.

#include "singstab/exponent_engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace singstab::cli {

inline constexpr const char* kSchemaVersion = "1";

struct RunConfig {
  std::string subcommand;
  std::string system_path;
  std::string signal_path;
  std::string mset_path;          // complementary input
  std::string out_dir = ".";
  bool dry_run = false;

  Target target = Target::SigmaEps;
  std::vector<double> eps_list = {1e-1, 1e-2, 1e-3};
  double eps = 1e-2;
  double mu = 0.0;
  std::optional<double> tau_override;
  int depth = 8;
  std::int64_t budget = 2'000'000;
  int n_max = 2;
  std::vector<double> s_grid;     // empty: default
  double grid_lo = 0.0;           // 0: dwell default
  double grid_hi = 50.0;
  int grid_per_decade = 24;
  bool forbid_self_switch = false;

  // simulate
  double t_end = 10.0;
  double dt_out = 0.01;
  std::vector<double> x0;         // empty: ones
  std::uint64_t seed = 1;

  // example
  double example_r = 0.45;
  std::string example_variant = "swapped";  // "printed" | "swapped" | "both"
  double sweep_lo = 0.30;
  double sweep_hi = 0.70;
  int sweep_steps = 41;

  // complementary
  int comp_l = 1;
  double comp_tau = 1.0;

  bool emit_svg = false;
};

/// Parse argv into a RunConfig. Returns nullopt when the invocation already
/// finished (e.g. --help) or failed; *exit_code is set accordingly.
std::optional<RunConfig> parse_args(int argc, const char* const* argv,
                                    int* exit_code, std::ostream& out,
                                    std::ostream& err);

/// Execute a parsed config. Returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace singstab::cli
