#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dgks/config.hpp"
#include "dgks/dg.hpp"
#include "dgks/reference_solver.hpp"

namespace dgks {

// Everything derived from a RunConfig that both pipelines share.
struct Problem {
  RunConfig config;
  KohnShamModel model;
  Partition partition;
  std::vector<int> basis_counts;  // J_k per element
  int n_states = 0;
  ScalarField rho0;
};

Problem build_problem(const RunConfig& config);

// Pipeline seeds derived from the run seed; never equal to each other.
std::uint64_t global_seed(std::uint64_t seed);
std::uint64_t dg_seed(std::uint64_t seed);

struct PipelineRun {
  SCFResult scf;
  double seconds = 0.0;
  DGTimings dg_timings;              // DG only
  std::vector<double> gram_history;  // DG only
  std::vector<double> raw_density_integrals;  // DG only, before renormalization
  Eigen::Index dimension = 0;        // DG matrix size, or global grid size
};

struct RunHooks {
  std::ostream* log = nullptr;              // per-iteration progress
  const PipelineRun* global_reference = nullptr;  // reuse instead of recomputing E_GLB
  DGSystem* stiffness_out = nullptr;        // receives the final DG matrix
};

PipelineRun run_global(const Problem& problem, const RunHooks& hooks = {});
PipelineRun run_dg(const Problem& problem, const RunHooks& hooks = {});

struct ComparisonReport {
  int n_atoms = 0;
  std::optional<double> e_glb;
  std::optional<double> e_dg;
  std::optional<double> error_per_atom_au;
  std::optional<double> error_per_atom_mev;
  int glb_iterations = 0;
  int dg_iterations = 0;
  bool glb_converged = false;
  bool dg_converged = false;
  std::vector<SCFRecord> glb_history;
  std::vector<SCFRecord> dg_history;
  std::vector<double> gram_history;
  double n_electrons = 0.0;
  std::optional<double> dg_raw_density_integral;  // final SCF iteration, before renormalization
  Eigen::Index dg_dimension = 0;
  double time_basis = 0.0;
  double time_assembly = 0.0;
  double time_dg_eigensolve = 0.0;
  double time_density = 0.0;
  double time_global = 0.0;
  double time_dg = 0.0;
  double time_total = 0.0;
};

// Executes config.mode. Outputs are not written; see write_outputs.
ComparisonReport run(const RunConfig& config, const RunHooks& hooks = {});

nlohmann::json report_to_json(const ComparisonReport& report);
std::string summary_text(const RunConfig& config, const ComparisonReport& report);
// Writes result.json and summary.txt (and stiffness.bin when given) to `dir`.
void write_outputs(const std::filesystem::path& dir, const RunConfig& config, const ComparisonReport& report,
                   const DGSystem* stiffness = nullptr);

enum class SweepParameter { Jk, Buffer, Alpha };
SweepParameter parse_sweep_parameter(const std::string& name);
std::string sweep_parameter_name(SweepParameter p);
// Returns a copy of `config` with the swept value applied.
RunConfig with_parameter(const RunConfig& config, SweepParameter p, double value);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  ComparisonReport report;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

struct SweepTable {
  SweepParameter parameter = SweepParameter::Jk;
  std::vector<SweepRow> rows;
  std::optional<LogLogFit> fit;  // alpha sweeps only
};

// Least-squares line through (log x, log y) over entries with x, y > 0.
std::optional<LogLogFit> fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

SweepTable sweep(const RunConfig& config, SweepParameter parameter, const std::vector<double>& values,
                 const RunHooks& hooks = {});
void write_sweep_table(std::ostream& out, const SweepTable& table);
void write_sweep(const std::filesystem::path& dir, const SweepTable& table);

}  // namespace dgks
