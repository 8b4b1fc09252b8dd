#include "dgks/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dgks {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SCFOptions scf_options(const RunConfig& c) {
  SCFOptions o;
  o.tolerance = c.scf.tolerance;
  o.max_iterations = c.scf.max_iterations;
  o.temperature = c.scf.temperature;
  o.mixing = c.scf.mixing;
  return o;
}

std::function<void(const SCFRecord&)> progress(std::ostream* log, const char* tag) {
  if (!log) return {};
  return [log, tag](const SCFRecord& r) {
    *log << tag << " scf " << std::setw(3) << r.iteration << "  residual " << std::scientific << std::setprecision(3)
         << r.residual << "  energy " << std::fixed << std::setprecision(10) << r.energy << std::defaultfloat
         << std::endl;
  };
}

json history_json(const std::vector<SCFRecord>& h) {
  json a = json::array();
  for (const auto& r : h) a.push_back({{"iteration", r.iteration}, {"residual", r.residual}, {"energy", r.energy}, {"mu", r.mu}});
  return a;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::uint64_t global_seed(std::uint64_t seed) { return seed * 2 + 1; }
std::uint64_t dg_seed(std::uint64_t seed) { return seed * 2 + 2; }

Problem build_problem(const RunConfig& config) {
  validate(config);
  Problem p;
  p.config = config;
  const Domain domain(config.domain_extents());
  const UniformGrid grid{Vec3::Zero(), domain.extents, config.grid_size()};
  p.model = KohnShamModel(domain, grid, resolve_atoms(config), config.hamiltonian);
  std::vector<Vec3> positions;
  for (const auto& a : p.model.atoms) positions.push_back(a.position);
  p.partition = build_partition(domain, config.partition, positions);
  if (!config.dg.basis_per_element.empty()) {
    p.basis_counts = config.dg.basis_per_element;
  } else {
    for (const Element& e : p.partition.elements) {
      p.basis_counts.push_back(config.dg.basis_per_atom * std::max<int>(1, static_cast<int>(e.atom_ids.size())));
    }
  }
  p.n_states = static_cast<int>(std::ceil(p.model.n_electrons - 1e-9)) + config.scf.extra_states;
  p.rho0 = atomic_density_guess(p.model.atoms, domain, grid);
  return p;
}

PipelineRun run_global(const Problem& problem, const RunHooks& hooks) {
  const auto t0 = std::chrono::steady_clock::now();
  GlobalSolverOptions o;
  o.n_states = problem.n_states;
  o.inner_iterations = problem.config.scf.inner_iterations;
  o.seed = global_seed(problem.config.seed);
  GlobalEigenStep step(problem.model, o);
  PipelineRun r;
  r.scf = scf_loop(step, problem.model, problem.rho0, scf_options(problem.config), progress(hooks.log, "global"));
  r.dimension = problem.model.grid.size();
  r.seconds = seconds_since(t0);
  return r;
}

PipelineRun run_dg(const Problem& problem, const RunHooks& hooks) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig& c = problem.config;
  DGOptions o;
  o.lgl_order = c.dg.lgl_order;
  o.buffer = c.buffer();
  o.basis_counts = problem.basis_counts;
  o.alpha = c.dg.alpha;
  o.svd_threshold = c.dg.svd_threshold;
  o.n_states = problem.n_states;
  o.inner_iterations = c.dg.inner_iterations;
  o.seed = dg_seed(c.seed);
  o.workers = c.workers;
  o.max_dimension = c.dg.max_dimension;
  DGEigenStep step(problem.model, problem.partition, o);
  PipelineRun r;
  r.scf = scf_loop(step, problem.model, problem.rho0, scf_options(c), progress(hooks.log, "dg"));
  r.dg_timings = step.timings();
  r.gram_history = step.gram_history();
  r.raw_density_integrals = step.raw_density_integrals();
  r.dimension = step.system().dimension();
  if (hooks.stiffness_out) *hooks.stiffness_out = step.system();
  r.seconds = seconds_since(t0);
  return r;
}

ComparisonReport run(const RunConfig& config, const RunHooks& hooks) {
  const auto t0 = std::chrono::steady_clock::now();
  const Problem problem = build_problem(config);
  ComparisonReport rep;
  rep.n_atoms = static_cast<int>(problem.model.atoms.size());
  rep.n_electrons = problem.model.n_electrons;
  if (config.mode == "global" || config.mode == "compare") {
    PipelineRun own;
    const PipelineRun* g = hooks.global_reference;
    if (!g) {
      own = run_global(problem, hooks);
      g = &own;
    }
    rep.e_glb = g->scf.energy.total;
    rep.glb_iterations = static_cast<int>(g->scf.history.size());
    rep.glb_converged = g->scf.converged;
    rep.glb_history = g->scf.history;
    rep.time_global = g->seconds;
  }
  if (config.mode == "dg" || config.mode == "compare") {
    const PipelineRun d = run_dg(problem, hooks);
    rep.e_dg = d.scf.energy.total;
    rep.dg_iterations = static_cast<int>(d.scf.history.size());
    rep.dg_converged = d.scf.converged;
    rep.dg_history = d.scf.history;
    rep.gram_history = d.gram_history;
    if (!d.raw_density_integrals.empty()) rep.dg_raw_density_integral = d.raw_density_integrals.back();
    rep.dg_dimension = d.dimension;
    rep.time_basis = d.dg_timings.basis;
    rep.time_assembly = d.dg_timings.assembly;
    rep.time_dg_eigensolve = d.dg_timings.eigensolve;
    rep.time_density = d.dg_timings.density;
    rep.time_dg = d.seconds;
  }
  if (rep.e_glb && rep.e_dg) {
    rep.error_per_atom_au = std::abs(*rep.e_glb - *rep.e_dg) / rep.n_atoms;
    rep.error_per_atom_mev = *rep.error_per_atom_au * kHartreeToMeV;
  }
  rep.time_total = seconds_since(t0);
  return rep;
}

json report_to_json(const ComparisonReport& r) {
  return {{"n_atoms", r.n_atoms},
          {"energies",
           {{"e_glb", optional_json(r.e_glb)},
            {"e_dg", optional_json(r.e_dg)},
            {"error_per_atom_au", optional_json(r.error_per_atom_au)},
            {"error_per_atom_mev", optional_json(r.error_per_atom_mev)}}},
          {"scf",
           {{"global", {{"iterations", r.glb_iterations}, {"converged", r.glb_converged}, {"history", history_json(r.glb_history)}}},
            {"dg", {{"iterations", r.dg_iterations}, {"converged", r.dg_converged}, {"history", history_json(r.dg_history)}}}}},
          {"n_electrons", r.n_electrons},
          {"dg_raw_density_integral", optional_json(r.dg_raw_density_integral)},
          {"dg_dimension", r.dg_dimension},
          {"gram_deviation", r.gram_history},
          {"timings",
           {{"basis_generation", r.time_basis},
            {"assembly", r.time_assembly},
            {"dg_eigensolve", r.time_dg_eigensolve},
            {"density", r.time_density},
            {"dg_total", r.time_dg},
            {"global_solve", r.time_global},
            {"total", r.time_total}}}};
}

std::string summary_text(const RunConfig& config, const ComparisonReport& r) {
  std::ostringstream s;
  s << std::setprecision(12);
  s << "mode            " << config.mode << "\n";
  s << "atoms           " << r.n_atoms << "\n";
  if (r.e_glb) s << "E_GLB (au)      " << *r.e_glb << "  (" << r.glb_iterations << " SCF iterations"
                 << (r.glb_converged ? "" : ", NOT converged") << ")\n";
  if (r.e_dg) s << "E_DG  (au)      " << *r.e_dg << "  (" << r.dg_iterations << " SCF iterations"
                << (r.dg_converged ? "" : ", NOT converged") << ", dimension " << r.dg_dimension << ")\n";
  if (r.error_per_atom_au) {
    s << std::scientific << std::setprecision(4);
    s << "error/atom      " << *r.error_per_atom_au << " au = " << *r.error_per_atom_mev << " meV\n";
  }
  s << std::fixed << std::setprecision(3);
  s << "time (s)        basis " << r.time_basis << ", assembly " << r.time_assembly << ", DG eigensolve "
    << r.time_dg_eigensolve << ", density " << r.time_density << ", global " << r.time_global << ", total "
    << r.time_total << "\n";
  return s.str();
}

void write_outputs(const std::filesystem::path& dir, const RunConfig& config, const ComparisonReport& report,
                   const DGSystem* stiffness) {
  std::filesystem::create_directories(dir);
  const json doc{{"config", config_to_json(config)}, {"report", report_to_json(report)}};
  std::ofstream(dir / "result.json") << doc.dump(2) << "\n";
  std::ofstream(dir / "summary.txt") << summary_text(config, report);
  if (stiffness && stiffness->dimension() > 0) {
    std::ofstream out(dir / "stiffness.bin", std::ios::binary);
    write_stiffness(out, *stiffness);
  }
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "jk") return SweepParameter::Jk;
  if (name == "buffer") return SweepParameter::Buffer;
  if (name == "alpha") return SweepParameter::Alpha;
  throw ConfigError("sweep parameter must be jk, buffer or alpha");
}

std::string sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::Jk: return "jk";
    case SweepParameter::Buffer: return "buffer";
    case SweepParameter::Alpha: return "alpha";
  }
  return "";
}

RunConfig with_parameter(const RunConfig& config, SweepParameter p, double value) {
  RunConfig c = config;
  c.mode = "compare";
  switch (p) {
    case SweepParameter::Jk:
      if (value < 1 || value != std::floor(value)) throw ConfigError("jk values must be positive integers");
      c.dg.basis_per_atom = static_cast<int>(value);
      c.dg.basis_per_element.clear();
      break;
    case SweepParameter::Buffer: {
      // Applied along every axis with more than one element; cell units with a lattice, au otherwise.
      Vec3 b = Vec3::Zero();
      for (int a = 0; a < 3; ++a)
        if (c.partition[a] > 1) b[a] = value;
      if (c.lattice) {
        c.dg.buffer_cells = b;
      } else {
        c.dg.buffer = b;
        c.dg.buffer_cells.reset();
      }
      break;
    }
    case SweepParameter::Alpha:
      c.dg.alpha = value;
      break;
  }
  return c;
}

std::optional<LogLogFit> fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double det = n * sxx - sx * sx;
  if (n < 2 || std::abs(det) < 1e-300) return std::nullopt;
  LogLogFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  f.points = n;
  return f;
}

SweepTable sweep(const RunConfig& config, SweepParameter parameter, const std::vector<double>& values,
                 const RunHooks& hooks) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepTable t;
  t.parameter = parameter;
  // Swept parameters only affect the DG pipeline, so one global solve serves every row.
  std::optional<PipelineRun> reference;
  if (hooks.global_reference) reference = *hooks.global_reference;
  for (double v : values) {
    SweepRow row;
    row.value = v;
    try {
      const RunConfig c = with_parameter(config, parameter, v);
      if (!reference) reference = run_global(build_problem(c), hooks);
      RunHooks h = hooks;
      h.global_reference = &*reference;
      h.stiffness_out = nullptr;
      row.report = run(c, h);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      if (hooks.log) *hooks.log << "sweep value " << v << " failed: " << e.what() << std::endl;
    }
    t.rows.push_back(std::move(row));
  }
  if (parameter == SweepParameter::Alpha) {
    std::vector<double> x, y;
    for (const auto& r : t.rows) {
      if (!r.ok || !r.report.dg_converged || !r.report.error_per_atom_au) continue;
      x.push_back(r.value);
      y.push_back(*r.report.error_per_atom_au);
    }
    t.fit = fit_loglog(x, y);
  }
  return t;
}

void write_sweep_table(std::ostream& out, const SweepTable& t) {
  out << sweep_parameter_name(t.parameter)
      << ",status,e_glb_au,e_dg_au,error_per_atom_au,error_per_atom_mev,dg_converged,dg_iterations,dg_dimension,"
         "time_basis,time_assembly,time_dg_eigensolve,time_density,time_global,time_total\n";
  out << std::setprecision(17);
  for (const auto& r : t.rows) {
    out << r.value << ",";
    if (!r.ok) {
      std::string msg = r.error;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ' ';
      out << "failed: " << msg << ",,,,,,,,,,,,,\n";
      continue;
    }
    const auto& p = r.report;
    out << "ok," << *p.e_glb << "," << *p.e_dg << "," << *p.error_per_atom_au << "," << *p.error_per_atom_mev << ","
        << (p.dg_converged ? 1 : 0) << "," << p.dg_iterations << "," << p.dg_dimension << "," << p.time_basis << ","
        << p.time_assembly << "," << p.time_dg_eigensolve << "," << p.time_density << "," << p.time_global << ","
        << p.time_total << "\n";
  }
}

void write_sweep(const std::filesystem::path& dir, const SweepTable& t) {
  std::filesystem::create_directories(dir);
  const std::string name = sweep_parameter_name(t.parameter);
  std::ofstream out(dir / ("sweep_" + name + ".csv"));
  write_sweep_table(out, t);
  if (t.fit) {
    const json fit{{"parameter", name}, {"slope", t.fit->slope}, {"intercept", t.fit->intercept}, {"points", t.fit->points}};
    std::ofstream(dir / ("sweep_" + name + "_fit.json")) << fit.dump(2) << "\n";
  }
}

}  // namespace dgks
