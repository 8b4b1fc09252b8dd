#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgks/hamiltonian.hpp"
#include "dgks/scf.hpp"

namespace dgks {

struct SpeciesConfig {
  std::string name;
  double depth = 3.5;
  double width = 1.0;
  double valence = 1.0;
  std::vector<ProjectorSpec> projectors;
};

struct AtomEntry {
  std::string species;
  Vec3 position = Vec3::Zero();  // Cartesian (explicit list) or fractional (lattice basis)
};

struct LatticeConfig {
  Vec3 cell = Vec3::Constant(7.994);
  std::vector<AtomEntry> basis;  // fractional coordinates
  Index3 repetitions{1, 1, 1};
  double displacement = 0.0;
  std::uint64_t seed = 1;
};

struct DGConfig {
  double alpha = 20.0;
  Vec3 buffer = Vec3::Zero();            // au
  std::optional<Vec3> buffer_cells;      // in units of the lattice cell, overrides buffer
  Index3 lgl_order{40, 40, 40};
  int basis_per_atom = 10;
  std::vector<int> basis_per_element;    // overrides basis_per_atom when nonempty
  double svd_threshold = 0.0;
  int inner_iterations = 3;
  long max_dimension = 20000;
};

struct SCFConfig {
  double tolerance = 1e-7;
  int max_iterations = 100;
  double temperature = 2000.0;
  MixingOptions mixing;
  int inner_iterations = 10;
  int extra_states = 4;
};

struct RunConfig {
  std::optional<Vec3> extents;  // defaults to cell * repetitions for lattices
  Index3 partition{1, 1, 1};
  std::vector<SpeciesConfig> species;
  std::vector<AtomEntry> atoms;
  std::optional<LatticeConfig> lattice;
  std::optional<Index3> grid_points;
  double grid_spacing = 0.4;
  HamiltonianOptions hamiltonian;
  DGConfig dg;
  SCFConfig scf;
  std::string mode = "compare";
  std::string output = "dgks_out";
  bool dump_stiffness = false;
  int workers = 1;
  std::uint64_t seed = 1;

  Vec3 domain_extents() const;
  Index3 grid_size() const;
  Vec3 buffer() const;
};

// Perfect lattice plus independent uniform displacements in [-amplitude, amplitude]
// per Cartesian coordinate, wrapped into the supercell.
std::vector<Vec3> generate_supercell(const Vec3& cell, const std::vector<Vec3>& fractional_basis,
                                     const Index3& repetitions, double amplitude, std::uint64_t seed);

// Expanded atom list with species parameters applied, in Cartesian coordinates.
std::vector<AtomSpec> resolve_atoms(const RunConfig& config);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

// Cross-field validation; throws ConfigError naming the offending field.
void validate(const RunConfig& config);

// Reads a configuration file, or the config echo of a result file.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

}  // namespace dgks
