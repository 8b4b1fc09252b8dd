#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "dgks/hamiltonian.hpp"

namespace dgks {

// One discretization of the linear eigenvalue problem at fixed V_eff. The SCF
// loop first asks for eigenvalues, chooses occupations, then asks for the
// corresponding output density.
class EigenStep {
 public:
  virtual ~EigenStep() = default;
  // `converge` requests a fully converged solve instead of the usual fixed
  // number of inner iterations.
  virtual VectorX solve(const EffectivePotential& v_eff, bool converge) = 0;
  virtual ScalarField density(const VectorX& occupations) = 0;
};

struct Occupations {
  VectorX f;
  double mu = 0.0;
};

// Fermi-Dirac filling with mu found by bisection; T == 0 gives step filling.
Occupations fermi_occupations(const VectorX& eigenvalues, double n_electrons, double temperature);

enum class MixingScheme { Linear, Anderson };

struct MixingOptions {
  MixingScheme scheme = MixingScheme::Anderson;
  int depth = 4;
  double alpha = 0.3;  // weight of the input density
  double ridge = 1e-12;
};

// rho_{n+1} = alpha * rho_in + (1 - alpha) * rho_out, applied after an
// Anderson extrapolation over the stored (rho_in, rho_out - rho_in) pairs.
class DensityMixer {
 public:
  explicit DensityMixer(MixingOptions options = {});
  VectorX mix(const VectorX& rho_in, const VectorX& rho_out);
  std::size_t history_size() const { return history_.size(); }
  void reset() { history_.clear(); }

 private:
  struct Pair {
    VectorX rho_in;
    VectorX residual;
  };
  MixingOptions options_;
  std::deque<Pair> history_;
};

struct SCFOptions {
  double tolerance = 1e-7;
  int max_iterations = 100;
  double temperature = 2000.0;
  MixingOptions mixing;
};

struct SCFRecord {
  int iteration = 0;
  double residual = 0.0;
  double energy = 0.0;
  double mu = 0.0;
};

struct SCFState {
  int iteration = 0;
  ScalarField rho_in;
  ScalarField rho_out;
  EffectivePotential v_eff;
  VectorX eigenvalues;
  VectorX occupations;
  double mu = 0.0;
  double residual = 0.0;
};

struct SCFResult {
  SCFState state;
  EnergyReport energy;
  std::vector<SCFRecord> history;
  bool converged = false;
};

SCFResult scf_loop(EigenStep& step, const KohnShamModel& model, const ScalarField& rho0,
                   const SCFOptions& options,
                   const std::function<void(const SCFRecord&)>& on_iteration = {});

}  // namespace dgks
