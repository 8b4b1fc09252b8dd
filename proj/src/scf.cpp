#include "dgks/scf.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace dgks {

namespace {

double fermi(double e, double mu, double kt) {
  const double x = (e - mu) / kt;
  if (x > 0.0) {
    const double ex = std::exp(-x);
    return ex / (1.0 + ex);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

Occupations fermi_occupations(const VectorX& eigenvalues, double n_electrons, double temperature) {
  const Eigen::Index n = eigenvalues.size();
  if (n_electrons > static_cast<double>(n) + 1e-12) {
    throw std::invalid_argument("more electrons than available states");
  }
  if (temperature < 0.0) throw std::invalid_argument("negative temperature");
  Occupations occ;
  occ.f = VectorX::Zero(n);
  if (temperature == 0.0) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return eigenvalues[a] < eigenvalues[b]; });
    double left = n_electrons;
    std::size_t last = 0;
    for (std::size_t i = 0; i < order.size() && left > 0.0; ++i) {
      occ.f[order[i]] = std::min(1.0, left);
      left -= occ.f[order[i]];
      last = i;
    }
    const double homo = eigenvalues[order[last]];
    occ.mu = (last + 1 < order.size()) ? 0.5 * (homo + eigenvalues[order[last + 1]]) : homo;
    return occ;
  }
  const double kt = kBoltzmannAu * temperature;
  double lo = eigenvalues.minCoeff() - 50.0 * kt - 1.0;
  double hi = eigenvalues.maxCoeff() + 50.0 * kt + 1.0;
  auto count = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += fermi(eigenvalues[i], mu, kt);
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count(mid) < n_electrons) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  occ.mu = 0.5 * (lo + hi);
  for (Eigen::Index i = 0; i < n; ++i) occ.f[i] = fermi(eigenvalues[i], occ.mu, kt);
  return occ;
}

DensityMixer::DensityMixer(MixingOptions options) : options_(options) {}

VectorX DensityMixer::mix(const VectorX& rho_in, const VectorX& rho_out) {
  const double a = options_.alpha;
  const int depth = options_.scheme == MixingScheme::Anderson ? options_.depth : 0;
  if (depth <= 0) return a * rho_in + (1.0 - a) * rho_out;

  VectorX residual = rho_out - rho_in;
  VectorX bar_in = rho_in;
  VectorX bar_out = rho_out;
  const Eigen::Index k = static_cast<Eigen::Index>(history_.size());
  if (k > 0) {
    MatrixX dres(rho_in.size(), k), drho(rho_in.size(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      dres.col(j) = residual - history_[static_cast<std::size_t>(j)].residual;
      drho.col(j) = rho_in - history_[static_cast<std::size_t>(j)].rho_in;
    }
    MatrixX g = dres.transpose() * dres;
    const double scale = g.diagonal().maxCoeff();
    if (scale > 0.0) {
      g.diagonal().array() += options_.ridge * scale;
      const VectorX gamma = g.ldlt().solve(dres.transpose() * residual);
      bar_in = rho_in - drho * gamma;
      bar_out = bar_in + (residual - dres * gamma);
    }
  }
  history_.push_front({rho_in, std::move(residual)});
  while (static_cast<int>(history_.size()) > depth) history_.pop_back();
  return a * bar_in + (1.0 - a) * bar_out;
}

SCFResult scf_loop(EigenStep& step, const KohnShamModel& model, const ScalarField& rho0,
                   const SCFOptions& options, const std::function<void(const SCFRecord&)>& on_iteration) {
  SCFResult result;
  DensityMixer mixer(options.mixing);
  ScalarField rho = rho0;
  const bool dependent = model.density_dependent();
  for (int n = 1; n <= options.max_iterations; ++n) {
    SCFState& s = result.state;
    s.iteration = n;
    s.rho_in = rho;
    s.v_eff = model.potential(rho);
    s.eigenvalues = step.solve(s.v_eff, !dependent);
    const Occupations occ = fermi_occupations(s.eigenvalues, model.n_electrons, options.temperature);
    s.occupations = occ.f;
    s.mu = occ.mu;
    s.rho_out = step.density(occ.f);
    if (!dependent) {
      // V_eff does not depend on rho: the output density is the fixed point.
      s.rho_in = s.rho_out;
      s.residual = 0.0;
    } else {
      s.residual = ScalarField(rho.grid, s.rho_in.values - s.rho_out.values).l2_norm();
    }
    result.energy = total_energy(s.eigenvalues, s.occupations, s.rho_in, model.n_electrons, model.options);
    SCFRecord rec{n, s.residual, result.energy.total, s.mu};
    result.history.push_back(rec);
    if (on_iteration) on_iteration(rec);
    if (s.residual <= options.tolerance) {
      result.converged = true;
      break;
    }
    rho = ScalarField(rho.grid, mixer.mix(s.rho_in.values, s.rho_out.values));
  }
  return result;
}

}  // namespace dgks
