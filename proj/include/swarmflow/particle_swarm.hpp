#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "swarmflow/constitutive.hpp"
#include "swarmflow/torus_grid.hpp"

namespace swarmflow {

enum class SpaceMode { torus, whole_space };

struct ParticleState {
  int dim = 1;
  std::vector<Vec> x;
  std::vector<Vec> v;
  double t = 0.0;

  std::size_t size() const { return x.size(); }
};

struct SwarmConfig {
  double alpha = 0.0;
  bool self_propulsion = false;
  bool mean_field_scaling = true;
  Kernel K = zero_kernel(1);
  Kernel psi = zero_kernel(1);
  double dt = 1e-2;
  SpaceMode mode = SpaceMode::torus;
  /// Use cosine-series mode sums when both kernels provide one (torus mode only).
  bool allow_mode_sums = true;
};

struct ParticleRhs {
  std::vector<Vec> dx;
  std::vector<Vec> dv;
  /// Coincident pairs whose singular force was dropped.
  std::size_t singular_pairs = 0;
};

/// Wrap a point into [-1,1)^N.
Vec wrap_point(Vec x, int dim);

ParticleRhs particle_rhs(const ParticleState& s, const SwarmConfig& cfg);
/// O(n^2) pair loop regardless of kernel representation.
ParticleRhs particle_rhs_direct(const ParticleState& s, const SwarmConfig& cfg);

/// Classical RK4; positions wrapped afterwards in torus mode. Throws NumericalBlowUp.
ParticleState step_rk4(const ParticleState& s, const SwarmConfig& cfg);
ParticleState advance(ParticleState s, const SwarmConfig& cfg, double t_end);

struct Deposit {
  ScalarField rho;
  VectorField m;
};

/// Cloud-in-cell deposition, each particle carrying mass 1/n.
Deposit deposit(const ParticleState& s, const TorusGrid& grid);

struct FlockOptions {
  int max_iterations = 200000;
  std::uint64_t seed = 12345;
  /// Largest move per iteration relative to the nearest-neighbour distance.
  double max_relative_move = 0.25;
};

struct FlockResult {
  std::vector<Vec> x;
  int iterations = 0;
  double max_force = 0.0;
};

/// Overdamped flow dx_i/dtau = -(1/n) sum_j grad K(x_i - x_j) in whole space, with
/// Barzilai-Borwein pseudo-time steps. Positions come back sorted (lexicographically).
/// Throws ConvergenceFailure.
FlockResult relax_to_flock(const Kernel& K, int dim, int n, double tol, const FlockOptions& opt = {});

double velocity_diameter(const ParticleState& s);
Vec mean_velocity(const ParticleState& s);

/// Columns t, id, x1..xN, v1..vN.
void write_particles_csv(std::ostream& out, const ParticleState& s, bool header);

}  // namespace swarmflow
