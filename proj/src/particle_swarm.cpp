#include "swarmflow/particle_swarm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "swarmflow/errors.hpp"

namespace swarmflow {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_coord(double x) {
  double y = x - kPeriod * std::floor((x + 1.0) / kPeriod);
  if (y >= 1.0) y -= kPeriod;
  return y;
}

Vec pair_displacement(const Vec& a, const Vec& b, int dim, SpaceMode mode) {
  Vec z{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    z[d] = a[d] - b[d];
    if (mode == SpaceMode::torus) z[d] = wrap_coord(z[d]);
  }
  return z;
}

void add_self_propulsion(const ParticleState& s, const SwarmConfig& cfg, ParticleRhs& r) {
  if (!cfg.self_propulsion) return;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = 1.0 - cfg.alpha * norm2(s.v[i]);
    for (int d = 0; d < s.dim; ++d) r.dv[i][d] += f * s.v[i][d];
  }
}

ParticleRhs make_rhs(const ParticleState& s) {
  ParticleRhs r;
  r.dx = s.v;
  r.dv.assign(s.size(), Vec{0.0, 0.0, 0.0});
  return r;
}

bool has_series(const Kernel& k) { return k.zero || !k.trig.empty(); }

}  // namespace

Vec wrap_point(Vec x, int dim) {
  for (int d = 0; d < dim; ++d) x[d] = wrap_coord(x[d]);
  return x;
}

ParticleRhs particle_rhs_direct(const ParticleState& s, const SwarmConfig& cfg) {
  if (s.size() == 0) throw Error("particle_rhs: empty swarm");
  ParticleRhs r = make_rhs(s);
  const std::size_t n = s.size();
  const int dim = s.dim;
  const double w = cfg.mean_field_scaling ? 1.0 / static_cast<double>(n) : 1.0;
  const bool use_k = !cfg.K.zero;
  const bool use_psi = !cfg.psi.zero;
  std::size_t singular = 0;
  if (use_k || use_psi) {
#pragma omp parallel for schedule(static) reduction(+ : singular)
    for (std::size_t i = 0; i < n; ++i) {
      Vec acc{0.0, 0.0, 0.0};
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vec z = pair_displacement(s.x[i], s.x[j], dim, cfg.mode);
        if (use_k) {
          if (cfg.K.singular && norm2(z) == 0.0) {
            ++singular;
          } else {
            const Vec g = cfg.K.gradient(z);
            for (int d = 0; d < dim; ++d) acc[d] -= g[d];
          }
        }
        if (use_psi) {
          const double p = cfg.psi.value(z);
          for (int d = 0; d < dim; ++d) acc[d] += p * (s.v[j][d] - s.v[i][d]);
        }
      }
      for (int d = 0; d < dim; ++d) r.dv[i][d] = w * acc[d];
    }
  }
  r.singular_pairs = singular;
  add_self_propulsion(s, cfg, r);
  return r;
}

ParticleRhs particle_rhs(const ParticleState& s, const SwarmConfig& cfg) {
  const bool series = cfg.allow_mode_sums && cfg.mode == SpaceMode::torus && has_series(cfg.K) &&
                      has_series(cfg.psi);
  if (!series) return particle_rhs_direct(s, cfg);
  if (s.size() == 0) throw Error("particle_rhs: empty swarm");

  ParticleRhs r = make_rhs(s);
  const std::size_t n = s.size();
  const int dim = s.dim;
  const double w = cfg.mean_field_scaling ? 1.0 / static_cast<double>(n) : 1.0;
  std::vector<double> c(n), sn(n);
  auto phases = [&](const TrigTerm& t) {
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
      const double ph = kPi * (t.m[0] * s.x[j][0] + t.m[1] * s.x[j][1] + t.m[2] * s.x[j][2]);
      c[j] = std::cos(ph);
      sn[j] = std::sin(ph);
    }
  };

  if (!cfg.K.zero) {
    for (const auto& t : cfg.K.trig) {
      if (t.m == std::array<int, 3>{0, 0, 0}) continue;
      phases(t);
      double csum = 0.0, ssum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        csum += c[j];
        ssum += sn[j];
      }
      // -sum_j grad K(x_i - x_j) = sum_t a pi m (s_i C - c_i S)
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        const double f = w * t.coef * kPi * (sn[i] * csum - c[i] * ssum);
        for (int d = 0; d < dim; ++d) r.dv[i][d] += f * t.m[d];
      }
    }
  }
  if (!cfg.psi.zero) {
    for (const auto& t : cfg.psi.trig) {
      phases(t);
      double csum = 0.0, ssum = 0.0;
      Vec cv{0.0, 0.0, 0.0}, sv{0.0, 0.0, 0.0};
      for (std::size_t j = 0; j < n; ++j) {
        csum += c[j];
        ssum += sn[j];
        for (int d = 0; d < dim; ++d) {
          cv[d] += c[j] * s.v[j][d];
          sv[d] += sn[j] * s.v[j][d];
        }
      }
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        const double mass = c[i] * csum + sn[i] * ssum;
        for (int d = 0; d < dim; ++d)
          r.dv[i][d] += w * t.coef * (c[i] * cv[d] + sn[i] * sv[d] - mass * s.v[i][d]);
      }
    }
  }
  add_self_propulsion(s, cfg, r);
  return r;
}

ParticleState step_rk4(const ParticleState& s, const SwarmConfig& cfg) {
  const std::size_t n = s.size();
  const int dim = s.dim;
  const double dt = cfg.dt;
  if (!(dt > 0.0)) throw Error("step_rk4: dt must be positive");
  auto stage = [&](const ParticleRhs& k, double f) {
    ParticleState y = s;
    for (std::size_t i = 0; i < n; ++i)
      for (int d = 0; d < dim; ++d) {
        y.x[i][d] += f * dt * k.dx[i][d];
        y.v[i][d] += f * dt * k.dv[i][d];
      }
    return y;
  };
  const ParticleRhs k1 = particle_rhs(s, cfg);
  const ParticleRhs k2 = particle_rhs(stage(k1, 0.5), cfg);
  const ParticleRhs k3 = particle_rhs(stage(k2, 0.5), cfg);
  const ParticleRhs k4 = particle_rhs(stage(k3, 1.0), cfg);
  ParticleState out = s;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) {
      out.x[i][d] += dt / 6.0 * (k1.dx[i][d] + 2.0 * k2.dx[i][d] + 2.0 * k3.dx[i][d] + k4.dx[i][d]);
      out.v[i][d] += dt / 6.0 * (k1.dv[i][d] + 2.0 * k2.dv[i][d] + 2.0 * k3.dv[i][d] + k4.dv[i][d]);
      if (!std::isfinite(out.x[i][d]) || !std::isfinite(out.v[i][d])) {
        std::ostringstream msg;
        msg << "particle " << i << " became non-finite at t = " << s.t + dt;
        throw NumericalBlowUp(msg.str());
      }
    }
    if (cfg.mode == SpaceMode::torus) out.x[i] = wrap_point(out.x[i], dim);
  }
  out.t = s.t + dt;
  return out;
}

ParticleState advance(ParticleState s, const SwarmConfig& cfg, double t_end) {
  const long steps = std::lround((t_end - s.t) / cfg.dt);
  for (long k = 0; k < steps; ++k) s = step_rk4(s, cfg);
  return s;
}

Deposit deposit(const ParticleState& s, const TorusGrid& grid) {
  if (s.dim != grid.dim()) throw GridMismatch("deposit: particle and grid dimensions differ");
  ScalarField rho(grid);
  VectorField m(grid);
  const int dim = grid.dim();
  const double h = grid.spacing();
  const double q = 1.0 / (static_cast<double>(s.size()) * grid.cell_volume());
  const int corners = 1 << dim;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const Vec x = wrap_point(s.x[p], dim);
    std::array<int, 3> base{0, 0, 0};
    Vec frac{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
      const double u = (x[d] + 1.0) / h - 0.5;
      const double fl = std::floor(u);
      base[d] = static_cast<int>(fl);
      frac[d] = u - fl;
    }
    for (int c = 0; c < corners; ++c) {
      std::array<int, 3> idx = base;
      double wgt = q;
      for (int d = 0; d < dim; ++d) {
        if (c & (1 << d)) {
          idx[d] += 1;
          wgt *= frac[d];
        } else {
          wgt *= 1.0 - frac[d];
        }
      }
      if (wgt == 0.0) continue;
      const std::size_t cell = grid.flatten(idx);
      rho[cell] += wgt;
      for (int d = 0; d < dim; ++d) m.component(d)[cell] += wgt * s.v[p][d];
    }
  }
  return {std::move(rho), std::move(m)};
}

namespace {

// grad K(z) = z * radial(|z|^2) for the inlined forms
template <KernelForm F>
inline double radial(double r2) {
  if constexpr (F == KernelForm::quadratic) return 1.0;
  else return 1.0 - 1.0 / r2;
}

template <KernelForm F>
void flock_forces_inline(int dim, const std::vector<Vec>& x, std::vector<Vec>& f,
                         std::vector<double>& nn) {
  const std::size_t n = x.size();
  const double w = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    double best = std::numeric_limits<double>::infinity();
    const double xi0 = x[i][0], xi1 = x[i][1], xi2 = x[i][2];
    for (std::size_t j = 0; j < n; ++j) {
      const double z0 = xi0 - x[j][0], z1 = xi1 - x[j][1], z2 = xi2 - x[j][2];
      const double r2 = z0 * z0 + z1 * z1 + z2 * z2;
      if (j == i || r2 == 0.0) {
        if (j != i) best = 0.0;
        continue;
      }
      best = std::min(best, r2);
      const double g = radial<F>(r2);
      a0 -= g * z0;
      a1 -= g * z1;
      a2 -= g * z2;
    }
    f[i] = {w * a0, dim > 1 ? w * a1 : 0.0, dim > 2 ? w * a2 : 0.0};
    nn[i] = std::sqrt(best);
  }
}

// Force -(1/n) sum_j grad K(x_i - x_j) and nearest-neighbour distances.
void flock_forces(const Kernel& K, int dim, const std::vector<Vec>& x, std::vector<Vec>& f,
                  std::vector<double>& nn) {
  if (K.form == KernelForm::quadratic_log)
    return flock_forces_inline<KernelForm::quadratic_log>(dim, x, f, nn);
  if (K.form == KernelForm::quadratic) return flock_forces_inline<KernelForm::quadratic>(dim, x, f, nn);
  const std::size_t n = x.size();
  const double w = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    Vec acc{0.0, 0.0, 0.0};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec z{x[i][0] - x[j][0], x[i][1] - x[j][1], x[i][2] - x[j][2]};
      const double r2 = norm2(z);
      best = std::min(best, r2);
      if (r2 == 0.0) continue;
      const Vec g = K.gradient(z);
      for (int d = 0; d < dim; ++d) acc[d] -= g[d];
    }
    for (int d = 0; d < dim; ++d) f[i][d] = w * acc[d];
    nn[i] = std::sqrt(best);
  }
}

std::vector<Vec> initial_layout(int dim, int n, std::uint64_t seed) {
  std::vector<Vec> x(n, Vec{0.0, 0.0, 0.0});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  if (dim == 1) {
    for (int i = 0; i < n; ++i) x[i][0] = -1.0 + (i + 0.5 + jitter(rng)) * 2.0 / n;
  } else if (dim == 2) {
    // sunflower spiral on the unit disc
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double r = std::sqrt((i + 0.5) / n);
      const double th = i * golden + 0.1 * jitter(rng);
      x[i] = {r * std::cos(th), r * std::sin(th), 0.0};
    }
  } else {
    std::normal_distribution<double> g(0.0, 0.5);
    for (auto& p : x) p = {g(rng), g(rng), g(rng)};
  }
  return x;
}

}  // namespace

FlockResult relax_to_flock(const Kernel& K, int dim, int n, double tol, const FlockOptions& opt) {
  if (n < 2) throw Error("relax_to_flock needs at least two particles");
  std::vector<Vec> x = initial_layout(dim, n, opt.seed);
  std::vector<Vec> f(n), f_old(n), x_old(n);
  std::vector<double> nn(n);
  flock_forces(K, dim, x, f, nn);

  auto max_force = [&] {
    double m = 0.0;
    for (const auto& fi : f) m = std::max(m, std::sqrt(norm2(fi)));
    return m;
  };

  double tau = 1e-2;
  FlockResult res;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double fmax = max_force();
    if (fmax <= tol) {
      res.iterations = it;
      res.max_force = fmax;
      std::sort(x.begin(), x.end());
      res.x = std::move(x);
      return res;
    }
    // cap the move against the local particle spacing
    double step = tau;
    for (int i = 0; i < n; ++i) {
      const double fi = std::sqrt(norm2(f[i]));
      if (fi * step > opt.max_relative_move * nn[i]) step = opt.max_relative_move * nn[i] / fi;
    }
    x_old = x;
    f_old = f;
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < dim; ++d) x[i][d] += step * f[i][d];
    flock_forces(K, dim, x, f, nn);
    // Barzilai-Borwein: s = dx, y = -(f - f_old)
    double ss = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < dim; ++d) {
        const double s = x[i][d] - x_old[i][d];
        const double y = f_old[i][d] - f[i][d];
        ss += s * s;
        sy += s * y;
      }
    tau = sy > 0.0 ? ss / sy : 2.0 * step;
  }
  throw ConvergenceFailure("relax_to_flock: max force " + std::to_string(max_force()) +
                           " above tolerance after " + std::to_string(opt.max_iterations) +
                           " iterations");
}

double velocity_diameter(const ParticleState& s) {
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  if (s.dim == 1) {
    double lo = s.v[0][0], hi = s.v[0][0];
    for (const auto& v : s.v) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    return hi - lo;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec d{s.v[i][0] - s.v[j][0], s.v[i][1] - s.v[j][1], s.v[i][2] - s.v[j][2]};
      best = std::max(best, norm2(d));
    }
  return std::sqrt(best);
}

Vec mean_velocity(const ParticleState& s) {
  Vec m{0.0, 0.0, 0.0};
  for (const auto& v : s.v)
    for (int d = 0; d < s.dim; ++d) m[d] += v[d];
  for (int d = 0; d < s.dim; ++d) m[d] /= static_cast<double>(s.size());
  return m;
}

void write_particles_csv(std::ostream& out, const ParticleState& s, bool header) {
  if (header) {
    out << "t,id";
    for (int d = 1; d <= s.dim; ++d) out << ",x" << d;
    for (int d = 1; d <= s.dim; ++d) out << ",v" << d;
    out << '\n';
  }
  out << std::setprecision(17);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << s.t << ',' << i;
    for (int d = 0; d < s.dim; ++d) out << ',' << s.x[i][d];
    for (int d = 0; d < s.dim; ++d) out << ',' << s.v[i][d];
    out << '\n';
  }
}

}  // namespace swarmflow
