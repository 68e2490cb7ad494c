#include "ssldyn/portrait.hpp"

#include <cmath>

#include "ssldyn/common.hpp"

namespace ssldyn {

void GridSpec::validate() const {
  if (!(psi_min < psi_max) || !(gamma_min < gamma_max))
    throw ValidationError("grid: degenerate ranges");
  if (nx < 2 || ny < 2) throw ValidationError("grid: nx, ny must be >= 2");
  if (!std::isfinite(psi_min) || !std::isfinite(psi_max) ||
      !std::isfinite(gamma_min) || !std::isfinite(gamma_max))
    throw ValidationError("grid: non-finite bounds");
}

std::vector<FieldSample> vector_field(const Hyper& hyper,
                                      const GridSpec& grid) {
  hyper.validate();
  grid.validate();
  std::vector<FieldSample> out(static_cast<size_t>(grid.nx) * grid.ny);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double p = grid.psi(ix);
      const double g = grid.gamma(iy);
      const Eigen::Vector2d d = rhs_reduced(p, g, hyper);
      out[static_cast<size_t>(iy) * grid.nx + ix] = {p, g, d(0), d(1)};
    }
  }
  return out;
}

NullclineSet nullclines(const Hyper& hyper, const GridSpec& grid) {
  hyper.validate();
  grid.validate();
  if (hyper.rho <= 0.0)
    throw ValidationError("nullclines: rho = 0 unsupported for the explicit "
                          "gamma branch");
  const double a = hyper.a();
  NullclineSet out;

  Polyline gline;
  for (int ix = 0; ix < grid.nx; ++ix) {
    const double p = grid.psi(ix);
    gline.pts.emplace_back(p, p * p * p * (1.0 - a * p) / hyper.rho);
  }
  out.gamma_null.push_back(std::move(gline));

  Polyline axis;
  axis.pts.emplace_back(0.0, grid.gamma_min);
  axis.pts.emplace_back(0.0, grid.gamma_max);
  out.psi_null.push_back(std::move(axis));

  // (1+s2)(1+g^2) psi^2 - (1+g) psi + rho = 0, solved per gamma sample with
  // the numerically stable quadratic form.
  Polyline lo_branch, hi_branch;
  for (int iy = 0; iy < grid.ny; ++iy) {
    const double g = grid.gamma(iy);
    const double qa = a * (1.0 + g * g);
    const double qb = -(1.0 + g);
    const double qc = hyper.rho;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
    const double r1 = q / qa;
    const double r2 = (q != 0.0) ? qc / q : r1;
    lo_branch.pts.emplace_back(std::min(r1, r2), g);
    hi_branch.pts.emplace_back(std::max(r1, r2), g);
  }
  if (!lo_branch.pts.empty()) out.psi_null.push_back(std::move(lo_branch));
  if (!hi_branch.pts.empty()) out.psi_null.push_back(std::move(hi_branch));
  return out;
}

double default_basin_horizon(double rho) {
  if (rho > 0.0 && rho < 5e-3) return std::max(2000.0, 10.0 / rho);
  return 2000.0;
}

namespace {

int nearest_sink(double p, double g, const std::vector<Equilibrium>& sinks,
                 double radius) {
  int best = -1;
  double best_d = radius;
  for (size_t i = 0; i < sinks.size(); ++i) {
    const double d = std::hypot(p - sinks[i].psi, g - sinks[i].gamma);
    if (d <= best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

int classify_seed(const Hyper& hyper, double psi0, double gamma0,
                  const std::vector<Equilibrium>& sinks, double horizon,
                  double dt) {
  double p = psi0, g = gamma0;
  const long steps = static_cast<long>(std::ceil(horizon / dt));
  const double snap = 0.25 * kAttractionRadius;  // early exit deep inside
  for (long k = 0; k < steps; ++k) {
    const Eigen::Vector2d k1 = rhs_reduced(p, g, hyper);
    const Eigen::Vector2d k2 =
        rhs_reduced(p + 0.5 * dt * k1(0), g + 0.5 * dt * k1(1), hyper);
    const Eigen::Vector2d k3 =
        rhs_reduced(p + 0.5 * dt * k2(0), g + 0.5 * dt * k2(1), hyper);
    const Eigen::Vector2d k4 =
        rhs_reduced(p + dt * k3(0), g + dt * k3(1), hyper);
    p += dt / 6.0 * (k1(0) + 2.0 * k2(0) + 2.0 * k3(0) + k4(0));
    g += dt / 6.0 * (k1(1) + 2.0 * k2(1) + 2.0 * k3(1) + k4(1));
    if (!std::isfinite(p) || !std::isfinite(g) ||
        std::abs(p) > kDivergenceBound || std::abs(g) > kDivergenceBound)
      return -1;
    if ((k & 0xf) == 0) {
      const int hit = nearest_sink(p, g, sinks, snap);
      if (hit >= 0) return hit;
    }
  }
  return nearest_sink(p, g, sinks, kAttractionRadius);
}

BasinMap basin_map(const Hyper& hyper, const GridSpec& grid, double horizon,
                   double dt) {
  hyper.validate();
  grid.validate();
  if (!(horizon > 0.0) || !(dt > 0.0))
    throw ValidationError("basin_map: horizon and dt must be > 0");
  BasinMap map;
  map.grid = grid;
  for (const auto& e : find_equilibria_reduced(hyper))
    if (e.klass == StabilityClass::sink) map.attractors.push_back(e);
  map.labels.assign(static_cast<size_t>(grid.nx) * grid.ny, -1);
  parallel_for(static_cast<long>(map.labels.size()), [&](long idx) {
    const int ix = static_cast<int>(idx % grid.nx);
    const int iy = static_cast<int>(idx / grid.nx);
    map.labels[idx] = classify_seed(hyper, grid.psi(ix), grid.gamma(iy),
                                    map.attractors, horizon, dt);
  });
  return map;
}

int classify_seed_simsiam(const Hyper& hyper, double psi0,
                          const std::vector<Equilibrium>& sinks,
                          double horizon, double dt) {
  double p = psi0;
  const long steps = static_cast<long>(std::ceil(horizon / dt));
  const double snap = 0.25 * kAttractionRadius;
  for (long k = 0; k < steps; ++k) {
    const double k1 = rhs_simsiam(p, hyper);
    const double k2 = rhs_simsiam(p + 0.5 * dt * k1, hyper);
    const double k3 = rhs_simsiam(p + 0.5 * dt * k2, hyper);
    const double k4 = rhs_simsiam(p + dt * k3, hyper);
    p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(p) || std::abs(p) > kDivergenceBound) return -1;
    if ((k & 0xf) == 0) {
      const int hit = nearest_sink(p, 0.0, sinks, snap);
      if (hit >= 0) return hit;
    }
  }
  return nearest_sink(p, 0.0, sinks, kAttractionRadius);
}

BasinMap simsiam_basin(const Hyper& hyper, double psi_min, double psi_max,
                       int n, double horizon, double dt) {
  hyper.validate();
  if (!(psi_min < psi_max) || n < 2)
    throw ValidationError("simsiam_basin: bad seed range");
  if (!(horizon > 0.0) || !(dt > 0.0))
    throw ValidationError("simsiam_basin: horizon and dt must be > 0");
  BasinMap map;
  map.grid = GridSpec{psi_min, psi_max, 0.0, 1.0, n, 2};
  map.grid.ny = 1;  // 1-D seed line
  for (const auto& e : simsiam_equilibria(hyper))
    if (e.klass == StabilityClass::sink) map.attractors.push_back(e);
  map.labels.assign(n, -1);
  parallel_for(n, [&](long i) {
    const double p = psi_min + (psi_max - psi_min) * i / (n - 1);
    map.labels[i] =
        classify_seed_simsiam(hyper, p, map.attractors, horizon, dt);
  });
  return map;
}

}  // namespace ssldyn
