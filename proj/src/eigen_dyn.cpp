#include "ssldyn/eigen_dyn.hpp"

#include <algorithm>
#include <cmath>

#include "ssldyn/common.hpp"

namespace ssldyn {

EigenState rhs_full(const EigenState& s, const Hyper& hyper) {
  const double a = hyper.a();
  const double rho = hyper.rho;
  const double bracket =
      a * (1.0 + s.gamma * s.gamma) * s.psi - (1.0 + s.gamma);
  EigenState d;
  d.phi = -2.0 * s.psi * s.phi * bracket - 2.0 * rho * s.phi;
  d.psi = -s.phi * bracket - rho * s.psi;
  d.gamma = -s.psi * s.phi * (a * s.psi - 1.0) - rho * s.gamma;
  return d;
}

Eigen::Vector2d rhs_reduced(double psi, double gamma, const Hyper& hyper) {
  const double a = hyper.a();
  const double p2 = psi * psi;
  Eigen::Vector2d d;
  d(0) = ((1.0 + gamma) - a * (1.0 + gamma * gamma) * psi) * p2 -
         hyper.rho * psi;
  d(1) = (1.0 - a * psi) * p2 * psi - hyper.rho * gamma;
  return d;
}

double rhs_simsiam(double psi, const Hyper& hyper) {
  return (1.0 - hyper.a() * psi) * psi * psi - hyper.rho * psi;
}

Eigen::Matrix2d jacobian_reduced(double psi, double gamma,
                                 const Hyper& hyper) {
  const double a = hyper.a();
  const double p2 = psi * psi;
  const double p3 = p2 * psi;
  Eigen::Matrix2d j;
  j(0, 0) = 2.0 * (1.0 + gamma) * psi - 3.0 * a * (1.0 + gamma * gamma) * p2 -
            hyper.rho;
  j(0, 1) = p2 - 2.0 * a * gamma * p3;
  j(1, 0) = 3.0 * p2 - 4.0 * a * p3;
  j(1, 1) = -hyper.rho;
  return j;
}

Trajectory<EigenState> integrate_eigen_full(const EigenState& init,
                                            const Hyper& hyper, double dt,
                                            long steps, Method method,
                                            long stride) {
  hyper.validate();
  auto rhs = [&](const EigenState& s) { return rhs_full(s, hyper); };
  auto diag = [](double, const EigenState& s,
                 std::map<std::string, std::vector<double>>& out) {
    out["phi"].push_back(s.phi);
    out["psi"].push_back(s.psi);
    out["gamma"].push_back(s.gamma);
    out["parabola_residual"].push_back(s.psi * s.psi - s.phi);
  };
  return integrate_fixed(init, rhs, dt, steps, method, stride, diag);
}

Trajectory<Eigen::Vector2d> integrate_reduced(const Eigen::Vector2d& init,
                                              const Hyper& hyper, double dt,
                                              long steps, Method method,
                                              long stride) {
  hyper.validate();
  auto rhs = [&](const Eigen::Vector2d& v) {
    return rhs_reduced(v(0), v(1), hyper);
  };
  auto diag = [](double, const Eigen::Vector2d& v,
                 std::map<std::string, std::vector<double>>& out) {
    out["psi"].push_back(v(0));
    out["gamma"].push_back(v(1));
  };
  return integrate_fixed(init, rhs, dt, steps, method, stride, diag);
}

Trajectory<double> integrate_simsiam(double init, const Hyper& hyper,
                                     double dt, long steps, Method method,
                                     long stride) {
  hyper.validate();
  auto rhs = [&](double p) { return rhs_simsiam(p, hyper); };
  auto diag = [](double, double p,
                 std::map<std::string, std::vector<double>>& out) {
    out["psi"].push_back(p);
  };
  return integrate_fixed(init, rhs, dt, steps, method, stride, diag);
}

const char* to_string(StabilityClass k) {
  switch (k) {
    case StabilityClass::sink: return "sink";
    case StabilityClass::source: return "source";
    case StabilityClass::saddle: return "saddle";
    case StabilityClass::degenerate: return "degenerate";
  }
  return "?";
}

const char* to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::strong: return "strong";
    case RegimeKind::medium: return "medium";
    case RegimeKind::light: return "light";
    case RegimeKind::weak: return "weak";
    case RegimeKind::other: return "other";
  }
  return "?";
}

StabilityClass classify(const std::vector<std::complex<double>>& eigs,
                        double tol) {
  bool any_zero = false, all_neg = true, all_pos = true;
  for (const auto& e : eigs) {
    const double re = e.real();
    if (std::abs(re) < tol) any_zero = true;
    if (re >= -tol) all_neg = false;
    if (re <= tol) all_pos = false;
  }
  if (any_zero) return StabilityClass::degenerate;
  if (all_neg) return StabilityClass::sink;
  if (all_pos) return StabilityClass::source;
  return StabilityClass::saddle;
}

double simsiam_critical_rho(double sigma2) {
  Hyper h{sigma2, 0.0};
  h.validate();
  return 1.0 / (4.0 * (1.0 + sigma2));
}

namespace {

Equilibrium simsiam_point(double psi, const Hyper& hyper) {
  // d(psi')/dpsi = 2 psi - 3 (1+s2) psi^2 - rho
  const double a = hyper.a();
  const double slope = 2.0 * psi - 3.0 * a * psi * psi - hyper.rho;
  Equilibrium e;
  e.psi = psi;
  e.gamma = 0.0;
  e.jac_eigs = {std::complex<double>(slope, 0.0)};
  e.klass = classify(e.jac_eigs);
  return e;
}

}  // namespace

std::vector<Equilibrium> simsiam_equilibria(const Hyper& hyper) {
  hyper.validate();
  const double a = hyper.a();
  std::vector<Equilibrium> out;
  out.push_back(simsiam_point(0.0, hyper));
  const double disc = 1.0 - 4.0 * hyper.rho * a;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    auto add = [&](double psi) {
      for (const auto& e : out)
        if (std::abs(e.psi - psi) < 1e-12) return;
      out.push_back(simsiam_point(psi, hyper));
    };
    add((1.0 - sq) / (2.0 * a));
    add((1.0 + sq) / (2.0 * a));
  }
  std::sort(out.begin(), out.end(),
            [](const Equilibrium& x, const Equilibrium& y) {
              return x.psi < y.psi;
            });
  return out;
}

double default_psi_window(double sigma2) { return 2.0 / (1.0 + sigma2); }

namespace {

// psi-nullcline residual divided by psi, on the gamma-nullcline:
//   G(psi) = (1 + gamma(psi)) psi - (1+s2)(1 + gamma(psi)^2) psi^2 - rho
// with gamma(psi) = psi^3 (1 - (1+s2) psi) / rho. Roots of G are the
// nonzero-psi equilibria of the reduced system.
struct NullclineResidual {
  double a, rho;
  double gamma(double p) const {
    return p * p * p * (1.0 - a * p) / rho;
  }
  double dgamma(double p) const {
    return (3.0 * p * p - 4.0 * a * p * p * p) / rho;
  }
  double operator()(double p) const {
    const double g = gamma(p);
    return (1.0 + g) * p - a * (1.0 + g * g) * p * p - rho;
  }
  double deriv(double p) const {
    const double g = gamma(p);
    const double dg = dgamma(p);
    return dg * p + (1.0 + g) - a * (2.0 * g * dg * p * p + (1.0 + g * g) * 2.0 * p);
  }
};

}  // namespace

std::vector<Equilibrium> find_equilibria_reduced(const Hyper& hyper,
                                                 double psi_lo, double psi_hi,
                                                 int resolution) {
  hyper.validate();
  if (hyper.rho <= 0.0)
    throw ValidationError(
        "find_equilibria_reduced: rho = 0 unsupported (nullcline substitution "
        "divides by rho)");
  if (resolution < 100)
    throw ValidationError(
        "find_equilibria_reduced: resolution < 100 risks missed roots");
  if (!(psi_lo < psi_hi) || !std::isfinite(psi_lo) || !std::isfinite(psi_hi))
    throw ValidationError("find_equilibria_reduced: bad psi bounds");

  const NullclineResidual f{hyper.a(), hyper.rho};
  std::vector<double> roots;
  auto scan = [&](double lo_bound, double hi_bound, int cells) {
    const double h = (hi_bound - lo_bound) / cells;
    double x0 = lo_bound, f0 = f(x0);
    for (int i = 1; i <= cells; ++i) {
      const double x1 = lo_bound + i * h;
      const double f1 = f(x1);
      if (f0 == 0.0) roots.push_back(x0);
      if (f0 * f1 < 0.0) {
        double lo = x0, hi = x1, flo = f0;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if (flo * fm <= 0.0) {
            hi = mid;
          } else {
            lo = mid;
            flo = fm;
          }
        }
        double r = 0.5 * (lo + hi);
        for (int it = 0; it < 50; ++it) {  // Newton polish
          const double fr = f(r);
          const double dr = f.deriv(r);
          if (dr == 0.0) break;
          const double step = fr / dr;
          r -= step;
          if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(r))) break;
        }
        if (r >= psi_lo && r <= psi_hi) roots.push_back(r);
      }
      x0 = x1;
      f0 = f1;
    }
    if (f0 == 0.0) roots.push_back(x0);
  };
  scan(psi_lo, psi_hi, resolution);
  // At small rho the equilibrium pair straddling psi = 1/a sits a²·rho
  // apart (the gamma-nullcline recrosses zero there with slope ~ 1/rho),
  // which can be finer than the global grid; rescan that neighborhood at a
  // matching scale.
  const double a = hyper.a();
  const double half_width = 8.0 * a * a * hyper.rho;
  const double wlo = std::max(psi_lo, 1.0 / a - half_width);
  const double whi = std::min(psi_hi, 1.0 / a + half_width);
  if (wlo < whi && half_width < 0.25 * (psi_hi - psi_lo))
    scan(wlo, whi, std::max(resolution, 2000));

  std::sort(roots.begin(), roots.end());
  std::vector<double> dedup;
  for (double r : roots) {
    if (std::abs(r) < 1e-8) continue;  // origin added explicitly
    if (dedup.empty() || std::abs(r - dedup.back()) > 1e-8) dedup.push_back(r);
  }

  std::vector<Equilibrium> out;
  auto push = [&](double psi, double gamma) {
    Equilibrium e;
    e.psi = psi;
    e.gamma = gamma;
    const Eigen::Matrix2d j = jacobian_reduced(psi, gamma, hyper);
    const Eigen::EigenSolver<Eigen::Matrix2d> es(j);
    e.jac_eigs = {es.eigenvalues()(0), es.eigenvalues()(1)};
    e.klass = classify(e.jac_eigs);
    out.push_back(std::move(e));
  };
  push(0.0, 0.0);
  for (double r : dedup) push(r, f.gamma(r));
  std::sort(out.begin(), out.end(),
            [](const Equilibrium& x, const Equilibrium& y) {
              return x.psi < y.psi;
            });
  return out;
}

std::vector<Equilibrium> find_equilibria_reduced(const Hyper& hyper,
                                                 int resolution) {
  const double w = default_psi_window(hyper.sigma2);
  return find_equilibria_reduced(hyper, -w, w, resolution);
}

namespace {

int count_sinks(const std::vector<Equilibrium>& eqs) {
  int n = 0;
  for (const auto& e : eqs)
    if (e.klass == StabilityClass::sink) ++n;
  return n;
}

RegimeKind kind_from_sinks(int n) {
  switch (n) {
    case 1: return RegimeKind::strong;
    case 2: return RegimeKind::medium;
    case 3: return RegimeKind::light;
    case 4: return RegimeKind::weak;
    default: return RegimeKind::other;
  }
}

RhoSweep sweep_impl(double sigma2, double rho_min, double rho_max, int grid_n,
                    const std::function<RegimeReport(const Hyper&)>& eval) {
  if (!(0.0 < rho_min && rho_min < rho_max))
    throw ValidationError("sweep_rho: need 0 < rho_min < rho_max");
  if (grid_n < 2) throw ValidationError("sweep_rho: grid must be >= 2");

  RhoSweep sweep;
  const double llo = std::log(rho_min), lhi = std::log(rho_max);
  std::vector<RegimeReport> reports(grid_n);
  std::vector<double> rhos(grid_n);
  for (int i = 0; i < grid_n; ++i)
    rhos[i] = std::exp(llo + (lhi - llo) * i / (grid_n - 1));
  parallel_for(grid_n, [&](long i) {
    reports[i] = eval(Hyper{sigma2, rhos[i]});
  });
  for (int i = 0; i < grid_n; ++i) sweep.grid.emplace_back(rhos[i], reports[i]);

  for (int i = 0; i + 1 < grid_n; ++i) {
    int clo = reports[i].sink_count;
    const int chi = reports[i + 1].sink_count;
    if (clo == chi) continue;
    double lo = rhos[i], hi = rhos[i + 1];
    while ((hi - lo) / lo > 1e-4) {
      const double mid = std::sqrt(lo * hi);
      const int cm = eval(Hyper{sigma2, mid}).sink_count;
      if (cm == clo) {
        lo = mid;
      } else {
        hi = mid;
        // A mid-count different from both endpoints still brackets a
        // boundary on [lo, mid]; keep bisecting toward it.
        if (cm != chi) clo = reports[i].sink_count;
      }
    }
    sweep.boundaries.push_back(0.5 * (lo + hi));
  }
  std::sort(sweep.boundaries.begin(), sweep.boundaries.end());
  return sweep;
}

}  // namespace

RegimeReport regime(const Hyper& hyper) {
  hyper.validate();
  if (hyper.rho <= 0.0)
    throw ValidationError("regime: rho must be > 0");
  RegimeReport r;
  r.hyper = hyper;
  r.equilibria = find_equilibria_reduced(hyper);
  r.sink_count = count_sinks(r.equilibria);
  r.regime = kind_from_sinks(r.sink_count);
  return r;
}

RegimeReport regime_simsiam(const Hyper& hyper) {
  hyper.validate();
  RegimeReport r;
  r.hyper = hyper;
  r.equilibria = simsiam_equilibria(hyper);
  r.sink_count = count_sinks(r.equilibria);
  // SimSiam has at most two sinks; reuse the taxonomy's first two levels.
  r.regime = kind_from_sinks(r.sink_count);
  return r;
}

RhoSweep sweep_rho(double sigma2, double rho_min, double rho_max, int grid_n) {
  return sweep_impl(sigma2, rho_min, rho_max, grid_n, regime);
}

RhoSweep sweep_rho_simsiam(double sigma2, double rho_min, double rho_max,
                           int grid_n) {
  return sweep_impl(sigma2, rho_min, rho_max, grid_n, regime_simsiam);
}

}  // namespace ssldyn
