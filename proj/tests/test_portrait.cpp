#include "doctest.h"
#include "ssldyn/portrait.hpp"

using namespace ssldyn;

namespace {

int label_of_seed(const Hyper& hyper, double psi, double gamma, double horizon,
                  double dt = 0.01) {
  std::vector<Equilibrium> sinks;
  for (const auto& e : find_equilibria_reduced(hyper))
    if (e.klass == StabilityClass::sink) sinks.push_back(e);
  return classify_seed(hyper, psi, gamma, sinks, horizon, dt);
}

}  // namespace

TEST_SUITE_BEGIN("portrait");

TEST_CASE("vector field vanishes at every equilibrium") {
  const Hyper hyper{1.5, 0.03};
  for (const auto& e : find_equilibria_reduced(hyper))
    CHECK(rhs_reduced(e.psi, e.gamma, hyper).norm() <= 1e-10);
}

TEST_CASE("vector field is finite and deterministic on the default grid") {
  const Hyper hyper{1.5, 0.03};
  GridSpec grid;
  grid.nx = 21;
  grid.ny = 17;
  const auto a = vector_field(hyper, grid);
  CHECK(a.size() == 21u * 17u);
  for (const auto& s : a) {
    CHECK(std::isfinite(s.dpsi));
    CHECK(std::isfinite(s.dgamma));
  }
  // refining the grid keeps shared nodes identical
  GridSpec fine = grid;
  fine.nx = 41;
  fine.ny = 33;
  const auto b = vector_field(hyper, fine);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const FieldSample& coarse = a[static_cast<size_t>(iy) * grid.nx + ix];
      const FieldSample& refined =
          b[static_cast<size_t>(2 * iy) * fine.nx + 2 * ix];
      CHECK(coarse.dpsi == refined.dpsi);
      CHECK(coarse.dgamma == refined.dgamma);
    }
  }
}

TEST_CASE("grid validation") {
  GridSpec g;
  g.nx = 1;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g = GridSpec{};
  g.psi_min = g.psi_max;
  CHECK_THROWS_AS(g.validate(), ValidationError);
}

TEST_CASE("gamma nullcline passes through the origin and 1/(1+s2)") {
  const Hyper hyper{1.5, 0.03};
  GridSpec grid;
  grid.psi_min = -0.2;
  grid.psi_max = 0.5;
  grid.nx = 71;  // nodes at exactly 0.0 and 0.4
  const NullclineSet set = nullclines(hyper, grid);
  REQUIRE(set.gamma_null.size() == 1);
  bool hit_origin = false, hit_inv = false;
  for (const auto& [p, g] : set.gamma_null[0].pts) {
    if (std::abs(p) < 1e-12 && std::abs(g) < 1e-12) hit_origin = true;
    if (std::abs(p - 0.4) < 1e-9 && std::abs(g) < 1e-9) hit_inv = true;
  }
  CHECK(hit_origin);
  CHECK(hit_inv);
}

TEST_CASE("nullcline points re-substitute into the dynamics") {
  const Hyper hyper{1.5, 0.08};
  GridSpec grid;
  const NullclineSet set = nullclines(hyper, grid);
  for (const auto& line : set.gamma_null)
    for (const auto& [p, g] : line.pts)
      CHECK(std::abs(rhs_reduced(p, g, hyper)(1)) <= 1e-9);
  for (const auto& line : set.psi_null)
    for (const auto& [p, g] : line.pts)
      CHECK(std::abs(rhs_reduced(p, g, hyper)(0)) <= 1e-9);
  CHECK_THROWS_AS(nullclines({1.5, 0.0}, grid), ValidationError);
}

TEST_CASE("documented basin scenarios") {
  // medium regime: the high-gamma seed escapes collapse
  const Hyper medium{1.5, 0.08};
  std::vector<Equilibrium> sinks;
  for (const auto& e : find_equilibria_reduced(medium))
    if (e.klass == StabilityClass::sink) sinks.push_back(e);
  REQUIRE(sinks.size() == 2);
  const int label = classify_seed(medium, 0.08, 0.5, sinks, 2000.0);
  REQUIRE(label >= 0);
  CHECK(sinks[label].psi > 0.2);

  // weak regime: a strongly negative seed reaches the negative sink
  const Hyper weak{1.5, 1e-4};
  std::vector<Equilibrium> wsinks;
  for (const auto& e : find_equilibria_reduced(weak))
    if (e.klass == StabilityClass::sink) wsinks.push_back(e);
  REQUIRE(wsinks.size() == 4);
  const int wlabel =
      classify_seed(weak, -0.2, -2.0, wsinks, default_basin_horizon(1e-4));
  REQUIRE(wlabel >= 0);
  CHECK(wsinks[wlabel].psi < 0.0);
  CHECK(wsinks[wlabel].gamma < 0.0);

  // a mildly negative gamma seed still collapses (origin basin)
  const int olabel =
      classify_seed(weak, -0.2, -0.5, wsinks, default_basin_horizon(1e-4));
  REQUIRE(olabel >= 0);
  CHECK(wsinks[olabel].psi == doctest::Approx(0.0));
}

TEST_CASE("strong regime sends the whole window to the origin") {
  const Hyper strong{1.5, 0.12};
  GridSpec grid;
  grid.nx = 9;
  grid.ny = 9;
  const BasinMap map = basin_map(strong, grid, 2000.0);
  REQUIRE(map.attractors.size() == 1);
  for (int label : map.labels) CHECK(label == 0);
}

TEST_CASE("simsiam basin splits at the source point") {
  const Hyper hyper{1.5, 0.08};
  const BasinMap map = simsiam_basin(hyper, -0.2, 0.5, 71, 4000.0);
  REQUIRE(map.attractors.size() == 2);  // origin and the non-collapsed sink
  const double source = 0.110557280900008;
  for (int i = 0; i < map.grid.nx; ++i) {
    const double seed = map.grid.psi(i);
    const int label = map.labels[i];
    REQUIRE(label >= 0);
    if (seed < source - 1e-6) {
      CHECK(map.attractors[label].psi == doctest::Approx(0.0));
    } else if (seed > source + 1e-6) {
      CHECK(map.attractors[label].psi == doctest::Approx(0.289442719099992));
    }
  }
}

TEST_CASE("negative seeds always collapse under simsiam dynamics") {
  for (double rho : {0.08, 1e-4}) {
    const Hyper hyper{1.5, rho};
    std::vector<Equilibrium> sinks;
    for (const auto& e : simsiam_equilibria(hyper))
      if (e.klass == StabilityClass::sink) sinks.push_back(e);
    // no negative equilibria other than 0 exist for any rho > 0
    for (const auto& s : sinks) CHECK(s.psi >= 0.0);
    for (double seed : {-0.05, -0.2, -0.45}) {
      const int label = classify_seed_simsiam(hyper, seed, sinks, 4000.0);
      REQUIRE(label >= 0);
      CHECK(sinks[label].psi == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("retraction basin is wider than simsiam on the same seed band") {
  // Seeds with psi(0) in (0, source) collapse for simsiam; the planar
  // dynamics rescue a positive fraction of them when gamma(0) is large.
  const Hyper hyper{1.5, 0.08};
  const double source = 0.110557280900008;
  std::vector<Equilibrium> red_sinks;
  for (const auto& e : find_equilibria_reduced(hyper))
    if (e.klass == StabilityClass::sink) red_sinks.push_back(e);
  std::vector<Equilibrium> sim_sinks;
  for (const auto& e : simsiam_equilibria(hyper))
    if (e.klass == StabilityClass::sink) sim_sinks.push_back(e);

  int rescued = 0;
  const int n = 9;
  for (int i = 1; i <= n; ++i) {
    const double psi0 = source * i / (n + 1);
    const int sim_label = classify_seed_simsiam(hyper, psi0, sim_sinks, 4000.0);
    REQUIRE(sim_label >= 0);
    CHECK(sim_sinks[sim_label].psi == doctest::Approx(0.0));  // measure zero
    const int red_label = classify_seed(hyper, psi0, 0.55, red_sinks, 4000.0);
    if (red_label >= 0 && red_sinks[red_label].psi > 0.2) ++rescued;
  }
  CHECK(rescued > 0);  // strictly positive measure
}

TEST_CASE("basin labels are stable under halving the time step") {
  const Hyper hyper{1.5, 0.08};
  GridSpec grid;
  grid.nx = 15;
  grid.ny = 15;
  const BasinMap coarse = basin_map(hyper, grid, 1500.0, 0.01);
  const BasinMap fine = basin_map(hyper, grid, 1500.0, 0.005);
  auto near_boundary = [&](int ix, int iy) {
    const int self = coarse.labels[static_cast<size_t>(iy) * grid.nx + ix];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jy < 0 || jx >= grid.nx || jy >= grid.ny) continue;
        if (coarse.labels[static_cast<size_t>(jy) * grid.nx + jx] != self)
          return true;
      }
    }
    return false;
  };
  int interior = 0, changed = 0;
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (near_boundary(ix, iy)) continue;
      ++interior;
      const size_t idx = static_cast<size_t>(iy) * grid.nx + ix;
      if (coarse.labels[idx] != fine.labels[idx]) ++changed;
    }
  }
  REQUIRE(interior > 0);
  CHECK(static_cast<double>(changed) <= 0.01 * interior);
}

TEST_SUITE_END();
