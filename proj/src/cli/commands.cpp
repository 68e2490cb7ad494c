#include "cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "cli/csv.hpp"
#include "ssldyn/alignment.hpp"
#include "ssldyn/eigen_dyn.hpp"
#include "ssldyn/flows.hpp"
#include "ssldyn/portrait.hpp"
#include "ssldyn/trainer.hpp"

namespace ssldyn::cli {

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (long i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json equilibrium_to_json(const Equilibrium& e) {
  json eigs = json::array();
  for (const auto& l : e.jac_eigs) eigs.push_back({l.real(), l.imag()});
  return json{{"psi", e.psi},
              {"gamma", e.gamma},
              {"class", to_string(e.klass)},
              {"jacobian_eigenvalues", std::move(eigs)}};
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out.is_open()) throw IoError("cannot open output file: " + path);
  out << doc.dump(2) << '\n';
  out.close();
  if (out.fail()) throw IoError("write failure on " + path);
}

InitKind parse_init_kind(const std::string& s) {
  if (s == "iid") return InitKind::iid;
  if (s == "symmetric") return InitKind::symmetric;
  if (s == "spectral") return InitKind::spectral;
  throw ValidationError("init.kind must be iid|symmetric|spectral");
}

Method parse_method(const std::string& s) {
  if (s == "rk4") return Method::rk4;
  if (s == "euler") return Method::euler;
  throw ValidationError("method must be rk4|euler");
}

Hyper parse_hyper(const json& cfg) {
  Hyper h{require_num(cfg, "sigma2"), require_num(cfg, "rho")};
  h.validate();
  return h;
}

GridSpec parse_grid(const json& cfg) {
  GridSpec g;
  g.psi_min = num_or(cfg, "grid.psi_min", g.psi_min);
  g.psi_max = num_or(cfg, "grid.psi_max", g.psi_max);
  g.gamma_min = num_or(cfg, "grid.gamma_min", g.gamma_min);
  g.gamma_max = num_or(cfg, "grid.gamma_max", g.gamma_max);
  g.nx = static_cast<int>(int_or(cfg, "grid.nx", g.nx));
  g.ny = static_cast<int>(int_or(cfg, "grid.ny", g.ny));
  g.validate();
  return g;
}

// Appends the diagnostics map (alphabetical key order) to the header/rows.
template <class State>
void emit_trajectory_csv(const std::string& path,
                         const Trajectory<State>& traj,
                         const std::vector<std::string>& state_cols,
                         const std::function<void(const State&,
                                                  std::vector<double>&)>& put) {
  std::vector<std::string> cols{"t"};
  cols.insert(cols.end(), state_cols.begin(), state_cols.end());
  for (const auto& [name, series] : traj.diagnostics) cols.push_back(name);
  CsvWriter csv(path);
  csv.header(cols);
  std::vector<double> row;
  for (long k = 0; k < traj.size(); ++k) {
    row.clear();
    row.push_back(traj.times[k]);
    put(traj.states[k], row);
    for (const auto& [name, series] : traj.diagnostics)
      row.push_back(series[k]);
    csv.row(row);
  }
  csv.close();
}

const std::set<std::string> kFlowKeys = {
    "sigma2", "rho",    "mode",      "m",          "d",
    "dt",     "steps",  "method",    "stride",     "init.kind",
    "init.scale", "init.seed", "output", "format", "seed"};

const std::set<std::string> kEigenKeys = {
    "sigma2", "rho",   "system", "init",   "dt",
    "steps",  "method", "stride", "output", "format", "seed"};

const std::set<std::string> kRegimeKeys = {"sigma2", "rho_list", "system",
                                           "resolution", "output", "format",
                                           "seed"};

const std::set<std::string> kSweepKeys = {"sigma2", "rho_min", "rho_max",
                                          "grid_points", "system", "output",
                                          "format", "seed"};

const std::set<std::string> kGridKeys = {
    "grid.psi_min", "grid.psi_max", "grid.gamma_min",
    "grid.gamma_max", "grid.nx", "grid.ny"};

std::set<std::string> with_grid(std::set<std::string> base) {
  base.insert(kGridKeys.begin(), kGridKeys.end());
  return base;
}

const std::set<std::string> kFieldKeys =
    with_grid({"sigma2", "rho", "output", "format", "seed"});

const std::set<std::string> kBasinKeys = with_grid(
    {"sigma2", "rho", "system", "horizon", "dt", "output",
     "attractors_output", "format", "seed"});

const std::set<std::string> kAlignKeys = {
    "sigma2", "rho", "m", "dt", "steps", "stride", "init.kind", "init.scale",
    "init.seed", "output", "summary_output", "format", "seed"};

const std::set<std::string> kTrainKeys = {
    "model", "sim1_loss", "sim2_loss", "arch", "hidden_width", "d", "m",
    "sigma2", "rho", "lr", "batch", "steps", "ema_beta", "seed",
    "exact_expectation", "sim2_augmented_input", "g_output_tanh",
    "init.kind", "init.scale", "record_stride", "metrics_output",
    "state_output", "format", "output"};

}  // namespace

void cmd_flow(const json& cfg) {
  reject_unknown_keys(cfg, kFlowKeys, "flow");
  const Hyper hyper = parse_hyper(cfg);
  const std::string mode = str_or(cfg, "mode", "phinet");
  if (mode != "phinet" && mode != "simsiam")
    throw ValidationError("flow: mode must be phinet|simsiam");
  const long m = require_int(cfg, "m");
  const long d = require_int(cfg, "d");
  const double dt = require_num(cfg, "dt");
  const long steps = require_int(cfg, "steps");
  const Method method = parse_method(str_or(cfg, "method", "rk4"));
  const long stride = int_or(cfg, "stride", 0);
  const InitKind kind = parse_init_kind(str_or(cfg, "init.kind", "iid"));
  const double scale = num_or(cfg, "init.scale", 0.1);
  const auto seed = static_cast<std::uint64_t>(
      int_or(cfg, "init.seed", int_or(cfg, "seed", 0)));
  const std::string output = require_str(cfg, "output");
  const std::string format = str_or(cfg, "format", "csv");
  if (format != "csv") throw ValidationError("flow: format must be csv");

  const MatrixParams init =
      random_params(m, d, kind, scale, seed, mode == "phinet");
  const Trajectory<MatrixParams> traj =
      integrate_flow(init, hyper, dt, steps, method, stride);

  std::vector<std::string> cols;
  auto add_block = [&](const char* name, long r, long c) {
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j)
        cols.push_back(std::string(name) + "_" + std::to_string(i) + "_" +
                       std::to_string(j));
  };
  add_block("wf", m, d);
  add_block("wh", m, m);
  if (mode == "phinet") add_block("wg", m, m);
  emit_trajectory_csv<MatrixParams>(
      output, traj, cols, [&](const MatrixParams& p, std::vector<double>& row) {
        auto push = [&](const Eigen::MatrixXd& w) {
          for (long i = 0; i < w.rows(); ++i)
            for (long j = 0; j < w.cols(); ++j) row.push_back(w(i, j));
        };
        push(p.wf);
        push(p.wh);
        if (p.wg) push(*p.wg);
      });
}

void cmd_eigen(const json& cfg) {
  reject_unknown_keys(cfg, kEigenKeys, "eigen");
  const Hyper hyper = parse_hyper(cfg);
  const std::string system = str_or(cfg, "system", "reduced");
  const double dt = require_num(cfg, "dt");
  const long steps = require_int(cfg, "steps");
  const Method method = parse_method(str_or(cfg, "method", "rk4"));
  const long stride = int_or(cfg, "stride", 0);
  const std::string output = require_str(cfg, "output");
  if (!cfg.contains("init") || !cfg["init"].is_array())
    throw ValidationError("eigen: init must be an array of numbers");
  std::vector<double> init;
  for (const auto& v : cfg["init"]) {
    if (!v.is_number()) throw ValidationError("eigen: init entries must be numbers");
    init.push_back(v.get<double>());
  }

  if (system == "full") {
    if (init.size() != 3)
      throw ValidationError("eigen: full system init is [phi, psi, gamma]");
    const auto traj = integrate_eigen_full({init[0], init[1], init[2]}, hyper,
                                           dt, steps, method, stride);
    emit_trajectory_csv<EigenState>(output, traj, {},
                                    [](const EigenState&, std::vector<double>&) {});
  } else if (system == "reduced") {
    if (init.size() != 2)
      throw ValidationError("eigen: reduced system init is [psi, gamma]");
    const auto traj = integrate_reduced(Eigen::Vector2d(init[0], init[1]),
                                        hyper, dt, steps, method, stride);
    emit_trajectory_csv<Eigen::Vector2d>(
        output, traj, {}, [](const Eigen::Vector2d&, std::vector<double>&) {});
  } else if (system == "simsiam") {
    if (init.size() != 1)
      throw ValidationError("eigen: simsiam system init is [psi]");
    const auto traj =
        integrate_simsiam(init[0], hyper, dt, steps, method, stride);
    emit_trajectory_csv<double>(output, traj, {},
                                [](const double&, std::vector<double>&) {});
  } else {
    throw ValidationError("eigen: system must be full|reduced|simsiam");
  }
}

void cmd_regime(const json& cfg) {
  reject_unknown_keys(cfg, kRegimeKeys, "regime");
  const double sigma2 = require_num(cfg, "sigma2");
  const std::string system = str_or(cfg, "system", "reduced");
  if (system != "reduced" && system != "simsiam")
    throw ValidationError("regime: system must be reduced|simsiam");
  const std::string output = require_str(cfg, "output");
  if (!cfg.contains("rho_list") || !cfg["rho_list"].is_array() ||
      cfg["rho_list"].empty())
    throw ValidationError("regime: rho_list must be a non-empty array");
  std::vector<double> rhos;
  for (const auto& v : cfg["rho_list"]) {
    if (!v.is_number())
      throw ValidationError("regime: rho_list entries must be numbers");
    rhos.push_back(v.get<double>());
  }

  json results = json::array();
  for (double rho : rhos) {
    const Hyper hyper{sigma2, rho};
    const RegimeReport rep =
        system == "reduced" ? regime(hyper) : regime_simsiam(hyper);
    json eqs = json::array();
    for (const auto& e : rep.equilibria) eqs.push_back(equilibrium_to_json(e));
    results.push_back(json{{"rho", rho},
                           {"regime", to_string(rep.regime)},
                           {"sink_count", rep.sink_count},
                           {"equilibria", std::move(eqs)}});
  }
  json doc{{"sigma2", sigma2}, {"system", system}, {"results", results}};
  if (system == "simsiam") doc["critical_rho"] = simsiam_critical_rho(sigma2);
  write_json_file(output, doc);
}

void cmd_sweep(const json& cfg) {
  reject_unknown_keys(cfg, kSweepKeys, "sweep");
  const double sigma2 = require_num(cfg, "sigma2");
  const double rho_min = require_num(cfg, "rho_min");
  const double rho_max = require_num(cfg, "rho_max");
  const long grid_n = int_or(cfg, "grid_points", 40);
  const std::string system = str_or(cfg, "system", "reduced");
  if (system != "reduced" && system != "simsiam")
    throw ValidationError("sweep: system must be reduced|simsiam");
  const std::string output = require_str(cfg, "output");

  const RhoSweep sweep =
      system == "reduced"
          ? sweep_rho(sigma2, rho_min, rho_max, static_cast<int>(grid_n))
          : sweep_rho_simsiam(sigma2, rho_min, rho_max,
                              static_cast<int>(grid_n));
  json grid = json::array();
  for (const auto& [rho, rep] : sweep.grid)
    grid.push_back(json{{"rho", rho},
                        {"regime", to_string(rep.regime)},
                        {"sink_count", rep.sink_count}});
  json doc{{"sigma2", sigma2},
           {"system", system},
           {"grid", std::move(grid)},
           {"boundaries", sweep.boundaries}};
  if (system == "simsiam") doc["critical_rho"] = simsiam_critical_rho(sigma2);
  write_json_file(output, doc);
}

void cmd_field(const json& cfg) {
  reject_unknown_keys(cfg, kFieldKeys, "field");
  const Hyper hyper = parse_hyper(cfg);
  const GridSpec grid = parse_grid(cfg);
  const std::string output = require_str(cfg, "output");
  const auto samples = vector_field(hyper, grid);
  CsvWriter csv(output);
  csv.header({"psi", "gamma", "dpsi", "dgamma"});
  for (const auto& s : samples) csv.row({s.psi, s.gamma, s.dpsi, s.dgamma});
  csv.close();
}

void cmd_nullclines(const json& cfg) {
  reject_unknown_keys(cfg, kFieldKeys, "nullclines");
  const Hyper hyper = parse_hyper(cfg);
  const GridSpec grid = parse_grid(cfg);
  const std::string output = require_str(cfg, "output");
  const NullclineSet set = nullclines(hyper, grid);
  CsvWriter csv(output);
  csv.header({"branch", "psi", "gamma"});
  char buf[96];
  auto emit = [&](const std::string& name, const Polyline& line) {
    for (const auto& [p, g] : line.pts) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g", name.c_str(), p, g);
      csv.raw_row(buf);
    }
  };
  for (size_t i = 0; i < set.psi_null.size(); ++i)
    emit("psi_null_" + std::to_string(i), set.psi_null[i]);
  for (size_t i = 0; i < set.gamma_null.size(); ++i)
    emit("gamma_null_" + std::to_string(i), set.gamma_null[i]);
  csv.close();
}

void cmd_basin(const json& cfg) {
  reject_unknown_keys(cfg, kBasinKeys, "basin");
  const Hyper hyper = parse_hyper(cfg);
  const std::string system = str_or(cfg, "system", "reduced");
  if (system != "reduced" && system != "simsiam")
    throw ValidationError("basin: system must be reduced|simsiam");
  const double dt = num_or(cfg, "dt", 0.01);
  const double horizon =
      num_or(cfg, "horizon", default_basin_horizon(hyper.rho));
  const std::string output = require_str(cfg, "output");
  const std::string attractors_out = str_or(cfg, "attractors_output", "");

  BasinMap map;
  if (system == "reduced") {
    map = basin_map(hyper, parse_grid(cfg), horizon, dt);
  } else {
    const double lo = num_or(cfg, "grid.psi_min", -0.2);
    const double hi = num_or(cfg, "grid.psi_max", 0.5);
    const int n = static_cast<int>(int_or(cfg, "grid.nx", 101));
    map = simsiam_basin(hyper, lo, hi, n, horizon, dt);
  }

  CsvWriter csv(output);
  csv.header({"psi", "gamma", "label"});
  char buf[96];
  const int ny = std::max(map.grid.ny, 1);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < map.grid.nx; ++ix) {
      const double g = system == "reduced" ? map.grid.gamma(iy) : 0.0;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d", map.grid.psi(ix), g,
                    map.labels[static_cast<size_t>(iy) * map.grid.nx + ix]);
      csv.raw_row(buf);
    }
  }
  csv.close();
  if (!attractors_out.empty()) {
    json eqs = json::array();
    for (const auto& e : map.attractors) eqs.push_back(equilibrium_to_json(e));
    write_json_file(attractors_out, json{{"attractors", std::move(eqs)}});
  }
}

void cmd_align(const json& cfg) {
  reject_unknown_keys(cfg, kAlignKeys, "align");
  const Hyper hyper = parse_hyper(cfg);
  const long m = require_int(cfg, "m");
  const double dt = require_num(cfg, "dt");
  const long steps = require_int(cfg, "steps");
  const long stride = int_or(cfg, "stride", 0);
  const InitKind kind = parse_init_kind(str_or(cfg, "init.kind", "symmetric"));
  const double scale = num_or(cfg, "init.scale", 0.3);
  const auto seed = static_cast<std::uint64_t>(
      int_or(cfg, "init.seed", int_or(cfg, "seed", 0)));
  const std::string output = require_str(cfg, "output");
  const std::string format = str_or(cfg, "format", "csv");

  const MatrixParams init = random_params(m, m, kind, scale, seed, true);
  const AlignmentReport rep = track_alignment(init, hyper, dt, steps, stride);

  json summary{{"fitted_decay_rate", rep.fitted_decay_rate},
               {"decay_rate_defined", rep.decay_rate_defined},
               {"parabola_rate", rep.parabola_rate},
               {"parabola_rate_defined", rep.parabola_rate_defined}};
  if (format == "json") {
    json series = json::array();
    for (size_t k = 0; k < rep.times.size(); ++k) {
      json row{{"t", rep.times[k]},
               {"c1_norm", rep.comm_norms[k][0]},
               {"c2_norm", rep.comm_norms[k][1]},
               {"c3_norm", rep.comm_norms[k][2]},
               {"xi_norm", rep.xi_norm[k]},
               {"min_sym_eig", rep.min_sym_eig[k]},
               {"asymmetry", rep.asymmetry[k]},
               {"parabola_residuals", rep.parabola_residuals[k]}};
      series.push_back(std::move(row));
    }
    write_json_file(output,
                    json{{"summary", summary}, {"series", std::move(series)}});
    return;
  }
  if (format != "csv") throw ValidationError("align: format must be csv|json");
  const std::string summary_out =
      str_or(cfg, "summary_output", output + ".summary.json");
  std::vector<std::string> cols{"t",       "c1_norm",     "c2_norm",
                                "c3_norm", "xi_norm",     "min_sym_eig",
                                "asymmetry"};
  for (long i = 0; i < m; ++i) cols.push_back("residual_" + std::to_string(i));
  CsvWriter csv(output);
  csv.header(cols);
  for (size_t k = 0; k < rep.times.size(); ++k) {
    std::vector<double> row{rep.times[k],      rep.comm_norms[k][0],
                            rep.comm_norms[k][1], rep.comm_norms[k][2],
                            rep.xi_norm[k],    rep.min_sym_eig[k],
                            rep.asymmetry[k]};
    for (double r : rep.parabola_residuals[k]) row.push_back(r);
    csv.row(row);
  }
  csv.close();
  write_json_file(summary_out, summary);
}

namespace {

ModelKind parse_model(const std::string& s) {
  if (s == "simsiam") return ModelKind::simsiam;
  if (s == "phinet") return ModelKind::phinet;
  if (s == "xphinet") return ModelKind::xphinet;
  throw ValidationError("train: model must be simsiam|phinet|xphinet");
}

LossKind parse_loss(const std::string& s, const char* key) {
  if (s == "mse") return LossKind::mse;
  if (s == "cosine") return LossKind::cosine;
  throw ValidationError(std::string("train: ") + key + " must be mse|cosine");
}

}  // namespace

void cmd_train(const json& cfg) {
  reject_unknown_keys(cfg, kTrainKeys, "train");
  TrainerConfig tc;
  tc.model = parse_model(str_or(cfg, "model", "phinet"));
  tc.sim1_loss = parse_loss(str_or(cfg, "sim1_loss", "cosine"), "sim1_loss");
  tc.sim2_loss = parse_loss(str_or(cfg, "sim2_loss", "mse"), "sim2_loss");
  const std::string arch = str_or(cfg, "arch", "linear");
  if (arch == "linear") {
    tc.arch = ArchKind::linear;
  } else if (arch == "mlp1") {
    tc.arch = ArchKind::mlp1;
  } else {
    throw ValidationError("train: arch must be linear|mlp1");
  }
  tc.hidden_width = static_cast<int>(int_or(cfg, "hidden_width", 16));
  tc.d = static_cast<int>(require_int(cfg, "d"));
  tc.m = static_cast<int>(require_int(cfg, "m"));
  tc.hyper = parse_hyper(cfg);
  tc.lr = require_num(cfg, "lr");
  tc.batch = static_cast<int>(int_or(cfg, "batch", 256));
  tc.steps = require_int(cfg, "steps");
  tc.ema_beta = num_or(cfg, "ema_beta", 0.996);
  tc.seed = static_cast<std::uint64_t>(int_or(cfg, "seed", 0));
  tc.exact_expectation = bool_or(cfg, "exact_expectation", false);
  tc.sim2_augmented_input = bool_or(cfg, "sim2_augmented_input", false);
  tc.g_output_tanh = bool_or(cfg, "g_output_tanh", false);
  tc.init = parse_init_kind(str_or(cfg, "init.kind", "iid"));
  tc.init_scale = num_or(cfg, "init.scale", 0.0);
  tc.record_stride = int_or(cfg, "record_stride", 0);
  tc.validate();
  const std::string metrics_out = require_str(cfg, "metrics_output");
  const std::string state_out = str_or(cfg, "state_output", "");

  const TrainResult res = train(tc);

  std::vector<std::string> cols{"step"};
  for (const auto& [name, series] : res.metrics.series) cols.push_back(name);
  CsvWriter csv(metrics_out);
  csv.header(cols);
  std::vector<double> row;
  for (size_t k = 0; k < res.metrics.steps.size(); ++k) {
    row.clear();
    row.push_back(static_cast<double>(res.metrics.steps[k]));
    for (const auto& [name, series] : res.metrics.series)
      row.push_back(series[k]);
    csv.row(row);
  }
  csv.close();

  if (!state_out.empty()) {
    json state{{"model", str_or(cfg, "model", "phinet")},
               {"arch", arch},
               {"wf", matrix_to_json(res.state.wf)}};
    if (tc.arch == ArchKind::linear) {
      state["wh"] = matrix_to_json(res.state.wh);
      if (tc.has_g()) state["wg"] = matrix_to_json(res.state.wg);
    } else {
      state["uh"] = matrix_to_json(res.state.uh);
      state["vh"] = matrix_to_json(res.state.vh);
      if (tc.has_g()) {
        state["ug"] = matrix_to_json(res.state.ug);
        state["vg"] = matrix_to_json(res.state.vg);
      }
    }
    if (tc.model == ModelKind::xphinet)
      state["wf_long"] = matrix_to_json(res.state.wf_long);
    write_json_file(state_out, state);
  }
}

int run_main(int argc, const char* const* argv) {
  CLI::App app{"Linear-network self-supervised learning dynamics lab"};
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string output;
    std::string format;
    std::string seed;
  };
  std::map<std::string, Common> commons;
  const std::vector<std::string> names = {"flow",  "eigen",      "regime",
                                          "sweep", "field",      "nullclines",
                                          "basin", "align",      "train"};
  const std::map<std::string, std::string> descriptions = {
      {"flow", "integrate the matrix flow and write a trajectory CSV"},
      {"eigen", "integrate the eigenvalue dynamics (full|reduced|simsiam)"},
      {"regime", "classify weight-decay regimes for a list of rho values"},
      {"sweep", "log-spaced rho sweep with bifurcation boundaries"},
      {"field", "vector field samples of the reduced dynamics"},
      {"nullclines", "nullcline polylines of the reduced dynamics"},
      {"basin", "basin-of-attraction map (reduced or simsiam)"},
      {"align", "commutator decay and invariant-parabola diagnostics"},
      {"train", "discrete-SGD toy trainer (simsiam|phinet|xphinet)"}};
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    Common& c = commons[name];
    sub->add_option("--config", c.config, "JSON config file");
    sub->add_option("--set", c.sets,
                    "override config entries, key=value (repeatable)");
    sub->add_option("--output", c.output, "output path (same as output key)");
    sub->add_option("--format", c.format, "output format (csv|json)");
    sub->add_option("--seed", c.seed, "seed override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    for (const auto& name : names) {
      if (!app.got_subcommand(name)) continue;
      const Common& c = commons.at(name);
      json cfg = json::object();
      if (!c.config.empty()) cfg = load_config_file(c.config);
      apply_overrides(cfg, c.sets);
      if (!c.output.empty()) cfg["output"] = c.output;
      if (!c.format.empty()) cfg["format"] = c.format;
      if (!c.seed.empty())
        apply_overrides(cfg, {std::string("seed=") + c.seed});
      if (name == "flow") cmd_flow(cfg);
      else if (name == "eigen") cmd_eigen(cfg);
      else if (name == "regime") cmd_regime(cfg);
      else if (name == "sweep") cmd_sweep(cfg);
      else if (name == "field") cmd_field(cfg);
      else if (name == "nullclines") cmd_nullclines(cfg);
      else if (name == "basin") cmd_basin(cfg);
      else if (name == "align") cmd_align(cfg);
      else if (name == "train") cmd_train(cfg);
      return kExitOk;
    }
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what()
              << " (last finite step " << e.last_finite_step() << ")\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace ssldyn::cli
