#include "rosdyn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "rosdyn/builders.hpp"
#include "rosdyn/report.hpp"
#include "rosdyn/rng.hpp"

namespace rosdyn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> random_m0(std::size_t n, std::uint64_t seed, double lo, double hi) {
  auto rng = make_rng(derive_seed(seed, "simulate-m0"));
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> m0(n);
  for (auto& x : m0) x = dist(rng);
  return m0;
}

std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CircuitMeta {
  circuit::GateParams params;
  std::string mode;
  std::vector<std::string> variables;
  std::map<std::string, double> aux_start;
  std::optional<std::vector<double>> lower_bounds, upper_bounds;
};

json circuit_meta_to_json(const circuit::CompiledCircuit& cc) {
  json j;
  j["mode"] = cc.mode == circuit::GateMode::full ? "full" : "simplified";
  j["variables"] = cc.variables;
  j["params"] = {{"floor", cc.params.floor},       {"low", cc.params.low},
                 {"threshold", cc.params.threshold}, {"high", cc.params.high},
                 {"ceiling", cc.params.ceiling},     {"V", cc.params.V}};
  j["aux_start"] = cc.aux_start;
  if (cc.lower_bounds) j["lower_bounds"] = *cc.lower_bounds;
  if (cc.upper_bounds) j["upper_bounds"] = *cc.upper_bounds;
  return j;
}

CircuitMeta circuit_meta_from_json(const json& j) {
  CircuitMeta meta;
  meta.mode = j.value("mode", "simplified");
  meta.variables = j.at("variables").get<std::vector<std::string>>();
  if (j.contains("aux_start"))
    meta.aux_start = j.at("aux_start").get<std::map<std::string, double>>();
  if (j.contains("params")) {
    const auto& p = j.at("params");
    meta.params.floor = p.value("floor", meta.params.floor);
    meta.params.low = p.value("low", meta.params.low);
    meta.params.threshold = p.value("threshold", meta.params.threshold);
    meta.params.high = p.value("high", meta.params.high);
    meta.params.ceiling = p.value("ceiling", meta.params.ceiling);
    meta.params.V = p.value("V", meta.params.V);
  }
  if (j.contains("lower_bounds"))
    meta.lower_bounds = j.at("lower_bounds").get<std::vector<double>>();
  if (j.contains("upper_bounds"))
    meta.upper_bounds = j.at("upper_bounds").get<std::vector<double>>();
  return meta;
}

}  // namespace

Eigen::MatrixXd parse_matrix_text(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("matrix text holds no rows");
  const std::size_t cols = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != cols) throw std::invalid_argument("ragged matrix rows");
  Eigen::MatrixXd M(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) M(i, j) = rows[i][j];
  return M;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.empty()) throw std::invalid_argument("expected a comma-separated number list");
  return out;
}

std::vector<linear::JordanBlockSpec> parse_jordan_text(const std::string& text) {
  std::vector<linear::JordanBlockSpec> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double re, im;
    int mult;
    if (!(ls >> re)) continue;
    if (!(ls >> im >> mult))
      throw std::invalid_argument("jordan line " + std::to_string(lineno) +
                                  ": expected 're im multiplicity'");
    out.push_back({{re, im}, mult});
  }
  if (out.empty()) throw std::invalid_argument("jordan spec holds no blocks");
  return out;
}

linear::SimulatedLinear circle_scenario(double horizon) {
  linear::LinearSystem sys;
  sys.A.resize(2, 2);
  sys.A << 0.0, -1.0, 1.0, 0.0;
  sys.x0.resize(2);
  sys.x0 << 1.0, 0.0;
  sys.horizon = horizon;

  Eigen::MatrixXd T(4, 2);
  T << -1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 1.0;
  linear::AffineMap map;
  map.scale = 0.4;
  map.offset = Eigen::VectorXd::Constant(4, 1.5);
  return linear::simulate_linear(sys, T, map);
}

circuit::BooleanNetwork nor3_network() {
  return circuit::parse_network("X = NOR(Y, Z)\nY = NOR(Z, X)\nZ = NOR(X, Y)\n");
}

circuit::BooleanNetwork acyclic3_network() {
  return circuit::parse_network("A = NOR()\nB = NOR(A)\nC = NOR(A, B)\n");
}

circuit::BooleanNetwork not3_network() {
  return circuit::parse_network("X = NOT(Y)\nY = NOT(Z)\nZ = NOT(X)\n");
}

std::vector<GalleryScenario> gallery_scenarios(std::uint64_t seed) {
  std::vector<GalleryScenario> out;
  const auto seeded_start = [&](const MarketInstance& inst, const char* name) {
    auto rng = make_rng(derive_seed(seed, std::string("gallery-m0-") + name));
    std::uniform_real_distribution<double> dist(1.1, 3.0);
    std::vector<double> m0(inst.n_bidders());
    for (auto& x : m0) x = dist(rng);
    return m0;
  };

  const auto add_cycle = [&](const char* name, int n, double horizon) {
    GalleryScenario s;
    s.name = name;
    s.instance = build_cycle(n, 7);
    s.m0 = seeded_start(s.instance, name);
    s.horizon = horizon;
    out.push_back(std::move(s));
  };
  add_cycle("two_bidder_cycle", 2, 150.0);
  add_cycle("three_cycle", 3, 250.0);
  add_cycle("four_cycle", 4, 200.0);
  add_cycle("five_cycle", 5, 250.0);

  for (char which : {'A', 'B'}) {
    GalleryScenario s;
    s.name = which == 'A' ? "coupling_a" : "coupling_b";
    s.instance = coupling_preset(which, 7);
    s.m0 = seeded_start(s.instance, s.name.c_str());
    s.horizon = 250.0;
    out.push_back(std::move(s));
  }

  {
    GalleryScenario s;
    s.name = "circle";
    auto sim = circle_scenario();
    s.instance = std::move(sim.instance);
    s.m0 = sim.m0;
    s.horizon = 4.0 * std::numbers::pi;
    s.dt = 1e-3;
    s.sample_every = 0.01;
    s.smooth = false;
    out.push_back(std::move(s));
  }

  const auto params = circuit::default_gate_params();
  {
    GalleryScenario s;
    s.name = "nor3_full";
    auto cc = circuit::compile_network(nor3_network(), params, circuit::GateMode::full);
    s.m0 = cc.random_initial_state(derive_seed(seed, "gallery-nor3"));
    s.instance = std::move(cc.instance);
    s.horizon = 60.0;
    s.dt = 1e-4;
    s.sample_every = 0.01;
    s.smooth = false;
    out.push_back(std::move(s));
  }
  {
    GalleryScenario s;
    s.name = "not3_full";
    auto cc = circuit::compile_network(not3_network(), params, circuit::GateMode::full);
    s.m0 = cc.random_initial_state(derive_seed(seed, "gallery-not3"));
    s.instance = std::move(cc.instance);
    s.horizon = 200.0;
    s.dt = 1e-3;
    s.sample_every = 0.02;
    s.smooth = false;
    out.push_back(std::move(s));
  }
  {
    GalleryScenario s;
    s.name = "clock9_full";
    auto cc = circuit::build_clock(9, params, circuit::GateMode::full);
    s.m0 = cc.random_initial_state(derive_seed(seed, "gallery-clock9"));
    s.instance = std::move(cc.instance);
    s.horizon = 500.0;
    s.dt = 1e-3;
    s.sample_every = 0.02;
    s.smooth = false;
    out.push_back(std::move(s));
  }
  return out;
}

std::string classification_report(const Trajectory& traj,
                                  const analysis::OrbitClass& orbit) {
  std::ostringstream os;
  os << "samples: " << traj.n_samples() << " over [0, " << traj.times.back() << "]\n";
  os << "classification: " << analysis::kind_name(orbit.kind) << "\n";
  switch (orbit.kind) {
    case analysis::OrbitClass::Kind::equilibrium: {
      os << "equilibrium:";
      for (double v : orbit.equilibrium) os << ' ' << v;
      os << "\n";
      break;
    }
    case analysis::OrbitClass::Kind::periodic: {
      os << "period: " << orbit.period << "\n";
      os << "amplitude:";
      for (double v : orbit.amplitude) os << ' ' << v;
      os << "\n";
      break;
    }
    case analysis::OrbitClass::Kind::quasi_periodic: {
      os << "frequencies (empirical):";
      for (double f : orbit.frequencies) os << ' ' << f;
      os << "\n";
      break;
    }
    case analysis::OrbitClass::Kind::unclassified:
      break;
  }
  os << "diagnostics: " << orbit.diagnostics << "\n";
  if (traj.has_utilities()) {
    double worst = 0.0;
    for (double r : fundamental_identity_residual(traj)) worst = std::max(worst, std::abs(r));
    os << "identity_residual_sup: " << worst << "\n";
  }
  if (traj.clamp_events > 0) os << "clamp_events: " << traj.clamp_events << "\n";
  if (traj.aborted) os << "aborted: " << traj.abort_reason << "\n";
  return os.str();
}

namespace {

void write_scenario_outputs(const fs::path& dir, const GalleryScenario& s,
                            const Trajectory& traj) {
  fs::create_directories(dir);
  write_trajectory_csv(traj, (dir / "trajectory.csv").string());
  save_instance(s.instance, (dir / "instance.json").string());

  analysis::PeriodSettings ps;
  const auto orbit = analysis::classify_orbit(traj, {}, ps, {});
  write_text_file((dir / "report.txt").string(), classification_report(traj, orbit));

  if (traj.states.front().size() >= 2) {
    std::vector<std::array<double, 2>> path;
    path.reserve(traj.n_samples());
    for (const auto& st : traj.states) path.push_back({st[0], st[1]});
    write_orbit_svg(path, (dir / "orbit_m1_m2.svg").string());
  }
}

int gallery_main(const std::string& out_dir, std::uint64_t seed) {
  const fs::path root(out_dir);
  fs::create_directories(root);
  auto scenarios = gallery_scenarios(seed);

  for (const auto& s : scenarios) {
    IntegrateOptions opt;
    opt.horizon = s.horizon;
    opt.dt = s.dt;
    opt.sample_every = s.sample_every;
    const auto traj = integrate(s.instance, s.m0, opt);
    write_scenario_outputs(root / s.name, s, traj);
    if (s.name.rfind("coupling", 0) == 0) {
      const auto proj = analysis::random_projection(traj, derive_seed(seed, s.name));
      write_orbit_svg(proj.points, (root / s.name / "random_projection.svg").string());
    }
    std::cout << "gallery: " << s.name << " done\n";
  }

  // Bistability of the even cycle.
  {
    IntegrateOptions opt;
    opt.horizon = 200.0;
    opt.sample_every = 0.02;
    const auto scan = analysis::bistability_scan(build_cycle(4, 7), 20, 1.1, 3.0,
                                                 derive_seed(seed, "gallery-scan4"), opt);
    std::ostringstream csv;
    csv << "hits,center...\n";
    for (const auto& c : scan.clusters) {
      csv << c.hits;
      for (double v : c.center) csv << ',' << format_full(v);
      csv << "\n";
    }
    fs::create_directories(root / "four_cycle");
    write_text_file((root / "four_cycle" / "bistability.csv").string(), csv.str());
    std::cout << "gallery: four_cycle bistability scan done (" << scan.clusters.size()
              << " clusters)\n";
  }

  // Auction-format sweep on the first coupling.
  {
    IntegrateOptions opt;
    opt.sample_every = 0.02;
    const std::vector<double> grid{0.0, 0.4, 0.8, 0.85, 0.9, 1.0};
    const auto rows = analysis::lambda_sweep(
        [](double lambda) {
          MarketInstance inst = coupling_preset('A', 7);
          inst.lambda = lambda;
          return inst;
        },
        grid, 200.0, 0.5, derive_seed(seed, "gallery-sweep"), opt);
    std::ostringstream csv;
    csv << "lambda,m1_min,m1_max,converged\n";
    for (const auto& r : rows)
      csv << r.lambda << ',' << format_full(r.m1_min) << ',' << format_full(r.m1_max) << ','
          << (r.converged ? 1 : 0) << "\n";
    fs::create_directories(root / "lambda_sweep");
    write_text_file((root / "lambda_sweep" / "sweep.csv").string(), csv.str());
    std::cout << "gallery: lambda sweep done\n";
  }

  // First-price limit: every scenario instance, lambda overridden to 0.
  {
    std::ostringstream csv;
    csv << "scenario,max_abs_deviation_from_one\n";
    std::vector<std::string> names(scenarios.size());
    std::vector<double> devs(scenarios.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < std::int64_t(scenarios.size()); ++i) {
      const auto& s = scenarios[i];
      IntegrateOptions opt;
      opt.horizon = 60.0;
      opt.dt = 0.005;
      opt.sample_every = 0.1;
      opt.lambda_override = 0.0;
      const auto traj = integrate(s.instance, s.m0, opt);
      double dev = 0.0;
      for (double v : traj.final_state()) dev = std::max(dev, std::abs(v - 1.0));
      names[i] = s.name;
      devs[i] = dev;
    }
    for (std::size_t i = 0; i < scenarios.size(); ++i)
      csv << names[i] << ',' << format_full(devs[i]) << "\n";
    fs::create_directories(root / "first_price");
    write_text_file((root / "first_price" / "convergence.csv").string(), csv.str());
    std::cout << "gallery: first-price limit done\n";
  }
  std::cout << "gallery written to " << root.string() << "\n";
  return 0;
}

Method parse_method(const std::string& name) {
  if (name == "rk4") return Method::rk4;
  if (name == "rkf45") return Method::rkf45;
  throw std::invalid_argument("method must be rk4 or rkf45");
}

}  // namespace

int run_gallery(const std::string& out_dir, std::uint64_t seed) {
  return gallery_main(out_dir, seed);
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"return-over-spend autobidding dynamics: simulator and compilers"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "integrate an instance and write trajectory CSV");
  std::string sim_instance, sim_m0 = "", sim_out = ".", sim_method = "rk4", sim_meta;
  double sim_T = 200.0, sim_dt = 0.01, sim_sample = 0.1;
  double sim_lambda = -1.0;
  std::uint64_t sim_seed = 1;
  bool sim_svg = false;
  sim->add_option("--instance", sim_instance, "instance file")->required();
  sim->add_option("--m0", sim_m0, "comma list or random:<seed>");
  sim->add_option("--horizon", sim_T, "time horizon");
  sim->add_option("--dt", sim_dt, "integration step");
  sim->add_option("--method", sim_method, "rk4|rkf45");
  sim->add_option("--sample-every", sim_sample, "sampling interval");
  sim->add_option("--lambda", sim_lambda, "override the instance's payment mix");
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--seed", sim_seed, "global seed");
  sim->add_option("--circuit-meta", sim_meta,
                  "circuit sidecar: randomize variables only, apply bounds");
  sim->add_flag("--svg", sim_svg, "also write an (m1, m2) orbit SVG");

  // --- build-repressilator ---
  auto* rep = app.add_subcommand("build-repressilator", "repression graph to instance file");
  std::string rep_edges, rep_coupling, rep_out = "instance.json";
  int rep_cycle = 0, rep_c = 7;
  rep->add_option("--edges", rep_edges, "edge list file ('a b' per line)");
  rep->add_option("--cycle", rep_cycle, "n-node directed cycle");
  rep->add_option("--coupling", rep_coupling, "preset A or B");
  rep->add_option("--c", rep_c, "Beta sharpness");
  rep->add_option("--out", rep_out, "output instance path");

  // --- compile-linear ---
  auto* lin = app.add_subcommand("compile-linear", "linear system to ROS instance");
  std::string lin_matrix, lin_x0, lin_out = ".", lin_jordan;
  double lin_T = 10.0;
  lin->add_option("--matrix", lin_matrix, "dense matrix file")->required();
  lin->add_option("--x0", lin_x0, "initial state, comma list")->required();
  lin->add_option("--horizon", lin_T, "simulation horizon");
  lin->add_option("--jordan", lin_jordan, "exact Jordan data ('re im multiplicity' lines)");
  lin->add_option("--out", lin_out, "output directory");

  // --- compile-circuit ---
  auto* cir = app.add_subcommand("compile-circuit", "NOR network to ROS instance");
  std::string cir_network, cir_mode = "full", cir_out = ".";
  cir->add_option("--network", cir_network, "network file")->required();
  cir->add_option("--mode", cir_mode, "simplified|full");
  cir->add_option("--out", cir_out, "output directory");

  // --- analyze ---
  auto* ana = app.add_subcommand("analyze", "classify a trajectory CSV");
  std::string ana_traj, ana_out;
  analysis::EquilibriumSettings ana_es;
  analysis::PeriodSettings ana_ps;
  analysis::SpectralSettings ana_ss;
  ana->add_option("--trajectory", ana_traj, "trajectory CSV")->required();
  ana->add_option("--eps", ana_es.eps, "equilibrium tolerance");
  ana->add_option("--window", ana_es.window, "equilibrium window");
  ana->add_option("--burn-in", ana_ps.burn_in_fraction, "burn-in fraction");
  ana->add_option("--delta", ana_ps.recurrence_delta, "relative recurrence tolerance");
  ana->add_option("--max-denominator", ana_ss.max_denominator, "rationality bound q");
  ana->add_option("--ratio-tol", ana_ss.ratio_tolerance, "rationality tolerance");
  ana->add_option("--out", ana_out, "write the report here as well");

  // --- sweep-lambda ---
  auto* swp = app.add_subcommand("sweep-lambda", "limit range of m1 per lambda");
  std::string swp_coupling = "A", swp_edges, swp_grid = "0.0,0.4,0.8,0.85,0.9,1.0";
  std::string swp_out = "sweep.csv";
  int swp_cycle = 0, swp_c = 7;
  double swp_T = 200.0, swp_burn = 0.5;
  std::uint64_t swp_seed = 1;
  swp->add_option("--coupling", swp_coupling, "preset A or B");
  swp->add_option("--cycle", swp_cycle, "n-node cycle family instead");
  swp->add_option("--edges", swp_edges, "edge list file instead");
  swp->add_option("--c", swp_c, "Beta sharpness");
  swp->add_option("--grid", swp_grid, "comma list of lambda values");
  swp->add_option("--horizon", swp_T, "horizon per run");
  swp->add_option("--burn-in", swp_burn, "burn-in fraction");
  swp->add_option("--seed", swp_seed, "global seed");
  swp->add_option("--out", swp_out, "report CSV path");

  // --- scan-bistability ---
  auto* scan = app.add_subcommand("scan-bistability", "cluster converged equilibria");
  std::string scan_instance, scan_out = "bistability.csv", scan_box = "1.1,3.0";
  int scan_inits = 20;
  double scan_T = 200.0, scan_dt = 0.01;
  std::uint64_t scan_seed = 1;
  scan->add_option("--instance", scan_instance, "instance file")->required();
  scan->add_option("--inits", scan_inits, "number of seeded starts");
  scan->add_option("--box", scan_box, "start box 'lo,hi'");
  scan->add_option("--horizon", scan_T, "horizon per run");
  scan->add_option("--dt", scan_dt, "integration step");
  scan->add_option("--seed", scan_seed, "global seed");
  scan->add_option("--out", scan_out, "report CSV path");

  // --- gallery ---
  auto* gal = app.add_subcommand("gallery", "reproduce the figure scenarios");
  std::string gal_out = "gallery";
  std::uint64_t gal_seed = 1;
  gal->add_option("--out", gal_out, "output directory");
  gal->add_option("--seed", gal_seed, "global seed");

  std::vector<std::string> argv_storage = args;
  std::vector<const char*> argv;
  argv.push_back("rosdyn");
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) {
      MarketInstance inst = load_instance(sim_instance);
      require_valid(inst);
      IntegrateOptions opt;
      opt.horizon = sim_T;
      opt.dt = sim_dt;
      opt.sample_every = sim_sample;
      opt.method = parse_method(sim_method);
      if (sim_lambda >= 0.0) opt.lambda_override = sim_lambda;

      std::optional<CircuitMeta> meta;
      if (!sim_meta.empty()) {
        meta = circuit_meta_from_json(json::parse(slurp(sim_meta)));
        opt.lower_bounds = meta->lower_bounds;
        opt.upper_bounds = meta->upper_bounds;
      }

      std::vector<double> m0;
      if (sim_m0.rfind("random:", 0) == 0 || sim_m0.empty()) {
        const std::uint64_t s =
            sim_m0.empty() ? sim_seed : std::stoull(sim_m0.substr(7));
        if (meta) {
          m0.assign(inst.n_bidders(), 1.0);
          for (const auto& [name, v] : meta->aux_start) {
            const auto idx = inst.bidder_index(name);
            if (!idx) throw std::invalid_argument("meta names unknown bidder " + name);
            m0[*idx] = v;
          }
          auto rng = make_rng(derive_seed(s, "circuit-m0"));
          std::uniform_real_distribution<double> dist(meta->params.floor,
                                                      meta->params.ceiling);
          for (const auto& v : meta->variables) {
            const auto idx = inst.bidder_index(v);
            if (!idx) throw std::invalid_argument("meta names unknown variable " + v);
            m0[*idx] = dist(rng);
          }
        } else {
          m0 = random_m0(inst.n_bidders(), s, 1.1, 3.0);
        }
      } else {
        m0 = parse_number_list(sim_m0);
      }

      const auto traj = integrate(inst, m0, opt);
      fs::create_directories(sim_out);
      write_trajectory_csv(traj, (fs::path(sim_out) / "trajectory.csv").string());
      if (sim_svg && traj.states.front().size() >= 2) {
        std::vector<std::array<double, 2>> path;
        for (const auto& st : traj.states) path.push_back({st[0], st[1]});
        write_orbit_svg(path, (fs::path(sim_out) / "orbit_m1_m2.svg").string());
      }
      std::cout << "wrote " << (fs::path(sim_out) / "trajectory.csv").string() << " ("
                << traj.n_samples() << " samples)\n";
      if (traj.aborted) {
        std::cerr << "integration aborted: " << traj.abort_reason << "\n";
        return 3;
      }
      return 0;
    }

    if (rep->parsed()) {
      MarketInstance inst;
      const int sources = int(!rep_edges.empty()) + int(rep_cycle > 0) +
                          int(!rep_coupling.empty());
      if (sources != 1)
        throw std::invalid_argument("give exactly one of --edges, --cycle, --coupling");
      if (!rep_edges.empty())
        inst = build_repressilator(parse_edge_list(slurp(rep_edges), rep_c));
      else if (rep_cycle > 0)
        inst = build_cycle(rep_cycle, rep_c);
      else
        inst = coupling_preset(rep_coupling[0], rep_c);
      save_instance(inst, rep_out);
      std::cout << "wrote " << rep_out << " (" << inst.n_bidders() << " bidders, "
                << inst.items.size() << " items)\n";
      return 0;
    }

    if (lin->parsed()) {
      linear::LinearSystem sys;
      sys.A = parse_matrix_text(slurp(lin_matrix));
      const auto x0 = parse_number_list(lin_x0);
      sys.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), x0.size());
      sys.horizon = lin_T;

      linear::SimulatedLinear simres;
      if (!lin_jordan.empty()) {
        const auto blocks = parse_jordan_text(slurp(lin_jordan));
        // exact mode still needs a basis; derive it numerically is not
        // supported here, so exact mode takes the eigenvector basis of A.
        Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(sys.A);
        const auto emb = linear::competitive_embedding(sys.A, blocks, es.eigenvectors());
        simres = linear::simulate_linear(sys, emb.T);
      } else {
        simres = linear::simulate_linear(sys);
      }

      fs::create_directories(lin_out);
      const fs::path dir(lin_out);
      save_instance(simres.instance, (dir / "instance.json").string());

      Trajectory predicted;
      predicted.bidder_names = simres.instance.bidder_names;
      predicted.times = simres.ref_times;
      predicted.states = simres.ref_multipliers;
      predicted.method = "matrix-exponential";
      write_trajectory_csv(predicted, (dir / "predicted.csv").string());

      json map;
      map["scale"] = simres.map.scale;
      map["offset"] = std::vector<double>(simres.map.offset.data(),
                                          simres.map.offset.data() + simres.map.offset.size());
      std::vector<std::vector<double>> Tout(simres.T.rows());
      for (int i = 0; i < simres.T.rows(); ++i)
        for (int j = 0; j < simres.T.cols(); ++j) Tout[i].push_back(simres.T(i, j));
      map["T"] = Tout;
      map["m0"] = simres.m0;
      write_text_file((dir / "map.json").string(), map.dump(2) + "\n");
      std::cout << "wrote instance.json, predicted.csv, map.json to " << lin_out << " ("
                << simres.instance.n_bidders() << " bidders, " << simres.instance.items.size()
                << " item specs, " << simres.instance.total_copies() << " items)\n";
      return 0;
    }

    if (cir->parsed()) {
      const auto net = circuit::parse_network(slurp(cir_network));
      const auto mode = cir_mode == "full" ? circuit::GateMode::full
                        : cir_mode == "simplified"
                            ? circuit::GateMode::simplified
                            : throw std::invalid_argument("mode must be simplified or full");
      const auto cc = circuit::compile_network(net, circuit::default_gate_params(), mode);
      fs::create_directories(cir_out);
      const fs::path dir(cir_out);
      save_instance(cc.instance, (dir / "instance.json").string());
      write_text_file((dir / "circuit_meta.json").string(),
                      circuit_meta_to_json(cc).dump(2) + "\n");
      std::cout << "compiled " << net.variables.size() << " variables to "
                << cc.instance.n_bidders() << " bidders, " << cc.instance.items.size()
                << " items (" << cir_mode << " mode)\n";
      return 0;
    }

    if (ana->parsed()) {
      const auto traj = read_trajectory_csv(ana_traj);
      const auto orbit = analysis::classify_orbit(traj, ana_es, ana_ps, ana_ss);
      const auto report = classification_report(traj, orbit);
      std::cout << report;
      if (!ana_out.empty()) write_text_file(ana_out, report);
      return 0;
    }

    if (swp->parsed()) {
      std::function<MarketInstance(double)> family;
      if (!swp_edges.empty()) {
        const auto g = parse_edge_list(slurp(swp_edges), swp_c);
        family = [g](double lambda) {
          auto inst = build_repressilator(g);
          inst.lambda = lambda;
          return inst;
        };
      } else if (swp_cycle > 0) {
        const int n = swp_cycle, c = swp_c;
        family = [n, c](double lambda) {
          auto inst = build_cycle(n, c);
          inst.lambda = lambda;
          return inst;
        };
      } else {
        const char which = swp_coupling.at(0);
        const int c = swp_c;
        family = [which, c](double lambda) {
          auto inst = coupling_preset(which, c);
          inst.lambda = lambda;
          return inst;
        };
      }
      IntegrateOptions opt;
      opt.sample_every = 0.02;
      const auto rows = analysis::lambda_sweep(family, parse_number_list(swp_grid), swp_T,
                                               swp_burn, swp_seed, opt);
      std::ostringstream csv;
      csv << "lambda,m1_min,m1_max,converged\n";
      for (const auto& r : rows)
        csv << r.lambda << ',' << format_full(r.m1_min) << ',' << format_full(r.m1_max)
            << ',' << (r.converged ? 1 : 0) << "\n";
      write_text_file(swp_out, csv.str());
      std::cout << "wrote " << swp_out << "\n";
      return 0;
    }

    if (scan->parsed()) {
      const auto inst = load_instance(scan_instance);
      const auto box = parse_number_list(scan_box);
      if (box.size() != 2) throw std::invalid_argument("--box needs 'lo,hi'");
      IntegrateOptions opt;
      opt.horizon = scan_T;
      opt.dt = scan_dt;
      opt.sample_every = 0.02;
      const auto res =
          analysis::bistability_scan(inst, scan_inits, box[0], box[1], scan_seed, opt);
      std::ostringstream csv;
      csv << "hits,center...\n";
      for (const auto& c : res.clusters) {
        csv << c.hits;
        for (double v : c.center) csv << ',' << format_full(v);
        csv << "\n";
      }
      write_text_file(scan_out, csv.str());
      std::cout << res.n_converged << "/" << res.n_total << " runs converged, "
                << res.clusters.size() << " clusters; wrote " << scan_out << "\n";
      return 0;
    }

    if (gal->parsed()) return gallery_main(gal_out, gal_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace rosdyn::cli
