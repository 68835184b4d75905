#include "horizon/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "horizon/azema_kernel.hpp"
#include "horizon/fbp.hpp"
#include "horizon/perpetual.hpp"

namespace horizon::cli {
namespace {

using nlohmann::json;

const std::vector<std::string> kCommands{"perpetual", "boundary", "value", "surface", "validate", "figures"};

double number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

template <class T>
T integer(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ConfigError(std::string("key '") + key + "' must be an integer");
  if (v.is_number_integer() && v.get<long long>() < 0) throw ConfigError(std::string("key '") + key + "' is negative");
  return v.get<T>();
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (dir / name).string());
  return os;
}

void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  auto os = open_output(dir, name);
  os << text;
}

ModelParams finite_params(const RunConfig& cfg) {
  if (!cfg.params.T) throw DomainError(cfg.command + " needs a finite horizon T");
  return cfg.params;
}

fbp::BoundarySolution solve(const ModelParams& p, int grid_n) {
  return fbp::solve_boundary(p, make_uniform_grid(*p.T, grid_n));
}

double y_max(const RunConfig& cfg, const ModelParams& p) {
  if (cfg.y_grid.max) return *cfg.y_grid.max;
  ModelParams q = p;
  q.T.reset();
  return 1.5 * perpetual::solve_boundary(q).b_star;
}

json boundary_summary(const fbp::BoundarySolution& sol) {
  json methods = json::object();
  for (const auto& n : sol.nodes) methods[fbp::to_string(n.method)] = methods.value(fbp::to_string(n.method), 0) + 1;
  double worst = 0.0;
  for (const auto& n : sol.nodes) worst = std::max(worst, n.relative_residual);
  return {{"nodes", sol.boundary.size()},
          {"b0", sol.boundary.at_node(0)},
          {"bT", sol.boundary.at_node(sol.boundary.size() - 1)},
          {"perpetual_b_star", sol.perpetual_b_star},
          {"clamped", sol.clamped},
          {"methods", methods},
          {"max_relative_residual", worst}};
}

void write_perpetual_csv(std::ostream& os, const ModelParams& p, const perpetual::PerpetualSolution& sol,
                         const std::vector<double>& ys) {
  os << "y,V,G\n";
  for (double y : ys)
    os << fbp::format_double(y) << ',' << fbp::format_double(perpetual::perpetual_value(sol, p, y)) << ','
       << fbp::format_double(perpetual_gain(p, y)) << '\n';
}

json check(const std::string& name, const mc::McEstimate& e, double reference) {
  auto j = mc::to_json(e);
  j["name"] = name;
  j["reference"] = reference;
  j["pass"] = e.covers(reference);
  return j;
}

json run_perpetual(const RunConfig& cfg) {
  ModelParams p = cfg.params;
  p.T.reset();
  const auto sol = perpetual::solve_boundary(p);
  const auto ys = make_y_grid(cfg.y_grid.max.value_or(1.5 * sol.b_star), cfg.y_grid.n);
  auto os = open_output(cfg.output_dir, "perpetual_value.csv");
  write_perpetual_csv(os, p, sol, ys);
  return {{"b_star", sol.b_star}, {"p1", sol.exps.p1}, {"p2", sol.exps.p2},
          {"C1", sol.C1},         {"C2", sol.C2},      {"value_table", "perpetual_value.csv"}};
}

json run_boundary(const RunConfig& cfg) {
  const auto p = finite_params(cfg);
  const auto sol = solve(p, cfg.grid_n);
  auto os = open_output(cfg.output_dir, "boundary.csv");
  fbp::write_boundary_csv(os, sol.boundary);
  auto j = boundary_summary(sol);
  j["file"] = "boundary.csv";
  return j;
}

json run_value(const RunConfig& cfg) {
  const auto p = finite_params(cfg);
  if (!cfg.t || !cfg.y) throw ConfigError("value needs --t and --y");
  const auto sol = solve(p, cfg.grid_n);
  const double t = *cfg.t, y = *cfg.y;
  const double v = fbp::value_at(p, sol.boundary, t, y);
  const double b = sol.boundary(t);
  const double g = t < *p.T ? AzemaKernel(p).G(t, y) : 0.0;
  return {{"t", t}, {"y", y}, {"V", v}, {"G", g}, {"b", b}, {"region", y >= b ? "D" : "C"}};
}

json run_surface(const RunConfig& cfg) {
  const auto p = finite_params(cfg);
  const auto sol = solve(p, cfg.grid_n);
  const auto ys = make_y_grid(y_max(cfg, p), cfg.y_grid.n);
  fbp::SurfaceOptions so;
  so.threads = cfg.mc.threads;
  const auto surf = fbp::build_surface(p, sol.boundary, ys, so);
  {
    auto os = open_output(cfg.output_dir, "surface.csv");
    fbp::write_surface_csv(os, surf);
  }
  {
    auto os = open_output(cfg.output_dir, "boundary.csv");
    fbp::write_boundary_csv(os, sol.boundary);
  }
  json fit = json::array();
  for (const auto& s : surf.smooth_fit)
    fit.push_back({{"t", s.t}, {"b", s.b}, {"left_slope", s.left_slope}, {"right_slope", s.right_slope}});
  return {{"rows", surf.times.size() * surf.ys.size()}, {"file", "surface.csv"}, {"smooth_fit", fit}};
}

json run_validate(const RunConfig& cfg) {
  const auto p = finite_params(cfg);
  const double T = *p.T;
  const auto sol = solve(p, cfg.grid_n);
  const auto& b = sol.boundary;
  auto mc = cfg.mc;
  mc.n_steps = std::max(4, (mc.n_steps + 3) / 4 * 4);

  json checks = json::array();
  const double tm = 0.5 * T;
  checks.push_back(check("survival(T/2, 2)", mc::estimate_Z(p, tm, 2.0, mc), eval_Z(p, tm, 2.0)));
  for (auto [t, y] : {std::pair{0.0, 1.0}, {0.0, 0.5 * (1.0 + b(0.0))}, {tm, 0.5 * (1.0 + b(tm))}}) {
    checks.push_back(check("reduced_value(" + fbp::format_double(t) + ", " + fbp::format_double(y) + ")",
                           mc::estimate_reduced_value(p, b, t, y, mc), fbp::value_at(p, b, t, y)));
  }
  const auto orig = mc::estimate_original_value(p, b, mc);
  auto oj = mc::to_json(orig);
  oj["name"] = "original_value(0, 1)";
  oj["reference"] = fbp::value_at(p, b, 0.0, 1.0);
  oj["pass"] = orig.value.covers(oj["reference"].get<double>());
  checks.push_back(oj);

  const auto theta = mc::theta_consistency(p, tm, mc);
  auto tj = check("theta_after(T/2)", theta.exact, theta.mean_Z.mean);
  tj["grid_fractions"] = {theta.grid[0].mean, theta.grid[1].mean, theta.grid[2].mean};
  checks.push_back(tj);
  const auto girsanov = mc::measure_change_check(p, tm, 1.0, mc);
  checks.push_back(check("density_martingale", girsanov.martingale, 1.0));

  bool all = true;
  for (const auto& c : checks) all = all && c.at("pass").get<bool>();
  json report{{"checks", checks}, {"pass", all}, {"boundary", boundary_summary(sol)}};
  write_text(cfg.output_dir, "validate.json", report.dump(2) + "\n");
  return report;
}

json run_figures(const RunConfig& cfg) {
  const auto p1 = ModelParams::perpetual(0.02, 0.3, 0.5, 4.0);
  const auto sol1 = perpetual::solve_boundary(p1);
  {
    auto os = open_output(cfg.output_dir, "figure1.csv");
    write_perpetual_csv(os, p1, sol1, make_y_grid(cfg.y_grid.max.value_or(8.0), std::max(cfg.y_grid.n, 141)));
  }
  const auto p2 = ModelParams::finite(0.02, 0.3, 0.4, 5.0, 10.0);
  const auto sol2 = solve(p2, cfg.grid_n);
  {
    auto os = open_output(cfg.output_dir, "figure2.csv");
    fbp::write_boundary_csv(os, sol2.boundary);
  }
  return {{"figure1", {{"file", "figure1.csv"}, {"b_star", sol1.b_star}}},
          {"figure2", {{"file", "figure2.csv"}, {"b0", sol2.boundary.at_node(0)}}}};
}

json error_json(const char* kind, const std::string& message) { return {{"error", kind}, {"message", message}}; }

}  // namespace

std::vector<double> make_y_grid(double max, int n) {
  if (!(max > 1.0) || !std::isfinite(max)) throw ConfigError("y_grid.max must be a finite number above 1");
  if (n < 2) throw ConfigError("y_grid.n must be at least 2");
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) ys[i] = 1.0 + (max - 1.0) * i / (n - 1);
  ys.back() = max;
  return ys;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig cfg;
  std::optional<double> T;
  if (j.contains("T")) {
    const auto& v = j.at("T");
    if (v.is_string()) {
      if (v.get<std::string>() != "inf") throw ConfigError("T must be a number or \"inf\"");
    } else if (v.is_number()) {
      T = v.get<double>();
    } else if (!v.is_null()) {
      throw ConfigError("T must be a number or \"inf\"");
    }
  }
  cfg.params = T ? ModelParams::finite(number(j, "r"), number(j, "sigma"), number(j, "lambda"), number(j, "L"), *T)
                 : ModelParams::perpetual(number(j, "r"), number(j, "sigma"), number(j, "lambda"), number(j, "L"));
  validate(cfg.params);
  cfg.grid_n = integer<int>(j, "grid_n", cfg.grid_n);
  if (cfg.grid_n < 1) throw ConfigError("grid_n must be positive");
  if (j.contains("y_grid")) {
    const auto& g = j.at("y_grid");
    if (!g.is_object()) throw ConfigError("y_grid must be an object");
    if (g.contains("min") && number(g, "min") != 1.0) throw ConfigError("y_grid.min must be 1");
    if (g.contains("max")) cfg.y_grid.max = number(g, "max");
    cfg.y_grid.n = integer<int>(g, "n", cfg.y_grid.n);
  }
  if (j.contains("mc")) {
    const auto& m = j.at("mc");
    if (!m.is_object()) throw ConfigError("mc must be an object");
    cfg.mc.n_paths = integer<std::uint64_t>(m, "n_paths", cfg.mc.n_paths);
    cfg.mc.n_steps = integer<int>(m, "n_steps", cfg.mc.n_steps);
    cfg.mc.seed = integer<std::uint64_t>(m, "seed", cfg.mc.seed);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read configuration " + path.string());
  try {
    return parse_config(json::parse(is));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

void run(const RunConfig& cfg, std::ostream& out) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir.string());
  json result;
  if (cfg.command == "perpetual") result = run_perpetual(cfg);
  else if (cfg.command == "boundary") result = run_boundary(cfg);
  else if (cfg.command == "value") result = run_value(cfg);
  else if (cfg.command == "surface") result = run_surface(cfg);
  else if (cfg.command == "validate") result = run_validate(cfg);
  else if (cfg.command == "figures") result = run_figures(cfg);
  else throw ConfigError("unknown command '" + cfg.command + "'");
  out << result.dump(2) << '\n';
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Russian option with a last-exit-time horizon"};
  std::string command, config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> t, y;
  app.add_option("command", command, "perpetual | boundary | value | surface | validate | figures")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
  app.add_option("--threads", threads, "worker threads (default: HORIZON_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--t", t, "time for the value command");
  app.add_option("--y", y, "ratio for the value command");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::Success&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
    } else if (command != "figures") {
      throw ConfigError(command + " needs --config");
    }
    cfg.command = command;
    cfg.output_dir = out_dir;
    cfg.t = t;
    cfg.y = y;
    if (seed) cfg.mc.seed = *seed;
    if (threads) {
      cfg.mc.threads = *threads;
    } else if (const char* env = std::getenv("HORIZON_THREADS")) {
      char* end = nullptr;
      const long n = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || n < 1) throw ConfigError("HORIZON_THREADS must be a positive integer");
      cfg.mc.threads = static_cast<unsigned>(n);
    }
    run(cfg, out);
    return 0;
  } catch (const ConfigError& e) {
    err << error_json("config", e.what()).dump() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << error_json("domain", e.what()).dump() << '\n';
    return kExitDomain;
  } catch (const ValidityError& e) {
    err << error_json("validity", e.what()).dump() << '\n';
    return kExitDomain;
  } catch (const NumericalError& e) {
    err << error_json("numerical", e.what()).dump() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what()).dump() << '\n';
    return kExitNumerical;
  }
}

}  // namespace horizon::cli
