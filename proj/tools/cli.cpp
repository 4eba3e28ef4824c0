#include "cli.hpp"

#include "emit.hpp"
#include "experiments.hpp"

#include "mfldp/lln.hpp"
#include "mfldp/model_io.hpp"
#include "mfldp/optimize.hpp"
#include "mfldp/parallel.hpp"
#include "mfldp/rate_function.hpp"
#include "mfldp/simulate.hpp"
#include "mfldp/structure.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace mfldp::cli {

namespace {

struct Common {
  std::string model;
  std::vector<std::string> params;
  std::string config;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 0;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--model", c.model, "Built-in model: curie-weiss, arn, eg3");
  sub->add_option("--param", c.params, "Model parameter k=v (repeatable)");
  sub->add_option("--config", c.config, "Model JSON file");
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--jobs", c.jobs, "Worker threads (default: MFLDP_JOBS or logical cores)");
  sub->add_option("--out", c.out, "Output file (default: stdout)");
}

double parse_real(const std::string& flag, std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size())
    throw UsageError(flag, "'" + std::string(text) + "' is not a number");
  return v;
}

Vec parse_vector(const std::string& flag, const std::string& text) {
  std::vector<double> xs;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = text.find(',', pos);
    xs.push_back(parse_real(flag, std::string_view(text).substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

SimplexPoint parse_point(const std::string& flag, const std::string& text, int d) {
  const Vec v = parse_vector(flag, text);
  if (v.size() != d) throw UsageError(flag, "expected " + std::to_string(d) + " coordinates");
  try {
    return SimplexPoint(v);
  } catch (const DomainError& e) {
    throw UsageError(flag, e.what());
  }
}

std::vector<int> parse_ints(const std::string& flag, const std::string& text) {
  std::vector<int> out;
  for (double x : parse_vector(flag, text)) {
    if (x != std::floor(x) || std::abs(x) > 1e9) throw UsageError(flag, "expected integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

ModelSpec load_model(const Common& c) {
  if (c.model.empty() == c.config.empty()) throw UsageError("--model", "give exactly one of --model and --config");
  if (!c.config.empty()) {
    if (!c.params.empty()) throw UsageError("--param", "only applies to --model");
    return load_model_file(c.config);
  }
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), c.model) == names.end())
    throw UsageError("--model", "unknown built-in model '" + c.model + "'");
  ParamMap params;
  for (const auto& p : c.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param", "expected k=v, got '" + p + "'");
    params[p.substr(0, eq)] = parse_real("--param", std::string_view(p).substr(eq + 1));
  }
  return builtin_model(c.model, params);
}

int jobs_of(const Common& c) {
  if (c.jobs < 0) throw UsageError("--jobs", "must be positive");
  return c.jobs > 0 ? c.jobs : default_jobs();
}

Json base_config(const std::string& command, const ModelSpec& spec, const Common& c) {
  return {{"command", command}, {"model", Json::parse(model_to_json(spec))}, {"seed", c.seed}};
}

Json path_json(const PiecewiseLinearPath& p) {
  Json knots = Json::array();
  for (const auto& k : p.knots()) knots.push_back(to_json(k.coords()));
  return {{"times", p.times()}, {"knots", knots}};
}

CsvTable path_csv(const PiecewiseLinearPath& p) {
  CsvTable t;
  t.header.push_back("t");
  for (int i = 1; i <= p.dim(); ++i) t.header.push_back("x" + std::to_string(i));
  for (std::size_t m = 0; m < p.size(); ++m) {
    std::vector<double> row{p.times()[m]};
    for (int i = 0; i < p.dim(); ++i) row.push_back(p.knots()[m][i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

PiecewiseLinearPath read_path_csv(const std::string& file, int d) {
  std::ifstream in(file);
  if (!in) throw UsageError("--path", "cannot open '" + file + "'");
  std::string line;
  std::getline(in, line);
  std::string expected = "t";
  for (int i = 1; i <= d; ++i) expected += ",x" + std::to_string(i);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw UsageError("--path", "header must be '" + expected + "'");
  std::vector<double> times;
  std::vector<SimplexPoint> knots;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const Vec row = parse_vector("--path", line);
    if (row.size() != d + 1) throw UsageError("--path", "row with " + std::to_string(row.size()) + " fields");
    times.push_back(row[0]);
    try {
      knots.emplace_back(Vec(row.tail(d)));
    } catch (const DomainError& e) {
      throw UsageError("--path", e.what());
    }
  }
  if (times.empty()) throw UsageError("--path", "no knots");
  try {
    return PiecewiseLinearPath(std::move(times), std::move(knots));
  } catch (const DomainError& e) {
    throw UsageError("--path", e.what());
  }
}

Json directions_json(const JumpRateTable& table) {
  Json a = Json::array();
  for (std::size_t v = 0; v < table.size(); ++v) a.push_back(format_direction(table.direction(v)));
  return a;
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Infinite: return "infinite";
    case SolveStatus::NotConverged: return "not-converged";
  }
  return "unknown";
}

Json rate_json(const LocalRateResult& r) {
  Json j{{"value", r.value},
         {"status", status_name(r.status)},
         {"theta", to_json(r.theta)},
         {"q", to_json(r.q)},
         {"iterations", r.iterations},
         {"gradient_norm", r.gradient_norm}};
  if (r.ascent) j["ascent"] = to_json(*r.ascent);
  return j;
}

Json findings_json(const std::vector<Finding>& fs) {
  Json a = Json::array();
  for (const auto& f : fs) {
    Json j{{"check", f.check}, {"subject", f.subject}, {"detail", f.detail}};
    if (f.point) j["point"] = to_json(*f.point);
    a.push_back(j);
  }
  return a;
}

Json minimize_json(const MinimizeReport& rep) {
  Json starts = Json::array();
  for (const auto& s : rep.starts)
    starts.push_back({{"label", s.label},
                      {"initial", s.initial},
                      {"value", s.value},
                      {"iterations", s.iterations},
                      {"converged", s.converged}});
  return {{"value", rep.value()},       {"start", rep.start},         {"starts", starts},
          {"iterations", rep.iterations}, {"converged", rep.converged}, {"path", path_json(rep.best.path)},
          {"unconverged_nodes", rep.best.unconverged_nodes}};
}

struct Context {
  std::ostream& out;
};

// ---- subcommands ----

struct SimulateArgs {
  Common c;
  int n = 0;
  std::string x0;
  double t = 1.0;
  std::uint64_t stream = 0;
  std::string format = "csv";
};

void run_simulate(const SimulateArgs& a, Context& ctx) {
  const ModelSpec spec = load_model(a.c);
  const JumpRateTable table(spec);
  if (a.n < 1) throw UsageError("--n", "must be positive");
  if (!(a.t > 0.0)) throw UsageError("--t", "must be positive");
  const LatticePoint x0 = LatticePoint::nearest(parse_point("--x0", a.x0, table.d()), a.n);
  Stream rng(a.c.seed, a.stream);
  const TrajectorySample s = gillespie_run(table, x0, a.t, rng);

  if (a.format == "csv") {
    CsvTable t{{"t", "direction"}, {}};
    for (int i = 1; i <= s.d; ++i) t.header.push_back("x" + std::to_string(i));
    for (std::size_t m = 0; m < s.states(); ++m) {
      std::vector<double> row{s.times[m], m == 0 ? 0.0 : static_cast<double>(s.directions[m - 1] + 1)};
      for (int c : s.counts_at(m)) row.push_back(static_cast<double>(c) / s.n);
      t.rows.push_back(std::move(row));
    }
    write_text(a.c.out, t.text(), ctx.out);
    return;
  }
  Json conf = base_config("simulate", spec, a.c);
  conf.update({{"n", a.n}, {"x0", x0.counts()}, {"t", a.t}, {"stream", a.stream}});
  Json states = Json::array();
  for (std::size_t m = 0; m < s.states(); ++m) states.push_back(std::vector<int>(s.counts_at(m).begin(), s.counts_at(m).end()));
  Json dirs = Json::array();
  for (auto v : s.directions) dirs.push_back(v + 1);
  const Json report{{"config", conf},  {"directions", directions_json(table)}, {"jumps", s.jumps()},
                    {"times", s.times}, {"direction", dirs},                    {"counts", states},
                    {"final", s.final_state().counts()}};
  write_text(a.c.out, to_json_text(report), ctx.out);
}

struct LlnArgs {
  Common c;
  std::string x0;
  double t = 1.0;
  double dt = 1e-3;
  std::string format = "csv";
};

void run_lln(const LlnArgs& a, Context& ctx) {
  const ModelSpec spec = load_model(a.c);
  const JumpRateTable table(spec);
  if (!(a.t > 0.0)) throw UsageError("--t", "must be positive");
  if (!(a.dt > 0.0)) throw UsageError("--dt", "must be positive");
  const SimplexPoint x0 = parse_point("--x0", a.x0, table.d());
  const LlnTrajectory traj = integrate_lln(table, x0, a.t, a.dt);
  const PiecewiseLinearPath path = traj.as_path();
  if (a.format == "csv") {
    write_text(a.c.out, path_csv(path).text(), ctx.out);
    return;
  }
  Json conf = base_config("lln", spec, a.c);
  conf.update({{"x0", to_json(x0.coords())}, {"t", a.t}, {"dt", a.dt}});
  Json report = path_json(path);
  report["config"] = conf;
  report["clamp_count"] = traj.clamp_count;
  write_text(a.c.out, to_json_text(report), ctx.out);
}

struct RateArgs {
  Common c;
  std::string x;
  std::string beta;
  bool primal = false;
};

void run_rate(const RateArgs& a, Context& ctx) {
  const ModelSpec spec = load_model(a.c);
  const JumpRateTable table(spec);
  const SimplexPoint x = parse_point("--x", a.x, table.d());
  const Vec beta = parse_vector("--beta-vec", a.beta);
  if (beta.size() != table.d()) throw UsageError("--beta-vec", "expected " + std::to_string(table.d()) + " components");
  if (std::abs(beta.sum()) > 1e-9) throw UsageError("--beta-vec", "components must sum to zero");
  const LocalRateResult r = local_rate(table, x, beta);
  Json conf = base_config("rate", spec, a.c);
  conf.update({{"x", to_json(x.coords())}, {"beta", to_json(beta)}, {"primal", a.primal}});
  Json report = rate_json(r);
  report["config"] = conf;
  report["directions"] = directions_json(table);
  report["rates"] = to_json(table.limit_rates(x.coords()));
  if (a.primal) {
    const LocalRateResult p = local_rate_primal(table, x, beta);
    report["primal"] = rate_json(p);
  }
  write_text(a.c.out, to_json_text(report), ctx.out);
}

struct ActionArgs {
  Common c;
  std::string path;
};

void run_action(const ActionArgs& a, Context& ctx) {
  const ModelSpec spec = load_model(a.c);
  const JumpRateTable table(spec);
  const PiecewiseLinearPath path = read_path_csv(a.path, table.d());
  const ActionReport rep = path_action(table, path);
  Json conf = base_config("action", spec, a.c);
  conf["path"] = a.path;
  const Json report{{"config", conf},
                    {"value", rep.value},
                    {"segments", rep.segments},
                    {"scheme", rep.scheme},
                    {"infinite_segments", rep.infinite_segments},
                    {"unconverged_nodes", rep.unconverged_nodes}};
  write_text(a.c.out, to_json_text(report), ctx.out);
}

struct MinimizeArgs {
  Common c;
  std::string x0;
  std::string xT;
  double t = 1.0;
  int knots = 50;
  std::string path_out;
};

void run_minimize(const MinimizeArgs& a, Context& ctx) {
  const ModelSpec spec = load_model(a.c);
  const JumpRateTable table(spec);
  const SimplexPoint x0 = parse_point("--x0", a.x0, table.d());
  const SimplexPoint xT = parse_point("--xT", a.xT, table.d());
  if (!(a.t > 0.0) || !std::isfinite(a.t)) throw UsageError("--t", "must be positive");
  if (a.knots < 2) throw UsageError("--knots", "must be at least 2");
  MinimizeOptions opts;
  opts.knots = a.knots;
  opts.jobs = jobs_of(a.c);
  const MinimizeReport rep =
      a.t <= 1.0 ? minimize_action(table, x0, xT, a.t, opts) : minimize_action_horizon(table, x0, xT, a.t, opts);
  Json conf = base_config("minimize", spec, a.c);
  conf.update({{"x0", to_json(x0.coords())}, {"xT", to_json(xT.coords())}, {"t", a.t}, {"knots", a.knots}});
  Json report = minimize_json(rep);
  report["config"] = conf;
  if (!a.path_out.empty()) write_text(a.path_out, path_csv(rep.best.path).text(), ctx.out);
  write_text(a.c.out, to_json_text(report), ctx.out);
}

struct QuasipotentialArgs {
  Common c;
  std::string x;
  std::string y;
  std::string horizons;
  int knots = 50;
  std::string path_out;
};

void run_quasipotential(const QuasipotentialArgs& a, Context& ctx) {
  const ModelSpec spec = load_model(a.c);
  const JumpRateTable table(spec);
  const SimplexPoint x = parse_point("--x", a.x, table.d());
  const SimplexPoint y = parse_point("--y", a.y, table.d());
  QuasipotentialOptions opts;
  if (!a.horizons.empty()) {
    const Vec h = parse_vector("--horizons", a.horizons);
    opts.horizons.assign(h.data(), h.data() + h.size());
    for (double t : opts.horizons)
      if (!(t > 0.0) || !std::isfinite(t)) throw UsageError("--horizons", "must be positive");
  }
  if (a.knots < 2) throw UsageError("--knots", "must be at least 2");
  opts.minimize.knots = a.knots;
  opts.minimize.jobs = jobs_of(a.c);
  const QuasipotentialResult r = quasipotential(table, x, y, opts);
  Json conf = base_config("quasipotential", spec, a.c);
  conf.update({{"x", to_json(x.coords())}, {"y", to_json(y.coords())}, {"horizons", opts.horizons}, {"knots", a.knots}});
  Json report{{"config", conf}, {"value", r.value}, {"horizon", r.horizon}, {"source", r.source}};
  report["path"] = r.path ? path_json(*r.path) : Json(nullptr);
  if (!a.path_out.empty() && r.path) write_text(a.path_out, path_csv(*r.path).text(), ctx.out);
  write_text(a.c.out, to_json_text(report), ctx.out);
}

struct CheckArgs {
  Common c;
  bool strict = false;
};

// Returns whether the assumptions behind the sample-path LDP hold.
bool run_check(const CheckArgs& a, Context& ctx) {
  const ModelSpec spec = load_model(a.c);
  const std::vector<Finding> invalid = validate_model(spec);
  const JumpRateTable table(spec);
  const KErgodicity kerg = is_k_ergodic(spec);
  const SingleErgodicity g1 = check_single_ergodic(table, Generator::Single);
  const SingleErgodicity g2 = check_single_ergodic(table, Generator::Effective);
  const UeReport ue = check_ue(spec);
  const SimJumpsReport sj = check_simjumps(table);
  const RateEstimateReport est = rate_estimate_report(table);
  const bool passed = invalid.empty() && kerg.ergodic && ue.ok && sj.ok;

  Json closures = Json::array();
  for (const auto& cl : kerg.closures) {
    Json states = Json::array();
    for (int s : cl.states()) states.push_back(s + 1);
    closures.push_back({{"source", cl.source + 1}, {"reached", states}});
  }
  Json sjdirs = Json::array();
  for (const auto& dgn : sj.directions)
    sjdirs.push_back({{"direction", format_direction(dgn.direction)},
                      {"property1", dgn.property1},
                      {"property2", dgn.property2}});
  auto counterexample = [](const SingleErgodicity& s) { return s.counterexample ? to_json(*s.counterexample) : Json(nullptr); };

  Json report{{"config", base_config("check", spec, a.c)},
              {"valid", invalid.empty()},
              {"validation_findings", findings_json(invalid)},
              {"k_ergodic", kerg.ergodic},
              {"k_closures", closures},
              {"g1", g1.ergodic},
              {"g1_counterexample", counterexample(g1)},
              {"g2", g2.ergodic},
              {"g2_counterexample", counterexample(g2)},
              {"ue", ue.ok},
              {"ue_findings", findings_json(ue.findings)},
              {"simjumps", sj.ok},
              {"simjumps_directions", sjdirs},
              {"simjumps_findings", findings_json(sj.findings)},
              {"rate_estimates",
               {{"c_hat", est.c_hat},
                {"c0", est.c0},
                {"lipschitz", est.lipschitz},
                {"c_bar_lower", est.c_bar_lower},
                {"violations", findings_json(est.violations)}}},
              {"passed", passed}};
  report["config"]["strict"] = a.strict;
  if (passed) {
    const InteriorityReport in = interiority_check(table, {}, jobs_of(a.c));
    Json fits = Json::array();
    for (const auto& f : in.fits) fits.push_back({{"start", to_json(f.start.coords())}, {"b", f.b}, {"D", f.D}});
    report["interiority"] = {{"fits", fits}, {"findings", findings_json(in.findings)}};
  } else {
    report["interiority"] = nullptr;
  }
  write_text(a.c.out, to_json_text(report), ctx.out);
  return passed;
}

struct ValidateArgs {
  Common c;
  std::string experiment;
  std::string x0;
  std::string target;
  std::string ns;
  std::optional<std::size_t> reps;
  std::optional<double> t;
  int coordinate = 1;
  double level = 0.8;
  std::string method = "is";
  double tolerance = 0.03;
  double delta = 0.2;
  bool force = false;
  std::string csv;
};

void run_validate(const ValidateArgs& a, Context& ctx) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), a.experiment) == names.end())
    throw UsageError("--experiment", "unknown experiment '" + a.experiment + "'");
  if (a.reps && *a.reps == 0) throw UsageError("--reps", "must be positive");
  const ModelSpec spec = load_model(a.c);
  const JumpRateTable table(spec);
  ExperimentConfig cfg;
  cfg.name = a.experiment;
  if (!a.x0.empty()) cfg.x0 = parse_point("--x0", a.x0, table.d());
  if (!a.target.empty()) cfg.target = parse_point("--target", a.target, table.d());
  if (!a.ns.empty()) cfg.ns = parse_ints("--ns", a.ns);
  cfg.reps = a.reps;
  cfg.t = a.t;
  cfg.coordinate = a.coordinate - 1;
  cfg.level = a.level;
  cfg.method = a.method;
  cfg.tolerance = a.tolerance;
  cfg.delta = a.delta;
  cfg.seed = a.c.seed;
  cfg.jobs = jobs_of(a.c);

  if (!a.force) {
    std::vector<std::string> failed;
    if (!validate_model(spec).empty()) failed.push_back("validation");
    if (!is_k_ergodic(spec).ergodic) failed.push_back("k-ergodicity");
    if (!check_ue(spec).ok) failed.push_back("ue");
    if (!check_simjumps(table).ok) failed.push_back("simjumps");
    if (!failed.empty()) {
      std::string list;
      for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
      throw DomainError("model fails structure checks (" + list + "); rerun with --force to proceed");
    }
  }

  ExperimentResult res = run_experiment(table, cfg);
  Json& conf = res.report["config"];
  conf["command"] = "validate";
  conf["model"] = Json::parse(model_to_json(spec));
  conf["force"] = a.force;
  std::string csv = a.csv;
  if (csv.empty() && !a.c.out.empty()) csv = std::filesystem::path(a.c.out).replace_extension(".csv").string();
  if (!csv.empty()) write_text(csv, res.table.text(), ctx.out);
  write_text(a.c.out, to_json_text(res.report), ctx.out);
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, const std::string& flag = {}) {
  Json j{{"error", kind}, {"message", message}};
  if (!flag.empty()) j["flag"] = flag;
  err << j.dump() << '\n';
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Large deviations of mean-field interacting particle systems", "mfldp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mfldp 0.1.0");

  std::function<int()> action;
  Context ctx{out};

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Exact Gillespie sample of the empirical measure");
  add_common(s, sim.c);
  s->add_option("--n", sim.n, "Population size")->required();
  s->add_option("--x0", sim.x0, "Initial point, comma-separated (rounded to the lattice)")->required();
  s->add_option("--t", sim.t, "Horizon")->capture_default_str();
  s->add_option("--stream", sim.stream, "Random stream id")->capture_default_str();
  s->add_option("--format", sim.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  s->callback([&] { action = [&] { run_simulate(sim, ctx); return 0; }; });

  LlnArgs lln;
  auto* l = app.add_subcommand("lln", "Integrate the mean-field ODE");
  add_common(l, lln.c);
  l->add_option("--x0", lln.x0, "Initial point")->required();
  l->add_option("--t", lln.t, "Horizon")->capture_default_str();
  l->add_option("--dt", lln.dt, "RK4 step")->capture_default_str();
  l->add_option("--format", lln.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  l->callback([&] { action = [&] { run_lln(lln, ctx); return 0; }; });

  RateArgs rate;
  auto* r = app.add_subcommand("rate", "Local rate function L(x, beta)");
  add_common(r, rate.c);
  r->add_option("--x", rate.x, "State")->required();
  r->add_option("--beta-vec", rate.beta, "Velocity, components summing to zero")->required();
  r->add_flag("--primal", rate.primal, "Also solve the primal flow problem");
  r->callback([&] { action = [&] { run_rate(rate, ctx); return 0; }; });

  ActionArgs act;
  auto* ac = app.add_subcommand("action", "Action of a piecewise-linear path");
  add_common(ac, act.c);
  ac->add_option("--path", act.path, "CSV with header t,x1..xd")->required();
  ac->callback([&] { action = [&] { run_action(act, ctx); return 0; }; });

  MinimizeArgs mini;
  auto* m = app.add_subcommand("minimize", "Minimum-action path between two points");
  add_common(m, mini.c);
  m->add_option("--x0", mini.x0, "Start")->required();
  m->add_option("--xT", mini.xT, "End")->required();
  m->add_option("--t", mini.t, "Horizon")->capture_default_str();
  m->add_option("--knots", mini.knots, "Grid points including endpoints")->capture_default_str();
  m->add_option("--path-out", mini.path_out, "CSV file for the optimal path");
  m->callback([&] { action = [&] { run_minimize(mini, ctx); return 0; }; });

  QuasipotentialArgs qp;
  auto* q = app.add_subcommand("quasipotential", "Minimum action over horizons");
  add_common(q, qp.c);
  q->add_option("--x", qp.x, "Start")->required();
  q->add_option("--y", qp.y, "End")->required();
  q->add_option("--horizons", qp.horizons, "Comma-separated horizons (default 0.25,0.5,1,2,4,8)");
  q->add_option("--knots", qp.knots, "Grid points including endpoints")->capture_default_str();
  q->add_option("--path-out", qp.path_out, "CSV file for the best path");
  q->callback([&] { action = [&] { run_quasipotential(qp, ctx); return 0; }; });

  CheckArgs chk;
  auto* c = app.add_subcommand("check", "Structural assumption report");
  add_common(c, chk.c);
  c->add_flag("--strict", chk.strict, "Exit 1 when an assumption fails");
  c->callback([&] { action = [&] { return run_check(chk, ctx) || !chk.strict ? 0 : 1; }; });

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Run a validation experiment");
  add_common(v, val.c);
  v->add_option("--experiment", val.experiment, "lln-convergence, ldp-set-event, ldp-point-event, "
                                                "quasipotential-stationary or bounds-suite")
      ->required();
  v->add_option("--x0", val.x0, "Initial point (default: barycenter)");
  v->add_option("--target", val.target, "Target point");
  v->add_option("--ns", val.ns, "Comma-separated populations");
  v->add_option("--reps", val.reps, "Replicates per population");
  v->add_option("--t", val.t, "Horizon");
  v->add_option("--coordinate", val.coordinate, "Set event coordinate, 1-based")->capture_default_str();
  v->add_option("--level", val.level, "Set event level")->capture_default_str();
  v->add_option("--method", val.method, "is or mc")->capture_default_str();
  v->add_option("--tolerance", val.tolerance, "LLN sup-norm tolerance")->capture_default_str();
  v->add_option("--delta", val.delta, "Excursion level")->capture_default_str();
  v->add_flag("--force", val.force, "Run even when structure checks fail");
  v->add_option("--csv", val.csv, "CSV of per-n rows (default: --out with .csv extension)");
  v->callback([&] { action = [&] { run_validate(val, ctx); return 0; }; });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return 2;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    report_error(err, "usage", e.what(), e.flag());
    return 2;
  } catch (const DomainError& e) {
    report_error(err, "domain", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "domain", e.what());
    return 1;
  }
}

}  // namespace mfldp::cli
