// Command-line front end: every subcommand writes one CSV table.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pinball/csv.hpp"
#include "pinball/parallel.hpp"
#include "pinball/scan.hpp"

namespace {

using namespace pinball;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEscaped = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Range {
  double lo = 0.0, hi = 0.0, step = 0.0;
};

Range parse_range(const std::string& text, const char* flag) {
  Range r;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw UsageError(std::string(flag) + " expects lo:hi:step, got '" + text + "'");
  }
  if (!(r.step > 0.0) || r.hi < r.lo) throw UsageError(std::string(flag) + " needs step > 0 and hi >= lo");
  return r;
}

BasinGrid parse_grid(const std::string& text) {
  BasinGrid g;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> g.width >> x >> g.height) || (x != 'x' && x != 'X') || !in.eof() || g.width < 2 || g.height < 2) {
    throw UsageError("--grid expects WxH with W, H >= 2, got '" + text + "'");
  }
  return g;
}

struct Options {
  std::string command;
  std::string table = "cardioid";
  double a = 1.5;
  double alpha = 0.08;
  std::optional<double> lambda;
  std::string lambda_range;
  std::string alpha_range;
  std::string phi_range;
  std::size_t n = kDefaultSamples;
  std::size_t discard = kDefaultDiscard;
  std::uint64_t seed = 1;
  std::string grid = "100x100";
  std::string out;
  unsigned threads = 0;
  std::size_t ics = 1;
  std::optional<double> phi;
  std::size_t period = 0;
  std::size_t points = 64;
  int sign = 1;
  bool tag_period3 = false;
  bool critical = false;
  std::string overlay;
  std::size_t cascade = 0;
};

Table make_table(const Options& o) {
  try {
    return Table::from_name(o.table, o.a, o.alpha);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

double require_lambda(const Options& o) {
  if (!o.lambda) throw UsageError("--lambda is required");
  return *o.lambda;
}

std::vector<double> lambda_values(const Options& o, bool allow_single = true) {
  if (!o.lambda_range.empty()) {
    const Range r = parse_range(o.lambda_range, "--lambda-range");
    return grid_values(r.lo, r.hi, r.step);
  }
  if (allow_single && o.lambda) return {*o.lambda};
  throw UsageError(allow_single ? "--lambda or --lambda-range is required" : "--lambda-range is required");
}

void common_meta(CsvWriter& csv, const Options& o, const Table& table) {
  csv.meta("tool", std::string("pinball ") + std::string(kToolVersion));
  csv.meta("command", o.command);
  csv.meta("table", table.name());
  if (table.kind() == TableKind::ellipse) csv.meta("a", o.a);
  if (table.kind() == TableKind::three_pointed_egg) csv.meta("alpha", o.alpha);
  csv.meta("seed", std::to_string(o.seed));
  csv.meta("rng", "splitmix64, stream = seed ^ splitmix64(index)");
  csv.meta("n", std::to_string(o.n));
  csv.meta("discard", std::to_string(o.discard));
  csv.meta("chaos_threshold", kChaosThreshold);
  csv.meta("newton_tolerance", kNewtonTolerance);
  csv.meta("period_tolerance", kPeriodTolerance);
  csv.meta("coordinate", table.plots_arc_length() ? "arc length" : "boundary angle");
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--table", o.table, "circle|ellipse|cardioid|cuspless|egg")
      ->check(CLI::IsMember({"circle", "ellipse", "cardioid", "cuspless", "egg"}));
  sub->add_option("--a", o.a, "ellipse semi-axis (minor axis 1)");
  sub->add_option("--alpha", o.alpha, "egg deformation");
  sub->add_option("--lambda", o.lambda, "contraction factor");
  sub->add_option("--lambda-range", o.lambda_range, "lo:hi:step");
  sub->add_option("--n", o.n, "collisions per run");
  sub->add_option("--discard", o.discard, "transient collisions");
  sub->add_option("--seed", o.seed, "64-bit seed");
  sub->add_option("--out", o.out, "output path (default stdout)");
  sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  sub->add_option("--ics", o.ics, "random initial conditions per parameter");
}

int cmd_attractor(const Options& o, CsvWriter& csv) {
  const Table table = make_table(o);
  const Lambda lambda(require_lambda(o));
  std::vector<PhaseCloud> clouds(o.ics);
  parallel_for(o.ics, o.threads, [&](std::size_t ic) {
    Rng rng(o.seed, ic);
    clouds[ic] = sample_attractor(lambda, table, random_initial_condition(table, rng), o.n, o.discard);
  });
  common_meta(csv, o, table);
  csv.meta("lambda", lambda.value());
  csv.header({"coord", "sin_phi"});
  bool all_escaped = true;
  for (const auto& c : clouds) {
    all_escaped = all_escaped && c.termination != Termination::none;
    for (const auto& p : c.points) csv.row(p[0], p[1]);
  }
  return all_escaped ? kExitEscaped : kExitOk;
}

int cmd_lyapunov(const Options& o, CsvWriter& csv) {
  const Table table = make_table(o);
  const std::vector<double> lambdas = lambda_values(o);
  for (double l : lambdas) (void)Lambda(l);
  std::vector<LyapunovEstimate> runs(lambdas.size() * o.ics);
  parallel_for(runs.size(), o.threads, [&](std::size_t k) {
    Rng rng(o.seed, k);
    runs[k] = lyapunov(Lambda(lambdas[k / o.ics]), table, random_initial_condition(table, rng), o.n, o.discard);
  });
  common_meta(csv, o, table);
  csv.header({"lambda", "nu_plus", "nu_minus", "n_used"});
  bool all_escaped = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    all_escaped = all_escaped && runs[k].terminated_early;
    csv.row(lambdas[k / o.ics], runs[k].nu_plus, runs[k].nu_minus, runs[k].n_used);
  }
  return all_escaped ? kExitEscaped : kExitOk;
}

int cmd_basin(const Options& o, CsvWriter& csv) {
  const Table table = make_table(o);
  const Lambda lambda(require_lambda(o));
  const BasinGrid grid = parse_grid(o.grid);
  BasinOptions opt;
  opt.n = o.n;
  opt.discard = o.discard;
  opt.threads = o.threads;
  if (o.tag_period3) {
    if (table.kind() != TableKind::three_pointed_egg) throw UsageError("--tag-period3 needs --table egg");
    opt.attractors = {egg_period3_orbit(o.alpha, lambda.value(), 1).points,
                      egg_period3_orbit(o.alpha, lambda.value(), -1).points};
  }
  const std::vector<BasinCell> cells = classify_basin(lambda, table, grid, opt);
  common_meta(csv, o, table);
  csv.meta("lambda", lambda.value());
  csv.meta("grid", o.grid);
  if (o.tag_period3) {
    csv.meta("attractor", "0 and 1 are the period-3 orbits of each orientation, -1 untagged");
    csv.meta("boundary_fraction", basin_boundary_fraction(cells, grid));
    csv.header({"coord", "sin_phi", "label", "nu_plus", "attractor"});
  } else {
    csv.header({"coord", "sin_phi", "label", "nu_plus"});
  }
  bool all_escaped = true;
  for (const auto& c : cells) {
    all_escaped = all_escaped && c.label == BasinLabel::escaped;
    if (o.tag_period3) {
      csv.row(c.coord, c.sin_phi, to_string(c.label), c.nu_plus, c.attractor);
    } else {
      csv.row(c.coord, c.sin_phi, to_string(c.label), c.nu_plus);
    }
  }
  return all_escaped ? kExitEscaped : kExitOk;
}

int cmd_bifurcation(const Options& o, CsvWriter& csv) {
  SweepSpec spec;
  spec.table = make_table(o);
  spec.lambdas = lambda_values(o, false);
  spec.ics = o.ics;
  spec.n = o.n;
  spec.discard = o.discard;
  spec.seed = o.seed;
  spec.threads = o.threads;
  if (o.cascade > 0) {
    const Range r = parse_range(o.lambda_range, "--lambda-range");
    const auto start = attracting_orbit(Lambda(r.lo), spec.table, o.cascade, o.seed);
    if (!start) throw std::runtime_error("no attracting orbit of the requested period at the lower lambda");
    const auto thresholds = period_doubling_cascade(spec.table, *start, r.lo, r.hi, {r.step, 1e-7, 16});
    common_meta(csv, o, spec.table);
    csv.meta("method", "newton continuation, bisection on a monodromy eigenvalue crossing -1");
    csv.header({"period", "lambda"});
    for (const auto& t : thresholds) csv.row(t.period, t.lambda);
    return kExitOk;
  }
  spec.validate();
  const BifurcationScan scan = bifurcation_scan(spec, o.points);
  common_meta(csv, o, spec.table);
  for (double l : scan.all_escaped) csv.meta("all_escaped", l);
  csv.header({"lambda", "coord", "sin_phi", "period", "nu_plus"});
  for (const auto& r : scan.rows) csv.row(r.lambda, r.coord, r.sin_phi, r.period, r.nu_plus);
  return scan.all_escaped.size() == spec.lambdas.size() ? kExitEscaped : kExitOk;
}

int cmd_phase_diagram(const Options& o, CsvWriter& csv) {
  if (o.table != "egg") throw UsageError("phase-diagram needs --table egg");
  if (o.alpha_range.empty()) throw UsageError("--alpha-range is required");
  const Range ar = parse_range(o.alpha_range, "--alpha-range");
  SweepSpec spec;
  spec.table = Table::three_pointed_egg(ar.lo);
  spec.lambdas = lambda_values(o, false);
  spec.ics = o.ics;
  spec.n = o.n;
  spec.discard = o.discard;
  spec.seed = o.seed;
  spec.threads = o.threads;
  const std::vector<double> alphas = grid_values(ar.lo, ar.hi, ar.step);
  const std::vector<PhaseDiagramCell> cells = phase_diagram(alphas, spec);
  common_meta(csv, o, spec.table);
  csv.meta("lambda_one_rule", "chaotic for every alpha > 0");
  csv.header({"alpha", "lambda", "any_chaotic", "max_nu_plus"});
  for (const auto& c : cells) csv.row(c.alpha, c.lambda, c.any_chaotic, c.max_nu_plus);
  if (!o.overlay.empty()) {
    std::ofstream f(o.overlay);
    if (!f) throw std::runtime_error("cannot open " + o.overlay);
    CsvWriter ov(f);
    ov.meta("tool", std::string("pinball ") + std::string(kToolVersion));
    ov.meta("curve", "alpha at which the period-2 orbit loses stability");
    ov.header({"lambda", "alpha_tilde"});
    for (double l : spec.lambdas) ov.row(l, egg_alpha_tilde(l));
  }
  return kExitOk;
}

int cmd_crisis(const Options& o, CsvWriter& csv) {
  if (o.table != "egg") throw UsageError("crisis needs --table egg");
  SweepSpec spec;
  spec.table = make_table(o);
  spec.lambdas = lambda_values(o, false);
  spec.ics = o.ics;
  spec.n = o.n;
  spec.discard = o.discard;
  spec.seed = o.seed;
  spec.threads = o.threads;
  const std::vector<CrisisRow> rows = crisis_scan(spec);
  common_meta(csv, o, spec.table);
  csv.header({"lambda", "component_count", "chaotic_fraction"});
  for (const auto& r : rows) csv.row(r.lambda, r.component_count, r.chaotic_fraction);
  return kExitOk;
}

int cmd_orbit(const Options& o, CsvWriter& csv) {
  const Table table = make_table(o);
  const Lambda lambda(require_lambda(o));
  if (o.period == 0) throw UsageError("--period is required");
  OrbitRecord orbit;
  if (table.kind() == TableKind::three_pointed_egg && o.period == 3) {
    orbit = egg_period3_orbit(o.alpha, lambda.value(), o.sign);
  } else {
    const auto found = attracting_orbit(lambda, table, o.period, o.seed);
    if (!found) throw std::runtime_error("no attracting orbit of period " + std::to_string(o.period) + " found");
    orbit = *found;
  }
  common_meta(csv, o, table);
  csv.meta("lambda", lambda.value());
  csv.meta("period", std::to_string(orbit.period));
  csv.meta("residual", orbit.residual);
  csv.meta("trace", orbit.stability.trace);
  csv.meta("det", orbit.stability.det);
  csv.meta("max_modulus", orbit.stability.max_modulus());
  csv.meta("classification", to_string(orbit.stability.classification));
  csv.header({"index", "coord", "sin_phi"});
  for (std::size_t i = 0; i < orbit.points.size(); ++i) {
    csv.row(i, table.plot_coordinate(orbit.points[i].u), std::sin(orbit.points[i].phi));
  }
  return kExitOk;
}

int cmd_slap(const Options& o, CsvWriter& csv) {
  const Table table = make_table(o);
  const BasinGrid grid = parse_grid(o.grid);
  const auto [lo, hi] = table.plot_range();
  struct Row {
    double coord, image, d1, d2;
  };
  std::vector<Row> rows(grid.width);
  parallel_for(grid.width, o.threads, [&](std::size_t i) {
    const double c = lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(grid.width);
    const double u = table.param_from_plot_coordinate(c);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
      const double v = slap_map(table, u);
      const double d1 = slap_derivative(table, u);
      rows[i] = {c, table.plot_coordinate(v), d1, d1 * slap_derivative(table, v)};
    } catch (const GeometryError&) {
      rows[i] = {c, nan, nan, nan};
    }
  });
  double min_d2 = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (std::isfinite(r.d2)) min_d2 = std::min(min_d2, std::abs(r.d2));
  }
  common_meta(csv, o, table);
  csv.meta("min_abs_second_iterate_derivative", min_d2);
  csv.header({"coord", "image", "derivative", "second_iterate_derivative"});
  for (const auto& r : rows) csv.row(r.coord, r.image, r.d1, r.d2);
  return kExitOk;
}

int cmd_shoot(const Options& o, CsvWriter& csv) {
  const Table table = Table::cuspless_cardioid();
  const double join = -CusplessCardioid::kHalfWall;
  auto meta = [&] {
    common_meta(csv, o, table);
    csv.meta("convention", "arc length counterclockwise, launch join at s = -sqrt(3)/4");
    csv.meta("s_join", join);
  };
  if (o.critical) {
    const std::vector<double> lambdas = lambda_values(o, false);
    if (o.phi_range.empty()) throw UsageError("--critical needs --phi-range");
    const Range pr = parse_range(o.phi_range, "--phi-range");
    const ShootingCritical c = cuspless_critical(lambdas.front(), lambdas.back(), pr.lo, pr.hi);
    meta();
    csv.header({"lambda_star", "phi_star"});
    csv.row(c.lambda, c.phi);
    return kExitOk;
  }
  const double lambda = require_lambda(o);
  std::vector<double> phis;
  if (!o.phi_range.empty()) {
    const Range pr = parse_range(o.phi_range, "--phi-range");
    phis = grid_values(pr.lo, pr.hi, pr.step);
  } else if (o.phi) {
    phis = {*o.phi};
  } else {
    throw UsageError("--phi or --phi-range is required");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> s4(phis.size(), nan);
  parallel_for(phis.size(), o.threads, [&](std::size_t i) {
    try {
      s4[i] = cuspless_shoot(lambda, phis[i]);
    } catch (const GeometryError&) {
    }
  });
  meta();
  csv.meta("lambda", lambda);
  csv.header({"phi", "s4", "s4_minus_join"});
  bool all_escaped = true;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    all_escaped = all_escaped && std::isnan(s4[i]);
    csv.row(phis[i], s4[i], s4[i] - join);
  }
  return all_escaped ? kExitEscaped : kExitOk;
}

int cmd_portrait(const Options& o, CsvWriter& csv) {
  if (o.table != "egg") throw UsageError("portrait needs --table egg");
  const Table table = make_table(o);
  const auto points = hamiltonian_portrait(o.alpha, o.ics, o.n, o.seed, o.threads);
  common_meta(csv, o, table);
  csv.meta("lambda", 1.0);
  csv.header({"ic", "coord", "sin_phi"});
  for (const auto& p : points) csv.row(p.ic, p.coord, p.sin_phi);
  return points.empty() ? kExitEscaped : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pinball billiards: attractors, Lyapunov exponents, basins and parameter sweeps"};
  app.require_subcommand(1);
  Options o;

  auto* attractor = app.add_subcommand("attractor", "attractor samples (coord, sin phi)");
  auto* lyap = app.add_subcommand("lyapunov", "Lyapunov exponents over random initial conditions");
  auto* basin = app.add_subcommand("basin", "chaotic/periodic labels on a phase-space grid");
  auto* bifn = app.add_subcommand("bifurcation", "attractor samples over a lambda range");
  auto* phase = app.add_subcommand("phase-diagram", "egg (alpha, lambda) chaos diagram");
  auto* crisis = app.add_subcommand("crisis", "egg attractor components and chaotic fraction");
  auto* orbit = app.add_subcommand("orbit", "periodic orbit by Newton iteration");
  auto* slap = app.add_subcommand("slap", "slap map (lambda = 0) and its derivatives");
  auto* shoot = app.add_subcommand("shoot", "cuspless cardioid shooting from the upper join");
  auto* portrait = app.add_subcommand("portrait", "egg phase portrait at lambda = 1");
  for (auto* sub : {attractor, lyap, basin, bifn, phase, crisis, orbit, slap, shoot, portrait}) add_common(sub, o);
  basin->add_option("--grid", o.grid, "WxH cells");
  basin->add_flag("--tag-period3", o.tag_period3, "egg: tag cells by the period-3 orbit they reach");
  bifn->add_option("--points", o.points, "attractor samples per initial condition");
  bifn->add_option("--cascade", o.cascade, "instead, locate doubling thresholds from this period");
  phase->add_option("--alpha-range", o.alpha_range, "lo:hi:step");
  phase->add_option("--overlay", o.overlay, "also write lambda, alpha_tilde here");
  orbit->add_option("--period", o.period, "orbit period");
  orbit->add_option("--sign", o.sign, "egg period 3: orientation +1 or -1");
  slap->add_option("--grid", o.grid, "W or WxH; W sample points")->transform([](std::string s) {
    return s.find_first_of("xX") == std::string::npos ? s + "x2" : s;
  });
  shoot->add_option("--phi", o.phi, "launch angle");
  shoot->add_option("--phi-range", o.phi_range, "lo:hi:step");
  shoot->add_flag("--critical", o.critical, "bisect the lambda range for the tangency");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (attractor->parsed()) o.command = "attractor";
  if (lyap->parsed()) o.command = "lyapunov";
  if (basin->parsed()) o.command = "basin";
  if (bifn->parsed()) o.command = "bifurcation";
  if (phase->parsed()) o.command = "phase-diagram";
  if (crisis->parsed()) o.command = "crisis";
  if (orbit->parsed()) o.command = "orbit";
  if (slap->parsed()) o.command = "slap";
  if (shoot->parsed()) o.command = "shoot";
  if (portrait->parsed()) o.command = "portrait";
  if (o.ics == 0) {
    std::cerr << "--ics must be positive\n";
    return kExitUsage;
  }
  if (bifn->parsed() && bifn->count("--ics") == 0) o.ics = 100;
  if (phase->parsed() && phase->count("--ics") == 0) o.ics = 100;
  if (crisis->parsed() && crisis->count("--ics") == 0) o.ics = 100;
  if (basin->parsed() && basin->count("--n") == 0) o.n = 2000;

  // Buffer the table so a failed run leaves no partial file behind.
  std::ostringstream buffer;
  buffer.imbue(std::locale::classic());
  CsvWriter csv(buffer);
  int code = kExitOk;
  try {
    if (attractor->parsed()) code = cmd_attractor(o, csv);
    if (lyap->parsed()) code = cmd_lyapunov(o, csv);
    if (basin->parsed()) code = cmd_basin(o, csv);
    if (bifn->parsed()) code = cmd_bifurcation(o, csv);
    if (phase->parsed()) code = cmd_phase_diagram(o, csv);
    if (crisis->parsed()) code = cmd_crisis(o, csv);
    if (orbit->parsed()) code = cmd_orbit(o, csv);
    if (slap->parsed()) code = cmd_slap(o, csv);
    if (shoot->parsed()) code = cmd_shoot(o, csv);
    if (portrait->parsed()) code = cmd_portrait(o, csv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  if (o.out.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot open " << o.out << '\n';
      return kExitFailure;
    }
    f << buffer.str();
  }
  if (code == kExitEscaped) std::cerr << "all trajectories escaped\n";
  return code;
}
