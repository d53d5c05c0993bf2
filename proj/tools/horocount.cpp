#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "horocount/acceptance.hpp"
#include "horocount/equidist.hpp"
#include "horocount/latcount.hpp"
#include "horocount/moebius.hpp"
#include "horocount/orbits.hpp"
#include "horocount/randlat.hpp"

using namespace horocount;
using json = nlohmann::ordered_json;

namespace {

// Bad flags or inputs; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int threads = 0;
  std::string output;
  std::string format = "json";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed_given) return c.seed;
  if (const char* env = std::getenv("HOROCOUNT_SEED")) {
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [p, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || p != end) throw UsageError("HOROCOUNT_SEED is not a 64-bit unsigned integer");
    return v;
  }
  return 1;
}

std::string num(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

void require_dim(int d, std::initializer_list<int> ok, const char* what) {
  for (int x : ok)
    if (x == d) return;
  std::ostringstream os;
  os << what << " supports --dim in {";
  bool first = true;
  for (int x : ok) os << (first ? "" : ",") << x, first = false;
  os << "}, got " << d;
  throw UsageError(os.str());
}

Matrix an_gram(int d) {
  Matrix g = 2 * Matrix::Identity(d, d);
  for (int i = 0; i + 1 < d; ++i) g(i, i + 1) = g(i + 1, i) = -1;
  return g;
}

Matrix read_gram(const std::string& spec, int d) {
  if (spec == "identity") return Matrix::Identity(d, d);
  if (spec == "an") return an_gram(d);
  if (spec == "hex") {
    require_dim(d, {2}, "preset hex");
    return an_gram(2);
  }
  std::ifstream in(spec);
  if (!in) throw UsageError("cannot open gram file '" + spec + "' (presets: identity, an, hex)");
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    double v;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) throw UsageError("malformed gram file: bad number '" + tok + "'");
    vals.push_back(v);
  }
  if (vals.size() != std::size_t(d) * d)
    throw UsageError("malformed gram file: expected " + std::to_string(d * d) + " numbers, got " +
                     std::to_string(vals.size()));
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = vals[i * d + j];
  return g;
}

QuadForm make_form(const std::string& spec, int d) {
  try {
    return QuadForm(read_gram(spec, d));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("gram matrix rejected: ") + e.what());
  }
}

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot write '" + path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  // Side channel for the JSON summary that accompanies a CSV.
  std::ostream& summary() { return file_.is_open() ? std::cout : std::cerr; }

 private:
  std::ofstream file_;
};

struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<double>> rows;
};

void emit(const Common& c, json doc, const Table* table) {
  Sink sink(c.output);
  if (table && c.format == "csv") {
    auto& o = sink.out();
    for (std::size_t i = 0; i < table->cols.size(); ++i) o << (i ? "," : "") << table->cols[i];
    o << '\n';
    for (auto& r : table->rows) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << num(r[i]);
      o << '\n';
    }
    sink.summary() << doc.dump(2) << '\n';
    return;
  }
  if (table) {
    json rows = json::array();
    for (auto& r : table->rows) {
      json row = json::object();
      for (std::size_t i = 0; i < r.size(); ++i) row[table->cols[i]] = r[i];
      rows.push_back(row);
    }
    doc["rows"] = rows;
  }
  sink.out() << doc.dump(2) << '\n';
}

json config_json(const Common& c, const std::string& cmd) {
  return json{{"subcommand", cmd}, {"threads", c.threads}, {"format", c.format}, {"output", c.output}};
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 0) throw UsageError("--steps must be >= 0");
  if (!(hi >= lo)) throw UsageError("need --tmax >= --tmin");
  std::vector<double> v;
  for (int i = 0; i <= steps; ++i) v.push_back(steps == 0 ? lo : lo + (hi - lo) * i / steps);
  return v;
}

// ---- constants

int run_constants(const Common& c, int d) {
  if (d < 2) throw UsageError("constants supports --dim >= 2");
  auto k = constants(d);
  json cfg = config_json(c, "constants");
  cfg["dim"] = d;
  json doc{{"config", cfg},
           {"d", k.d},
           {"lambda", k.lambda},
           {"mu", k.mu},
           {"alpha", k.alpha_d},
           {"omega", k.omega_d},
           {"zeta", k.zeta_d},
           {"C_d", k.C_d},
           {"kappa_d", opt_json(k.kappa_d)},
           {"kappa_over_vol", k.kappa_over_vol},
           {"T_d", k.T_d},
           {"exponents",
            {{"thm11", k.exponent_thm11},
             {"thm12", k.exponent_thm12},
             {"edwards", k.exponent_edwards},
             {"rh", opt_json(k.exponent_rh)}}}};
  emit(c, doc, nullptr);
  return 0;
}

// ---- count

struct CountArgs {
  int dim = 2;
  std::string gram = "identity";
  double radius = 0;
  bool primitive = false, exact = false;
};

int run_count(const Common& c, const CountArgs& a) {
  QuadForm q = make_form(a.gram, a.dim);
  auto t0 = std::chrono::steady_clock::now();
  CountMode mode = a.exact ? CountMode::Exact : CountMode::Float;
  std::optional<EllipsoidSpec> spec;
  if (a.exact) {
    if (!q.is_integral()) throw UsageError("--exact needs an integral Gram matrix of determinant one");
    double r2 = a.radius * a.radius;
    if (std::abs(r2 - std::round(r2)) > 1e-9 * std::max(1.0, r2))
      throw UsageError("--exact needs an integer R^2");
    spec = EllipsoidSpec::exact(q, std::llround(r2));
  } else {
    spec = EllipsoidSpec(q, a.radius);
  }
  CountResult r = a.primitive ? error_terms(*spec, mode, c.threads) : count_full(*spec, mode, c.threads);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json cfg = config_json(c, "count");
  cfg.update({{"dim", a.dim}, {"gram", a.gram}, {"radius", a.radius}, {"primitive", a.primitive}, {"exact", a.exact},
              {"normalized_gram", matrix_json(q.gram())}});
  json doc{{"config", cfg},
           {"n0", opt_json(r.n0)},
           {"n1", opt_json(r.n1)},
           {"e0", opt_json(r.e0)},
           {"e1", opt_json(r.e1)},
           {"boundary_ambiguous", r.boundary_ambiguous},
           {"elapsed_ms", ms}};
  emit(c, doc, nullptr);
  return 0;
}

// ---- chimney / horoball

struct SweepArgs {
  int dim = 2;
  std::string gram = "identity";
  double tmin = 0, tmax = 0;
  int steps = 100;
  bool envelope = false;
  std::optional<std::int64_t> sigma;
};

int run_sweep(const Common& c, const SweepArgs& a, bool horoball) {
  QuadForm q = make_form(a.gram, a.dim);
  Table tab{{"T", "R", "count", "predicted", "rel_error"}, {}};
  std::vector<std::pair<double, double>> pts;
  std::int64_t sigma = 0;
  bool assumed = false;
  for (double T : linspace(a.tmin, a.tmax, a.steps)) {
    ChimneyCount r;
    try {
      r = horoball ? horoball_count(q, T, c.threads) : chimney_count(q, T, a.sigma, c.threads);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    sigma = r.sigma_q;
    assumed = r.sigma_assumed;
    tab.rows.push_back({r.T, r.R, double(r.count), r.predicted, r.rel_error});
    pts.push_back({r.T, r.rel_error});
  }
  json cfg = config_json(c, horoball ? "horoball" : "chimney");
  cfg.update({{"dim", a.dim}, {"gram", a.gram}, {"tmin", a.tmin}, {"tmax", a.tmax}, {"steps", a.steps},
              {"envelope", a.envelope}, {"sigma", opt_json(a.sigma)}});
  json fit = nullptr;
  try {
    auto f = fit_error_exponent(pts, a.envelope);
    fit = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"n_points", f.n_points}};
  } catch (const std::invalid_argument&) {
  }
  json theory = nullptr;
  if (a.dim <= 4) theory = theory_slope(a.dim).value();
  if (fit.is_object()) fit["theory_slope"] = theory;
  json doc{{"config", cfg}, {"sigma_q", sigma}, {"sigma_assumed", assumed}, {"fit", fit}};
  emit(c, doc, &tab);
  return 0;
}

// ---- equidist

struct EquidistArgs {
  int dim = 2;
  std::string profile = "indicator";
  double support = 1, plateau = 0;
  double tmin = 0, tmax = 0;
  int steps = 10;
  int torus_grid = 27;
  double torus_resolution = 0;
  std::string base_grid;
  double alpha = 1;
  std::optional<double> cutoff;
  bool lenient = false;
};

int run_equidist(const Common& c, const EquidistArgs& a) {
  require_dim(a.dim, {2, 3}, "equidist");
  RadialProfile h;
  if (a.profile == "indicator")
    h = RadialProfile::indicator(a.support);
  else if (a.profile == "bump")
    h = RadialProfile::bump(a.support, a.plateau);
  else
    throw UsageError("--profile must be indicator or bump");
  QuadratureSpec q;
  q.torus_grid = a.torus_grid;
  q.torus_resolution = a.torus_resolution;
  q.alpha = a.alpha;
  q.base_cutoff_height = a.cutoff;
  q.strict = !a.lenient;
  q.threads = c.threads;
  if (!a.base_grid.empty()) {
    int nx = 0, ny = 0;
    char comma = 0;
    std::istringstream is(a.base_grid);
    if (!(is >> nx >> comma >> ny) || comma != ',' || nx < 1 || ny < 1)
      throw UsageError("--base-grid expects nx,ny");
    q.base_grid = {nx, ny};
  }
  Table tab{{"t", "value", "target", "err", "quad_err"}, {}};
  std::vector<std::pair<double, double>> pts;
  bool all_converged = true;
  for (double t : linspace(a.tmin, a.tmax, a.steps)) {
    HoroAverage r;
    try {
      r = horosphere_average(a.dim, t, h, q);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    all_converged = all_converged && r.converged;
    tab.rows.push_back({r.t, r.value, r.target, r.err, r.quad_error_estimate});
    pts.push_back({r.t, r.err});
  }
  auto k = constants(a.dim);
  json fit = nullptr;
  try {
    auto f = fit_error_exponent(pts, true);
    fit = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"n_points", f.n_points}};
  } catch (const std::invalid_argument&) {
    fit = json::object();
  }
  fit["theory_slope_thm12"] = -k.exponent_thm12;
  fit["theory_slope_thm11"] = -k.exponent_thm11;
  fit["edwards_slope"] = -k.exponent_edwards;
  json cfg = config_json(c, "equidist");
  cfg.update({{"dim", a.dim},
              {"profile", a.profile},
              {"support", a.support},
              {"plateau", a.plateau},
              {"tmin", a.tmin},
              {"tmax", a.tmax},
              {"steps", a.steps},
              {"torus_grid", a.torus_grid},
              {"torus_resolution", a.torus_resolution},
              {"base_grid", {q.base_grid[0], q.base_grid[1]}},
              {"alpha", a.alpha},
              {"cutoff_height", opt_json(a.cutoff)},
              {"strict", q.strict}});
  json doc{{"config", cfg}, {"all_converged", all_converged}, {"fit", fit}};
  emit(c, doc, &tab);
  return all_converged ? 0 : 1;
}

// ---- locate

struct LocateArgs {
  std::string series;
  double alpha = 1, beta = 0.5, eps = 0.1, kappa = 1, ctilde = 1;
  int windows = 0;
  double span = 20;
};

// Two numeric columns (t, g), or a header naming "t" and "err".
std::vector<std::pair<double, double>> read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open series '" + path + "'");
  std::vector<std::pair<double, double>> out;
  std::string line;
  std::size_t ti = 0, gi = 1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 1) {
      f.clear();
      std::istringstream ws(line);
      while (ws >> cell) f.push_back(cell);
    }
    auto parse = [](const std::string& s, double& v) {
      auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
      if (b == std::string::npos) return false;
      auto [p, ec] = std::from_chars(s.data() + b, s.data() + e + 1, v);
      return ec == std::errc() && p == s.data() + e + 1;
    };
    double dummy;
    if (first && !f.empty() && !parse(f[0], dummy)) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == "t") ti = i;
        if (f[i] == "err") gi = i;
      }
      first = false;
      continue;
    }
    first = false;
    double t, g;
    if (f.size() <= std::max(ti, gi) || !parse(f[ti], t) || !parse(f[gi], g))
      throw UsageError("malformed series line: " + line);
    out.push_back({t, g});
  }
  return out;
}

int run_locate(const Common& c, const LocateArgs& a) {
  LocatorParams p{a.alpha, a.beta, a.eps, a.kappa, a.ctilde};
  auto g = read_series(a.series);
  std::vector<double> hits;
  try {
    hits = good_t_locator(g, p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json cfg = config_json(c, "locate");
  cfg.update({{"series", a.series}, {"alpha", a.alpha}, {"beta", a.beta}, {"eps", a.eps}, {"kappa", a.kappa},
              {"ctilde", a.ctilde}, {"windows", a.windows}, {"span", a.span}});
  json doc{{"config", cfg}, {"t0", p.t0()}, {"n_samples", g.size()}, {"hits", hits}};
  int code = 0;
  if (a.windows > 0) {
    auto w = check_windows(hits, p.t0(), a.span, a.windows, p);
    doc["windows"] = {{"checked", w.windows}, {"empty", w.empty}, {"first_empty", w.empty ? json(w.first_empty) : json(nullptr)},
                      {"ok", w.ok()}};
    code = w.ok() ? 0 : 1;
  }
  emit(c, doc, nullptr);
  return code;
}

// ---- meansq

struct MeansqArgs {
  int dim = 2;
  double radius = 5;
  int samples = 10000;
  std::string sampler;
  double sigma = 0.5;
  int burnin = 1000, thin = 10, chains = 8;
};

int run_meansq(const Common& c, const MeansqArgs& a) {
  if (a.dim < 2) throw UsageError("meansq supports --dim >= 2");
  SamplerConfig s;
  std::string kind = a.sampler.empty() ? (a.dim == 2 ? "exact" : "walk") : a.sampler;
  if (kind == "exact") {
    require_dim(a.dim, {2}, "the exact sampler");
    s.kind = SamplerConfig::Kind::Exact;
  } else if (kind == "walk") {
    s.kind = SamplerConfig::Kind::Walk;
  } else {
    throw UsageError("--sampler must be exact or walk");
  }
  s.seed = resolve_seed(c);
  s.threads = c.threads;
  s.walk.step_sigma = a.sigma;
  s.walk.burn_in = a.burnin;
  s.walk.thin = a.thin;
  s.walk.chains = a.chains;
  MeanSquareReport r;
  try {
    r = mean_square_check(a.dim, a.radius, a.samples, s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json cfg = config_json(c, "meansq");
  cfg.update({{"dim", a.dim}, {"radius", a.radius}, {"samples", a.samples}, {"seed", s.seed}, {"sampler", kind}});
  if (kind == "walk")
    cfg.update({{"sigma", a.sigma}, {"burnin", a.burnin}, {"thin", a.thin}, {"chains", a.chains}});
  json doc{{"config", cfg},
           {"d", r.d},
           {"R", r.R},
           {"n_samples", r.n_samples},
           {"mean_D2", r.mean_D2},
           {"std_error", r.std_error_defined ? json(r.std_error) : json(nullptr)},
           {"bound", r.bound},
           {"mean_E1sq", r.mean_E1sq},
           {"bound_E1", r.bound_E1},
           {"passed", r.passed},
           {"sampler", r.sampler}};
  emit(c, doc, nullptr);
  return r.passed ? 0 : 1;
}

// ---- verify

struct VerifyArgs {
  std::string suite = "fast";
  std::vector<int> criteria;
  int dim = 2;
  double radius = 10;
  std::string gram = "identity";
};

int run_verify_suite(const Common& c, const VerifyArgs& a) {
  std::vector<int> ids = a.criteria;
  if (ids.empty()) {
    if (a.suite == "fast")
      ids = fast_suite();
    else if (a.suite == "full")
      ids = full_suite();
    else
      throw UsageError("--suite must be fast or full");
  }
  AcceptanceOptions opt;
  opt.threads = c.threads;
  if (c.seed_given || std::getenv("HOROCOUNT_SEED")) opt.seed = resolve_seed(c);
  json results = json::array();
  bool ok = true;
  for (int id : ids) {
    if (id < 1 || id > 10) throw UsageError("criterion ids are 1..10");
    auto r = run_criterion(id, opt);
    std::cerr << format_line(r) << std::endl;
    ok = ok && r.passed;
    results.push_back({{"id", r.id},
                       {"name", r.name},
                       {"passed", r.passed},
                       {"seconds", r.seconds},
                       {"limit_seconds", r.limit_seconds},
                       {"detail", r.detail}});
  }
  json cfg = config_json(c, "verify");
  cfg.update({{"suite", a.suite}, {"criteria", ids}, {"seed", opt.seed}});
  emit(c, json{{"config", cfg}, {"passed", ok}, {"results", results}}, nullptr);
  return ok ? 0 : 1;
}

int run_verify_moebius(const Common& c, const VerifyArgs& a) {
  QuadForm q = make_form(a.gram, a.dim);
  EllipsoidSpec spec(q, a.radius);
  auto m = count_primitive_moebius(spec, CountMode::Float, c.threads);
  auto d = count_primitive_direct(spec);
  bool agree = *m.n1 == *d.n1;
  json doc{{"n1_moebius", *m.n1}, {"n1_direct", *d.n1}, {"agree", agree}};
  bool ok = agree;
  const double r2 = a.radius * a.radius;
  if (q.is_integral() && std::abs(r2 - std::round(r2)) <= 1e-9 * std::max(1.0, r2)) {
    auto inv = verify_inversion(EllipsoidSpec::exact(q, std::llround(r2)));
    json v{{"ok", inv.ok}, {"levels_checked", inv.levels_checked}};
    if (inv.first_violation)
      v["first_violation"] = {{"level", inv.first_violation->level},
                              {"identity", inv.first_violation->identity},
                              {"lhs", inv.first_violation->lhs},
                              {"rhs", inv.first_violation->rhs}};
    doc["shell_identities"] = v;
    ok = ok && inv.ok;
  } else {
    doc["shell_identities"] = nullptr;
  }
  auto rel = error_relation_check(spec);
  doc["error_relations"] = {{"lhs_e1", rel.lhs_e1}, {"rhs_e1", rel.rhs_e1}, {"residual_e1", rel.residual_e1},
                            {"budget_e1", rel.budget_e1}, {"lhs_e0", rel.lhs_e0}, {"rhs_e0", rel.rhs_e0},
                            {"residual_e0", rel.residual_e0}, {"budget_e0", rel.budget_e0},
                            {"passed", rel.passed}};
  ok = ok && rel.passed;
  doc["passed"] = ok;
  json cfg = config_json(c, "verify moebius");
  cfg.update({{"dim", a.dim}, {"radius", a.radius}, {"gram", a.gram}});
  json out{{"config", cfg}};
  out.update(doc);
  emit(c, out, nullptr);
  return ok ? 0 : 1;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
  app->add_option("--output,-o", c.output, "write to this file instead of stdout");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option_function<std::uint64_t>(
      "--seed",
      [&c](const std::uint64_t& s) {
        c.seed = s;
        c.seed_given = true;
      },
      "RNG seed (fallback: HOROCOUNT_SEED, then 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"horocount: primitive lattice counting and horospherical equidistribution"};
  app.require_subcommand(1);
  Common common;

  int const_dim = 2;
  auto* cst = app.add_subcommand("constants", "model constants for dimension d");
  cst->add_option("--dim", const_dim)->required();

  CountArgs ca;
  auto* cnt = app.add_subcommand("count", "lattice points in an ellipsoid");
  cnt->add_option("--dim", ca.dim)->required();
  cnt->add_option("--gram", ca.gram, "identity, an, hex or a file with d rows of d numbers");
  cnt->add_option("--radius", ca.radius)->required();
  cnt->add_flag("--primitive", ca.primitive, "also count primitive vectors and error terms");
  cnt->add_flag("--exact", ca.exact, "integer arithmetic (integral Gram, integer R^2)");

  SweepArgs chs, hbs;
  auto add_sweep = [&](CLI::App* s, SweepArgs& a) {
    s->add_option("--dim", a.dim)->required();
    s->add_option("--gram", a.gram);
    s->add_option("--tmin", a.tmin)->required();
    s->add_option("--tmax", a.tmax)->required();
    s->add_option("--steps", a.steps);
    s->add_flag("--envelope", a.envelope, "fit local maxima only");
  };
  auto* chim = app.add_subcommand("chimney", "orbit counts in chimney sets");
  add_sweep(chim, chs);
  chim->add_option("--sigma", chs.sigma, "stabilizer order, required for d >= 5");
  auto* hb = app.add_subcommand("horoball", "orbit counts in horoballs");
  add_sweep(hb, hbs);

  EquidistArgs ea;
  auto* eq = app.add_subcommand("equidist", "horosphere averages of a Siegel transform");
  eq->add_option("--dim", ea.dim)->required();
  eq->add_option("--profile", ea.profile)->check(CLI::IsMember({"indicator", "bump"}));
  eq->add_option("--support", ea.support);
  eq->add_option("--plateau", ea.plateau);
  eq->add_option("--tmin", ea.tmin)->required();
  eq->add_option("--tmax", ea.tmax)->required();
  eq->add_option("--steps", ea.steps);
  eq->add_option("--torus-grid", ea.torus_grid);
  eq->add_option("--torus-resolution", ea.torus_resolution);
  eq->add_option("--base-grid", ea.base_grid, "nx,ny (d = 3)");
  eq->add_option("--alpha", ea.alpha);
  eq->add_option("--cutoff-height", ea.cutoff);
  eq->add_flag("--lenient", ea.lenient, "report non-convergence instead of aborting");

  LocateArgs la;
  auto* loc = app.add_subcommand("locate", "good times in a sampled error series");
  loc->add_option("--series", la.series)->required()->check(CLI::ExistingFile);
  loc->add_option("--alpha", la.alpha);
  loc->add_option("--beta", la.beta);
  loc->add_option("--eps", la.eps);
  loc->add_option("--kappa", la.kappa);
  loc->add_option("--ctilde", la.ctilde);
  loc->add_option("--windows", la.windows, "check this many windows starting at t0");
  loc->add_option("--span", la.span);

  MeansqArgs ma;
  auto* ms = app.add_subcommand("meansq", "mean square of the primitive error over random lattices");
  ms->add_option("--dim", ma.dim)->required();
  ms->add_option("--radius", ma.radius)->required();
  ms->add_option("--samples", ma.samples);
  ms->add_option("--sampler", ma.sampler)->check(CLI::IsMember({"exact", "walk"}));
  ms->add_option("--sigma", ma.sigma);
  ms->add_option("--burnin", ma.burnin);
  ms->add_option("--thin", ma.thin);
  ms->add_option("--chains", ma.chains);

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "acceptance checks");
  ver->require_subcommand(0, 1);
  ver->add_option("--suite", va.suite)->check(CLI::IsMember({"fast", "full"}));
  ver->add_option("--criteria", va.criteria, "run only these ids");
  auto* vm = ver->add_subcommand("moebius", "Moebius inversion checks for one ellipsoid");
  vm->add_option("--dim", va.dim)->required();
  vm->add_option("--radius", va.radius)->required();
  vm->add_option("--gram", va.gram);

  for (auto* s : {cst, cnt, chim, hb, eq, loc, ms, ver, vm}) add_common(s, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*cst) return run_constants(common, const_dim);
    if (*cnt) return run_count(common, ca);
    if (*chim) return run_sweep(common, chs, false);
    if (*hb) return run_sweep(common, hbs, true);
    if (*eq) return run_equidist(common, ea);
    if (*loc) return run_locate(common, la);
    if (*ms) return run_meansq(common, ma);
    if (*vm) return run_verify_moebius(common, va);
    if (*ver) return run_verify_suite(common, va);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
