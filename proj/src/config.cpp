#include "advreg/config.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "advreg/common.hpp"

namespace advreg {

namespace {

using nlohmann::json;

double parse_extended(const json& j, const std::string& where);

// Strict object reader: every key must be consumed, leftovers are an error.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& slot) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      slot = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  // accepts a JSON number or the string "inf"
  void read_extended(const char* key, double& slot) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    slot = parse_extended(*it, path_ + "." + key);
  }

  void read_extended_list(const char* key, std::vector<double>& slot) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_array()) throw ConfigError(path_ + "." + key + ": expected an array");
    slot.clear();
    for (const auto& entry : *it) slot.push_back(parse_extended(entry, path_ + "." + key));
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key()))
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double parse_extended(const json& j, const std::string& where) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ConfigError(where + ": expected a number or \"inf\"");
  }
  if (!j.is_number()) throw ConfigError(where + ": expected a number or \"inf\"");
  return j.get<double>();
}

json extended(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) fail(field, what);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Fields root(j, "config");
  root.read("seed", c.seed);
  root.read("n", c.n);
  root.read("out", c.out);
  root.read("format", c.format);
  root.read("jobs", c.jobs);
  root.read("timestamp", c.timestamp);

  if (const json* t = root.child("truth")) {
    Fields f(*t, "truth");
    f.read("kind", c.truth.kind);
    f.read("dim", c.truth.dim);
    f.read("beta", c.truth.beta);
    f.read("c_beta", c.truth.c_beta);
    f.read("r", c.truth.r);
    f.read("amplitude", c.truth.amplitude);
    f.read("degree", c.truth.degree);
    f.read("coeffs", c.truth.coeffs);
    f.finish();
  }
  if (const json* t = root.child("design")) {
    Fields f(*t, "design");
    f.read("kind", c.design.kind);
    f.read("cells_per_axis", c.design.cells_per_axis);
    f.read("weights", c.design.weights);
    f.finish();
  }
  if (const json* t = root.child("noise")) {
    Fields f(*t, "noise");
    f.read("kind", c.noise.kind);
    f.read("sigma", c.noise.sigma);
    f.read("scale", c.noise.scale);
    f.finish();
  }
  if (const json* t = root.child("estimator")) {
    Fields f(*t, "estimator");
    f.read("kind", c.estimator.kind);
    f.read("degree", c.estimator.degree);
    f.read("kernel", c.estimator.kernel);
    f.read("beta", c.estimator.beta);
    f.read("c_h", c.estimator.c_h);
    f.read("bandwidth", c.estimator.bandwidth);
    f.read("cells_per_axis", c.estimator.cells_per_axis);
    f.read("tau", c.estimator.tau);
    f.read("beta_max", c.estimator.beta_max);
    f.read("c_lep", c.estimator.c_lep);
    f.finish();
  }
  if (const json* t = root.child("attack")) {
    Fields f(*t, "attack");
    f.read("kind", c.attack.kind);
    f.read_extended("p", c.attack.p);
    f.read("r", c.attack.r);
    f.read("direction", c.attack.direction);
    f.read("c_lo", c.attack.c_lo);
    f.read("c_hi", c.attack.c_hi);
    f.finish();
  }
  if (const json* t = root.child("risk")) {
    Fields f(*t, "risk");
    f.read_extended("q", c.risk.q);
    f.read("test_draws", c.risk.test_draws);
    f.read("replications", c.risk.replications);
    f.read("sup_grid", c.risk.sup_grid);
    f.read("resolution", c.risk.resolution);
    f.finish();
  }
  if (const json* t = root.child("sweep")) {
    Fields f(*t, "sweep");
    f.read("n", c.sweep.n);
    f.read("r", c.sweep.r);
    f.read("beta", c.sweep.beta);
    f.read_extended_list("q", c.sweep.q);
    f.read("plateau_lo", c.sweep.plateau_lo);
    f.read("plateau_hi", c.sweep.plateau_hi);
    f.finish();
  }
  if (const json* t = root.child("lower_bound")) {
    Fields f(*t, "lower_bound");
    f.read("quad", c.lower_bound.quad);
    f.read("packing_cells", c.lower_bound.packing_cells);
    f.read("packing_count", c.lower_bound.packing_count);
    f.finish();
  }
  root.finish();

  // cross-field validation up front, before any computation
  require(c.n >= 1, "n", "must be positive");
  require(c.format == "csv" || c.format == "json", "format", "must be csv or json");
  require(c.jobs >= 0, "jobs", "must be nonnegative");
  c.make_truth();
  c.make_design();
  c.make_noise();
  c.make_attack();
  c.make_kernel();
  require(c.risk.q >= 1.0, "risk.q", "must be >= 1");
  require(c.risk.test_draws >= 1, "risk.test_draws", "must be positive");
  require(c.risk.replications >= 1, "risk.replications", "must be positive");
  require(c.risk.sup_grid >= 0, "risk.sup_grid", "must be nonnegative (0 = default)");
  require(c.risk.resolution >= 0, "risk.resolution", "must be nonnegative");
  if (c.estimator.kind == "pp") {
    require(c.estimator.beta > 0.0, "estimator.beta", "must be positive");
    require(c.estimator.c_h > 0.0, "estimator.c_h", "must be positive");
    require(c.estimator.bandwidth >= 0.0, "estimator.bandwidth", "must be nonnegative");
  } else if (c.estimator.kind == "adaptive") {
    require(c.estimator.beta_max > 0.0, "estimator.beta_max", "must be positive");
    require(c.estimator.degree >= smoothness_floor(c.estimator.beta_max), "estimator.degree",
            "must be at least the greatest integer below beta_max (degree >= floor(beta_max))");
    require(c.estimator.c_lep >= 0.0, "estimator.c_lep", "must be nonnegative");
  } else {
    fail("estimator.kind", "must be pp or adaptive");
  }
  require(c.estimator.degree >= 0, "estimator.degree", "must be nonnegative");
  require(c.estimator.cells_per_axis >= 0, "estimator.cells_per_axis", "must be nonnegative");
  require(c.estimator.tau >= 0.0, "estimator.tau", "must be nonnegative");
  for (double r : c.sweep.r)
    require(r >= 0.0, "sweep.r", "entries must be nonnegative");
  if (c.attack.kind == "identity")
    for (double r : c.sweep.r)
      require(r == 0.0, "sweep.r", "identity attack admits only r = 0");
  for (int n : c.sweep.n) require(n >= 1, "sweep.n", "entries must be positive");
  for (double b : c.sweep.beta) require(b > 0.0, "sweep.beta", "entries must be positive");
  for (double q : c.sweep.q) require(q >= 1.0, "sweep.q", "entries must be >= 1");
  require(c.sweep.plateau_lo > 0.0 && c.sweep.plateau_hi >= c.sweep.plateau_lo,
          "sweep.plateau_lo", "band must be positive and ordered");
  require(c.lower_bound.quad >= 2, "lower_bound.quad", "must be at least 2");
  require(c.lower_bound.packing_cells >= 1, "lower_bound.packing_cells", "must be positive");
  require(c.lower_bound.packing_count >= 1, "lower_bound.packing_count", "must be positive");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["n"] = n;
  j["out"] = out;
  j["format"] = format;
  j["jobs"] = jobs;
  j["timestamp"] = timestamp;
  j["truth"] = {{"kind", truth.kind},         {"dim", truth.dim},
                {"beta", truth.beta},         {"c_beta", truth.c_beta},
                {"r", truth.r},               {"amplitude", truth.amplitude},
                {"degree", truth.degree},     {"coeffs", truth.coeffs}};
  j["design"] = {{"kind", design.kind},
                 {"cells_per_axis", design.cells_per_axis},
                 {"weights", design.weights}};
  j["noise"] = {{"kind", noise.kind}, {"sigma", noise.sigma}, {"scale", noise.scale}};
  j["estimator"] = {{"kind", estimator.kind},
                    {"degree", estimator.degree},
                    {"kernel", estimator.kernel},
                    {"beta", estimator.beta},
                    {"c_h", estimator.c_h},
                    {"bandwidth", estimator.bandwidth},
                    {"cells_per_axis", estimator.cells_per_axis},
                    {"tau", estimator.tau},
                    {"beta_max", estimator.beta_max},
                    {"c_lep", estimator.c_lep}};
  j["attack"] = {{"kind", attack.kind}, {"p", extended(attack.p)},
                 {"r", attack.r},       {"direction", attack.direction},
                 {"c_lo", attack.c_lo}, {"c_hi", attack.c_hi}};
  j["risk"] = {{"q", extended(risk.q)},
               {"test_draws", risk.test_draws},
               {"replications", risk.replications},
               {"sup_grid", risk.sup_grid},
               {"resolution", risk.resolution}};
  json sweep_q = json::array();
  for (double q : sweep.q) sweep_q.push_back(extended(q));
  j["sweep"] = {{"n", sweep.n},         {"r", sweep.r},
                {"beta", sweep.beta},   {"q", sweep_q},
                {"plateau_lo", sweep.plateau_lo}, {"plateau_hi", sweep.plateau_hi}};
  j["lower_bound"] = {{"quad", lower_bound.quad},
                      {"packing_cells", lower_bound.packing_cells},
                      {"packing_count", lower_bound.packing_count}};
  return j.dump(2) + "\n";
}

TruthFunction ExperimentConfig::make_truth() const {
  const auto& t = truth;
  try {
    if (t.kind == "polynomial") return TruthFunction::polynomial(t.degree, t.dim, t.coeffs);
    if (t.kind == "holder_power") return TruthFunction::holder_power(t.beta, t.c_beta, t.dim);
    if (t.kind == "staircase") return TruthFunction::staircase(t.beta, t.c_beta, t.r, t.dim);
    if (t.kind == "smooth_ramp")
      return TruthFunction::smooth_ramp(t.beta, t.amplitude, t.r, t.dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("truth: ") + e.what());
  }
  fail("truth.kind", "must be polynomial, holder_power, staircase, or smooth_ramp");
}

DesignSpec ExperimentConfig::make_design() const {
  try {
    if (design.kind == "uniform") return DesignSpec::uniform(truth.dim);
    if (design.kind == "piecewise")
      return DesignSpec::piecewise(truth.dim, design.cells_per_axis, design.weights);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("design: ") + e.what());
  }
  fail("design.kind", "must be uniform or piecewise");
}

NoiseSpec ExperimentConfig::make_noise() const {
  try {
    if (noise.kind == "gaussian") return NoiseSpec::gaussian(noise.sigma);
    if (noise.kind == "bounded") return NoiseSpec::bounded(noise.scale);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
  fail("noise.kind", "must be gaussian or bounded");
}

AttackSpec ExperimentConfig::make_attack(double r_override) const {
  try {
    if (attack.kind == "identity") {
      require(r_override == 0.0, "attack.r", "identity attack requires r = 0");
      return AttackSpec::identity(truth.dim);
    }
    if (attack.kind == "lp_ball") return AttackSpec::lp_ball(truth.dim, attack.p, r_override);
    if (attack.kind == "soda") {
      require(static_cast<int>(attack.direction.size()) == truth.dim, "attack.direction",
              "must have the truth dimension");
      Eigen::VectorXd v(truth.dim);
      for (int j = 0; j < truth.dim; ++j) v[j] = attack.direction[j];
      return AttackSpec::soda(v, r_override, attack.c_lo, attack.c_hi);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("attack: ") + e.what());
  }
  fail("attack.kind", "must be identity, lp_ball, or soda");
}

Kernel ExperimentConfig::make_kernel() const {
  if (estimator.kernel == "rectangular")
    return Kernel(Kernel::Shape::rectangular, truth.dim);
  if (estimator.kernel == "epanechnikov")
    return Kernel(Kernel::Shape::epanechnikov, truth.dim);
  fail("estimator.kernel", "must be rectangular or epanechnikov");
}

SupQuery ExperimentConfig::make_query() const {
  SupQuery q;
  q.resolution = risk.resolution;
  return q;
}

int ExperimentConfig::effective_jobs() const {
  if (jobs > 0) return jobs;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

EstimatorFactory ExperimentConfig::make_factory(int n_cell, double beta_cell, double r_cell,
                                                double q_cell) const {
  Kernel kernel = make_kernel();
  if (estimator.kind == "pp") {
    double h = estimator.bandwidth > 0.0
                   ? estimator.bandwidth
                   : tune_bandwidth(beta_cell, truth.dim, n_cell, r_cell, q_cell, estimator.c_h);
    PPConfig cfg;
    cfg.cells_per_axis = estimator.cells_per_axis > 0
                             ? estimator.cells_per_axis
                             : static_cast<int>(std::ceil(1.0 / h));
    cfg.degree = estimator.degree;
    cfg.bandwidth = h;
    cfg.tau = estimator.tau;
    cfg.kernel = kernel;
    return [cfg](const Dataset& data) {
      return std::make_shared<const PPEstimator>(PPEstimator::fit(data, cfg));
    };
  }
  AdaptiveConfig cfg;
  cfg.beta_max = estimator.beta_max;
  cfg.degree = estimator.degree;
  cfg.kernel = kernel;
  if (estimator.c_lep > 0.0) cfg.c_lep = estimator.c_lep;
  if (estimator.cells_per_axis > 0) cfg.cells_per_axis = estimator.cells_per_axis;
  return [cfg](const Dataset& data) {
    return std::make_shared<const AdaptiveEstimator>(AdaptiveEstimator::fit(data, cfg));
  };
}

namespace {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

void csv_preamble(const ExperimentConfig& c, std::ostream& out) {
  out << "# advreg-schema v1\n";
  if (c.timestamp) out << "# generated " << iso_timestamp() << "\n";
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

struct ResultRow {
  int n;
  double r, beta, q;
  std::string estimator, attack;
  double risk_mean, risk_stderr;
  std::optional<double> slope_local;
  std::string phase;
  double mean_selected_h;
  double wall_ms;
};

void write_rows(const ExperimentConfig& c, const std::vector<ResultRow>& rows,
                std::ostream& out) {
  if (c.format == "csv") {
    csv_preamble(c, out);
    out << "n,r,beta,q,estimator,attack,risk_mean,risk_stderr,slope_local,phase,"
           "mean_selected_h,wall_ms\n";
    for (const auto& row : rows) {
      out << row.n << ',' << fmt(row.r) << ',' << fmt(row.beta) << ','
          << (std::isinf(row.q) ? std::string("inf") : fmt(row.q)) << ',' << row.estimator
          << ',' << row.attack << ',' << fmt(row.risk_mean) << ',' << fmt(row.risk_stderr)
          << ',' << (row.slope_local ? fmt(*row.slope_local) : std::string()) << ','
          << row.phase << ',' << fmt(row.mean_selected_h) << ',' << fmt(row.wall_ms) << '\n';
    }
  } else {
    json j;
    j["schema"] = "advreg-v1";
    if (c.timestamp) j["generated"] = iso_timestamp();
    j["rows"] = json::array();
    for (const auto& row : rows) {
      json r{{"n", row.n},
             {"r", row.r},
             {"beta", row.beta},
             {"q", extended(row.q)},
             {"estimator", row.estimator},
             {"attack", row.attack},
             {"risk_mean", row.risk_mean},
             {"risk_stderr", row.risk_stderr},
             {"phase", row.phase},
             {"mean_selected_h", row.mean_selected_h},
             {"wall_ms", row.wall_ms}};
      if (row.slope_local) r["slope_local"] = *row.slope_local;
      j["rows"].push_back(std::move(r));
    }
    out << j.dump(2) << "\n";
  }
}

ResultRow run_cell(const ExperimentConfig& c, int n_cell, double r_cell, double beta_cell,
                   double q_cell, std::ostream& log) {
  auto truth = c.make_truth();
  auto design = c.make_design();
  auto noise = c.make_noise();
  RiskSpec spec;
  spec.q = q_cell;
  spec.attack = c.make_attack(r_cell);
  spec.test_draws = c.risk.test_draws;
  spec.replications = c.risk.replications;
  spec.sup_grid = c.risk.sup_grid;
  spec.query = c.make_query();
  auto factory = c.make_factory(n_cell, beta_cell, r_cell, q_cell);

  auto start = std::chrono::steady_clock::now();
  RiskEstimate estimate = estimate_risk(truth, factory, spec, design, noise, n_cell,
                                        SeededRng{c.seed}, c.effective_jobs());
  auto stop = std::chrono::steady_clock::now();

  ResultRow row;
  row.n = n_cell;
  row.r = r_cell;
  row.beta = beta_cell;
  row.q = q_cell;
  row.estimator = c.estimator.kind;
  row.attack = c.attack.kind;
  row.risk_mean = estimate.mean;
  row.risk_stderr = estimate.std_error;
  row.phase = "";
  row.mean_selected_h = estimate.mean_bandwidth;
  // wall time is the one nondeterministic column; --no-timestamp zeroes it so
  // equal seeds give byte-identical tables
  row.wall_ms =
      c.timestamp ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  log << "cell n=" << n_cell << " r=" << r_cell << " beta=" << beta_cell << " q=" << q_cell
      << " risk=" << estimate.mean << " (" << row.wall_ms << " ms)\n";
  return row;
}

}  // namespace

void cmd_evaluate(const ExperimentConfig& c, std::ostream& out, std::ostream& log) {
  std::vector<ResultRow> rows;
  double q = c.risk.q;
  rows.push_back(run_cell(c, c.n, c.attack.r, c.estimator.beta, q, log));
  rows.back().phase = c.attack.kind == "identity" || c.attack.r == 0.0 ? "standard" : "";
  write_rows(c, rows, out);
}

void cmd_sweep(const ExperimentConfig& c, std::ostream& out, std::ostream& log) {
  std::vector<int> ns = c.sweep.n.empty() ? std::vector<int>{c.n} : c.sweep.n;
  std::vector<double> rs = c.sweep.r.empty() ? std::vector<double>{c.attack.r} : c.sweep.r;
  std::vector<double> betas =
      c.sweep.beta.empty() ? std::vector<double>{c.estimator.beta} : c.sweep.beta;
  std::vector<double> qs = c.sweep.q.empty() ? std::vector<double>{c.risk.q} : c.sweep.q;

  std::vector<ResultRow> rows;
  for (double r : rs)
    for (double beta : betas)
      for (double q : qs) {
        std::vector<ResultRow> slice;
        for (int n : ns) {
          try {
            slice.push_back(run_cell(c, n, r, beta, q, log));
          } catch (const ConfigError&) {
            throw;
          } catch (const ResourceError&) {
            throw;
          } catch (const std::exception& e) {
            std::ostringstream where;
            where << "sweep cell (n=" << n << ", r=" << r << ", beta=" << beta
                  << ", q=" << q << ") failed: " << e.what();
            throw NumericalError(where.str());
          }
        }
        // local slope and phase between consecutive sample sizes
        for (std::size_t i = 0; i < slice.size(); ++i) {
          if (i > 0 && slice[i].risk_mean > 0.0 && slice[i - 1].risk_mean > 0.0) {
            double ratio = slice[i].risk_mean / slice[i - 1].risk_mean;
            slice[i].slope_local = std::log(ratio) /
                                   std::log(static_cast<double>(slice[i].n) / slice[i - 1].n);
            if (r == 0.0)
              slice[i].phase = "standard";
            else
              slice[i].phase = (ratio >= c.sweep.plateau_lo && ratio <= c.sweep.plateau_hi)
                                   ? "attack-dominated"
                                   : "standard";
          } else {
            slice[i].phase = r == 0.0 ? "standard" : "";
          }
          rows.push_back(slice[i]);
        }
      }
  write_rows(c, rows, out);
}

void cmd_fit(const ExperimentConfig& c, std::ostream& out, std::ostream& log) {
  auto truth = c.make_truth();
  auto design = c.make_design();
  auto noise = c.make_noise();
  Dataset data = sample_dataset(truth, design, noise, c.n, SeededRng{c.seed}.stream(0));
  auto factory = c.make_factory(c.n, c.estimator.beta, c.attack.r, c.risk.q);
  auto fit = factory(data);
  const GridPartition* part = fit->partition();
  log << "fitted " << c.estimator.kind << " on n=" << c.n << ", " << part->cell_count()
      << " cells\n";

  const PPEstimator* pp = dynamic_cast<const PPEstimator*>(fit.get());
  const AdaptiveEstimator* ad = dynamic_cast<const AdaptiveEstimator*>(fit.get());

  auto cell_fit = [&](long long k) -> const LocalFit& {
    return pp ? pp->cell_fit(k) : ad->cell_fit(k);
  };

  if (c.format == "json") {
    json j;
    j["schema"] = "advreg-v1";
    j["estimator"] = c.estimator.kind;
    j["n"] = c.n;
    j["cells_per_axis"] = part->cells_per_axis();
    if (ad) j["c_lep"] = ad->c_lep_used();
    j["cells"] = json::array();
    for (long long k = 0; k < part->cell_count(); ++k) {
      const LocalFit& f = cell_fit(k);
      json cj;
      cj["cell"] = k;
      cj["center"] = std::vector<double>(f.center.data(), f.center.data() + f.center.size());
      cj["bandwidth"] = f.bandwidth;
      cj["n_in_ball"] = f.n_in_ball;
      cj["regularized"] = f.regularized;
      cj["coeffs"] = std::vector<double>(f.coeffs.data(), f.coeffs.data() + f.coeffs.size());
      j["cells"].push_back(std::move(cj));
    }
    out << j.dump(2) << "\n";
  } else {
    csv_preamble(c, out);
    out << "cell,center,bandwidth,n_in_ball,regularized,coeffs\n";
    for (long long k = 0; k < part->cell_count(); ++k) {
      const LocalFit& f = cell_fit(k);
      out << k << ',';
      for (int j = 0; j < f.center.size(); ++j) out << (j ? ";" : "") << fmt(f.center[j]);
      out << ',' << fmt(f.bandwidth) << ',' << f.n_in_ball << ',' << (f.regularized ? 1 : 0)
          << ',';
      for (int j = 0; j < f.coeffs.size(); ++j) out << (j ? ";" : "") << fmt(f.coeffs[j]);
      out << '\n';
    }
  }
}

void cmd_adapt(const ExperimentConfig& c, std::ostream& out, std::ostream& log) {
  require(c.estimator.kind == "adaptive", "estimator.kind", "adapt requires the adaptive estimator");
  auto truth = c.make_truth();
  auto design = c.make_design();
  auto noise = c.make_noise();
  Dataset data = sample_dataset(truth, design, noise, c.n, SeededRng{c.seed}.stream(0));
  AdaptiveConfig cfg;
  cfg.beta_max = c.estimator.beta_max;
  cfg.degree = c.estimator.degree;
  cfg.kernel = c.make_kernel();
  if (c.estimator.c_lep > 0.0) cfg.c_lep = c.estimator.c_lep;
  if (c.estimator.cells_per_axis > 0) cfg.cells_per_axis = c.estimator.cells_per_axis;
  AdaptiveEstimator fit = AdaptiveEstimator::fit(data, cfg, c.effective_jobs());

  auto oracle = oracle_bandwidth(fit.grid(), c.estimator.beta);
  log << "adaptive fit: mean selected h = " << fit.mean_selected_bandwidth() << "\n";

  if (c.format == "json") {
    json j;
    j["schema"] = "advreg-v1";
    j["n"] = c.n;
    j["c_lep"] = fit.c_lep_used();
    j["grid_betas"] = fit.grid().betas;
    j["grid_bandwidths"] = fit.grid().bandwidths;
    j["mean_selected_h"] = fit.mean_selected_bandwidth();
    j["oracle_bandwidth_for_beta"] = c.estimator.beta;
    j["oracle_bandwidth"] = oracle ? json(*oracle) : json();
    j["selected"] = fit.selected_bandwidths();
    out << j.dump(2) << "\n";
  } else {
    csv_preamble(c, out);
    out << "cell,selected_h\n";
    const auto& sel = fit.selected_bandwidths();
    for (std::size_t k = 0; k < sel.size(); ++k) out << k << ',' << fmt(sel[k]) << '\n';
  }
}

void cmd_demo_lower_bound(const ExperimentConfig& c, std::ostream& out, std::ostream& log) {
  auto truth = c.make_truth();
  require(truth.kind() == TruthFunction::Kind::staircase ||
              truth.kind() == TruthFunction::Kind::smooth_ramp,
          "truth.kind", "demo-lower-bound requires a staircase or smooth_ramp truth");
  AttackSpec attack = c.make_attack();
  SupQuery query = c.make_query();
  const double q = std::isinf(c.risk.q) ? 1.0 : c.risk.q;
  RealFn f = [&truth](const Eigen::VectorXd& x) { return truth(x); };

  double g_value = deviation_functional(f, attack, q, c.lower_bound.quad, query);
  double exponent = std::min(1.0, truth.beta());
  double kappa = attack.r > 0.0 ? g_value / std::pow(attack.r, exponent) : 0.0;
  log << "G = " << g_value << ", kappa = " << kappa << "\n";

  PackingSet packing = build_packing(truth, truth.beta(), truth.c_beta() > 0 ? truth.c_beta() : 1.0,
                                     c.lower_bound.packing_cells, c.lower_bound.packing_count,
                                     SeededRng{c.seed});
  long long cells = 1;
  for (int j = 0; j < truth.dim(); ++j) cells *= packing.cells_per_axis();
  long long min_hamming = cells;
  for (int a = 0; a < packing.count(); ++a)
    for (int b = a + 1; b < packing.count(); ++b) {
      long long ham = 0;
      for (long long i = 0; i < cells; ++i)
        ham += packing.signs(a)[static_cast<std::size_t>(i)] !=
               packing.signs(b)[static_cast<std::size_t>(i)];
      min_hamming = std::min(min_hamming, ham);
    }

  // L2 distance of each member from the base via quadrature
  std::vector<double> l2(packing.count());
  for (int m = 0; m < packing.count(); ++m) {
    TruthFunction member = packing.member(m);
    RealFn fm = [&member](const Eigen::VectorXd& x) { return member(x); };
    l2[m] = lq_distance(fm, f, 2.0, c.lower_bound.quad, truth.dim());
  }

  double risk_mean = 0.0, risk_se = 0.0;
  {
    RiskSpec spec;
    spec.q = c.risk.q;
    spec.attack = attack;
    spec.test_draws = c.risk.test_draws;
    spec.replications = c.risk.replications;
    spec.sup_grid = c.risk.sup_grid;
    spec.query = query;
    auto factory = c.make_factory(c.n, c.estimator.beta, attack.r, q);
    RiskEstimate est = estimate_risk(truth, factory, spec, c.make_design(), c.make_noise(), c.n,
                                     SeededRng{c.seed}, c.effective_jobs());
    risk_mean = est.mean;
    risk_se = est.std_error;
  }

  if (c.format == "json") {
    json j;
    j["schema"] = "advreg-v1";
    j["truth"] = truth.name();
    j["beta"] = truth.beta();
    j["r"] = attack.r;
    j["q"] = extended(q);
    j["deviation_functional"] = g_value;
    j["kappa"] = kappa;
    j["packing"] = {{"cells", cells},
                    {"count", packing.count()},
                    {"min_hamming", min_hamming},
                    {"hamming_bound", cells / 8},
                    {"l2_distances", l2}};
    j["estimator"] = c.estimator.kind;
    j["adversarial_risk_mean"] = risk_mean;
    j["adversarial_risk_stderr"] = risk_se;
    out << j.dump(2) << "\n";
  } else {
    csv_preamble(c, out);
    out << "key,value\n";
    out << "truth," << truth.name() << '\n';
    out << "beta," << fmt(truth.beta()) << '\n';
    out << "r," << fmt(attack.r) << '\n';
    out << "q," << (std::isinf(q) ? std::string("inf") : fmt(q)) << '\n';
    out << "deviation_functional," << fmt(g_value) << '\n';
    out << "kappa," << fmt(kappa) << '\n';
    out << "packing_cells," << cells << '\n';
    out << "packing_count," << packing.count() << '\n';
    out << "packing_min_hamming," << min_hamming << '\n';
    out << "packing_hamming_bound," << cells / 8 << '\n';
    for (int m = 0; m < packing.count(); ++m)
      out << "packing_l2_" << m << ',' << fmt(l2[m]) << '\n';
    out << "adversarial_risk_mean," << fmt(risk_mean) << '\n';
    out << "adversarial_risk_stderr," << fmt(risk_se) << '\n';
  }
}

void cmd_dump_config(const ExperimentConfig& c, std::ostream& out) {
  out << c.to_json_text();
}

}  // namespace advreg
