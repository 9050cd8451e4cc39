#include "angsurf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "angsurf/angular_estimator.hpp"
#include "angsurf/bootstrap.hpp"
#include "angsurf/csv.hpp"
#include "angsurf/diagnostics.hpp"
#include "angsurf/evaluation.hpp"
#include "angsurf/functionals.hpp"
#include "angsurf/models.hpp"
#include "angsurf/parallel.hpp"
#include "angsurf/preprocess.hpp"
#include "angsurf/random.hpp"
#include "angsurf/tuning.hpp"

namespace angsurf::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_config: return 2;
    case ErrorCode::io: return 3;
    case ErrorCode::domain: return 4;
    case ErrorCode::numeric: return 5;
    case ErrorCode::feasibility: return 6;
    case ErrorCode::empty_sample: return 7;
    case ErrorCode::optimization: return 8;
  }
  return 1;
}

namespace {

constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct Options {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;

  std::string input;
  std::string input2;
  std::string tag;
  std::string params_file;

  // garch
  std::string innovation = "normal";
  std::size_t lags = 5;
  // frechet
  std::string covariate = "unit";
  // angles
  double q = 0.95;
  std::size_t knots = 10;
  // chi
  double u = 0.95;
  std::size_t window = 600;
  std::size_t step = 1;
  // cv / fit / boot / miae
  std::size_t k = 10;
  std::string criterion = "mlcv";
  std::string region = "rn";
  std::size_t budget = 300;
  std::size_t multistart = 3;
  std::string weights = "nw";
  std::size_t grid_points = 101;
  double b = 0.0;
  double nu = 0.0;
  double tau = -1.0;
  std::size_t x_points = 50;
  std::size_t w_points = 101;
  std::vector<std::string> bev = {"1:1"};
  std::size_t replicates = 200;
  std::vector<double> levels = {0.5, 0.75, 0.95};
  bool reduced_budget = true;
  std::size_t sections = 5;
  // simulate / miae
  std::string family = "logistic";
  std::size_t n = 500;
  std::string covariates = "equal";
  double alpha_start = 0.5;
  double alpha_end = 0.5;
  std::size_t reps = 20;
  std::vector<double> domain;
};

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

class Run {
 public:
  Run(const Options& opts, const CLI::App& command) : opts_(opts), dir_(opts.out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_.string() + "'");
    record_["command"] = command.get_name();
    json cfg = json::object();
    auto echo = [&](const CLI::App& app) {
      for (const CLI::Option* opt : app.get_options()) {
        if (opt->get_name() == "--help" || opt->get_name() == "--version" || opt->get_name() == "--config" ||
            opt->get_name().empty()) {
          continue;
        }
        std::string name = opt->get_name();
        while (!name.empty() && name.front() == '-') name.erase(name.begin());
        if (opt->count() > 0) {
          const auto res = opt->reduced_results();
          std::string joined;
          for (const auto& r : res) joined += (joined.empty() ? "" : ",") + r;
          cfg[name] = joined;
        } else {
          cfg[name] = opt->get_default_str();
        }
      }
    };
    echo(*command.get_parent());
    echo(command);
    record_["config"] = cfg;
    record_["seed"] = opts.seed;
    record_["threads"] = threads();
    record_["versions"] = {{"angsurf", kVersion},
                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"boost", BOOST_LIB_VERSION},
                           {"compiler", __VERSION__}};
    record_["artifacts"] = json::array();
    record_["counts"] = json::object();
  }

  unsigned threads() const { return opts_.threads == 0 ? default_threads() : opts_.threads; }
  fs::path path(const std::string& stem) const { return dir_ / stem; }
  std::string tagged(const std::string& stem, const std::string& ext) const { return stem + opts_.tag + ext; }

  void artifact(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    record_["artifacts"].push_back({{"path", p.filename().string()}, {"bytes", fs::file_size(p)}, {"lines", lines}});
  }

  void count(const std::string& key, json value) { record_["counts"][key] = std::move(value); }
  void note(const std::string& text) { record_["notes"].push_back(text); }

  void write_json(const fs::path& p, const json& j) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write output file '" + p.string() + "'");
    f << j.dump(2) << '\n';
    f.close();
    artifact(p);
  }

  // Appends this run to manifest.json in the output directory.
  void finish() {
    const fs::path mp = dir_ / "manifest.json";
    json manifest = {{"runs", json::array()}, {"artifacts", json::array()}};
    if (fs::exists(mp)) {
      std::ifstream in(mp);
      try {
        json previous = json::parse(in);
        if (previous.contains("runs") && previous["runs"].is_array()) manifest = previous;
      } catch (const json::exception&) {
        // A damaged manifest is replaced rather than extended.
      }
    }
    manifest["runs"].push_back(record_);
    std::map<std::string, json> latest;
    for (const auto& run : manifest["runs"]) {
      for (const auto& a : run["artifacts"]) latest[a["path"].get<std::string>()] = a;
    }
    manifest["artifacts"] = json::array();
    for (auto& [name, a] : latest) manifest["artifacts"].push_back(a);
    std::ofstream f(mp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write manifest '" + mp.string() + "'");
    f << manifest.dump(2) << '\n';
  }

 private:
  const Options& opts_;
  fs::path dir_;
  json record_;
};

// ---------------------------------------------------------------------------
// Input helpers
// ---------------------------------------------------------------------------

void require_input(const std::string& path, const char* flag) {
  if (path.empty()) throw ConfigError(std::string("missing required input ") + flag);
  if (!fs::exists(path)) throw IoError("input file '" + path + "' does not exist");
}

Series read_series(const std::string& path, const std::vector<std::string>& value_columns) {
  const CsvTable t = read_csv(path);
  const std::size_t dc = t.column_any({"date", "t", "timestamp", "time"});
  const std::size_t vc = t.column_any(value_columns);
  Series s;
  s.values = t.numeric_column(vc);
  for (const auto& row : t.rows) s.timestamps.push_back(row.at(dc));
  s.validate();
  return s;
}

AngleSample read_angles(const std::string& path) {
  const CsvTable t = read_csv(path);
  auto x = t.numeric_column(t.column("x"));
  auto w = t.numeric_column(t.column("w"));
  if (x.empty()) throw EmptySampleError("empty-sample: '" + path + "' contains no pseudo-angles");
  return AngleSample(std::move(x), std::move(w));
}

// Two series joined on their timestamps.
std::pair<std::vector<std::string>, std::pair<std::vector<double>, std::vector<double>>> join(
    const Series& a, const Series& b) {
  std::map<std::string, double> second;
  for (std::size_t i = 0; i < b.size(); ++i) second.emplace(b.timestamps[i], b.values[i]);
  std::vector<std::string> ts;
  std::vector<double> v1, v2;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = second.find(a.timestamps[i]);
    if (it == second.end()) continue;
    ts.push_back(a.timestamps[i]);
    v1.push_back(a.values[i]);
    v2.push_back(it->second);
  }
  if (ts.empty()) throw DomainError("the two input series share no timestamps");
  return {ts, {v1, v2}};
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

std::vector<double> covariate_grid(const AngleSample& s, std::size_t count) {
  if (count < 1) throw ConfigError("grid sizes must be at least 1");
  return linspace(s.min_covariate(), s.max_covariate(), count);
}

CvConfig cv_config(const Options& o, const AngleSample& sample, unsigned threads) {
  CvConfig c;
  c.folds = o.k;
  c.criterion = parse_criterion(o.criterion);
  c.region.kind = parse_region(o.region);
  if (c.region.kind == RegionKind::rxn || c.region.kind == RegionKind::escalate) {
    c.region.x_grid = covariate_grid(sample, o.grid_points);
  }
  c.budget = o.budget;
  c.multistart = o.multistart;
  c.weights = parse_weight_scheme(o.weights);
  c.seed = o.seed;
  c.threads = threads;
  c.validate(sample.size());
  return c;
}

json params_json(const TuningParams& p) {
  return {{"b", p.b}, {"nu", p.nu}, {"tau", p.tau}, {"weights", std::string(to_string(p.weights))}};
}

// Parameters from --b/--nu/--tau, from --params, or by cross-validation.
TuningParams resolve_params(const Options& o, const AngleSample& sample, Run& run) {
  TuningParams p;
  p.weights = parse_weight_scheme(o.weights);
  if (!o.params_file.empty()) {
    require_input(o.params_file, "--params");
    std::ifstream in(o.params_file);
    json j;
    try {
      j = json::parse(in);
      p.b = j.at("b").get<double>();
      p.nu = j.at("nu").get<double>();
      p.tau = j.at("tau").get<double>();
      if (j.contains("weights")) p.weights = parse_weight_scheme(j["weights"].get<std::string>());
    } catch (const json::exception& e) {
      throw ConfigError("parameter file '" + o.params_file + "' is not valid: " + e.what());
    }
  } else if (o.b > 0.0 || o.nu > 0.0 || o.tau >= 0.0) {
    if (!(o.b > 0.0) || !(o.nu > 0.0) || !(o.tau >= 0.0)) {
      throw ConfigError("give all of --b, --nu and --tau (or none to tune by cross-validation)");
    }
    p.b = o.b;
    p.nu = o.nu;
    p.tau = o.tau;
  } else {
    const TuningResult tuned = select_tuning(sample, cv_config(o, sample, run.threads()));
    run.note("tuning parameters selected by cross-validation");
    run.count("cv_evaluations", tuned.evaluations);
    p = tuned.params;
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void cmd_returns(const Options& o, Run& run, std::ostream& out, std::ostream& err) {
  require_input(o.input, "--input");
  const ReturnSeries r1 = neg_log_returns(read_series(o.input, {"price", "close", "value"}));
  if (o.input2.empty()) {
    const fs::path p = run.path(run.tagged("returns", ".csv"));
    {
      CsvWriter w(p, {"date", "return"});
      for (std::size_t i = 0; i < r1.size(); ++i) w.field(r1.timestamps[i]).field(r1.values[i]).end_row();
    }
    run.artifact(p);
    run.count("returns", r1.size());
    out << "returns: " << r1.size() << " rows -> " << p.string() << '\n';
    return;
  }
  require_input(o.input2, "--input2");
  const ReturnSeries r2 = neg_log_returns(read_series(o.input2, {"price", "close", "value"}));
  const AlignedPair ap = drop_zero_pairs(r1, r2);
  if (!ap.warning.empty()) {
    err << "warning: " << ap.warning << '\n';
    run.note(ap.warning);
  }
  for (int s = 0; s < 2; ++s) {
    const fs::path p = run.path(run.tagged(s == 0 ? "returns1" : "returns2", ".csv"));
    {
      CsvWriter w(p, {"date", "return"});
      const auto& v = s == 0 ? ap.first : ap.second;
      for (std::size_t i = 0; i < v.size(); ++i) w.field(ap.timestamps[i]).field(v[i]).end_row();
    }
    run.artifact(p);
  }
  run.count("aligned_rows", ap.timestamps.size());
  run.count("dropped_zero_rows", ap.dropped);
  out << "returns: " << ap.timestamps.size() << " aligned rows (" << ap.dropped << " dropped for zero returns)\n";
}

void cmd_garch(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  const Series r = read_series(o.input, {"return", "value", "residual"});
  const GarchFit fit = garch11_fit(r.values, parse_innovation(o.innovation));
  const ArchTest before = engle_arch_lm(r.values, o.lags);
  const ArchTest after = engle_arch_lm(fit.residuals, o.lags);
  const fs::path p = run.path(run.tagged("residuals", ".csv"));
  {
    CsvWriter w(p, {"date", "residual"});
    for (std::size_t i = 0; i < r.size(); ++i) w.field(r.timestamps[i]).field(fit.residuals[i]).end_row();
  }
  run.artifact(p);
  json j = {{"omega", fit.omega},
            {"alpha", fit.alpha},
            {"beta", fit.beta},
            {"innovation", std::string(to_string(fit.innovation))},
            {"loglik", fit.loglik},
            {"evaluations", fit.evaluations},
            {"engle_returns", {{"statistic", before.statistic}, {"p_value", before.p_value}, {"lags", o.lags}}},
            {"engle_residuals", {{"statistic", after.statistic}, {"p_value", after.p_value}, {"lags", o.lags}}}};
  if (fit.innovation == Innovation::student_t) j["df"] = fit.df;
  run.write_json(run.path(run.tagged("garch", ".json")), j);
  run.count("observations", r.size());
  out << j.dump() << '\n';
}

void cmd_frechet(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  require_input(o.input2, "--input2");
  const Series a = read_series(o.input, {"residual", "return", "value"});
  const Series b = read_series(o.input2, {"residual", "return", "value"});
  const auto [ts, values] = join(a, b);
  const auto y1 = empirical_frechet(values.first);
  const auto y2 = empirical_frechet(values.second);
  std::vector<double> x(ts.size());
  if (o.covariate != "unit" && o.covariate != "index") {
    throw ConfigError("unknown covariate '" + o.covariate + "' (expected unit or index)");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = o.covariate == "index" || x.size() == 1 ? static_cast<double>(i)
                                                   : static_cast<double>(i) / static_cast<double>(x.size() - 1);
  }
  const PseudoPolar pp = pseudo_polar(y1, y2, x);
  const fs::path p = run.path(run.tagged("polar", ".csv"));
  {
    CsvWriter w(p, {"x", "r", "w"});
    for (const auto& rec : pp.records) w.field(rec.x).field(rec.r).field(rec.w).end_row();
  }
  run.artifact(p);
  run.count("pairs", pp.records.size());
  out << "frechet: " << pp.records.size() << " pseudo-polar records -> " << p.string() << '\n';
}

void cmd_angles(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  const CsvTable t = read_csv(o.input);
  const auto x = t.numeric_column(t.column("x"));
  const auto r = t.numeric_column(t.column("r"));
  const auto w = t.numeric_column(t.column("w"));
  PseudoPolar pp;
  for (std::size_t i = 0; i < x.size(); ++i) pp.records.push_back({x[i], r[i], w[i]});
  QuantileSplineOptions qo;
  qo.q = o.q;
  qo.knots = o.knots;
  const QuantileSpline spline = quantile_spline_threshold(x, r, qo);
  const AngleSample sample = exceedance_angles(pp, [&](double v) { return spline(v); });

  const fs::path pa = run.path(run.tagged("angles", ".csv"));
  {
    CsvWriter wr(pa, {"x", "w"});
    for (std::size_t i = 0; i < sample.size(); ++i) wr.field(sample[i].x).field(sample[i].w).end_row();
  }
  run.artifact(pa);
  const fs::path pt = run.path(run.tagged("threshold", ".csv"));
  {
    CsvWriter wr(pt, {"x", "threshold"});
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    for (double v : linspace(lo, hi, 201)) wr.field(v).field(spline(v)).end_row();
  }
  run.artifact(pt);
  run.count("records", x.size());
  run.count("retained_angles", sample.size());
  run.count("exceedance_fraction", spline.exceedance_fraction());
  run.count("threshold_relative_variation", spline.relative_variation());
  out << "angles: retained " << sample.size() << " of " << x.size() << " records (threshold relative variation "
      << spline.relative_variation() << ")\n";
}

void cmd_chi(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  require_input(o.input2, "--input2");
  const Series a = read_series(o.input, {"residual", "return", "value"});
  const Series b = read_series(o.input2, {"residual", "return", "value"});
  const auto [ts, values] = join(a, b);
  const TailSummary global = chi_chibar(values.first, values.second, o.u);
  const std::size_t window = std::min(o.window, ts.size());
  const auto traj = rolling_chi(values.first, values.second, window, o.step, o.u, run.threads());
  const fs::path p = run.path(run.tagged("chi", ".csv"));
  std::size_t invalid = 0;
  {
    CsvWriter w(p, {"t", "chi", "chi_lo", "chi_hi", "chibar", "chibar_lo", "chibar_hi"});
    for (const auto& e : traj) {
      const TailSummary& s = e.summary;
      invalid += s.valid ? 0 : 1;
      w.field(ts[e.end]).field(s.chi).field(s.chi_lo).field(s.chi_hi).field(s.chibar).field(s.chibar_lo).field(s.chibar_hi);
      w.end_row();
    }
  }
  run.artifact(p);
  json j = {{"u", o.u},
            {"n", global.n_window},
            {"chi", global.chi},
            {"chi_ci", {global.chi_lo, global.chi_hi}},
            {"chibar", global.chibar},
            {"chibar_ci", {global.chibar_lo, global.chibar_hi}},
            {"joint_exceedances", global.joint_exceedances},
            {"interval_method", "delta method on the log-probability scale, 95%"},
            {"chi_estimator", "empirical copula at the realized marginal level"},
            {"window", window},
            {"step", o.step},
            {"windows", traj.size()},
            {"windows_without_joint_exceedances", invalid}};
  run.write_json(run.path(run.tagged("chi", ".json")), j);
  run.count("windows", traj.size());
  out << j.dump() << '\n';
}

void cmd_cv(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  const AngleSample sample = read_angles(o.input);
  const TuningResult res = select_tuning(sample, cv_config(o, sample, run.threads()));
  json j = params_json(res.params);
  j["objective"] = res.objective;
  j["evaluations"] = res.evaluations;
  j["criterion"] = o.criterion;
  j["region"] = std::string(to_string(res.region_used));
  j["n"] = sample.size();
  run.write_json(run.path(run.tagged("cv", ".json")), j);
  run.count("angles", sample.size());
  out << j.dump() << '\n';
}

void cmd_fit(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  const AngleSample sample = read_angles(o.input);
  const TuningParams params = resolve_params(o, sample, run);
  const AngularSurface surface(sample, params);
  const auto xg = covariate_grid(sample, o.x_points);
  const auto wg = standard_angle_grid();
  const SurfaceGrid grid = surface_grid(surface, xg, wg, run.threads());
  const fs::path p = run.path(run.tagged("surface", ".csv"));
  {
    CsvWriter w(p, {"x", "w", "h"});
    for (std::size_t i = 0; i < xg.size(); ++i) {
      for (std::size_t k = 0; k < wg.size(); ++k) w.field(xg[i]).field(wg[k]).field(grid.at(i, k)).end_row();
    }
  }
  run.artifact(p);
  json j = {{"params", params_json(params)},
            {"n", sample.size()},
            {"x_points", xg.size()},
            {"w_points", wg.size()},
            {"negative_entries", grid.negative_entries}};
  run.write_json(run.path(run.tagged("fit", ".json")), j);
  run.count("angles", sample.size());
  out << j.dump() << '\n';
}

std::vector<std::pair<double, double>> parse_bev_points(const std::vector<std::string>& specs) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(s);
      pts.emplace_back(std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("--bev expects y1:y2 pairs, got '" + s + "'");
    }
  }
  return pts;
}

void cmd_functionals(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  const AngleSample sample = read_angles(o.input);
  const TuningParams params = resolve_params(o, sample, run);
  const AngularSurface surface(sample, params);
  const auto xg = covariate_grid(sample, o.x_points);
  const auto wg = linspace(0.0, 1.0, std::max<std::size_t>(2, o.w_points));
  const auto bev_points = parse_bev_points(o.bev);
  const fs::path p = run.path(run.tagged("functionals", ".csv"));
  std::size_t flagged = 0;
  {
    CsvWriter w(p, {"x", "quantity", "value", "err"});
    auto emit = [&](const FunctionalEstimate& e) {
      flagged += e.flagged ? 1 : 0;
      std::string quantity(to_string(e.kind));
      if (e.kind == FunctionalKind::pickands) quantity += ":" + format_number(e.arg1);
      if (e.kind == FunctionalKind::bev) quantity += ":" + format_number(e.arg1) + ":" + format_number(e.arg2);
      w.field(e.x).field(quantity).field(e.value).field(e.quadrature_error).end_row();
    };
    for (double x : xg) {
      const CrossSection section = surface.at(x);
      for (double v : wg) emit(pickands_hat(v, section));
      emit(extremal_coeff_hat(section));
      for (const auto& [y1, y2] : bev_points) emit(bev_hat(y1, y2, section));
    }
  }
  run.artifact(p);
  run.count("flagged_estimates", flagged);
  json j = {{"params", params_json(params)}, {"x_points", xg.size()}, {"flagged", flagged}};
  run.write_json(run.path(run.tagged("functionals", ".json")), j);
  out << j.dump() << '\n';
}

std::vector<double> quantile_points(std::span<const double> values, std::size_t count) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double pos = (static_cast<double>(i) + 0.5) / static_cast<double>(count) * static_cast<double>(v.size() - 1);
    out.push_back(v[static_cast<std::size_t>(std::lround(pos))]);
  }
  return out;
}

void cmd_boot(const Options& o, Run& run, std::ostream& out) {
  require_input(o.input, "--input");
  const AngleSample sample = read_angles(o.input);
  const TuningParams params = resolve_params(o, sample, run);
  for (double level : o.levels) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("--levels must lie in (0,1)");
  }
  CvConfig cfg = cv_config(o, sample, 1);
  BootstrapOptions bo;
  bo.reduced_budget = o.reduced_budget;
  bo.threads = run.threads();
  const BootstrapEnsemble ens = bootstrap_surfaces(sample, params, o.replicates, cfg, o.seed, bo);
  run.count("replicates_requested", o.replicates);
  run.count("replicates_succeeded", ens.size());
  run.count("replicates_failed", ens.failures.size());
  if (ens.size() < 2) {
    throw OptimizationError("bootstrap produced " + std::to_string(ens.size()) +
                            " usable replicates; central regions need at least two");
  }

  const auto wg = standard_angle_grid();
  const auto sections = quantile_points(sample.covariates(), std::max<std::size_t>(1, o.sections));
  const fs::path pc = run.path(run.tagged("central_regions", ".csv"));
  std::size_t skipped_sections = 0;
  {
    CsvWriter w(pc, {"x", "w", "level", "lower", "median", "upper"});
    for (double x : sections) {
      std::vector<std::vector<double>> curves;
      for (const auto& s : ens.surfaces) {
        try {
          const CrossSection cs = s.at(x);
          std::vector<double> v(wg.size());
          cs.density_on_grid(wg, v);
          curves.push_back(std::move(v));
        } catch (const Error&) {
        }
      }
      if (curves.size() < 2) {
        ++skipped_sections;
        continue;
      }
      for (double level : o.levels) {
        const CentralRegion cr = central_region(curves, level);
        for (std::size_t k = 0; k < wg.size(); ++k) {
          w.field(x).field(wg[k]).field(level).field(cr.lower[k]).field(cr.median[k]).field(cr.upper[k]).end_row();
        }
      }
    }
  }
  run.artifact(pc);

  const auto xg = covariate_grid(sample, o.x_points);
  const fs::path pe = run.path(run.tagged("extremal_regions", ".csv"));
  {
    std::vector<std::vector<double>> curves;
    for (const auto& s : ens.surfaces) {
      try {
        curves.push_back(extremal_coefficient_curve(s, xg));
      } catch (const Error&) {
      }
    }
    CsvWriter w(pe, {"x", "level", "lower", "median", "upper"});
    if (curves.size() >= 2) {
      for (double level : o.levels) {
        const CentralRegion cr = central_region(curves, level);
        for (std::size_t i = 0; i < xg.size(); ++i) {
          w.field(xg[i]).field(level).field(cr.lower[i]).field(cr.median[i]).field(cr.upper[i]).end_row();
        }
      }
    }
    run.count("extremal_curves", curves.size());
  }
  run.artifact(pe);

  json failures = json::array();
  for (const auto& f : ens.failures) failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
  json j = {{"params", params_json(params)},
            {"B", o.replicates},
            {"succeeded", ens.size()},
            {"failures", failures},
            {"reduced_budget", o.reduced_budget},
            {"sections", sections},
            {"skipped_sections", skipped_sections}};
  run.write_json(run.path(run.tagged("boot", ".json")), j);
  out << "boot: " << ens.size() << " of " << o.replicates << " replicates succeeded\n";
}

CovariateScheme parse_covariates(const std::string& s) {
  if (s == "equal") return CovariateScheme::equally_spaced;
  if (s == "uniform") return CovariateScheme::uniform_random;
  throw ConfigError("unknown covariate scheme '" + s + "' (expected equal or uniform)");
}

void cmd_simulate(const Options& o, Run& run, std::ostream& out) {
  if (o.n < 1) throw ConfigError("--n must be at least 1");
  if (o.family == "market") {
    MarketSimulation ms;
    ms.n = o.n;
    const double a0 = o.alpha_start, a1 = o.alpha_end;
    if (!(a0 > 0.0 && a0 <= 1.0 && a1 > 0.0 && a1 <= 1.0)) throw ConfigError("--alpha-start/--alpha-end must lie in (0,1]");
    ms.alpha = [a0, a1](double t) { return a0 + (a1 - a0) * t; };
    const MarketData md = simulate_market(ms, o.seed);
    for (int s = 0; s < 2; ++s) {
      const Series& ps = s == 0 ? md.prices1 : md.prices2;
      const fs::path p = run.path(run.tagged(s == 0 ? "prices1" : "prices2", ".csv"));
      {
        CsvWriter w(p, {"date", "price"});
        for (std::size_t i = 0; i < ps.size(); ++i) w.field(ps.timestamps[i]).field(ps.values[i]).end_row();
      }
      run.artifact(p);
    }
    const fs::path pt = run.path(run.tagged("truth", ".csv"));
    {
      CsvWriter w(pt, {"date", "alpha"});
      for (std::size_t i = 0; i < md.alpha.size(); ++i) w.field(md.prices1.timestamps[i + 1]).field(md.alpha[i]).end_row();
    }
    run.artifact(pt);
    run.count("returns", o.n);
    out << "simulate: market fixture with " << o.n << " returns\n";
    return;
  }
  ConditionalModel model = model_by_name(o.family);
  if (!o.domain.empty()) {
    if (o.domain.size() != 2 || !(o.domain[1] > o.domain[0])) throw ConfigError("--domain expects lo,hi with lo < hi");
    model.domain = {o.domain[0], o.domain[1]};
    model.validate();
  }
  const auto xs = covariate_grid_sampler(model.domain, o.n, parse_covariates(o.covariates), derive_seed(o.seed, 1));
  const AngleSample sample = sample_angles(model, xs, derive_seed(o.seed, 2));
  const fs::path p = run.path(run.tagged("samples", ".csv"));
  {
    CsvWriter w(p, {"x", "w"});
    for (std::size_t i = 0; i < sample.size(); ++i) w.field(sample[i].x).field(sample[i].w).end_row();
  }
  run.artifact(p);
  run.count("angles", sample.size());
  out << "simulate: " << sample.size() << " pseudo-angles from " << model.name << " -> " << p.string() << '\n';
}

void cmd_miae(const Options& o, Run& run, std::ostream& out) {
  const ConditionalModel model = model_by_name(o.family);
  CvConfig cfg;
  cfg.folds = o.k;
  cfg.criterion = parse_criterion(o.criterion);
  cfg.region.kind = parse_region(o.region);
  if (cfg.region.kind == RegionKind::rxn || cfg.region.kind == RegionKind::escalate) {
    cfg.region.x_grid = linspace(model.domain.lo, model.domain.hi, o.grid_points);
  }
  cfg.budget = o.budget;
  cfg.multistart = o.multistart;
  MiaeOptions mo;
  mo.covariates = parse_covariates(o.covariates);
  mo.threads = run.threads();
  const MiaeReport rep = miae_study(model, o.n, o.reps, cfg, parse_weight_scheme(o.weights), o.seed, mo);
  json failures = json::array();
  for (const auto& f : rep.failures) failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
  json j = {{"family", o.family},
            {"n", o.n},
            {"weights", o.weights},
            {"miae", rep.value},
            {"std_error", rep.std_error},
            {"replicates", rep.n_replicates},
            {"succeeded", rep.per_replicate.size()},
            {"per_replicate", rep.per_replicate},
            {"failures", failures},
            {"grid", {{"x_nodes", rep.grid.x_nodes}, {"w_nodes", rep.grid.w_nodes}, {"clip", rep.grid.clip}}},
            {"excluded_truth_mass", rep.excluded_mass}};
  run.write_json(run.path(run.tagged("miae", ".json")), j);
  out << json{{"miae", rep.value}, {"std_error", rep.std_error}, {"succeeded", rep.per_replicate.size()}}.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Config file merging
// ---------------------------------------------------------------------------

std::string config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

bool is_global_key(const std::string& key) { return key == "out" || key == "seed" || key == "threads"; }

// Converts scalar/array members to flags; `global` selects the top-level
// flags (true) or everything else (false).
void append_json_args(const json& obj, std::vector<std::string>& out, bool global) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object() || is_global_key(key) != global) continue;
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      out.push_back(flag + "=" + (value.get<bool>() ? "true" : "false"));
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      out.push_back(flag);
      out.push_back(joined);
    } else {
      out.push_back(flag);
      out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
}

// Inserts config-file options ahead of the explicit flags so that those take
// precedence: global keys right after the program name, the rest right after
// the subcommand.
std::vector<std::string> merge_config(std::vector<std::string> args, const std::vector<std::string>& commands) {
  const std::string path = config_path(args);
  if (path.empty()) return args;
  if (!fs::exists(path)) throw IoError("config file '" + path + "' does not exist");
  std::ifstream in(path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  auto pos = std::find_if(args.begin() + 1, args.end(), [&](const std::string& a) {
    return std::find(commands.begin(), commands.end(), a) != commands.end();
  });
  if (pos == args.end()) return args;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_object() && std::find(commands.begin(), commands.end(), key) == commands.end()) {
      throw ConfigError("config file: unknown section '" + key + "'");
    }
  }
  std::vector<std::string> global, local;
  append_json_args(cfg, global, true);
  append_json_args(cfg, local, false);
  if (cfg.contains(*pos) && cfg[*pos].is_object()) {
    append_json_args(cfg[*pos], global, true);
    append_json_args(cfg[*pos], local, false);
  }
  const auto offset = pos - args.begin() + 1;
  args.insert(args.begin() + offset, local.begin(), local.end());
  args.insert(args.begin() + 1, global.begin(), global.end());
  return args;
}

void error_record(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Covariate-indexed angular density estimation for bivariate extremes", "angsurf"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.add_option("--config", o.config, "JSON file of option values (flags override it)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--threads", o.threads, "Worker threads (0 = available parallelism)");

  auto input = [&](CLI::App* c, bool second) {
    c->add_option("--input", o.input, "Input CSV");
    if (second) c->add_option("--input2", o.input2, "Second input CSV");
    c->add_option("--tag", o.tag, "Suffix for output file names");
  };
  auto tuning_flags = [&](CLI::App* c) {
    c->add_option("--k", o.k, "Cross-validation folds");
    c->add_option("--criterion", o.criterion, "mlcv or lscv");
    c->add_option("--region", o.region, "none, rn, rxn or auto");
    c->add_option("--budget", o.budget, "Nelder-Mead evaluations");
    c->add_option("--multistart", o.multistart, "Starts taken from the seed grid");
    c->add_option("--weights", o.weights, "nw or ll");
    c->add_option("--grid-points", o.grid_points, "Covariate grid size for the rxn region");
  };
  auto param_flags = [&](CLI::App* c) {
    c->add_option("--params", o.params_file, "JSON with b, nu, tau (for example cv.json)");
    c->add_option("--b", o.b, "Covariate bandwidth");
    c->add_option("--nu", o.nu, "Angular concentration");
    c->add_option("--tau", o.tau, "Center adjustment");
    tuning_flags(c);
  };

  auto* returns = app.add_subcommand("returns", "Negative log-returns from date,price CSV files");
  input(returns, true);
  auto* garch = app.add_subcommand("garch", "GARCH(1,1) filtering of a date,return CSV");
  input(garch, false);
  garch->add_option("--innovation", o.innovation, "normal or t");
  garch->add_option("--lags", o.lags, "Engle test lags");
  auto* frechet = app.add_subcommand("frechet", "Empirical Frechet margins and pseudo-polar coordinates");
  input(frechet, true);
  frechet->add_option("--covariate", o.covariate, "unit (time scaled to [0,1]) or index");
  auto* angles = app.add_subcommand("angles", "Quantile-spline thresholding of pseudo-radii");
  input(angles, false);
  angles->add_option("--q", o.q, "Threshold quantile");
  angles->add_option("--knots", o.knots, "Interior spline knots");
  auto* chi = app.add_subcommand("chi", "Empirical chi / chibar and rolling trajectories");
  input(chi, true);
  chi->add_option("--u", o.u, "Quantile level");
  chi->add_option("--window", o.window, "Rolling window length");
  chi->add_option("--step", o.step, "Rolling window step");
  auto* cv = app.add_subcommand("cv", "Select (b, nu, tau) by cross-validation");
  input(cv, false);
  tuning_flags(cv);
  auto* fit = app.add_subcommand("fit", "Estimate the angular surface on a grid");
  input(fit, false);
  param_flags(fit);
  fit->add_option("--x-points", o.x_points, "Covariate grid size");
  auto* functionals = app.add_subcommand("functionals", "Pickands function, extremal coefficient, BEV");
  input(functionals, false);
  param_flags(functionals);
  functionals->add_option("--x-points", o.x_points, "Covariate grid size");
  functionals->add_option("--w-points", o.w_points, "Pickands grid size on [0,1]");
  functionals->add_option("--bev", o.bev, "BEV points y1:y2")->delimiter(',');
  auto* boot = app.add_subcommand("boot", "Smoothed bootstrap and band-depth central regions");
  input(boot, false);
  param_flags(boot);
  boot->add_option("--B", o.replicates, "Bootstrap replicates");
  boot->add_option("--levels", o.levels, "Central region levels")->delimiter(',');
  boot->add_flag("--reduced-budget,!--full-budget", o.reduced_budget, "Re-tune with a quarter of the budget");
  boot->add_option("--sections", o.sections, "Cross sections at covariate quantiles");
  boot->add_option("--x-points", o.x_points, "Covariate grid size for extremal coefficient bands");
  auto* simulate = app.add_subcommand("simulate", "Simulate pseudo-angles or a synthetic market fixture");
  simulate->add_option("--family", o.family, "logistic, logistic-sq, sdir, adir or market");
  simulate->add_option("--n", o.n, "Sample size");
  simulate->add_option("--covariates", o.covariates, "equal or uniform");
  simulate->add_option("--domain", o.domain, "Covariate interval lo,hi (default: the family's domain)")
      ->delimiter(',')
      ->expected(2);
  simulate->add_option("--alpha-start", o.alpha_start, "Market dependence at the start");
  simulate->add_option("--alpha-end", o.alpha_end, "Market dependence at the end");
  simulate->add_option("--tag", o.tag, "Suffix for output file names");
  auto* miae = app.add_subcommand("miae", "Mean integrated absolute error study");
  miae->add_option("--family", o.family, "logistic, logistic-sq, sdir or adir");
  miae->add_option("--n", o.n, "Sample size");
  miae->add_option("--reps", o.reps, "Replicates");
  miae->add_option("--covariates", o.covariates, "equal or uniform");
  miae->add_option("--tag", o.tag, "Suffix for output file names");
  tuning_flags(miae);

  std::vector<std::string> commands;
  for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    commands.push_back(sub->get_name());
  }

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(std::move(args), commands);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    error_record(err, to_string(ErrorCode::invalid_config), e.what());
    return exit_code(ErrorCode::invalid_config);
  } catch (const Error& e) {
    error_record(err, to_string(e.code()), e.what());
    return exit_code(e.code());
  }

  const CLI::App* command = app.get_subcommands().front();
  try {
    Run run(o, *command);
    const std::string name = command->get_name();
    if (name == "returns") cmd_returns(o, run, out, err);
    else if (name == "garch") cmd_garch(o, run, out);
    else if (name == "frechet") cmd_frechet(o, run, out);
    else if (name == "angles") cmd_angles(o, run, out);
    else if (name == "chi") cmd_chi(o, run, out);
    else if (name == "cv") cmd_cv(o, run, out);
    else if (name == "fit") cmd_fit(o, run, out);
    else if (name == "functionals") cmd_functionals(o, run, out);
    else if (name == "boot") cmd_boot(o, run, out);
    else if (name == "simulate") cmd_simulate(o, run, out);
    else if (name == "miae") cmd_miae(o, run, out);
    run.finish();
  } catch (const Error& e) {
    error_record(err, to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    error_record(err, "internal-error", e.what());
    return 1;
  }
  return 0;
}

}  // namespace angsurf::cli
