// unitchart: fit bounded-response models, design Shewhart and EWMA control
// charts for processes on (0,1), estimate their run-length performance, and
// run phase I / phase II monitoring. Every command emits a JSON report with a
// manifest header (command, configuration, input digest) so runs can be
// reproduced and compared byte for byte.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "unitchart/charts.hpp"
#include "unitchart/errors.hpp"
#include "unitchart/inference.hpp"
#include "unitchart/models.hpp"
#include "unitchart/simulation.hpp"
#include "unitchart/version.hpp"

namespace uc = unitchart;
using nlohmann::ordered_json;

namespace {

constexpr double kMu0 = 0.2;

const std::array<uc::Family, 3> kFamilies{uc::Family::beta, uc::Family::simplex,
                                          uc::Family::unit_gamma};

// Dispersion cases used throughout the study tables; within a case the three
// families share the same in-control standard deviation at mu0 = 0.2.
struct CaseDef {
  double phi;
  double sigma;
  double tau;
};
const std::array<CaseDef, 4> kCases{{{290.0, 0.37, 155.0},
                                     {148.0, 0.50, 96.0},
                                     {80.0, 0.71, 51.0},
                                     {31.0, 1.20, 20.0}}};

double case_dispersion(uc::Family family, int c) {
  switch (family) {
    case uc::Family::beta: return kCases[c].phi;
    case uc::Family::simplex: return kCases[c].sigma;
    case uc::Family::unit_gamma: return kCases[c].tau;
  }
  throw uc::DomainError("unknown family");
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::string fmt(double v, int prec) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*f", prec, v);
  return b;
}

// ---------------------------------------------------------------------------
// report plumbing: manifest, digest, emission

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h) {
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw uc::DataError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a over the input files in flag order; commands without file inputs
// hash their configuration instead.
std::string input_digest(const std::vector<std::string>& files,
                         const ordered_json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  if (files.empty()) {
    h = fnv1a64(config.dump(), h);
  } else {
    for (const auto& f : files) h = fnv1a64(read_file_bytes(f), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ordered_json make_manifest(const std::string& command, const ordered_json& config,
                           const std::vector<std::string>& inputs) {
  ordered_json m;
  m["command"] = command;
  m["tool_version"] = uc::kVersion;
  m["input_digest"] = input_digest(inputs, config);
  m["config"] = config;
  m["generated_at"] = iso_timestamp();
  return m;
}

ordered_json envelope(ordered_json manifest, ordered_json report) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["manifest"] = std::move(manifest);
  doc["report"] = std::move(report);
  return doc;
}

void emit(const ordered_json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw uc::DataError("cannot write output file: " + out_path);
  out << text;
}

// ---------------------------------------------------------------------------
// data input

// One observation per line; blank lines are skipped and a single leading
// non-numeric line is treated as a header. Anything else that fails to parse,
// and any value outside the open unit interval, is an error naming the line.
std::vector<double> read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw uc::DataError("cannot open input file: " + path);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  bool saw_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t b = line.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string::npos) continue;
    const std::size_t e = line.find_last_not_of(" \t\r\n\f\v");
    const std::string tok = line.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) {
      if (!saw_content) {  // header line
        saw_content = true;
        continue;
      }
      throw uc::DataError(path + " line " + std::to_string(lineno) +
                          ": cannot parse '" + tok + "' as a number");
    }
    if (*end != '\0')
      throw uc::DataError(path + " line " + std::to_string(lineno) +
                          ": trailing characters after the number in '" + tok + "'");
    saw_content = true;
    if (!std::isfinite(v) || v <= 0.0 || v >= 1.0)
      throw uc::DataError(path + " line " + std::to_string(lineno) + ": value " +
                              tok + " lies outside the open unit interval (0,1)",
                          values.size() + 1);
    values.push_back(v);
  }
  if (values.empty()) throw uc::DataError(path + ": no observations found");
  return values;
}

// Comma-separated shift list; empty means the canonical +-0.02..0.08 grid.
std::vector<double> parse_deltas(const std::string& spec) {
  if (spec.empty())
    return {-0.08, -0.06, -0.04, -0.02, 0.0, 0.02, 0.04, 0.06, 0.08};
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw uc::DomainError("cannot parse shift '" + tok + "' in --deltas");
    out.push_back(v);
  }
  if (out.empty()) throw uc::DomainError("--deltas lists no shifts");
  return out;
}

// ---------------------------------------------------------------------------
// JSON views of library types

ordered_json summary_json(const uc::RunLengthSummary& s) {
  ordered_json j;
  j["arl"] = s.arl;
  j["sdrl"] = s.sdrl;
  j["mrl"] = s.mrl;
  j["se_arl"] = s.se_arl;
  j["n_runs"] = s.n_runs;
  j["censored"] = s.censored;
  if (s.censor_warning) j["censor_warning"] = true;
  return j;
}

ordered_json ewma_json(const uc::EwmaChart& c) {
  return {{"type", "ewma"}, {"lambda", c.lambda}, {"L", c.L},   {"lcl", c.lcl},
          {"cl", c.cl},     {"ucl", c.ucl},       {"sigma0x", c.sigma0x}};
}

ordered_json shewhart_json(const uc::ShewhartChart& c) {
  return {{"type", "shewhart"}, {"alpha", c.alpha}, {"lcl", c.lcl},
          {"cl", c.cl},         {"ucl", c.ucl}};
}

ordered_json fit_json(const uc::FitReport& r) {
  ordered_json j;
  j["family"] = uc::family_name(r.family);
  j["mu"] = r.estimates[0];
  j["dispersion"] = r.estimates[1];
  j["se_mu"] = r.std_errors[0];
  j["se_dispersion"] = r.std_errors[1];
  j["loglik"] = r.loglik;
  j["aic"] = r.aic;
  j["bic"] = r.bic;
  j["n"] = r.n;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  return j;
}

ordered_json gof_json(const uc::GofReport& g, const std::string& ad_method) {
  return {{"ad_stat", g.ad_stat},   {"ad_pvalue", g.ad_pvalue},
          {"ad_method", ad_method}, {"ks_stat", g.ks_stat},
          {"ks_pvalue", g.ks_pvalue}};
}

ordered_json points_json(const std::vector<double>& stats, double lcl, double ucl) {
  ordered_json pts = ordered_json::array();
  for (std::size_t i = 0; i < stats.size(); ++i)
    pts.push_back({{"t", i + 1},
                   {"value", stats[i]},
                   {"signal", stats[i] < lcl || stats[i] > ucl}});
  return pts;
}

std::vector<std::size_t> out_indices(const std::vector<double>& stats, double lcl,
                                     double ucl) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < stats.size(); ++i)
    if (stats[i] < lcl || stats[i] > ucl) idx.push_back(i + 1);
  return idx;
}

ordered_json signal_json(const uc::MonitorResult& r) {
  return r.signal_index ? ordered_json(*r.signal_index) : ordered_json(nullptr);
}

// ---------------------------------------------------------------------------
// SVG rendering

struct ChartRender {
  std::string title;
  std::vector<double> values;
  double lcl = 0.0;
  double cl = 0.0;
  double ucl = 0.0;
};

void write_svg(const std::string& path, const ChartRender& r) {
  const double kW = 880.0, kH = 440.0;
  const double ml = 72.0, mr = 28.0, mt = 44.0, mb = 48.0;
  const std::size_t n = r.values.size();

  double lo = std::min(r.lcl, r.cl), hi = std::max(r.ucl, r.cl);
  for (const double v : r.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span = hi - lo;
  if (span <= 0.0) span = std::max(1e-6, std::fabs(hi) * 0.1 + 1e-6);
  lo -= 0.08 * span;
  hi += 0.08 * span;

  const auto xf = [&](std::size_t t) {
    if (n <= 1) return ml + (kW - ml - mr) / 2.0;
    return ml + (kW - ml - mr) * (double(t) - 1.0) / (double(n) - 1.0);
  };
  const auto yf = [&](double v) { return mt + (kH - mt - mb) * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"440\" "
         "viewBox=\"0 0 880 440\" font-family=\"sans-serif\">\n"
      << "<rect width=\"880\" height=\"440\" fill=\"white\"/>\n"
      << "<text x=\"" << fmt(ml, 2) << "\" y=\"24\" font-size=\"15\" fill=\"#222\">"
      << r.title << "</text>\n"
      << "<rect x=\"" << fmt(ml, 2) << "\" y=\"" << fmt(mt, 2) << "\" width=\""
      << fmt(kW - ml - mr, 2) << "\" height=\"" << fmt(kH - mt - mb, 2)
      << "\" fill=\"none\" stroke=\"#999\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const double y = yf(v);
    svg << "<line x1=\"" << fmt(ml - 4, 2) << "\" y1=\"" << fmt(y, 2) << "\" x2=\""
        << fmt(ml, 2) << "\" y2=\"" << fmt(y, 2) << "\" stroke=\"#999\"/>\n"
        << "<text x=\"" << fmt(ml - 8, 2) << "\" y=\"" << fmt(y + 4, 2)
        << "\" font-size=\"11\" fill=\"#444\" text-anchor=\"end\">" << fmt(v, 3)
        << "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, (n + 9) / 10);
  for (std::size_t t = 1; t <= n; t += step) {
    const double x = xf(t);
    svg << "<line x1=\"" << fmt(x, 2) << "\" y1=\"" << fmt(kH - mb, 2) << "\" x2=\""
        << fmt(x, 2) << "\" y2=\"" << fmt(kH - mb + 4, 2) << "\" stroke=\"#999\"/>\n"
        << "<text x=\"" << fmt(x, 2) << "\" y=\"" << fmt(kH - mb + 18, 2)
        << "\" font-size=\"11\" fill=\"#444\" text-anchor=\"middle\">" << t
        << "</text>\n";
  }
  svg << "<text x=\"" << fmt(ml + (kW - ml - mr) / 2.0, 2) << "\" y=\""
      << fmt(kH - 10, 2)
      << "\" font-size=\"12\" fill=\"#444\" text-anchor=\"middle\">t</text>\n";

  const auto hline = [&](double v, const char* color, bool dashed,
                         const std::string& label, double dy) {
    const double y = yf(v);
    svg << "<line x1=\"" << fmt(ml, 2) << "\" y1=\"" << fmt(y, 2) << "\" x2=\""
        << fmt(kW - mr, 2) << "\" y2=\"" << fmt(y, 2) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.2\"";
    if (dashed) svg << " stroke-dasharray=\"6 4\"";
    svg << "/>\n<text x=\"" << fmt(kW - mr - 4, 2) << "\" y=\"" << fmt(y + dy, 2)
        << "\" font-size=\"11\" fill=\"" << color << "\" text-anchor=\"end\">"
        << label << "</text>\n";
  };
  hline(r.ucl, "#b03030", true, "UCL = " + fmt(r.ucl, 4), -5.0);
  hline(r.cl, "#666666", false, "CL = " + fmt(r.cl, 4), -5.0);
  hline(r.lcl, "#b03030", true, "LCL = " + fmt(r.lcl, 4), 13.0);

  svg << "<polyline fill=\"none\" stroke=\"#1f62a8\" stroke-width=\"1.5\" points=\"";
  for (std::size_t t = 1; t <= n; ++t) {
    if (t > 1) svg << ' ';
    svg << fmt(xf(t), 2) << ',' << fmt(yf(r.values[t - 1]), 2);
  }
  svg << "\"/>\n";
  for (std::size_t t = 1; t <= n; ++t) {
    const double v = r.values[t - 1];
    const bool out = v < r.lcl || v > r.ucl;
    svg << "<circle cx=\"" << fmt(xf(t), 2) << "\" cy=\"" << fmt(yf(v), 2)
        << "\" r=\"" << (out ? "4" : "3") << "\" fill=\"" << (out ? "#b03030" : "white")
        << "\" stroke=\"" << (out ? "#b03030" : "#1f62a8")
        << "\" stroke-width=\"1.2\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw uc::DataError("cannot write chart file: " + path);
  out << svg.str();
}

// ---------------------------------------------------------------------------
// shared flag groups

struct SimFlags {
  double arl0 = 370.4;
  double xi = 4.0;
  std::uint64_t runs = 10000;
  std::uint64_t seed = 0;
  std::uint64_t rl_cap = 5000000;
  double l_grid = 0.001;
  int threads = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* cmd, bool need_seed) {
    cmd->add_option("--arl0", arl0, "target in-control ARL")->capture_default_str();
    cmd->add_option("--xi", xi, "half-width of the calibration window on the ARL")
        ->capture_default_str();
    cmd->add_option("--runs", runs, "Monte-Carlo replications")->capture_default_str();
    seed_opt = cmd->add_option("--seed", seed,
                               "base RNG seed; replication i uses substream i");
    if (need_seed) seed_opt->required();
    cmd->add_option("--rl-cap", rl_cap, "censoring cap on simulated run lengths")
        ->capture_default_str();
    cmd->add_option("--l-grid", l_grid, "lattice resolution of the multiplier search")
        ->capture_default_str();
    cmd->add_option("--threads", threads, "worker threads (0 = auto)")
        ->capture_default_str();
  }

  uc::DesignConfig config() const {
    uc::DesignConfig c;
    c.arl0 = arl0;
    c.xi = xi;
    c.n_runs = runs;
    c.seed = seed;
    c.rl_cap = rl_cap;
    c.l_grid = l_grid;
    c.threads = threads;
    return c;
  }

  ordered_json json() const {
    return {{"arl0", arl0},     {"xi", xi},         {"runs", runs}, {"seed", seed},
            {"rl_cap", rl_cap}, {"l_grid", l_grid}, {"threads", threads}};
  }
};

struct ModelFlags {
  std::string family;
  double mu = 0.0;
  double phi = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  CLI::Option* phi_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* tau_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "model family")
        ->required()
        ->check(CLI::IsMember({"beta", "simplex", "unitgamma"}));
    cmd->add_option("--mu", mu, "in-control mean in (0,1)")->required();
    phi_opt = cmd->add_option("--phi", phi, "beta precision parameter");
    sigma_opt = cmd->add_option("--sigma", sigma, "simplex dispersion parameter");
    tau_opt = cmd->add_option("--tau", tau, "unit-gamma shape parameter");
  }

  double dispersion() const {
    const uc::Family fam = uc::family_from_name(family);
    const bool p = phi_opt->count() > 0;
    const bool s = sigma_opt->count() > 0;
    const bool t = tau_opt->count() > 0;
    if (int(p) + int(s) + int(t) != 1)
      throw uc::DomainError(
          "give exactly one dispersion flag: --phi (beta), --sigma (simplex) or "
          "--tau (unitgamma)");
    switch (fam) {
      case uc::Family::beta:
        if (!p) throw uc::DomainError("family beta takes its dispersion via --phi");
        return phi;
      case uc::Family::simplex:
        if (!s) throw uc::DomainError("family simplex takes its dispersion via --sigma");
        return sigma;
      case uc::Family::unit_gamma:
        if (!t) throw uc::DomainError("family unitgamma takes its dispersion via --tau");
        return tau;
    }
    throw uc::DomainError("unknown family");
  }

  uc::UnitModel build() const {
    return uc::UnitModel::make(uc::family_from_name(family), mu, dispersion());
  }

  ordered_json json() const {
    return {{"family", family}, {"mu", mu}, {"dispersion", dispersion()}};
  }
};

// ---------------------------------------------------------------------------
// fit

struct FitCmd {
  std::string input;
  std::string out;
  std::string ad_method = "bootstrap";
  int ad_resamples = 1000;
  std::uint64_t seed = 104729;
  std::string runs_method = "normal";
  int threads = 0;
};

int run_fit(const FitCmd& o) {
  const std::vector<double> data = read_series(o.input);

  uc::AdOptions ad;
  ad.method = o.ad_method == "asymptotic" ? uc::AdMethod::asymptotic
                                          : uc::AdMethod::bootstrap;
  ad.n_resamples = o.ad_resamples;
  ad.seed = o.seed;
  ad.threads = o.threads;

  ordered_json config{{"input", o.input},
                      {"ad_method", o.ad_method},
                      {"ad_resamples", o.ad_resamples},
                      {"seed", o.seed},
                      {"runs_method", o.runs_method},
                      {"threads", o.threads}};

  ordered_json fits = ordered_json::array();
  std::vector<uc::FitReport> fitted;
  for (const uc::Family fam : kFamilies) {
    try {
      const uc::FitReport rep = uc::fit_mle(fam, data);
      const uc::UnitModel model =
          uc::UnitModel::make(fam, rep.estimates[0], rep.estimates[1]);
      const uc::GofReport gof = uc::gof_tests(data, model, ad);
      ordered_json entry = fit_json(rep);
      entry["gof"] = gof_json(gof, o.ad_method);
      fits.push_back(std::move(entry));
      fitted.push_back(rep);
    } catch (const uc::Error& e) {
      fits.push_back({{"family", uc::family_name(fam)}, {"error", e.what()}});
    }
  }
  if (fitted.empty())
    throw uc::EstimationError("no candidate family could be fitted to " + o.input);

  const std::vector<uc::FitReport> ranked = uc::select_model(fitted);
  ordered_json ranking = ordered_json::array();
  for (const auto& r : ranked) ranking.push_back(uc::family_name(r.family));

  const uc::RunsTestReport runs = uc::runs_test(
      data, o.runs_method == "exact" ? uc::RunsMethod::exact
                                     : uc::RunsMethod::normal_approx);

  ordered_json payload;
  payload["data"] = {{"path", o.input}, {"n", data.size()}};
  payload["fits"] = std::move(fits);
  payload["ranking"] = std::move(ranking);
  payload["selected"] = uc::family_name(ranked.front().family);
  payload["runs_test"] = {{"method", o.runs_method},
                          {"runs", runs.n_runs_observed},
                          {"above", runs.n_above},
                          {"below", runs.n_below},
                          {"pvalue", runs.pvalue}};
  emit(envelope(make_manifest("fit", config, {o.input}), std::move(payload)), o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// design

struct DesignCmd {
  ModelFlags model;
  std::vector<double> lambdas;
  SimFlags sim;
  std::string out;
};

int run_design(const DesignCmd& o) {
  const uc::UnitModel model = o.model.build();
  const std::vector<double> lambdas =
      o.lambdas.empty() ? std::vector<double>{0.05, 0.1, 0.2} : o.lambdas;

  ordered_json config = o.model.json();
  config["lambdas"] = lambdas;
  config.update(o.sim.json());

  const uc::DesignConfig cfg = o.sim.config();
  ordered_json designs = ordered_json::array();
  for (const double lam : lambdas) {
    const uc::CalibrationResult cal = uc::calibrate_L(model, lam, cfg);
    const uc::EwmaChart chart = uc::ewma_limits(model, lam, cal.L);
    designs.push_back({{"lambda", lam},
                       {"L", cal.L},
                       {"chart", ewma_json(chart)},
                       {"achieved", summary_json(cal.achieved)}});
  }

  ordered_json payload;
  payload["model"] = o.model.json();
  payload["designs"] = std::move(designs);
  emit(envelope(make_manifest("design", config, {}), std::move(payload)), o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvalCmd {
  ModelFlags model;
  std::vector<double> lambdas;
  std::vector<double> l_values;
  std::string deltas_spec;
  bool shewhart = false;
  double alpha = 0.0027;
  SimFlags sim;
  std::string out;
};

int run_evaluate(const EvalCmd& o) {
  const uc::UnitModel model = o.model.build();
  const std::vector<double> lambdas =
      o.lambdas.empty() ? std::vector<double>{0.05, 0.1, 0.2} : o.lambdas;
  if (!o.l_values.empty() && o.l_values.size() != lambdas.size())
    throw uc::DomainError("--L must be given once per --lambda");
  const std::vector<double> deltas = parse_deltas(o.deltas_spec);
  const uc::ShiftProfile profile{model.mu(), deltas, model.dispersion()};
  const uc::DesignConfig cfg = o.sim.config();

  ordered_json config = o.model.json();
  config["lambdas"] = lambdas;
  if (!o.l_values.empty()) config["L"] = o.l_values;
  config["deltas"] = deltas;
  config["shewhart"] = o.shewhart;
  config["alpha"] = o.alpha;
  config.update(o.sim.json());

  ordered_json payload;
  payload["model"] = o.model.json();
  payload["deltas"] = deltas;

  ordered_json evals = ordered_json::array();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lam = lambdas[i];
    double L = 0.0;
    bool calibrated = false;
    if (o.l_values.empty()) {
      L = uc::calibrate_L(model, lam, cfg).L;
      calibrated = true;
    } else {
      L = o.l_values[i];
    }
    const uc::EwmaChart chart = uc::ewma_limits(model, lam, L);
    const auto rows = uc::ooc_profile(chart, model.family(), profile, cfg);
    ordered_json jrows = ordered_json::array();
    for (const auto& [mu1, summary] : rows) {
      ordered_json row{{"mu1", mu1}, {"delta", mu1 - model.mu()}};
      row.update(summary_json(summary));
      jrows.push_back(std::move(row));
    }
    evals.push_back({{"lambda", lam},
                     {"L", L},
                     {"calibrated", calibrated},
                     {"chart", ewma_json(chart)},
                     {"rows", std::move(jrows)}});
  }
  payload["ewma"] = std::move(evals);

  if (o.shewhart) {
    const uc::ShewhartChart sh = uc::shewhart_limits(model, o.alpha);
    ordered_json jrows = ordered_json::array();
    for (const double d : deltas) {
      const double mu1 = model.mu() + d;
      const uc::UnitModel shifted =
          uc::UnitModel::make(model.family(), mu1, model.dispersion());
      const double p = uc::p_out(shifted, sh.lcl, sh.ucl);
      const uc::RunLengthSummary ex = uc::shewhart_rl_exact(p);
      jrows.push_back({{"mu1", mu1},
                       {"delta", d},
                       {"p_out", p},
                       {"arl", ex.arl},
                       {"sdrl", ex.sdrl},
                       {"mrl", ex.mrl}});
    }
    payload["shewhart"] = {{"chart", shewhart_json(sh)}, {"rows", std::move(jrows)}};
  }

  emit(envelope(make_manifest("evaluate", config, {}), std::move(payload)), o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// robustness

struct RobCmd {
  int case_id = 1;
  double lambda = 0.0;
  std::string deltas_spec;
  SimFlags sim;
  std::string out;
};

int run_robustness(const RobCmd& o) {
  const int c = o.case_id - 1;
  const std::array<uc::UnitModel, 3> case_models{
      uc::UnitModel::beta(kMu0, kCases[c].phi),
      uc::UnitModel::simplex(kMu0, kCases[c].sigma),
      uc::UnitModel::unit_gamma(kMu0, kCases[c].tau)};
  const std::vector<double> deltas = parse_deltas(o.deltas_spec);

  ordered_json config{{"case", o.case_id}, {"lambda", o.lambda}, {"deltas", deltas}};
  config.update(o.sim.json());

  const uc::RobustnessMatrix m =
      uc::robustness_matrix(case_models, o.lambda, deltas, o.sim.config());

  ordered_json charts = ordered_json::array();
  for (int j = 0; j < 3; ++j)
    charts.push_back({{"limits_family", uc::family_name(case_models[j].family())},
                      {"dispersion", case_models[j].dispersion()},
                      {"L", m.l_values[j]},
                      {"lcl", m.charts[j].lcl},
                      {"ucl", m.charts[j].ucl}});

  const std::size_t ns = m.mu1.size();
  ordered_json cells = ordered_json::array();
  for (int t = 0; t < 3; ++t) {
    for (int j = 0; j < 3; ++j) {
      ordered_json rows = ordered_json::array();
      for (std::size_t s = 0; s < ns; ++s) {
        const auto& cell = m.cells[(std::size_t(t) * 3 + j) * ns + s];
        ordered_json row{{"mu1", m.mu1[s]}};
        row.update(summary_json(cell.summary));
        rows.push_back(std::move(row));
      }
      cells.push_back({{"true_family", uc::family_name(case_models[t].family())},
                       {"limits_family", uc::family_name(case_models[j].family())},
                       {"rows", std::move(rows)}});
    }
  }

  ordered_json payload;
  payload["case"] = o.case_id;
  payload["mu0"] = kMu0;
  payload["lambda"] = o.lambda;
  payload["charts"] = std::move(charts);
  payload["cells"] = std::move(cells);
  emit(envelope(make_manifest("robustness", config, {}), std::move(payload)), o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// monitor

struct MonitorCmd {
  std::string phase1;
  std::string phase2;
  std::string family;
  std::vector<double> lambdas;
  double alpha = 0.0027;
  bool force = false;
  std::string out_dir = ".";
  SimFlags sim;
  std::string out;
};

int run_monitor(const MonitorCmd& o) {
  const std::vector<double> phase1 = read_series(o.phase1);
  const std::vector<double> phase2 = read_series(o.phase2);
  const std::vector<double> lambdas =
      o.lambdas.empty() ? std::vector<double>{0.05, 0.1, 0.2} : o.lambdas;

  ordered_json config{{"phase1", o.phase1},
                      {"phase2", o.phase2},
                      {"family", o.family.empty() ? "auto" : o.family},
                      {"lambdas", lambdas},
                      {"alpha", o.alpha},
                      {"force", o.force},
                      {"out_dir", o.out_dir}};
  config.update(o.sim.json());
  const ordered_json manifest = make_manifest("monitor", config, {o.phase1, o.phase2});

  // Fit every candidate family to the phase I sample.
  ordered_json fits = ordered_json::array();
  std::vector<uc::FitReport> fitted;
  for (const uc::Family fam : kFamilies) {
    try {
      const uc::FitReport rep = uc::fit_mle(fam, phase1);
      const uc::UnitModel m = uc::UnitModel::make(fam, rep.estimates[0], rep.estimates[1]);
      uc::AdOptions ad;
      ad.threads = o.sim.threads;
      const uc::GofReport gof = uc::gof_tests(phase1, m, ad);
      ordered_json entry = fit_json(rep);
      entry["gof"] = gof_json(gof, "bootstrap");
      fits.push_back(std::move(entry));
      fitted.push_back(rep);
    } catch (const uc::Error& e) {
      fits.push_back({{"family", uc::family_name(fam)}, {"error", e.what()}});
    }
  }
  if (fitted.empty())
    throw uc::EstimationError("no candidate family could be fitted to the phase I sample");

  const std::vector<uc::FitReport> ranked = uc::select_model(fitted);
  uc::Family chosen = ranked.front().family;
  if (!o.family.empty()) chosen = uc::family_from_name(o.family);
  const uc::FitReport* chosen_rep = nullptr;
  for (const auto& r : ranked)
    if (r.family == chosen) chosen_rep = &r;
  if (!chosen_rep)
    throw uc::EstimationError("requested family " + std::string(uc::family_name(chosen)) +
                              " could not be fitted to the phase I sample");
  const uc::UnitModel model =
      uc::UnitModel::make(chosen, chosen_rep->estimates[0], chosen_rep->estimates[1]);

  const uc::ShewhartChart sh = uc::shewhart_limits(model, o.alpha);
  const uc::RunsTestReport runs = uc::runs_test(phase1);

  const std::string dir = o.out_dir.empty() ? "." : o.out_dir;
  std::filesystem::create_directories(dir);
  const auto svg_path = [&](const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
  };

  ordered_json ranking = ordered_json::array();
  for (const auto& r : ranked) ranking.push_back(uc::family_name(r.family));

  // Phase I verification on the fitted chart.
  const uc::MonitorResult p1 = uc::monitor(sh, phase1);
  write_svg(svg_path("phase1_shewhart.svg"),
            {"Phase I - Shewhart (individuals)", p1.statistic_path, sh.lcl, sh.cl, sh.ucl});
  const std::vector<std::size_t> p1_out = out_indices(p1.statistic_path, sh.lcl, sh.ucl);

  ordered_json phase1_json;
  phase1_json["path"] = o.phase1;
  phase1_json["n"] = phase1.size();
  phase1_json["fits"] = std::move(fits);
  phase1_json["ranking"] = std::move(ranking);
  phase1_json["selected_family"] = uc::family_name(chosen);
  phase1_json["model"] = {{"family", uc::family_name(chosen)},
                          {"mu", model.mu()},
                          {"dispersion", model.dispersion()}};
  phase1_json["runs_test"] = {{"runs", runs.n_runs_observed},
                              {"above", runs.n_above},
                              {"below", runs.n_below},
                              {"pvalue", runs.pvalue}};
  {
    ordered_json block = shewhart_json(sh);
    block["points"] = points_json(p1.statistic_path, sh.lcl, sh.ucl);
    block["out_of_limits"] = p1_out;
    block["signal_index"] = signal_json(p1);
    block["svg"] = "phase1_shewhart.svg";
    phase1_json["shewhart"] = std::move(block);
  }
  phase1_json["in_control"] = p1_out.empty();

  ordered_json payload;
  payload["phase1"] = std::move(phase1_json);
  if (!p1_out.empty() && !o.force) {
    payload["warning"] =
        "phase I observations fall outside the fitted limits; pass --force to "
        "proceed to phase II anyway";
    emit(envelope(manifest, std::move(payload)), o.out);
    return 3;
  }

  // Phase II monitoring: the fitted Shewhart chart plus one calibrated EWMA
  // chart per smoothing constant.
  ordered_json charts = ordered_json::array();
  {
    const uc::MonitorResult r = uc::monitor(sh, phase2);
    write_svg(svg_path("phase2_shewhart.svg"),
              {"Phase II - Shewhart (individuals)", r.statistic_path, sh.lcl, sh.cl, sh.ucl});
    ordered_json block = shewhart_json(sh);
    block["points"] = points_json(r.statistic_path, sh.lcl, sh.ucl);
    block["out_of_limits"] = out_indices(r.statistic_path, sh.lcl, sh.ucl);
    block["signal_index"] = signal_json(r);
    block["svg"] = "phase2_shewhart.svg";
    charts.push_back(std::move(block));
  }
  const uc::DesignConfig cfg = o.sim.config();
  for (const double lam : lambdas) {
    const uc::CalibrationResult cal = uc::calibrate_L(model, lam, cfg);
    const uc::EwmaChart chart = uc::ewma_limits(model, lam, cal.L);
    const uc::MonitorResult r = uc::monitor(chart, phase2);
    char name[64];
    std::snprintf(name, sizeof name, "phase2_ewma_%g.svg", lam);
    char title[96];
    std::snprintf(title, sizeof title, "Phase II - EWMA (lambda = %g, L = %.3f)", lam,
                  cal.L);
    write_svg(svg_path(name), {title, r.statistic_path, chart.lcl, chart.cl, chart.ucl});
    ordered_json block = ewma_json(chart);
    block["achieved_arl0"] = cal.achieved.arl;
    block["points"] = points_json(r.statistic_path, chart.lcl, chart.ucl);
    block["out_of_limits"] = out_indices(r.statistic_path, chart.lcl, chart.ucl);
    block["signal_index"] = signal_json(r);
    block["svg"] = name;
    charts.push_back(std::move(block));
  }
  payload["phase2"] = {{"path", o.phase2}, {"n", phase2.size()}, {"charts", std::move(charts)}};
  emit(envelope(manifest, std::move(payload)), o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// tables

struct TableCmd {
  std::string id;
  double alpha = 0.0027;
  std::string deltas_spec;
  SimFlags sim;
  std::string out;
};

ordered_json table_moments() {
  ordered_json families = ordered_json::array();
  for (const uc::Family fam : kFamilies) {
    ordered_json rows = ordered_json::array();
    for (int c = 0; c < 4; ++c) {
      const double disp = case_dispersion(fam, c);
      const uc::MomentReport mr = uc::UnitModel::make(fam, kMu0, disp).moment_report();
      rows.push_back({{"case", c + 1},
                      {"dispersion", disp},
                      {"sigma0x", mr.std_dev},
                      {"cv", mr.cv},
                      {"skewness", mr.skewness},
                      {"kurtosis", mr.ex_kurtosis_plus3}});
    }
    families.push_back({{"family", uc::family_name(fam)}, {"rows", std::move(rows)}});
  }
  ordered_json body;
  body["mu0"] = kMu0;
  body["families"] = std::move(families);
  return body;
}

ordered_json table_performance(uc::Family fam, const TableCmd& o) {
  const std::vector<double> deltas = parse_deltas(o.deltas_spec);
  const uc::DesignConfig cfg = o.sim.config();
  const std::array<double, 3> lambdas{0.05, 0.1, 0.2};

  ordered_json blocks = ordered_json::array();
  for (int c = 0; c < 4; ++c) {
    const double disp = case_dispersion(fam, c);
    const uc::UnitModel model = uc::UnitModel::make(fam, kMu0, disp);
    const uc::ShewhartChart sh = uc::shewhart_limits(model, o.alpha);
    const uc::ShiftProfile profile{kMu0, deltas, disp};

    std::array<std::vector<std::pair<double, uc::RunLengthSummary>>, 3> profiles;
    ordered_json ewma_blocks = ordered_json::array();
    for (int j = 0; j < 3; ++j) {
      const uc::CalibrationResult cal = uc::calibrate_L(model, lambdas[j], cfg);
      const uc::EwmaChart chart = uc::ewma_limits(model, lambdas[j], cal.L);
      profiles[j] = uc::ooc_profile(chart, fam, profile, cfg);
      ewma_blocks.push_back({{"lambda", lambdas[j]},
                             {"L", cal.L},
                             {"lcl", chart.lcl},
                             {"ucl", chart.ucl}});
    }

    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const double mu1 = profiles[0][i].first;
      const uc::UnitModel shifted = uc::UnitModel::make(fam, mu1, disp);
      const uc::RunLengthSummary ex =
          uc::shewhart_rl_exact(uc::p_out(shifted, sh.lcl, sh.ucl));
      ordered_json row{{"mu1", mu1}, {"delta", mu1 - kMu0}};
      row["shewhart"] = {{"arl", ex.arl}, {"sdrl", ex.sdrl}, {"mrl", ex.mrl}};
      ordered_json per_lambda = ordered_json::array();
      for (int j = 0; j < 3; ++j) per_lambda.push_back(summary_json(profiles[j][i].second));
      row["ewma"] = std::move(per_lambda);
      rows.push_back(std::move(row));
    }
    blocks.push_back({{"case", c + 1},
                      {"dispersion", disp},
                      {"shewhart", {{"alpha", o.alpha}, {"lcl", sh.lcl}, {"ucl", sh.ucl}}},
                      {"ewma", std::move(ewma_blocks)},
                      {"rows", std::move(rows)}});
  }
  ordered_json body;
  body["family"] = uc::family_name(fam);
  body["mu0"] = kMu0;
  body["blocks"] = std::move(blocks);
  return body;
}

ordered_json table_robustness(int id, const TableCmd& o) {
  const uc::Family true_fam = kFamilies[std::size_t(id - 7) / 3];
  const double lam = std::array<double, 3>{0.05, 0.1, 0.2}[std::size_t(id - 7) % 3];
  const std::vector<double> deltas = parse_deltas(o.deltas_spec);
  const uc::DesignConfig cfg = o.sim.config();

  ordered_json blocks = ordered_json::array();
  for (int c = 0; c < 4; ++c) {
    const double true_disp = case_dispersion(true_fam, c);
    const uc::ShiftProfile profile{kMu0, deltas, true_disp};

    ordered_json limits = ordered_json::array();
    std::vector<std::vector<std::pair<double, uc::RunLengthSummary>>> profiles;
    for (const uc::Family lim_fam : kFamilies) {
      const double lim_disp = case_dispersion(lim_fam, c);
      const uc::UnitModel lim_model = uc::UnitModel::make(lim_fam, kMu0, lim_disp);
      const uc::CalibrationResult cal = uc::calibrate_L(lim_model, lam, cfg);
      const uc::EwmaChart chart = uc::ewma_limits(lim_model, lam, cal.L);
      profiles.push_back(uc::ooc_profile(chart, true_fam, profile, cfg));
      limits.push_back({{"family", uc::family_name(lim_fam)},
                        {"dispersion", lim_disp},
                        {"L", cal.L},
                        {"lcl", chart.lcl},
                        {"ucl", chart.ucl}});
    }

    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      ordered_json by_limits = ordered_json::array();
      for (std::size_t j = 0; j < 3; ++j) {
        ordered_json cell{{"family", uc::family_name(kFamilies[j])}};
        cell.update(summary_json(profiles[j][i].second));
        by_limits.push_back(std::move(cell));
      }
      rows.push_back({{"mu1", profiles[0][i].first}, {"by_limits", std::move(by_limits)}});
    }
    blocks.push_back({{"case", c + 1},
                      {"true_dispersion", true_disp},
                      {"limits", std::move(limits)},
                      {"rows", std::move(rows)}});
  }
  ordered_json body;
  body["true_family"] = uc::family_name(true_fam);
  body["lambda"] = lam;
  body["mu0"] = kMu0;
  body["blocks"] = std::move(blocks);
  return body;
}

ordered_json table_multipliers(const TableCmd& o) {
  const uc::DesignConfig cfg = o.sim.config();
  const std::array<double, 3> lambdas{0.05, 0.1, 0.2};
  ordered_json families = ordered_json::array();
  for (const uc::Family fam : kFamilies) {
    ordered_json rows = ordered_json::array();
    for (int c = 0; c < 4; ++c) {
      const double disp = case_dispersion(fam, c);
      const uc::UnitModel model = uc::UnitModel::make(fam, kMu0, disp);
      for (const double lam : lambdas) {
        const uc::CalibrationResult cal = uc::calibrate_L(model, lam, cfg);
        rows.push_back({{"dispersion", disp},
                        {"lambda", lam},
                        {"L", cal.L},
                        {"achieved_arl", cal.achieved.arl},
                        {"se_arl", cal.achieved.se_arl}});
      }
    }
    families.push_back({{"family", uc::family_name(fam)}, {"rows", std::move(rows)}});
  }
  ordered_json body;
  body["mu0"] = kMu0;
  body["families"] = std::move(families);
  return body;
}

int run_tables(const TableCmd& o) {
  const std::string id = to_lower(o.id);
  if (id != "3" && o.sim.seed_opt->count() == 0)
    throw uc::DomainError("--seed is required for every table except 3");

  ordered_json body;
  if (id == "a1") {
    body = table_multipliers(o);
  } else if (!id.empty() &&
             std::all_of(id.begin(), id.end(),
                         [](unsigned char c) { return std::isdigit(c) != 0; })) {
    const int num = std::stoi(id);
    if (num == 3)
      body = table_moments();
    else if (num >= 4 && num <= 6)
      body = table_performance(kFamilies[std::size_t(num - 4)], o);
    else if (num >= 7 && num <= 15)
      body = table_robustness(num, o);
    else
      throw uc::DomainError("unknown table id: " + o.id + " (valid: 3, 4-15, a1)");
  } else {
    throw uc::DomainError("unknown table id: " + o.id + " (valid: 3, 4-15, a1)");
  }

  ordered_json config{{"id", id},
                      {"alpha", o.alpha},
                      {"deltas", parse_deltas(o.deltas_spec)}};
  config.update(o.sim.json());

  ordered_json payload;
  payload["table"] = id;
  payload.update(body);
  emit(envelope(make_manifest("tables", config, {}), std::move(payload)), o.out);
  return 0;
}

void attach_out(CLI::App* cmd, std::string& out) {
  cmd->add_option("-o,--out", out, "write the JSON report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Shewhart and EWMA control charts for processes on the open unit interval: "
      "model fitting, chart design, run-length evaluation and monitoring"};
  app.set_version_flag("--version", std::string(uc::kVersion));
  app.require_subcommand(1);

  FitCmd fit_o;
  DesignCmd des_o;
  EvalCmd ev_o;
  RobCmd rob_o;
  MonitorCmd mon_o;
  TableCmd tab_o;
  int rc = 0;

  CLI::App* fit = app.add_subcommand(
      "fit", "Fit the candidate families to a data file and test goodness of fit");
  fit->add_option("input", fit_o.input, "text file, one observation in (0,1) per line")
      ->required();
  fit->add_option("--ad-method", fit_o.ad_method, "Anderson-Darling p-value method")
      ->check(CLI::IsMember({"bootstrap", "asymptotic"}))
      ->capture_default_str();
  fit->add_option("--ad-resamples", fit_o.ad_resamples, "bootstrap resamples")
      ->capture_default_str();
  fit->add_option("--seed", fit_o.seed, "bootstrap RNG seed")->capture_default_str();
  fit->add_option("--runs-method", fit_o.runs_method, "runs-test p-value method")
      ->check(CLI::IsMember({"normal", "exact"}))
      ->capture_default_str();
  fit->add_option("--threads", fit_o.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  attach_out(fit, fit_o.out);
  fit->callback([&] { rc = run_fit(fit_o); });

  CLI::App* design = app.add_subcommand(
      "design", "Calibrate EWMA limit multipliers for an in-control model");
  des_o.model.attach(design);
  design->add_option("--lambda", des_o.lambdas,
                     "smoothing constants (default 0.05 0.1 0.2)");
  des_o.sim.attach(design, true);
  attach_out(design, des_o.out);
  design->callback([&] { rc = run_design(des_o); });

  CLI::App* ev = app.add_subcommand(
      "evaluate", "Estimate run-length performance across mean shifts");
  ev_o.model.attach(ev);
  ev->add_option("--lambda", ev_o.lambdas, "smoothing constants (default 0.05 0.1 0.2)");
  ev->add_option("--L", ev_o.l_values,
                 "fixed limit multipliers, one per lambda (skips calibration)");
  ev->add_option("--deltas", ev_o.deltas_spec,
                 "comma-separated mean shifts (default -0.08,...,0.08 in 0.02 steps)");
  ev->add_flag("--shewhart", ev_o.shewhart, "also report the exact Shewhart profile");
  ev->add_option("--alpha", ev_o.alpha, "Shewhart false-alarm probability")
      ->capture_default_str();
  ev_o.sim.attach(ev, true);
  attach_out(ev, ev_o.out);
  ev->callback([&] { rc = run_evaluate(ev_o); });

  CLI::App* rob = app.add_subcommand(
      "robustness", "Cross-model run-length study: every true/limits family pair");
  rob->add_option("--case", rob_o.case_id, "dispersion case (1-4)")
      ->required()
      ->check(CLI::Range(1, 4));
  rob->add_option("--lambda", rob_o.lambda, "smoothing constant")->required();
  rob->add_option("--deltas", rob_o.deltas_spec,
                  "comma-separated mean shifts (default -0.08,...,0.08 in 0.02 steps)");
  rob_o.sim.attach(rob, true);
  attach_out(rob, rob_o.out);
  rob->callback([&] { rc = run_robustness(rob_o); });

  CLI::App* mon = app.add_subcommand(
      "monitor", "Phase I fitting and phase II monitoring with chart renderings");
  mon->add_option("--phase1", mon_o.phase1, "phase I (calibration) data file")->required();
  mon->add_option("--phase2", mon_o.phase2, "phase II (monitoring) data file")->required();
  mon->add_option("--family", mon_o.family, "override the AIC-selected family")
      ->check(CLI::IsMember({"beta", "simplex", "unitgamma"}));
  mon->add_option("--lambda", mon_o.lambdas,
                  "EWMA smoothing constants (default 0.05 0.1 0.2)");
  mon->add_option("--alpha", mon_o.alpha, "Shewhart false-alarm probability")
      ->capture_default_str();
  mon->add_flag("--force", mon_o.force, "continue to phase II even if phase I signals");
  mon->add_option("--out-dir", mon_o.out_dir, "directory for SVG renderings")
      ->capture_default_str();
  mon_o.sim.attach(mon, true);
  attach_out(mon, mon_o.out);
  mon->callback([&] { rc = run_monitor(mon_o); });

  CLI::App* tab = app.add_subcommand("tables", "Recompute one of the built-in study tables");
  tab->add_option("--id", tab_o.id, "table id: 3, 4-15 or a1")->required();
  tab->add_option("--alpha", tab_o.alpha, "Shewhart false-alarm probability")
      ->capture_default_str();
  tab->add_option("--deltas", tab_o.deltas_spec,
                  "comma-separated mean shifts (default -0.08,...,0.08 in 0.02 steps)");
  tab_o.sim.attach(tab, false);
  attach_out(tab, tab_o.out);
  tab->callback([&] { rc = run_tables(tab_o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const uc::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const uc::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const uc::DesignError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const uc::EstimationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const uc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
  return rc;
}
