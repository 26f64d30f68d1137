// Acceptance gate: one binary, eight numbered criteria, each printing a
// single [PASS]/[FAIL] line (criterion 5 prints two, one per scenario).
// Every expected value below is a frozen reference: either a tabulated value
// from the study this library reproduces or an independently computed
// oracle. Exit status is 0 only if every requested check passes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "unitchart/unitchart.hpp"

namespace uc = unitchart;

namespace {

struct Gate {
  bool all_pass = true;

  void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) all_pass = false;
  }
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<double> load_series(const std::string& name) {
  const std::string path = std::string(UNITCHART_DATA_DIR) + "/" + name;
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "cannot open %s\n", path.c_str());
    std::exit(4);
  }
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) continue;  // header or blank
    values.push_back(v);
  }
  return values;
}

// The twelve dispersion cases: mean 0.2 throughout.
const double kPhis[4] = {290.0, 148.0, 80.0, 31.0};
const double kSigmas[4] = {0.37, 0.50, 0.71, 1.20};
const double kTaus[4] = {155.0, 96.0, 51.0, 20.0};

uc::UnitModel case_model(int family, int c) {
  switch (family) {
    case 0: return uc::UnitModel::beta(0.2, kPhis[c]);
    case 1: return uc::UnitModel::simplex(0.2, kSigmas[c]);
    default: return uc::UnitModel::unit_gamma(0.2, kTaus[c]);
  }
}

// ---------------------------------------------------------------------------
// Criterion 1: matched in-control moments.

// Reference sigma0x and CV for each family and case.
const double kSigma0x[3][4] = {
    {0.02344842, 0.03276928, 0.04444444, 0.07071068},
    {0.02355733, 0.03170082, 0.04460488, 0.07309293},
    {0.02582828, 0.03279827, 0.04493217, 0.07138937}};
const double kCv[3][4] = {{0.1172421, 0.1638464, 0.2222222, 0.3535534},
                          {0.1177866, 0.1585041, 0.2230244, 0.3654647},
                          {0.1291414, 0.1639913, 0.2246609, 0.3569468}};

void criterion1(Gate& gate) {
  double worst_sigma = 0.0, worst_cv = 0.0;
  bool ok = true;
  for (int f = 0; f < 3; ++f) {
    const double tol = f == 1 ? 2e-5 : 1e-6;
    for (int c = 0; c < 4; ++c) {
      const auto m = case_model(f, c);
      const double ds = std::fabs(m.std_dev() - kSigma0x[f][c]);
      const double dc = std::fabs(m.std_dev() / m.mean() - kCv[f][c]);
      worst_sigma = std::max(worst_sigma, ds);
      worst_cv = std::max(worst_cv, dc);
      if (ds > tol || dc > 2.0 * tol) ok = false;
    }
  }
  gate.report("criterion 1", ok,
              "matched in-control sigma0x and CV across the twelve "
              "dispersion cases (max dev sigma " +
                  fmt("%.2e", worst_sigma) + ", cv " + fmt("%.2e", worst_cv) +
                  ")");
}

// ---------------------------------------------------------------------------
// Criterion 2: exact Shewhart ARL profiles.

// Reference ARLs over mu1 = 0.12, 0.14, ..., 0.28 for each case.
const double kShArl[12][9] = {
    {1.26, 2.34, 8.04, 54.60, 370.37, 69.71, 12.26, 3.71, 1.78},
    {2.36, 5.72, 20.11, 100.51, 370.37, 129.21, 32.24, 10.61, 4.53},
    {5.11, 12.99, 40.85, 150.86, 370.37, 195.11, 67.47, 26.33, 11.93},
    {15.68, 36.30, 90.21, 220.61, 370.37, 289.82, 155.75, 81.39, 44.63},
    {1.09, 2.15, 9.34, 70.24, 370.46, 55.04, 10.52, 3.71, 1.98},
    {1.87, 5.72, 24.83, 128.23, 370.48, 90.00, 21.68, 7.94, 3.94},
    {5.94, 19.22, 64.92, 213.70, 370.35, 135.09, 42.76, 17.56, 8.93},
    {35.02, 80.59, 173.86, 332.35, 370.40, 191.01, 84.09, 41.59, 23.42},
    {1.40, 2.85, 10.00, 63.21, 370.30, 90.28, 17.82, 5.36, 2.36},
    {2.23, 5.36, 18.84, 95.63, 370.37, 138.59, 35.74, 11.80, 4.97},
    {4.85, 12.31, 38.78, 144.77, 370.37, 213.14, 78.28, 31.52, 14.37},
    {14.82, 34.21, 85.15, 210.67, 370.37, 316.76, 184.20, 102.06, 58.31}};

void criterion2(Gate& gate) {
  double worst = 0.0;
  bool ok = true;
  for (int f = 0; f < 3; ++f) {
    for (int c = 0; c < 4; ++c) {
      const auto model = case_model(f, c);
      const auto chart = uc::shewhart_limits(model, 0.0027);
      for (int s = 0; s < 9; ++s) {
        const double mu1 = 0.12 + 0.02 * s;
        const auto shifted =
            uc::UnitModel::make(model.family(), mu1, model.dispersion());
        const double arl =
            uc::shewhart_rl_exact(uc::p_out(shifted, chart.lcl, chart.ucl)).arl;
        const double ref = kShArl[f * 4 + c][s];
        const double rel = std::fabs(arl - ref) / ref;
        worst = std::max(worst, rel);
        if (rel > 0.01) ok = false;
      }
    }
  }
  gate.report("criterion 2", ok,
              "all 108 exact Shewhart ARL entries within 1% of the reference "
              "tables (max rel err " +
                  fmt("%.4f", worst * 100.0) + "%)");
}

// ---------------------------------------------------------------------------
// Criterion 3: EWMA limit calibration.

void criterion3(Gate& gate) {
  struct Cell {
    int family;
    int c;
    double lambda;
    double ref_l;
  };
  const Cell cells[6] = {{0, 0, 0.05, 2.481}, {0, 3, 0.10, 2.702},
                         {1, 1, 0.05, 2.491}, {1, 2, 0.20, 2.882},
                         {2, 1, 0.10, 2.701}, {2, 3, 0.20, 2.899}};
  uc::DesignConfig cfg;
  cfg.seed = 20240815;
  uc::DesignConfig verify;
  verify.seed = 913;
  verify.n_runs = 100000;

  double worst_dl = 0.0, worst_darl = 0.0;
  bool ok = true;
  for (const auto& cell : cells) {
    const auto model = case_model(cell.family, cell.c);
    const auto res = uc::calibrate_L(model, cell.lambda, cfg);
    const double dl = std::fabs(res.L - cell.ref_l);
    worst_dl = std::max(worst_dl, dl);
    if (dl > 0.03) ok = false;

    const auto chart = uc::ewma_limits(model, cell.lambda, res.L);
    const auto check = uc::estimate_rl(chart, model, verify);
    const double darl = std::fabs(check.arl - 370.4);
    worst_darl = std::max(worst_darl, darl);
    if (darl > 12.0) ok = false;
  }
  gate.report("criterion 3", ok,
              "six calibrated multipliers within 0.03 of the reference "
              "designs and re-verified at n=100000 (max |dL| " +
                  fmt("%.3f", worst_dl) + ", max |ARL-370.4| " +
                  fmt("%.2f", worst_darl) + ")");
}

// ---------------------------------------------------------------------------
// Criterion 4: EWMA shift profiles against two reference columns.

struct ProfileRef {
  double arl[9];
  double sdrl[9];
  double mrl[9];
};

// beta, phi = 148, lambda = 0.05.
const ProfileRef kBetaRef = {
    {5.04, 6.42, 9.46, 21.09, 370.14, 21.05, 9.55, 6.47, 5.09},
    {0.77, 1.23, 2.58, 9.89, 351.44, 10.73, 3.02, 1.56, 1.02},
    {5, 6, 9, 19, 265, 19, 9, 6, 5}};
// unit gamma, tau = 51, lambda = 0.10.
const ProfileRef kUgRef = {
    {5.67, 7.57, 12.41, 37.36, 370.64, 34.10, 12.48, 7.73, 5.80},
    {1.19, 2.16, 5.22, 27.00, 364.28, 24.84, 6.00, 2.72, 1.64},
    {5, 7, 11, 30, 260, 27, 11, 7, 6}};

bool check_profile(const uc::UnitModel& model, double lambda,
                   const ProfileRef& ref, std::string& detail) {
  uc::DesignConfig cfg;
  cfg.seed = 424242;
  const auto cal = uc::calibrate_L(model, lambda, cfg);
  const auto chart = uc::ewma_limits(model, lambda, cal.L);

  uc::ShiftProfile profile;
  profile.mu0 = 0.2;
  profile.deltas = {-0.08, -0.06, -0.04, -0.02, 0.0, 0.02, 0.04, 0.06, 0.08};
  profile.dispersion = model.dispersion();
  const auto rows = uc::ooc_profile(chart, model.family(), profile, cfg);

  bool ok = true;
  double worst_arl_rel = 0.0, worst_mrl = 0.0;
  for (int s = 0; s < 9; ++s) {
    const auto& got = rows[s].second;
    if (s == 4) {
      // In-control row: the reference itself carries Monte-Carlo noise.
      if (std::fabs(got.arl - ref.arl[4]) > 0.10 * ref.arl[4]) ok = false;
      if (std::fabs(got.mrl - ref.mrl[4]) > 22.0) ok = false;
      continue;
    }
    const double darl = std::fabs(got.arl - ref.arl[s]);
    const double allow = std::max(3.0 * got.se_arl, 0.05 * ref.arl[s]);
    worst_arl_rel = std::max(worst_arl_rel, darl / ref.arl[s]);
    if (darl > allow) ok = false;
    const double dmrl = std::fabs(got.mrl - ref.mrl[s]);
    worst_mrl = std::max(worst_mrl, dmrl);
    if (dmrl > 2.0) ok = false;
  }
  detail += " L=" + fmt("%.3f", cal.L) +
            " (max OOC ARL dev " + fmt("%.2f", worst_arl_rel * 100.0) +
            "%, max OOC MRL dev " + fmt("%.0f", worst_mrl) + ")";
  return ok;
}

void criterion4(Gate& gate) {
  std::string detail = "shift profiles match both reference columns:";
  const bool a =
      check_profile(uc::UnitModel::beta(0.2, 148.0), 0.05, kBetaRef, detail);
  const bool b =
      check_profile(uc::UnitModel::unit_gamma(0.2, 51.0), 0.10, kUgRef, detail);
  gate.report("criterion 4", a && b, detail);
}

// ---------------------------------------------------------------------------
// Criterion 5: cross-model robustness spot checks.

void criterion5(Gate& gate) {
  uc::DesignConfig cfg;
  cfg.seed = 515151;

  // 5a: chart calibrated for unit gamma(0.2, 155), data from beta(0.2, 290),
  // no shift. Reference in-control ARL: 564.09.
  {
    const auto limits_model = uc::UnitModel::unit_gamma(0.2, 155.0);
    const auto cal = uc::calibrate_L(limits_model, 0.05, cfg);
    const auto chart = uc::ewma_limits(limits_model, 0.05, cal.L);
    const auto truth = uc::UnitModel::beta(0.2, 290.0);
    const auto got = uc::estimate_rl(chart, truth, cfg);
    const bool ok = std::fabs(got.arl - 564.09) <= 0.10 * 564.09;
    gate.report("criterion 5a", ok,
                "unit-gamma-limits chart on beta data, in-control ARL vs "
                "reference 564.09 +/- 10% (measured " +
                    fmt("%.2f", got.arl) + ", se " + fmt("%.2f", got.se_arl) +
                    "); the reference entry is inconsistent with its own "
                    "tabulated limits, see README");
  }

  // 5b: simplex dispersion case 4, lambda 0.20: a -0.02 mean shift raises
  // the ARL above its in-control level. Reference shifted ARL: 546.56.
  {
    const auto model = uc::UnitModel::simplex(0.2, 1.2);
    const auto cal = uc::calibrate_L(model, 0.20, cfg);
    const auto chart = uc::ewma_limits(model, 0.20, cal.L);

    const auto shifted = uc::UnitModel::simplex(0.18, 1.2);
    const auto got = uc::estimate_rl(chart, shifted, cfg);
    const auto ic = uc::estimate_rl(chart, model, cfg);
    const bool in_band = std::fabs(got.arl - 546.56) <= 0.10 * 546.56;
    const bool slower = got.arl > ic.arl;
    gate.report("criterion 5b", in_band && slower,
                "simplex case-4 chart, ARL at mu1=0.18 vs reference 546.56 "
                "+/- 10% and above the in-control level (measured " +
                    fmt("%.2f", got.arl) + " vs IC " + fmt("%.2f", ic.arl) +
                    ")");
  }
}

// ---------------------------------------------------------------------------
// Criterion 6: phase I estimation and goodness of fit.

void criterion6(Gate& gate) {
  const auto data = load_series("peanuts_phase1.txt");
  bool ok = data.size() == 20;

  const auto beta = uc::fit_mle(uc::Family::beta, data);
  const auto simplex = uc::fit_mle(uc::Family::simplex, data);
  const auto ug = uc::fit_mle(uc::Family::unit_gamma, data);

  // Means and dispersions against the reported estimates.
  ok = ok && std::fabs(beta.estimates[0] - 0.9533) <= 1e-3;
  ok = ok && std::fabs(simplex.estimates[0] - 0.9534) <= 1e-3;
  ok = ok && std::fabs(ug.estimates[0] - 0.9534) <= 1e-3;
  ok = ok && std::fabs(beta.estimates[1] - 48.9438) <= 0.005 * 48.9438;
  ok = ok && std::fabs(simplex.estimates[1] - 3.5742) <= 0.005 * 3.5742;
  ok = ok && std::fabs(ug.estimates[1] - 2.2798) <= 0.005 * 2.2798;

  // Information criteria.
  ok = ok && std::fabs(beta.aic - (-85.455)) <= 0.02;
  ok = ok && std::fabs(beta.bic - (-83.464)) <= 0.02;
  ok = ok && std::fabs(simplex.aic - (-88.653)) <= 0.02;
  ok = ok && std::fabs(simplex.bic - (-86.662)) <= 0.02;
  ok = ok && std::fabs(ug.aic - (-85.455)) <= 0.02;
  ok = ok && std::fabs(ug.bic - (-83.463)) <= 0.02;

  // KS statistics evaluated at the reported (rounded) estimates.
  const double ks_beta =
      uc::ks_test(data, uc::UnitModel::beta(0.9533, 48.9438)).stat;
  const double ks_simplex =
      uc::ks_test(data, uc::UnitModel::simplex(0.9534, 3.5742)).stat;
  const double ks_ug =
      uc::ks_test(data, uc::UnitModel::unit_gamma(0.9534, 2.2798)).stat;
  ok = ok && std::fabs(ks_beta - 0.1624) <= 1e-3;
  ok = ok && std::fabs(ks_simplex - 0.1310) <= 1e-3;
  ok = ok && std::fabs(ks_ug - 0.1603) <= 1e-3;

  // AD statistics at the fitted estimates.
  uc::AdOptions fast;
  fast.method = uc::AdMethod::asymptotic;
  const double ad_beta =
      uc::ad_test(data, uc::UnitModel::beta(beta.estimates[0], beta.estimates[1]),
                  fast)
          .stat;
  const double ad_simplex =
      uc::ad_test(data,
                  uc::UnitModel::simplex(simplex.estimates[0], simplex.estimates[1]),
                  fast)
          .stat;
  const double ad_ug =
      uc::ad_test(data,
                  uc::UnitModel::unit_gamma(ug.estimates[0], ug.estimates[1]),
                  fast)
          .stat;
  ok = ok && std::fabs(ad_beta - 0.4970) <= 1e-3;
  ok = ok && std::fabs(ad_simplex - 0.2397) <= 1e-3;
  ok = ok && std::fabs(ad_ug - 0.4966) <= 1e-3;

  // Runs test (normal approximation) and the AIC ranking.
  const auto runs = uc::runs_test(data);
  ok = ok && std::fabs(runs.pvalue - 0.3581) <= 5e-4;
  const auto ranked = uc::select_model({beta, simplex, ug});
  ok = ok && ranked.front().family == uc::Family::simplex;

  gate.report("criterion 6", ok,
              "phase I estimates, information criteria, GoF statistics and "
              "runs test match the worked-example report (simplex selected)");
}

// ---------------------------------------------------------------------------
// Criterion 7: two-phase monitoring pipeline.

void criterion7(Gate& gate) {
  const auto phase1 = load_series("peanuts_phase1.txt");
  const auto phase2 = load_series("peanuts_phase2.txt");
  bool ok = phase1.size() == 20 && phase2.size() == 14;

  const auto fits = std::vector<uc::FitReport>{
      uc::fit_mle(uc::Family::beta, phase1),
      uc::fit_mle(uc::Family::simplex, phase1),
      uc::fit_mle(uc::Family::unit_gamma, phase1)};
  const auto ranked = uc::select_model(fits);
  ok = ok && ranked.front().family == uc::Family::simplex;

  const auto model = uc::UnitModel::simplex(ranked.front().estimates[0],
                                            ranked.front().estimates[1]);
  const auto sh = uc::shewhart_limits(model, 0.0027);
  ok = ok && std::fabs(sh.lcl - 0.7794) <= 5e-4;
  ok = ok && std::fabs(sh.ucl - 0.9936) <= 5e-4;

  const auto p1 = uc::monitor(sh, phase1);
  ok = ok && !p1.signaled;

  const auto p2_sh = uc::monitor(sh, phase2);
  ok = ok && p2_sh.signaled && p2_sh.signal_index &&
       *p2_sh.signal_index == 12;

  uc::DesignConfig cfg;
  cfg.seed = 777777;
  const double lambdas[3] = {0.05, 0.1, 0.2};
  const std::size_t expect[3] = {5, 5, 4};
  std::string ls;
  for (int i = 0; i < 3; ++i) {
    const auto cal = uc::calibrate_L(model, lambdas[i], cfg);
    const auto chart = uc::ewma_limits(model, lambdas[i], cal.L);
    const auto r = uc::monitor(chart, phase2);
    ok = ok && r.signaled && r.signal_index && *r.signal_index == expect[i];
    ls += (i ? "/" : " L=") + fmt("%.3f", cal.L);
  }

  gate.report("criterion 7", ok,
              "two-phase pipeline: limits (0.7794, 0.9936), clean phase I, "
              "phase II signals at 12 (Shewhart) and 5/5/4 (EWMA)" + ls);
}

// ---------------------------------------------------------------------------
// Criterion 8: structural properties.

void criterion8(Gate& gate) {
  bool ok = true;

  // Densities normalize and quantiles invert the cdf.
  for (int f = 0; f < 3; ++f) {
    for (int c = 0; c < 4; ++c) {
      const auto m = case_model(f, c);
      const double total = uc::quad(
          [&m](double x) { return m.pdf(x); }, 1e-12, 1.0 - 1e-12,
          {1e-10, 1e-10, 4000});
      if (std::fabs(total - 1.0) > 1e-8) ok = false;
      for (double p : {0.00135, 0.1, 0.5, 0.9, 0.99865}) {
        if (std::fabs(m.cdf(m.quantile(p)) - p) > 1e-7) ok = false;
      }
    }
  }

  // A lambda = 1 EWMA chart is the Shewhart chart on the same limits.
  {
    const auto m = uc::UnitModel::beta(0.2, 148.0);
    uc::RngStream rng(2024, 0);
    std::vector<double> series(100);
    for (auto& x : series) x = m.sample(rng);

    uc::EwmaChart e;
    e.lambda = 1.0;
    e.L = 2.0;
    e.lcl = 0.15;
    e.ucl = 0.25;
    e.cl = 0.2;
    e.sigma0x = m.std_dev();
    uc::ShewhartChart s;
    s.lcl = 0.15;
    s.ucl = 0.25;
    s.cl = 0.2;
    s.alpha = 0.0027;
    const auto re = uc::monitor(e, series);
    const auto rs = uc::monitor(s, series);
    if (re.statistic_path != rs.statistic_path) ok = false;
    if (re.signal_index != rs.signal_index) ok = false;
  }

  // Shewhart Monte Carlo agrees with the geometric law.
  {
    const auto m = uc::UnitModel::beta(0.2, 148.0);
    const auto chart = uc::shewhart_limits(m, 0.0027);
    uc::DesignConfig cfg;
    cfg.seed = 99;
    cfg.n_runs = 100000;
    const auto mc = uc::estimate_rl(chart, m, cfg);
    if (std::fabs(mc.arl - 370.37) > 3.0 * mc.se_arl) ok = false;
  }

  // Fixed-seed sampler KS checks.
  {
    const uc::UnitModel models[3] = {uc::UnitModel::beta(0.2, 148.0),
                                     uc::UnitModel::simplex(0.2, 0.5),
                                     uc::UnitModel::unit_gamma(0.2, 96.0)};
    for (int i = 0; i < 3; ++i) {
      uc::RngStream rng(9001 + i, 0);
      const int n = 4000;
      std::vector<double> xs(n);
      for (auto& x : xs) x = models[i].sample(rng);
      std::sort(xs.begin(), xs.end());
      double d = 0.0;
      for (int k = 0; k < n; ++k) {
        const double fv = models[i].cdf(xs[k]);
        d = std::max(d, std::fabs(fv - (k + 1.0) / n));
        d = std::max(d, std::fabs(fv - static_cast<double>(k) / n));
      }
      if (std::sqrt(static_cast<double>(n)) * d >= 1.63) ok = false;
    }
  }

  // Worker invariance.
  {
    const auto m = uc::UnitModel::beta(0.2, 290.0);
    const auto chart = uc::ewma_limits(m, 0.05, 2.5);
    uc::DesignConfig cfg;
    cfg.n_runs = 4000;
    cfg.seed = 4321;
    cfg.threads = 1;
    const auto one = uc::estimate_rl(chart, m, cfg);
    cfg.threads = 4;
    const auto four = uc::estimate_rl(chart, m, cfg);
    if (one.arl != four.arl || one.sdrl != four.sdrl || one.mrl != four.mrl)
      ok = false;
  }

  gate.report("criterion 8", ok,
              "normalization, quantile round trips, lambda=1 reduction, "
              "geometric agreement, sampler KS and worker invariance");
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;  // 0 = all
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which = std::atoi(argv[++i]);
    }
  }

  Gate gate;
  if (which == 0 || which == 1) criterion1(gate);
  if (which == 0 || which == 2) criterion2(gate);
  if (which == 0 || which == 3) criterion3(gate);
  if (which == 0 || which == 4) criterion4(gate);
  if (which == 0 || which == 5) criterion5(gate);
  if (which == 0 || which == 6) criterion6(gate);
  if (which == 0 || which == 7) criterion7(gate);
  if (which == 0 || which == 8) criterion8(gate);
  return gate.all_pass ? 0 : 1;
}
