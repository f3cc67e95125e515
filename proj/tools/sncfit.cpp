// Command-line front end: simulate / fit / replicate / density.
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snc/copula.hpp"
#include "snc/correlation.hpp"
#include "snc/dataset.hpp"
#include "snc/mcem.hpp"
#include "snc/model.hpp"
#include "snc/rng.hpp"
#include "snc/simgen.hpp"

using nlohmann::json;

namespace {

constexpr int kExitWriteError = 2;
constexpr int kExitUsage = 64;
constexpr int kExitDataError = 65;
constexpr int kExitNoInput = 66;

struct TimeTransform {
  double offset = 0.0;  // applied before scaling: (t + offset) * scale
  double scale = 1.0;
};

// Affine time specs like "t", "(t-5)/10", "(t+2)*0.1", "t/10".
TimeTransform parse_time_transform(const std::string& spec) {
  std::string s;
  for (char c : spec)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  static const std::regex re(
      R"(^\(?t(?:([+-])([0-9.eE+-]+))?\)?(?:([*/])([0-9.eE+-]+))?$)");
  std::smatch m;
  if (!std::regex_match(s, m, re))
    throw std::runtime_error("cannot parse time transform '" + spec +
                             "' (expected forms like \"(t-5)/10\")");
  TimeTransform tt;
  if (m[1].matched)
    tt.offset = (m[1].str() == "-" ? -1.0 : 1.0) * std::stod(m[2].str());
  if (m[3].matched) {
    const double k = std::stod(m[4].str());
    if (k == 0.0 && m[3].str() == "/")
      throw std::runtime_error("time transform divides by zero");
    tt.scale = m[3].str() == "/" ? 1.0 / k : k;
  }
  return tt;
}

struct Formula {
  std::vector<std::string> csv_covariates;  // columns taken from the file
  bool use_time = false;                    // append the time column as covariate
};

Formula parse_formula(const std::string& text) {
  const auto tilde = text.find('~');
  if (tilde == std::string::npos)
    throw std::runtime_error("formula needs the form \"y ~ x1 + x2\"");
  auto trim = [](std::string v) {
    const auto a = v.find_first_not_of(" \t");
    const auto b = v.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
  };
  if (trim(text.substr(0, tilde)) != "y")
    throw std::runtime_error("formula response must be y");
  Formula f;
  std::stringstream rhs(text.substr(tilde + 1));
  std::string term;
  while (std::getline(rhs, term, '+')) {
    term = trim(term);
    if (term.empty() || term == "1") continue;
    if (term == "time")
      f.use_time = true;
    else
      f.csv_covariates.push_back(term);
  }
  return f;
}

void append_time_covariate(snc::LongitudinalDataset* data, const TimeTransform& tt) {
  for (auto& unit : data->units) {
    Eigen::MatrixXd X(unit.X.rows(), unit.X.cols() + 1);
    X.leftCols(unit.X.cols()) = unit.X;
    X.col(unit.X.cols()) = (unit.times.array() + tt.offset) * tt.scale;
    unit.X = std::move(X);
  }
  data->covariate_names.push_back("time");
}

snc::MarginalSpec marginal_from_flags(const std::string& name, double shape) {
  snc::MarginalSpec spec;
  if (name == "exponential") {
    spec.family = snc::Family::exponential;
  } else if (name == "gamma") {
    spec.family = snc::Family::gamma;
    spec.shape = shape;
  } else {
    throw std::runtime_error("unknown marginal '" + name + "'");
  }
  spec.validate();
  return spec;
}

snc::McemConfig config_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j = json::parse(in);
  snc::McemConfig c;
  c.r_init = j.value("r_init", c.r_init);
  c.r_growth = j.value("r_growth", c.r_growth);
  c.r_max = j.value("r_max", c.r_max);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.warmup_iters = j.value("warmup_iters", c.warmup_iters);
  c.rel_tol = j.value("rel_tol", c.rel_tol);
  c.restarts = j.value("restarts", c.restarts);
  c.xi_floor = j.value("xi_floor", c.xi_floor);
  c.xi_max = j.value("xi_max", c.xi_max);
  c.lambda_cap = j.value("lambda_cap", c.lambda_cap);
  c.mstep_draw_cap = j.value("mstep_draw_cap", c.mstep_draw_cap);
  c.validate();
  return c;
}

// Fast-converging defaults for the replicate harness; single fits use the
// library defaults unless a config file overrides them.
snc::McemConfig replicate_config() {
  snc::McemConfig c;
  c.r_init = 60;
  c.r_growth = 1.25;
  c.r_max = 500;
  c.burn_in = 150;
  c.max_iter = 60;
  c.rel_tol = 0.02;
  c.restarts = 1;
  return c;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(kExitWriteError);
  }
  return out;
}

json truth_to_json(const snc::DesignSpec& spec) {
  const auto& t = spec.truth;
  json j;
  j["design"] = spec.design == snc::Design::univariate ? "univariate" : "bivariate";
  j["m"] = spec.m;
  j["n_per_unit"] = spec.n_per_unit;
  j["seed"] = spec.seed;
  j["beta"] = std::vector<double>(t.beta.data(), t.beta.data() + t.beta.size());
  j["omega_b"] = t.omega_b;
  j["xi"] = t.xi;
  j["lambda"] = t.lambda;
  j["marginal"] = t.marginal.family == snc::Family::gamma ? "gamma" : "exponential";
  j["shape"] = t.marginal.shape;
  j["e_alpha_plus_b"] = t.beta[0];
  j["var_alpha_plus_b"] = t.omega_b;
  return j;
}

json fit_to_json(const snc::FitResult& fr, const snc::LongitudinalDataset& data,
                 const Formula& formula, const TimeTransform& tt,
                 const std::string& marginal_name, bool freeze_lambda) {
  const auto& p = fr.params;
  const double nll = -snc::observed_loglik(data, p);
  const int n_params =
      static_cast<int>(p.beta.size()) + (freeze_lambda ? 2 : 3);
  const Eigen::MatrixXd corr =
      snc::build_ar_corr(p.xi, data.units.front().times);

  json j;
  j["beta"] = std::vector<double>(p.beta.data(), p.beta.data() + p.beta.size());
  j["se_beta"] = std::vector<double>(fr.se_beta.data(),
                                     fr.se_beta.data() + fr.se_beta.size());
  j["e_alpha_plus_b"] = fr.e_alpha_plus_b;
  j["var_alpha_plus_b"] = fr.var_alpha_plus_b;
  j["xi"] = p.xi;
  j["lambda_bar"] = p.lambda;
  j["neg_loglik"] = nll;
  j["aic"] = 2.0 * n_params + 2.0 * nll;
  j["bic"] = std::log(static_cast<double>(data.total_obs())) * n_params + 2.0 * nll;
  j["converged"] = fr.converged;
  j["iterations"] = fr.iterations;
  std::vector<std::vector<double>> cm(corr.rows());
  for (Eigen::Index r = 0; r < corr.rows(); ++r)
    cm[r].assign(corr.row(r).begin(), corr.row(r).end());
  j["corr_matrix"] = cm;
  // replay metadata (consumed by the density command)
  j["covariate_names"] = data.covariate_names;
  j["csv_covariates"] = formula.csv_covariates;
  j["use_time"] = formula.use_time;
  j["time_offset"] = tt.offset;
  j["time_scale"] = tt.scale;
  j["marginal"] = marginal_name;
  j["shape"] = p.marginal.shape;
  j["omega_b"] = p.omega_b;
  j["warnings"] = fr.warnings;
  j["loglik_trace"] = fr.loglik_trace;
  return j;
}

void print_fit_table(const snc::FitResult& fr,
                     const std::vector<std::string>& names) {
  std::printf("%-14s %12s %12s\n", "parameter", "estimate", "se");
  for (Eigen::Index i = 0; i < fr.params.beta.size(); ++i)
    std::printf("%-14s %12.5f %12.5f\n", names[i].c_str(), fr.params.beta[i],
                fr.se_beta[i]);
  std::printf("%-14s %12.5f %12s\n", "Var[alpha+b]", fr.var_alpha_plus_b, "-");
  std::printf("%-14s %12.5f %12s\n", "xi", fr.params.xi, "-");
  std::printf("%-14s %12.5f %12s\n", "lambda_bar", fr.params.lambda, "-");
  std::printf("converged=%s iterations=%d\n", fr.converged ? "yes" : "no",
              fr.iterations);
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const std::string& design, const std::string& marginal,
                 double shape, int m, int n_per_unit, std::uint64_t seed,
                 const std::string& out_path) {
  snc::DesignSpec spec;
  spec.design = design == "bivariate" ? snc::Design::bivariate
                                      : snc::Design::univariate;
  spec.m = m;
  spec.n_per_unit = n_per_unit;
  spec.seed = seed;
  const snc::MarginalSpec ms = marginal_from_flags(marginal, shape);
  spec.truth = spec.design == snc::Design::univariate
                   ? snc::default_univariate_truth(ms)
                   : snc::default_bivariate_truth(ms);
  const snc::SimulatedData sim = snc::generate(spec);

  try {
    snc::write_dataset_csv(out_path, sim.data);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitWriteError;
  }
  auto truth = open_output(out_path + ".truth.json");
  truth << truth_to_json(spec).dump(2) << "\n";
  std::cout << "wrote " << sim.data.total_obs() << " rows to " << out_path
            << "\n";
  return 0;
}

// ---- fit ------------------------------------------------------------------

struct FitInputs {
  snc::LongitudinalDataset data;
  Formula formula;
  TimeTransform tt;
  snc::MarginalSpec marginal;
};

FitInputs load_fit_inputs(const std::string& data_path, const std::string& formula,
                          const std::string& time_transform,
                          const std::string& marginal, double shape) {
  FitInputs in;
  in.formula = parse_formula(formula);
  in.marginal = marginal_from_flags(marginal, shape);
  in.data = snc::read_dataset_csv(data_path, in.formula.csv_covariates, true);
  if (in.formula.use_time) {
    in.tt = time_transform.empty() ? TimeTransform{}
                                   : parse_time_transform(time_transform);
    append_time_covariate(&in.data, in.tt);
  }
  return in;
}

// Moment-based starting values: least squares of log y on X with the
// log-family bias correction for beta, between-unit variance of the mean
// residual for omega. Cuts the long beta/omega transient that flat inits
// produce under heavy prior shrinkage.
snc::ModelParams default_initial(const snc::LongitudinalDataset& data,
                                 const snc::MarginalSpec& marginal) {
  const Eigen::Index p = data.n_covariates();
  const Eigen::Index total = data.total_obs();
  Eigen::MatrixXd X(total, p);
  Eigen::VectorXd ly(total);
  Eigen::Index row = 0;
  for (const auto& unit : data.units)
    for (Eigen::Index j = 0; j < unit.n(); ++j, ++row) {
      X.row(row) = unit.X.row(j);
      ly[row] = std::log(unit.y[j]);
    }
  // E[log y] = eta + c and Var[log y | eta] = s2 for the log-link families
  double c, s2;
  if (marginal.family == snc::Family::exponential) {
    c = -0.57721566490153286;
    s2 = 1.6449340668482264;
  } else {
    const double k = marginal.shape;
    c = std::log(k) - 1.0 / (2.0 * k) - 1.0 / (12.0 * k * k);  // digamma(k)
    c -= std::log(k);
    s2 = 1.0 / k + 1.0 / (2.0 * k * k);  // trigamma(k), asymptotic
  }
  snc::ModelParams init;
  init.beta = Eigen::VectorXd(X.colPivHouseholderQr().solve(ly));
  init.beta[0] -= c;
  double var_means = 0.0, mean_n = 0.0;
  row = 0;
  for (const auto& unit : data.units) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < unit.n(); ++j, ++row)
      acc += ly[row] - X.row(row).dot(init.beta) - c;
    var_means += (acc / unit.n()) * (acc / unit.n());
    mean_n += static_cast<double>(unit.n());
  }
  var_means /= static_cast<double>(data.units.size());
  mean_n /= static_cast<double>(data.units.size());
  init.omega_b = std::max(var_means - s2 / mean_n, 0.3);
  init.xi = 0.1;
  init.lambda = 1.0;
  init.marginal = marginal;
  return init;
}

int cmd_fit(const std::string& data_path, const std::string& formula,
            const std::string& time_transform, const std::string& marginal,
            double shape, const std::string& config_path,
            const std::string& copula, std::uint64_t seed,
            const std::string& out_path) {
  FitInputs in;
  try {
    in = load_fit_inputs(data_path, formula, time_transform, marginal, shape);
  } catch (const snc::CsvError& ex) {
    std::cerr << "error: " << ex.message << " (row " << ex.row << ")\n";
    return kExitDataError;
  }
  snc::McemConfig cfg =
      config_path.empty() ? replicate_config() : config_from_json(config_path);
  cfg.freeze_lambda = copula == "normal";

  const snc::ModelParams init = default_initial(in.data, in.marginal);
  const snc::FitResult fr = snc::fit(in.data, init, cfg, seed);

  auto out = open_output(out_path);
  out << fit_to_json(fr, in.data, in.formula, in.tt, marginal,
                     cfg.freeze_lambda)
             .dump(2)
      << "\n";
  print_fit_table(fr, in.data.covariate_names);
  return 0;
}

// ---- replicate ------------------------------------------------------------

struct TableRow {
  std::string name;
  double truth = 0.0;
  int beta_index = -1;  // >= 0: EC from the fisher SE
};

struct TableLayout {
  snc::DesignSpec spec;
  std::string formula;
  std::vector<TableRow> rows;
};

TableLayout table_layout(int table) {
  TableLayout t;
  if (table == 1) {
    t.spec.design = snc::Design::univariate;
    t.spec.truth = snc::default_univariate_truth({snc::Family::exponential, 1.0});
    t.formula = "y ~ 1";
    t.rows = {{"E[alpha+b]", 3.0, -1},
              {"Var[alpha+b]", 2.0, -1},
              {"xi", 0.2, -1},
              {"lambda_bar", 1.0, -1}};
    return t;
  }
  t.spec.design = snc::Design::bivariate;
  const snc::MarginalSpec ms = table == 3
                                   ? snc::MarginalSpec{snc::Family::gamma, 3.0}
                                   : snc::MarginalSpec{snc::Family::exponential, 1.0};
  t.spec.truth = snc::default_bivariate_truth(ms);
  t.formula = "y ~ t + zeta";
  t.rows = {{"beta1", 2.0, 1},       {"beta2", 1.0, 2},
            {"E[alpha+b]", 1.0, -1}, {"Var[alpha+b]", 4.0, -1},
            {"xi", 0.2, -1},         {"lambda_bar", 1.0, -1}};
  return t;
}

struct ReplicateOutcome {
  bool ok = false;
  bool converged = false;
  std::string error;
  std::vector<double> values;    // one per table row
  std::vector<int> covered;      // EC indicator per row, -1 when undefined
};

ReplicateOutcome run_replicate(const TableLayout& layout, std::uint64_t seed,
                               int index, const snc::McemConfig& cfg) {
  ReplicateOutcome out;
  try {
    snc::DesignSpec spec = layout.spec;
    spec.seed = snc::Rng::derive(seed, 0xA000 + index);
    const snc::SimulatedData sim = snc::generate(spec);
    const snc::ModelParams init =
        default_initial(sim.data, spec.truth.marginal);
    const snc::FitResult fr =
        snc::fit(sim.data, init, cfg, snc::Rng::derive(seed, 0xB000 + index));
    out.converged = fr.converged;
    for (const TableRow& row : layout.rows) {
      double v;
      int cov = -1;
      if (row.beta_index >= 0) {
        v = fr.params.beta[row.beta_index];
        const double half = 1.959963984540054 * fr.se_beta[row.beta_index];
        cov = (row.truth >= v - half && row.truth <= v + half) ? 1 : 0;
      } else if (row.name == "E[alpha+b]") {
        v = fr.e_alpha_plus_b;
      } else if (row.name == "Var[alpha+b]") {
        v = fr.var_alpha_plus_b;
      } else if (row.name == "xi") {
        v = fr.params.xi;
      } else {
        v = fr.params.lambda;
      }
      out.values.push_back(v);
      out.covered.push_back(cov);
    }
    out.ok = true;
  } catch (const std::exception& ex) {
    out.error = ex.what();
  }
  return out;
}

int cmd_replicate(int table, int replicates, const std::string& copula,
                  const std::string& config_path, std::uint64_t seed,
                  int jobs, const std::string& out_path) {
  const TableLayout layout = table_layout(table);
  snc::McemConfig cfg =
      config_path.empty() ? replicate_config() : config_from_json(config_path);
  cfg.freeze_lambda = copula == "normal";

  std::vector<ReplicateOutcome> results(replicates);
  std::atomic<int> next{0};
  const int workers = std::max(1, std::min(jobs, replicates));
  auto worker = [&] {
    for (int r = next.fetch_add(1); r < replicates; r = next.fetch_add(1))
      results[r] = run_replicate(layout, seed, r, cfg);
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  auto out = open_output(out_path);
  out << "parameter,truth,mc_mean,mc_sd,mse,ec\n";
  int n_ok = 0, n_conv = 0;
  for (const auto& res : results) {
    if (res.ok) ++n_ok;
    if (res.converged) ++n_conv;
    if (!res.ok) std::cerr << "replicate failed: " << res.error << "\n";
  }
  for (std::size_t k = 0; k < layout.rows.size(); ++k) {
    double sum = 0.0, sq = 0.0, mse = 0.0;
    int cov_hits = 0, cov_total = 0;
    for (const auto& res : results) {
      if (!res.ok) continue;
      const double v = res.values[k];
      sum += v;
      sq += v * v;
      mse += (v - layout.rows[k].truth) * (v - layout.rows[k].truth);
      if (res.covered[k] >= 0) {
        ++cov_total;
        cov_hits += res.covered[k];
      }
    }
    const double mean = n_ok > 0 ? sum / n_ok : std::nan("");
    const bool sd_defined = n_ok > 1;
    const double sd = sd_defined
                          ? std::sqrt(std::max(0.0, (sq - n_ok * mean * mean) /
                                                        (n_ok - 1)))
                          : 0.0;
    out << layout.rows[k].name << "," << layout.rows[k].truth << "," << mean
        << ",";
    if (sd_defined) out << sd;
    out << "," << (n_ok > 0 ? mse / n_ok : std::nan("")) << ",";
    if (cov_total > 0) out << static_cast<double>(cov_hits) / cov_total;
    out << "\n";
    std::printf("%-14s truth=%.4f mean=%.4f", layout.rows[k].name.c_str(),
                layout.rows[k].truth, mean);
    if (sd_defined) std::printf(" sd=%.4f", sd);
    std::printf("\n");
  }
  std::printf("%d/%d replicates completed, %d converged\n", n_ok, replicates,
              n_conv);
  return n_ok > 0 ? 0 : 1;
}

// ---- density --------------------------------------------------------------

// Gaussian mixture over the random intercept, Simpson's rule on +-6 sd.
double mixture_density(double y, const snc::LongitudinalDataset& data,
                       const Eigen::VectorXd& beta, double omega,
                       const snc::MarginalSpec& marginal) {
  const int nodes = 121;
  const double sd = std::sqrt(omega);
  const double lo = -6.0 * sd, hi = 6.0 * sd;
  const double h = (hi - lo) / (nodes - 1);
  double total = 0.0;
  long n_obs = 0;
  for (const auto& unit : data.units) n_obs += unit.n();
  for (int k = 0; k < nodes; ++k) {
    const double b = lo + k * h;
    const double w = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double phi = snc::norm_pdf(b / sd) / sd;
    double mix = 0.0;
    for (const auto& unit : data.units)
      for (Eigen::Index j = 0; j < unit.n(); ++j)
        mix += snc::marginal_pdf(y, {unit.X.row(j).dot(beta) + b}, marginal);
    total += w * phi * mix / static_cast<double>(n_obs);
  }
  return total * h / 3.0;
}

int cmd_density(const std::string& fit_path, const std::string& data_path,
                const std::string& truth_path, const std::string& grid_spec,
                const std::string& out_path) {
  std::ifstream fit_in(fit_path);
  if (!fit_in) {
    std::cerr << "error: cannot open fit file " << fit_path << "\n";
    return kExitNoInput;
  }
  const json fj = json::parse(fit_in);

  double lo, hi;
  int steps;
  if (std::sscanf(grid_spec.c_str(), "%lf:%lf:%d", &lo, &hi, &steps) != 3 ||
      steps < 2 || hi <= lo) {
    std::cerr << "error: --grid must be lo:hi:steps\n";
    return kExitUsage;
  }

  Formula formula;
  formula.csv_covariates = fj.at("csv_covariates").get<std::vector<std::string>>();
  formula.use_time = fj.value("use_time", false);
  TimeTransform tt{fj.value("time_offset", 0.0), fj.value("time_scale", 1.0)};
  const snc::MarginalSpec marginal = marginal_from_flags(
      fj.value("marginal", "exponential"), fj.value("shape", 1.0));

  snc::LongitudinalDataset data;
  try {
    data = snc::read_dataset_csv(data_path, formula.csv_covariates, true);
  } catch (const snc::CsvError& ex) {
    std::cerr << "error: " << ex.message << " (row " << ex.row << ")\n";
    return kExitDataError;
  }
  if (formula.use_time) append_time_covariate(&data, tt);

  const std::vector<double> beta_v = fj.at("beta").get<std::vector<double>>();
  const Eigen::VectorXd beta =
      Eigen::Map<const Eigen::VectorXd>(beta_v.data(), beta_v.size());
  const double omega = fj.at("var_alpha_plus_b").get<double>();

  std::optional<Eigen::VectorXd> beta_true;
  double omega_true = 0.0;
  if (!truth_path.empty()) {
    std::ifstream tin(truth_path);
    if (!tin) {
      std::cerr << "error: cannot open truth file " << truth_path << "\n";
      return kExitNoInput;
    }
    const json tj = json::parse(tin);
    const std::vector<double> tb = tj.at("beta").get<std::vector<double>>();
    beta_true = Eigen::Map<const Eigen::VectorXd>(tb.data(), tb.size());
    omega_true = tj.at("omega_b").get<double>();
  }

  auto out = open_output(out_path);
  out << "log_y,density_fit";
  if (beta_true) out << ",density_true";
  out << "\n";
  out.precision(12);
  const double h = (hi - lo) / (steps - 1);
  for (int k = 0; k < steps; ++k) {
    const double w = lo + k * h;
    const double y = std::exp(w);
    // density of log Y: f_Y(e^w) e^w
    out << w << "," << mixture_density(y, data, beta, omega, marginal) * y;
    if (beta_true)
      out << ","
          << mixture_density(y, data, *beta_true, omega_true, marginal) * y;
    out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skew-normal copula GLMM toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic panel");
  std::string design = "univariate", marginal = "exponential", out_path;
  double shape = 1.0;
  int m = 200, n_per_unit = 5;
  std::uint64_t seed = 1;
  sim->add_option("--design", design)->check(CLI::IsMember({"univariate", "bivariate"}));
  sim->add_option("--marginal", marginal)->check(CLI::IsMember({"exponential", "gamma"}));
  sim->add_option("--shape", shape);
  sim->add_option("--units", m);
  sim->add_option("--n-per-unit", n_per_unit);
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_path)->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit the copula GLMM to a CSV panel");
  std::string data_path, formula = "y ~ 1", time_transform, config_path;
  std::string copula = "skewnormal", fit_out;
  std::string fit_marginal = "exponential";
  double fit_shape = 1.0;
  std::uint64_t fit_seed = 1;
  fit->add_option("--data", data_path)->required();
  fit->add_option("--formula", formula);
  fit->add_option("--time-transform", time_transform);
  fit->add_option("--marginal", fit_marginal)->check(CLI::IsMember({"exponential", "gamma"}));
  fit->add_option("--shape", fit_shape);
  fit->add_option("--config", config_path);
  fit->add_option("--copula", copula)->check(CLI::IsMember({"skewnormal", "normal"}));
  fit->add_option("--seed", fit_seed);
  fit->add_option("--out", fit_out)->required();

  // replicate
  auto* rep = app.add_subcommand("replicate", "Monte Carlo table replication");
  int table = 1, replicates = 10, jobs = 1;
  std::string rep_copula = "skewnormal", rep_config, rep_out;
  std::uint64_t rep_seed = 1;
  rep->add_option("--table", table)->check(CLI::Range(1, 3));
  rep->add_option("--replicates", replicates)->check(CLI::PositiveNumber);
  rep->add_option("--copula", rep_copula)->check(CLI::IsMember({"skewnormal", "normal"}));
  rep->add_option("--config", rep_config);
  rep->add_option("--seed", rep_seed);
  rep->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  rep->add_option("--out", rep_out)->required();

  // density
  auto* den = app.add_subcommand("density", "log-scale density grid of Y");
  std::string den_fit, den_data, den_truth, den_grid = "-2:6:200", den_out;
  den->add_option("--fit", den_fit)->required();
  den->add_option("--data", den_data)->required();
  den->add_option("--truth", den_truth);
  den->add_option("--grid", den_grid);
  den->add_option("--out", den_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(design, marginal, shape, m, n_per_unit, seed, out_path);
    if (fit->parsed())
      return cmd_fit(data_path, formula, time_transform, fit_marginal, fit_shape,
                     config_path, copula, fit_seed, fit_out);
    if (rep->parsed())
      return cmd_replicate(table, replicates, rep_copula, rep_config, rep_seed,
                           jobs, rep_out);
    if (den->parsed())
      return cmd_density(den_fit, den_data, den_truth, den_grid, den_out);
  } catch (const snc::CsvError& ex) {
    std::cerr << "error: " << ex.message << " (row " << ex.row << ")\n";
    return kExitDataError;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
