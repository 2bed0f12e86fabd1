#include "cli.hpp"

#include "curemix/data.hpp"
#include "curemix/error.hpp"
#include "curemix/inference.hpp"
#include "curemix/nonparam.hpp"
#include "curemix/parallel.hpp"
#include "curemix/pipeline.hpp"
#include "curemix/simulate.hpp"
#include "curemix/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace curemix::cli {

using nlohmann::json;

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct SchemaFlags {
  std::string data;
  std::string time;
  std::string status;
  std::vector<std::string> x;
  std::vector<std::string> xdiscrete;
  std::vector<std::string> z;

  Schema schema() const { return {time, status, x, xdiscrete, z}; }
  json to_json() const {
    return {{"data", data}, {"time", time}, {"status", status}, {"x", x}, {"xdiscrete", xdiscrete}, {"z", z}};
  }
};

void add_schema_flags(CLI::App* app, SchemaFlags& f, bool required) {
  auto* t = app->add_option("--time", f.time, "Follow-up time column");
  auto* s = app->add_option("--status", f.status, "Event indicator column (1 event, 0 censored)");
  if (required) {
    t->required();
    s->required();
  }
  app->add_option("--x", f.x, "Continuous incidence covariates")->delimiter(',');
  app->add_option("--xdiscrete", f.xdiscrete, "Discrete incidence covariates (exact kernel matching)")->delimiter(',');
  app->add_option("--z", f.z, "Latency covariates")->delimiter(',');
}

struct Envelope {
  json config;
  std::string hash;
  std::uint64_t seed = 0;

  Envelope(json cfg, std::uint64_t s) : config(std::move(cfg)), seed(s) {
    config["seed"] = seed;
    hash = config_hash(config.dump());
  }
  json header() const {
    return {{"tool", "curemix"}, {"version", kVersion}, {"config", config}, {"config_hash", hash}, {"seed", seed}};
  }
  std::string csv_comment() const {
    return std::string("# curemix ") + kVersion + " config_hash=" + hash + " seed=" + std::to_string(seed) + "\n# config " +
           config.dump() + "\n";
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

std::string lambda_csv(const StepFunction& lambda, const Envelope& env) {
  std::ostringstream out;
  out << env.csv_comment() << std::setprecision(17) << "time,cumhaz\n";
  for (std::size_t k = 0; k < lambda.size(); ++k) out << lambda.times()[k] << ',' << lambda.values()[k] << '\n';
  return out.str();
}

json named_values(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  return {{"names", names}, {"values", std::vector<double>(v.data(), v.data() + v.size())}};
}

std::vector<std::string> gamma_names(const CovariateMeta& meta) {
  std::vector<std::string> names{"intercept"};
  names.insert(names.end(), meta.x_names.begin(), meta.x_names.end());
  return names;
}

json fit_block(const CureModelFit& fit, const CovariateMeta& meta, const std::optional<std::string>& csv_path,
               json diagnostics) {
  return {{"method", method_name(fit.method)},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"loglik", fit.loglik},
          {"gamma", named_values(gamma_names(meta), fit.gamma)},
          {"beta", named_values(meta.z_names, fit.beta)},
          {"lambda", {{"times", fit.lambda.times()}, {"cumhaz", fit.lambda.values()}}},
          {"lambda_csv", csv_path ? json(*csv_path) : json(nullptr)},
          {"diagnostics", std::move(diagnostics)}};
}

std::vector<Method> parse_methods(const std::string& s) {
  if (s == "presmooth" || s == "presmoothing") return {Method::presmoothing};
  if (s == "mle") return {Method::mle};
  if (s == "both") return {Method::presmoothing, Method::mle};
  throw UsageError("unknown method '" + s + "' (expected presmooth, mle or both)");
}

CvKernelScale parse_cv_kernel(const std::string& s) {
  if (s == "unit-variance") return CvKernelScale::unit_variance;
  if (s == "unit-support") return CvKernelScale::unit_support;
  throw UsageError("unknown --cv-kernel '" + s + "' (expected unit-variance or unit-support)");
}

struct FitFlags {
  std::string method = "both";
  std::vector<double> bandwidth;
  std::string grid;
  double cap = 2.0;
  std::string cv_kernel = "unit-variance";
  double latency_tol = 1e-7;
  std::size_t latency_max_iter = 500;
  double mle_tol = 1e-7;
  std::size_t mle_max_iter = 500;
  std::uint64_t seed = kDefaultSeed;
  std::size_t workers = 0;

  json to_json() const {
    return {{"method", method},         {"bandwidth", bandwidth},   {"bandwidth_grid", grid},
            {"bandwidth_cap", cap},     {"cv_kernel", cv_kernel},   {"latency_tol", latency_tol},
            {"latency_max_iter", latency_max_iter}, {"mle_tol", mle_tol}, {"mle_max_iter", mle_max_iter}};
  }
};

void add_fit_flags(CLI::App* app, FitFlags& f) {
  app->add_option("--bandwidth", f.bandwidth, "Bandwidth per continuous covariate (skips cross-validation)")
      ->delimiter(',');
  app->add_option("--bandwidth-grid", f.grid, "Cross-validation grid lo:hi:n (default 0.05:2:30)");
  app->add_option("--bandwidth-cap", f.cap, "Upper bound applied to the bandwidth")->capture_default_str();
  app->add_option("--cv-kernel", f.cv_kernel, "Scale of the CV bandwidth: unit-variance or unit-support")
      ->capture_default_str();
  app->add_option("--latency-tol", f.latency_tol, "Latency EM tolerance")->capture_default_str();
  app->add_option("--latency-max-iter", f.latency_max_iter, "Latency EM iteration cap")->capture_default_str();
  app->add_option("--mle-tol", f.mle_tol, "Joint EM tolerance")->capture_default_str();
  app->add_option("--mle-max-iter", f.mle_max_iter, "Joint EM iteration cap")->capture_default_str();
  app->add_option("--seed", f.seed, "Seed for the bandwidth search")->capture_default_str();
  app->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
}

std::size_t resolve_workers(std::size_t w) { return w == 0 ? default_workers() : w; }

PresmoothOptions presmooth_options(const FitFlags& f, const SurvivalDataset& ds) {
  PresmoothOptions o;
  const std::size_t dims = ds.meta().continuous_columns().size();
  if (!f.bandwidth.empty()) {
    std::vector<double> h = f.bandwidth;
    if (h.size() == 1 && dims > 1) h.assign(dims, h[0]);
    if (h.size() != dims)
      throw UsageError("--bandwidth needs " + std::to_string(dims) + " value(s), one per continuous covariate");
    o.bandwidth = Bandwidth(h);
  }
  if (!f.grid.empty()) o.grid = BandwidthGrid::parse(f.grid);
  o.cv.cap = f.cap;
  o.cv.kernel_scale = parse_cv_kernel(f.cv_kernel);
  o.seed = f.seed;
  o.latency.tol = f.latency_tol;
  o.latency.max_iter = f.latency_max_iter;
  o.workers = resolve_workers(f.workers);
  return o;
}

MleOptions mle_options(const FitFlags& f) {
  MleOptions o;
  o.tol = f.mle_tol;
  o.max_iter = f.mle_max_iter;
  return o;
}

std::string stem_of(const std::string& out) {
  const std::filesystem::path p(out);
  return (p.parent_path() / p.stem()).string();
}

// ---------------------------------------------------------------------------

int cmd_fit(const SchemaFlags& sf, const FitFlags& ff, const std::string& out_path, const std::string& pihat_path,
            std::ostream& out) {
  const std::vector<Method> methods = parse_methods(ff.method);
  const Envelope env({{"command", "fit"}, {"schema", sf.to_json()}, {"options", ff.to_json()}}, ff.seed);
  const SurvivalDataset ds = load_csv(sf.data, sf.schema());
  const PresmoothOptions popt = presmooth_options(ff, ds);

  json report = env.header();
  report["n"] = ds.n();
  report["events"] = ds.event_count();
  report["plateau_fraction"] = plateau_fraction(ds);
  report["estimates"] = json::array();
  bool all_converged = true;

  for (Method m : methods) {
    std::optional<std::string> csv;
    if (!out_path.empty()) csv = stem_of(out_path) + ".lambda_" + method_name(m) + ".csv";
    if (m == Method::presmoothing) {
      const PresmoothResult r = fit_presmoothing(ds, popt);
      json diag = {{"bandwidth", r.bandwidth.values()},
                   {"bandwidth_override", r.bandwidth_override},
                   {"bandwidth_scale", ff.cv_kernel},
                   {"incidence_converged", r.incidence.converged},
                   {"incidence_iterations", r.incidence.iterations},
                   {"latency_converged", r.latency.converged},
                   {"latency_iterations", r.latency.iterations},
                   {"latency_final_change", r.latency.final_change}};
      report["bandwidth"] = {{"values", r.bandwidth.values()}, {"override", r.bandwidth_override},
                             {"scale", ff.cv_kernel}};
      report["estimates"].push_back(fit_block(r.fit, ds.meta(), csv, std::move(diag)));
      if (csv) write_text(*csv, lambda_csv(r.fit.lambda, env));
      if (!pihat_path.empty()) {
        std::ostringstream p;
        p << env.csv_comment() << std::setprecision(17) << "index,pihat\n";
        for (Eigen::Index i = 0; i < r.pihat.size(); ++i) p << i << ',' << r.pihat(i) << '\n';
        write_text(pihat_path, p.str());
      }
      all_converged = all_converged && r.fit.converged;
    } else {
      const CureModelFit fit = fit_mle(ds, mle_options(ff));
      json diag = {{"loglik_trace_length", fit.loglik_trace.size()}};
      report["estimates"].push_back(fit_block(fit, ds.meta(), csv, std::move(diag)));
      if (csv) write_text(*csv, lambda_csv(fit.lambda, env));
      all_converged = all_converged && fit.converged;
    }
  }
  if (!pihat_path.empty() && std::find(methods.begin(), methods.end(), Method::presmoothing) == methods.end())
    throw UsageError("--dump-pihat needs the presmoothing method");

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty())
    out << text;
  else
    write_text(out_path, text);
  return all_converged ? kExitOk : kExitNumerical;
}

Refit refit_with(Method m, const FitFlags& ff, const SurvivalDataset& ds) {
  if (m == Method::presmoothing) {
    const PresmoothResult r = fit_presmoothing(ds, presmooth_options(ff, ds));
    return {stacked_parameters(r.fit), r.fit.converged, r.latency.converged};
  }
  const CureModelFit fit = fit_mle(ds, mle_options(ff));
  return {stacked_parameters(fit), fit.converged, true};
}

int cmd_bootstrap(const SchemaFlags& sf, FitFlags ff, std::size_t B, const std::string& out_path,
                  const std::string& replicates_path, std::ostream& out) {
  const auto methods = parse_methods(ff.method);
  if (methods.size() != 1) throw UsageError("bootstrap needs --method presmooth or --method mle");
  const Method m = methods.front();
  const std::size_t workers = resolve_workers(ff.workers);
  const Envelope env({{"command", "bootstrap"}, {"schema", sf.to_json()}, {"options", ff.to_json()}, {"B", B}},
                     ff.seed);
  const SurvivalDataset ds = load_csv(sf.data, sf.schema());
  ff.workers = 1;
  const Estimator est = [&](const SurvivalDataset& d) { return refit_with(m, ff, d); };
  const BootstrapResult res = bootstrap_se(ds, est, B, ff.seed, workers);

  std::vector<std::string> names = gamma_names(ds.meta());
  for (const auto& z : ds.meta().z_names) names.push_back(z);
  for (std::size_t j = 0; j < ds.p(); ++j) names[j] = "gamma:" + names[j];
  for (std::size_t j = ds.p(); j < names.size(); ++j) names[j] = "beta:" + names[j];

  std::ostringstream csv;
  csv << env.csv_comment() << std::setprecision(17) << "parameter,estimate,se,pvalue\n";
  for (Eigen::Index j = 0; j < res.point.size(); ++j)
    csv << names[static_cast<std::size_t>(j)] << ',' << res.point(j) << ',' << res.se(j) << ',' << res.pvalues(j) << '\n';
  if (out_path.empty())
    out << csv.str();
  else
    write_text(out_path, csv.str());

  if (!replicates_path.empty()) {
    std::ostringstream rep;
    rep << env.csv_comment() << std::setprecision(17) << "replicate";
    for (const auto& nm : names) rep << ',' << nm;
    rep << '\n';
    for (Eigen::Index i = 0; i < res.estimates.rows(); ++i) {
      rep << res.replicates[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < res.estimates.cols(); ++j) rep << ',' << res.estimates(i, j);
      rep << '\n';
    }
    write_text(replicates_path, rep.str());
  }
  if (!out_path.empty()) {
    json summary = env.header();
    summary["B"] = res.B;
    summary["failures"] = res.failures;
    summary["output"] = out_path;
    out << summary.dump(2) << '\n';
  }
  return kExitOk;
}

CureModelFit fit_from_json(const json& model, Method m) {
  for (const auto& block : model.at("estimates")) {
    if (block.at("method").get<std::string>() != method_name(m)) continue;
    CureModelFit fit;
    fit.method = m;
    const auto g = block.at("gamma").at("values").get<std::vector<double>>();
    const auto b = block.at("beta").at("values").get<std::vector<double>>();
    fit.gamma = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    fit.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    fit.lambda = StepFunction(block.at("lambda").at("times").get<std::vector<double>>(),
                              block.at("lambda").at("cumhaz").get<std::vector<double>>());
    fit.converged = block.at("converged").get<bool>();
    fit.loglik = block.at("loglik").get<double>();
    return fit;
  }
  throw UsageError("model file has no " + method_name(m) + " estimates");
}

int cmd_predict(SchemaFlags sf, const FitFlags& ff, const std::string& model_path, const std::string& train_path,
                const std::string& test_path, const std::string& pairing_name, const std::string& out_path,
                std::ostream& out) {
  if (model_path.empty() == train_path.empty())
    throw UsageError("predict needs exactly one of --model <fit.json> or --train <file>");
  const auto methods = parse_methods(ff.method);
  if (methods.size() != 1) throw UsageError("predict needs --method presmooth or --method mle");
  PePairing pairing;
  if (pairing_name == "as-displayed")
    pairing = PePairing::as_displayed;
  else if (pairing_name == "flipped")
    pairing = PePairing::flipped;
  else
    throw UsageError("unknown --pe-pairing '" + pairing_name + "' (expected as-displayed or flipped)");

  CureModelFit fit;
  if (!model_path.empty()) {
    std::ifstream f(model_path);
    if (!f) throw UsageError("cannot open model file " + model_path);
    json model;
    try {
      f >> model;
    } catch (const json::exception& e) {
      throw UsageError("model file is not valid JSON: " + std::string(e.what()));
    }
    if (sf.time.empty()) {
      const auto& s = model.at("config").at("schema");
      sf.time = s.at("time").get<std::string>();
      sf.status = s.at("status").get<std::string>();
      sf.x = s.at("x").get<std::vector<std::string>>();
      sf.xdiscrete = s.at("xdiscrete").get<std::vector<std::string>>();
      sf.z = s.at("z").get<std::vector<std::string>>();
    }
    fit = fit_from_json(model, methods.front());
  }
  if (sf.time.empty() || sf.status.empty()) throw UsageError("--time and --status are required with --train");
  SchemaFlags recorded = sf;
  recorded.data = test_path;
  const Envelope env({{"command", "predict"}, {"schema", recorded.to_json()}, {"model", model_path},
                      {"train", train_path}, {"pe_pairing", pairing_name}, {"options", ff.to_json()}},
                     ff.seed);
  if (!train_path.empty()) {
    const SurvivalDataset train = load_csv(train_path, sf.schema());
    if (methods.front() == Method::presmoothing)
      fit = fit_presmoothing(train, presmooth_options(ff, train)).fit;
    else
      fit = fit_mle(train, mle_options(ff));
  }
  const SurvivalDataset test = load_csv(test_path, sf.schema(), EventPolicy::allow_none);
  if (static_cast<std::size_t>(fit.gamma.size()) != test.p() || static_cast<std::size_t>(fit.beta.size()) != test.q())
    throw UsageError("test covariates do not match the fitted model");
  if (!fit.converged) throw InferenceError("the fitted model did not converge; prediction refused");

  std::ostringstream csv;
  csv << env.csv_comment() << std::setprecision(17) << "index,phi,weight\n";
  for (std::size_t j = 0; j < test.n(); ++j) {
    const Subject s = test.subject(j);
    csv << j << ',' << logistic_phi(fit.gamma, s.x) << ',' << predicted_weight(fit, s) << '\n';
  }
  const double pe = prediction_error(fit, test, pairing);
  if (!out_path.empty()) write_text(out_path, csv.str());
  json summary = env.header();
  summary["method"] = method_name(fit.method);
  summary["prediction_error"] = std::isfinite(pe) ? json(pe) : json("inf");
  summary["prediction_error_finite"] = std::isfinite(pe);
  summary["n_test"] = test.n();
  if (out_path.empty()) out << csv.str();
  out << summary.dump(2) << '\n';
  return std::isfinite(pe) ? kExitOk : kExitNumerical;
}

int cmd_km(const SchemaFlags& sf, const std::string& group, const std::string& out_path, std::ostream& out) {
  const Envelope env({{"command", "km"}, {"schema", sf.to_json()}, {"group", group}}, 0);
  Schema schema{sf.time, sf.status, {}, {}, {}};
  if (!group.empty()) schema.x_discrete = {group};
  const SurvivalDataset ds = load_csv(sf.data, schema, EventPolicy::allow_none);

  std::ostringstream csv;
  csv << env.csv_comment() << std::setprecision(17) << "group,time,survival\n";
  auto emit = [&](const std::string& label, const StepFunction& s) {
    csv << label << ',' << 0 << ',' << 1 << '\n';
    for (std::size_t k = 0; k < s.size(); ++k) csv << label << ',' << s.times()[k] << ',' << s.values()[k] << '\n';
  };
  if (group.empty()) {
    emit("all", kaplan_meier(ds.y(), ds.delta()));
  } else {
    const Eigen::VectorXd g = ds.x().col(1);
    for (const auto& [value, curve] : kaplan_meier_by_group(ds.y(), ds.delta(), g)) {
      std::ostringstream label;
      label << std::setprecision(17) << value;
      emit(label.str(), curve);
    }
  }
  if (out_path.empty())
    out << csv.str();
  else
    write_text(out_path, csv.str());
  return kExitOk;
}

struct SimFlags {
  std::string key;
  std::string model;
  int scenario = 1;
  int cens_level = 1;
  std::size_t n = 0;
  std::size_t reps = 300;
  std::uint64_t seed = kDefaultSeed;
  std::string methods = "both";
  double trim = 0.01;
  std::size_t workers = 0;
  std::string dataset_out;
  bool dataset_only = false;
};

json scenario_json(const SimulationScenario& sc) {
  const auto list = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j = {{"gamma", list(sc.gamma)}, {"beta", list(sc.beta)}, {"rho", sc.rho}, {"mu", sc.mu},
            {"tau0", sc.tau0}, {"tau", sc.tau},
            {"latency", sc.variant == LatencyVariant::no_jump ? "no-jump" : "truncated"}};
  if (sc.censoring == CensoringFamily::exponential) {
    j["censoring"] = "exponential";
    j["lambda_c"] = sc.lambda_c;
  } else {
    j["censoring"] = "weibull-ph";
    j["nu"] = sc.nu;
    j["beta_c"] = sc.beta_c;
  }
  return j;
}

int cmd_simulate(const SimFlags& f, const std::string& out_path, std::ostream& out) {
  if (f.key.empty() && f.model.empty()) throw UsageError("simulate needs --key or --model");
  SimulationScenario sc = find_scenario(f.key.empty() ? scenario_key(f.model, f.scenario, f.cens_level) : f.key);
  if (f.n > 0) sc.n = f.n;
  const Envelope env({{"command", "simulate"}, {"scenario", sc.key}, {"parameters", scenario_json(sc)}, {"n", sc.n}, {"reps", f.reps},
                      {"methods", f.methods}, {"trim", f.trim}, {"dataset_only", f.dataset_only}},
                     f.seed);
  if (!f.dataset_out.empty()) write_text(f.dataset_out, env.csv_comment() + to_csv(generate(sc, f.seed, 0)));
  if (f.dataset_only) {
    if (f.dataset_out.empty()) throw UsageError("--dataset-only needs --dataset-out");
    return kExitOk;
  }
  std::vector<StudyMethod> methods;
  for (Method m : parse_methods(f.methods))
    methods.push_back(m == Method::presmoothing ? presmoothing_method(f.seed) : mle_method());
  StudyOptions options;
  options.trim = f.trim;
  options.workers = resolve_workers(f.workers);
  const SimulationReport report = run_study(sc, f.reps, f.seed, methods, options);
  const std::string text = env.csv_comment() + report_csv(report);
  if (out_path.empty())
    out << text;
  else
    write_text(out_path, text);
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ParseError*>(&e))
    return kExitUsage;
  return kExitNumerical;
}

std::string error_type(const Error& e) {
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const SchemaError*>(&e)) return "schema";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const DegenerateCovariateError*>(&e)) return "degenerate_covariate";
  if (dynamic_cast<const EmptyNeighborhoodError*>(&e)) return "empty_neighborhood";
  if (dynamic_cast<const SingularHessianError*>(&e)) return "singular_hessian";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const InferenceError*>(&e)) return "inference";
  return "error";
}

}  // namespace

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixture cure models: presmoothing two-step estimator and joint EM baseline", "curemix"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SchemaFlags sf;
  FitFlags fit_ff;
  FitFlags boot_ff;
  FitFlags pred_ff;
  pred_ff.method = "presmooth";
  std::string out_path;

  auto* fit = app.add_subcommand("fit", "Fit the logistic/Cox mixture cure model to a CSV file");
  fit->add_option("--data", sf.data, "Input CSV")->required()->check(CLI::ExistingFile);
  add_schema_flags(fit, sf, true);
  fit->add_option("--method", fit_ff.method, "presmooth, mle or both")->capture_default_str();
  add_fit_flags(fit, fit_ff);
  std::string pihat_path;
  fit->add_option("--dump-pihat", pihat_path, "Write presmoothed cure probabilities (index, pihat)");
  fit->add_option("--out", out_path, "JSON report path (default stdout)");

  SimFlags simf;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study on a registered scenario");
  sim->add_option("--key", simf.key, "Registry key such as m1/s1/c1");
  sim->add_option("--model", simf.model, "Model id: 1, 2, 3, 4, 3-nojump or demo");
  sim->add_option("--scenario", simf.scenario, "Scenario 1-3")->capture_default_str();
  sim->add_option("--cens-level", simf.cens_level, "Censoring level 1-3")->capture_default_str();
  sim->add_option("--n", simf.n, "Sample size (default from the registry)");
  sim->add_option("--reps", simf.reps, "Replications")->capture_default_str();
  sim->add_option("--seed", simf.seed, "Study seed")->capture_default_str();
  sim->add_option("--methods", simf.methods, "presmooth, mle or both")->capture_default_str();
  sim->add_option("--trim", simf.trim, "Fraction trimmed from each end per parameter")->capture_default_str();
  sim->add_option("--workers", simf.workers, "Worker threads (0 = all cores)");
  sim->add_option("--dataset-out", simf.dataset_out, "Also write the replicate-0 dataset as CSV");
  sim->add_flag("--dataset-only", simf.dataset_only, "Only write the dataset, skip the study");
  sim->add_option("--out", out_path, "Report CSV path (default stdout)");

  std::size_t B = 500;
  std::string replicates_path;
  auto* boot = app.add_subcommand("bootstrap", "Naive bootstrap standard errors and Wald p-values");
  boot->add_option("--data", sf.data, "Input CSV")->required()->check(CLI::ExistingFile);
  add_schema_flags(boot, sf, true);
  boot->add_option("--method", boot_ff.method, "presmooth or mle")->required();
  boot->add_option("--B", B, "Bootstrap resamples")->capture_default_str();
  add_fit_flags(boot, boot_ff);
  boot->add_option("--replicates-out", replicates_path, "Write every resample estimate as CSV");
  boot->add_option("--out", out_path, "Result CSV path (default stdout)");

  std::string model_path;
  std::string train_path;
  std::string test_path;
  std::string pairing = "as-displayed";
  auto* pred = app.add_subcommand("predict", "Predicted weights and incidence prediction error on a test set");
  pred->add_option("--model", model_path, "JSON report written by fit");
  pred->add_option("--train", train_path, "Training CSV to fit before predicting");
  pred->add_option("--test", test_path, "Test CSV")->required();
  add_schema_flags(pred, sf, false);
  pred->add_option("--method", pred_ff.method, "presmooth or mle")->capture_default_str();
  pred->add_option("--pe-pairing", pairing, "as-displayed or flipped")->capture_default_str();
  add_fit_flags(pred, pred_ff);
  pred->add_option("--out", out_path, "Per-subject CSV path (default stdout)");

  std::string group;
  auto* km = app.add_subcommand("km", "Kaplan-Meier curves, optionally per group");
  km->add_option("--data", sf.data, "Input CSV")->required()->check(CLI::ExistingFile);
  km->add_option("--time", sf.time, "Follow-up time column")->required();
  km->add_option("--status", sf.status, "Event indicator column")->required();
  km->add_option("--group", group, "Column defining groups");
  km->add_option("--out", out_path, "CSV path (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (fit->parsed()) return cmd_fit(sf, fit_ff, out_path, pihat_path, out);
    if (sim->parsed()) return cmd_simulate(simf, out_path, out);
    if (boot->parsed()) return cmd_bootstrap(sf, boot_ff, B, out_path, replicates_path, out);
    if (pred->parsed()) return cmd_predict(sf, pred_ff, model_path, train_path, test_path, pairing, out_path, out);
    if (km->parsed()) return cmd_km(sf, group, out_path, out);
  } catch (const Error& e) {
    const json report = {{"tool", "curemix"}, {"version", kVersion},
                         {"error", {{"type", error_type(e)}, {"message", e.what()}}}};
    err << report.dump(2) << '\n';
    return exit_code_for(e);
  } catch (const json::exception& e) {
    err << json{{"tool", "curemix"}, {"error", {{"type", "usage"}, {"message", e.what()}}}}.dump(2) << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace curemix::cli
