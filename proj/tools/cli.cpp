#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace irmean::cli {

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(where + ": not a number: '" + t + "'");
  }
  return value;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

CovarianceSpec::Kind parse_cov_mode(const std::string& mode) {
  if (mode == "known") return CovarianceSpec::Kind::Known;
  if (mode == "isotropic") return CovarianceSpec::Kind::UnknownIsotropic;
  if (mode == "arbitrary") return CovarianceSpec::Kind::UnknownArbitrary;
  throw ConfigError("--cov must be known, isotropic or arbitrary (got '" + mode + "')");
}

// Sigma from --sigma, or the identity.
SymMatrix load_sigma(const RunConfig& cfg, Index p) {
  if (!cfg.sigma_path) return SymMatrix::identity(p);
  const Matrix m = read_matrix_csv(*cfg.sigma_path);
  if (m.rows() != p || m.cols() != p) {
    throw ConfigError("sigma must be " + std::to_string(p) + "x" + std::to_string(p));
  }
  return SymMatrix(m);
}

CovarianceSpec build_cov(const RunConfig& cfg, Index p) {
  switch (parse_cov_mode(cfg.cov_mode)) {
    case CovarianceSpec::Kind::Known: return CovarianceSpec::known(load_sigma(cfg, p));
    case CovarianceSpec::Kind::UnknownIsotropic: return CovarianceSpec::unknown_isotropic();
    case CovarianceSpec::Kind::UnknownArbitrary: return CovarianceSpec::unknown_arbitrary();
  }
  throw ConfigError("unknown covariance mode");
}

std::vector<std::uint64_t> seeds_or(const RunConfig& cfg, std::uint64_t first, std::uint64_t last) {
  if (!cfg.seeds.empty()) return cfg.seeds;
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = first; s <= last; ++s) out.push_back(s);
  return out;
}

// Library errors: bad numbers in the data are parse failures, a failed
// eigensolve is numeric, everything else is a configuration problem.
int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidData: return kParseError;
    case ErrorCode::NoConvergence: return kNumericError;
    default: return kConfigError;
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kNumericError;
  }
}

json report_json(const EstimateReport& report) {
  json trace = json::array();
  for (const IterationRecord& rec : report.trace) trace.push_back(rec.objective_value);
  return json{{"estimate", vector_json(report.estimate)},
              {"iterations", report.iterations_run},
              {"k_budget", report.k_budget},
              {"objective_trace", trace},
              {"stopped_early", report.stopped_early},
              {"solver_budget_exhausted", report.any_budget_exhausted}};
}

void emit_json(const RunConfig& cfg, const json& doc, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (cfg.output_path) {
    std::ofstream file = open_output(*cfg.output_path);
    file << text;
  } else {
    out << text;
  }
}

// --- config file --------------------------------------------------------

template <class T>
T json_get(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void apply_json(RunConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "input") cfg.input_path = json_get<std::string>(value, key);
    else if (key == "output") cfg.output_path = json_get<std::string>(value, key);
    else if (key == "epsilon") cfg.epsilon = json_get<double>(value, key);
    else if (key == "cov") cfg.cov_mode = json_get<std::string>(value, key);
    else if (key == "sigma") cfg.sigma_path = json_get<std::string>(value, key);
    else if (key == "adaptive") cfg.adaptive = json_get<bool>(value, key);
    else if (key == "a") cfg.a = json_get<double>(value, key);
    else if (key == "delta") cfg.delta = json_get<double>(value, key);
    else if (key == "a5") cfg.a5 = json_get<double>(value, key);
    else if (key == "seeds") {
      if (value.is_string()) {
        cfg.seeds = parse_seed_list({value.get<std::string>()});
      } else {
        cfg.seeds = json_get<std::vector<std::uint64_t>>(value, key);
      }
    }
    else if (key == "experiment") cfg.experiment = json_get<std::string>(value, key);
    else if (key == "scheme") cfg.scheme = json_get<std::string>(value, key);
    else if (key == "scheme-a" || key == "scheme_a") cfg.scheme_a = json_get<double>(value, key);
    else if (key == "scheme-b" || key == "scheme_b") cfg.scheme_b = json_get<double>(value, key);
    else if (key == "n") cfg.n = json_get<Index>(value, key);
    else if (key == "p") cfg.p = json_get<Index>(value, key);
    else if (key == "epsilons") cfg.epsilons = json_get<std::vector<double>>(value, key);
    else if (key == "k-override" || key == "k_override") cfg.k_override = json_get<int>(value, key);
    else if (key == "early-stop" || key == "early_stop") cfg.early_stop = json_get<bool>(value, key);
    else if (key == "max-steps" || key == "max_steps") cfg.max_steps = json_get<int>(value, key);
    else if (key == "workers") cfg.workers = json_get<unsigned>(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

// --- I/O helpers ----------------------------------------------------------

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    while (std::getline(fields, field, ',')) row.push_back(parse_number(field, where));
    if (!line.empty() && trim(line).back() == ',') throw ParseError(where + ": trailing comma");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(where + ": expected " + std::to_string(rows.front().size()) +
                       " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out = open_output(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::vector<std::string>& tokens) {
  std::vector<std::uint64_t> seeds;
  auto to_u64 = [](const std::string& s) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw ConfigError("bad seed '" + t + "'");
    }
    return v;
  };
  for (const std::string& token : tokens) {
    std::stringstream parts(token);
    std::string part;
    while (std::getline(parts, part, ',')) {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(to_u64(part));
        continue;
      }
      const std::uint64_t lo = to_u64(part.substr(0, dash));
      const std::uint64_t hi = to_u64(part.substr(dash + 1));
      if (hi < lo) throw ConfigError("empty seed range '" + part + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  }
  return seeds;
}

std::filesystem::path summary_path(const std::filesystem::path& output) {
  std::filesystem::path out = output;
  out.replace_extension(".summary.csv");
  return out;
}

// --- commands ------------------------------------------------------------

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.input_path) throw ConfigError("estimate needs --input");
    if (cfg.adaptive && cfg.epsilon) throw ConfigError("--adaptive and --epsilon are exclusive");
    if (!cfg.adaptive && !cfg.epsilon) throw ConfigError("estimate needs --epsilon or --adaptive");
    parse_cov_mode(cfg.cov_mode);

    const Dataset data(read_matrix_csv(*cfg.input_path));
    const CovarianceSpec cov = build_cov(cfg, data.p());
    SolverConfig solver;
    solver.max_steps = cfg.max_steps;

    json doc;
    if (!cfg.adaptive) {
      IRConfig ir;
      ir.epsilon = *cfg.epsilon;
      ir.cov = cov;
      ir.solver = solver;
      ir.use_early_stop = cfg.early_stop;
      ir.k_override = cfg.k_override;
      doc = report_json(ir_mean(data, ir));
      doc["epsilon"] = *cfg.epsilon;
    } else {
      LepskiConfig lepski;
      lepski.a = cfg.a;
      lepski.delta = cfg.delta;
      lepski.cov = cov;
      lepski.solver = solver;
      const SymMatrix sigma =
          cov.is_known() ? cov.sigma() : (cfg.sigma_path ? load_sigma(cfg, data.p())
                                                         : SymMatrix::identity(data.p()));
      lepski.sigma_op = operator_norm_psd(sigma);
      lepski.a5 = cfg.a5 ? *cfg.a5
                         : calibrate_a5(data.n(), sigma, cfg.a, cfg.delta, seeds_or(cfg, 1, 200));
      const AdaptiveResult result = adaptive_ir_mean(data, lepski);
      doc = report_json(result.per_level[static_cast<std::size_t>(result.selected_level - 1)]);
      doc["estimate"] = vector_json(result.estimate);
      doc["selected_epsilon"] = result.selected_epsilon;
      doc["selected_level"] = result.selected_level;
      doc["grid"] = result.grid;
      doc["radii"] = result.radii;
      doc["a5"] = lepski.a5;
    }
    doc["cov"] = cfg.cov_mode;
    emit_json(cfg, doc, out);
    return static_cast<int>(kOk);
  });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.output_path) throw ConfigError("simulate needs --output");
    const double eps = cfg.epsilon.value_or(0.0);
    const Scheme scheme = parse_scheme(cfg.scheme.value_or(eps > 0.0 ? "uniform" : "none"));
    const ContaminationSpec spec{scheme, eps, cfg.scheme_a.value_or(4.0),
                                 cfg.scheme_b.value_or(10.0)};
    const std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
    const SymMatrix sigma = load_sigma(cfg, cfg.p);
    const ContaminatedSample sample =
        sample_gac(cfg.n, cfg.p, Vector::Zero(cfg.p), sigma, spec, seed);
    write_matrix_csv(*cfg.output_path, sample.data.points());

    json meta{{"n", cfg.n},
              {"p", cfg.p},
              {"seed", seed},
              {"scheme", to_string(scheme)},
              {"epsilon", eps},
              {"epsilon_actual", sample.epsilon_actual},
              {"true_mean", vector_json(sample.true_mean)},
              {"inlier_mask", sample.inlier_mask}};
    const std::filesystem::path meta_path = cfg.output_path->string() + ".meta.json";
    open_output(meta_path) << meta.dump(2) << '\n';
    out << cfg.output_path->string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.experiment) throw ConfigError("bench needs --experiment");
    if (!cfg.output_path) throw ConfigError("bench needs --output");
    ExperimentParams params;
    params.kind = parse_experiment(*cfg.experiment);
    params.n = cfg.n;
    params.p = cfg.p;
    if (!cfg.epsilons.empty()) {
      params.epsilons = cfg.epsilons;
    } else if (cfg.epsilon) {
      params.epsilons = {*cfg.epsilon};
    } else if (params.kind == ExperimentKind::Breakdown) {
      params.epsilons = default_breakdown_epsilons();
    }
    const char* default_scheme =
        params.kind == ExperimentKind::Breakdown ? "smallest_eigenvector" : "uniform";
    params.scheme = parse_scheme(cfg.scheme.value_or(default_scheme));
    params.scheme_a = cfg.scheme_a.value_or(4.0);
    params.scheme_b = cfg.scheme_b.value_or(10.0);
    params.solver.max_steps = cfg.max_steps;
    params.use_early_stop = cfg.early_stop;
    params.k_override = cfg.k_override;
    params.workers = cfg.workers;

    const ExperimentTable table = run_experiment(params, seeds_or(cfg, 1, 20));

    std::ofstream rows = open_output(*cfg.output_path);
    rows << "experiment,scheme,n,p,epsilon,estimator,seed,iteration,error\n";
    for (const ErrorRow& r : table.rows) {
      rows << r.experiment << ',' << r.scheme << ',' << r.n << ',' << r.p << ','
           << format_double(r.epsilon) << ',' << r.estimator << ',' << r.seed << ','
           << (r.iteration ? std::to_string(*r.iteration) : std::string()) << ','
           << format_double(r.error) << '\n';
    }
    const std::filesystem::path summary_file = summary_path(*cfg.output_path);
    std::ofstream summary = open_output(summary_file);
    summary << "experiment,scheme,n,p,epsilon,estimator,iteration,seeds,mean_error,q25,q50,q75\n";
    for (const SummaryRow& s : table.summaries) {
      summary << s.experiment << ',' << s.scheme << ',' << s.n << ',' << s.p << ','
              << format_double(s.epsilon) << ',' << s.estimator << ','
              << (s.iteration ? std::to_string(*s.iteration) : std::string()) << ','
              << s.risk.per_seed_errors.size() << ',' << format_double(s.risk.mean_error) << ','
              << format_double(s.risk.q25) << ',' << format_double(s.risk.q50) << ','
              << format_double(s.risk.q75) << '\n';
    }
    out << cfg.output_path->string() << '\n' << summary_file.string() << '\n';
    return static_cast<int>(kOk);
  });
}

// --- argument parsing ------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iteratively reweighted robust mean estimation", "irmean"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  // Raw flag values; merged over the config file afterwards.
  std::string input, output, cov, sigma, config, experiment, scheme;
  std::vector<std::string> seeds;
  std::vector<double> epsilons;
  double epsilon = 0, a = 0, delta = 0, a5 = 0, scheme_a = 0, scheme_b = 0;
  Index n = 0, p = 0;
  int k_override = 0, max_steps = 0;
  unsigned workers = 0;
  bool adaptive = false, early_stop = false;

  struct Flags {
    CLI::Option *input, *output, *epsilon, *cov, *sigma, *adaptive, *a, *delta, *a5, *seeds,
        *experiment, *scheme, *scheme_a, *scheme_b, *n, *p, *epsilons, *k_override, *early_stop,
        *max_steps, *workers, *config;
  };
  auto add_flags = [&](CLI::App* sub) {
    Flags f{};
    f.config = sub->add_option("--config", config, "JSON file with settings; flags override it");
    f.input = sub->add_option("--input", input, "Data CSV (headerless, one row per observation)");
    f.output = sub->add_option("--output", output, "Output file");
    f.epsilon = sub->add_option("--epsilon", epsilon, "Contamination rate in [0, 0.5)");
    f.cov = sub->add_option("--cov", cov, "known | isotropic | arbitrary");
    f.sigma = sub->add_option("--sigma", sigma, "Covariance CSV (p x p); identity when absent");
    f.adaptive = sub->add_flag("--adaptive", adaptive, "Select epsilon by Lepski's method");
    f.a = sub->add_option("--a", a, "Lepski grid ratio in (0, 1)");
    f.delta = sub->add_option("--delta", delta, "Lepski tolerance level in (0, 1)");
    f.a5 = sub->add_option("--a5", a5, "Lepski radius constant; calibrated when absent");
    f.seeds = sub->add_option("--seeds", seeds, "Seeds, e.g. 1-20 or 3,5,9");
    f.experiment = sub->add_option("--experiment", experiment, "decay | breakdown | compare");
    f.scheme = sub->add_option("--scheme", scheme, "none | smallest_eigenvector | uniform");
    f.scheme_a = sub->add_option("--scheme-a", scheme_a, "Uniform outliers: lower bound");
    f.scheme_b = sub->add_option("--scheme-b", scheme_b, "Uniform outliers: upper bound");
    f.n = sub->add_option("--n", n, "Sample size");
    f.p = sub->add_option("--p", p, "Dimension");
    f.epsilons = sub->add_option("--epsilons", epsilons, "Contamination rates for a sweep");
    f.k_override = sub->add_option("--k-override", k_override, "Fixed number of reweighting steps");
    f.early_stop = sub->add_flag("--early-stop", early_stop, "Stop once the certificate holds");
    f.max_steps = sub->add_option("--max-steps", max_steps, "Inner solver step budget");
    f.workers = sub->add_option("--workers", workers, "Bench threads (0 = all cores)");
    return f;
  };

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate the mean of a CSV dataset");
  CLI::App* simulate = app.add_subcommand("simulate", "Draw a contaminated Gaussian sample");
  CLI::App* bench = app.add_subcommand("bench", "Run a simulation experiment");
  const Flags estimate_flags = add_flags(estimate);
  const Flags simulate_flags = add_flags(simulate);
  const Flags bench_flags = add_flags(bench);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  CLI::App* chosen = estimate->parsed() ? estimate : (simulate->parsed() ? simulate : bench);
  const Flags& f = chosen == estimate ? estimate_flags : (chosen == simulate ? simulate_flags : bench_flags);

  return guarded(err, [&] {
    RunConfig cfg;
    cfg.command = chosen == estimate ? Command::Estimate
                                     : (chosen == simulate ? Command::Simulate : Command::Bench);
    if (f.config->count()) apply_json(cfg, load_json_file(config));
    if (f.input->count()) cfg.input_path = input;
    if (f.output->count()) cfg.output_path = output;
    if (f.epsilon->count()) cfg.epsilon = epsilon;
    if (f.cov->count()) cfg.cov_mode = cov;
    if (f.sigma->count()) cfg.sigma_path = sigma;
    if (f.adaptive->count()) cfg.adaptive = adaptive;
    if (f.a->count()) cfg.a = a;
    if (f.delta->count()) cfg.delta = delta;
    if (f.a5->count()) cfg.a5 = a5;
    if (f.seeds->count()) cfg.seeds = parse_seed_list(seeds);
    if (f.experiment->count()) cfg.experiment = experiment;
    if (f.scheme->count()) cfg.scheme = scheme;
    if (f.scheme_a->count()) cfg.scheme_a = scheme_a;
    if (f.scheme_b->count()) cfg.scheme_b = scheme_b;
    if (f.n->count()) cfg.n = n;
    if (f.p->count()) cfg.p = p;
    if (f.epsilons->count()) cfg.epsilons = epsilons;
    if (f.k_override->count()) cfg.k_override = k_override;
    if (f.early_stop->count()) cfg.early_stop = early_stop;
    if (f.max_steps->count()) cfg.max_steps = max_steps;
    if (f.workers->count()) cfg.workers = workers;

    switch (cfg.command) {
      case Command::Estimate: return cmd_estimate(cfg, out, err);
      case Command::Simulate: return cmd_simulate(cfg, out, err);
      case Command::Bench: return cmd_bench(cfg, out, err);
    }
    return static_cast<int>(kConfigError);
  });
}

}  // namespace irmean::cli
