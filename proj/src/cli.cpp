#include "betacnmf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "betacnmf/errors.hpp"
#include "betacnmf/io.hpp"

namespace betacnmf::cli {

namespace {

/// Unknown method tags and similar mistakes on the command line.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> betas;
  for (const auto& item : split_list(text)) betas.push_back(Beta(parse_double(item)).value());
  if (betas.empty()) throw ParseError("beta list is empty");
  return betas;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> methods;
  for (const auto& item : split_list(text)) {
    try {
      methods.push_back(parse_method(item));
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
  }
  if (methods.empty()) throw UsageError("method list is empty");
  return methods;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size() || value.front() == '-') throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': invalid count '" + value + "'");
  }
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid seed '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParseError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string join_betas(const std::vector<double>& betas) {
  std::string out;
  for (double b : betas) {
    if (!out.empty()) out += ',';
    out += format_double(b);
  }
  return out;
}

std::string join_methods(const std::vector<Method>& methods) {
  std::string out;
  for (Method m : methods) {
    if (!out.empty()) out += ',';
    out += to_string(m);
  }
  return out;
}

std::string index_name(const char* prefix, std::size_t index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", prefix, index, ext);
  return buf;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  writer(out);
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

void prepare_output_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (!std::filesystem::is_directory(dir)) {
    throw std::ios_base::failure(dir.string() + " is not a directory");
  }
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure at " << e.what() << '\n';
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const DimensionError& e) {
    err << "inconsistent input: " << e.what() << '\n';
    return kParse;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kParse;
  }
}

}  // namespace

void apply_config_text(std::istream& in, CliConfig& config) {
  ExperimentConfig& e = config.experiment;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "K") e.K = parse_size(key, value);
    else if (key == "I") e.I = parse_size(key, value);
    else if (key == "N") e.N = parse_size(key, value);
    else if (key == "M") e.M = parse_size(key, value);
    else if (key == "beta") config.betas = parse_betas(value);
    else if (key == "methods") e.methods = parse_methods(value);
    else if (key == "n_matrices") e.n_matrices = parse_size(key, value);
    else if (key == "n_inits") e.n_inits = parse_size(key, value);
    else if (key == "max_iters") e.max_iters = parse_size(key, value);
    else if (key == "master_seed") e.master_seed = parse_seed(value);
    else if (key == "eps") e.eps = parse_double(value);
    else if (key == "h_update_weights") {
      try {
        e.h_weights = parse_h_update_weights(value);
      } catch (const ValidationError& err) {
        throw ParseError(err.what());
      }
    } else if (key == "jobs") config.jobs = parse_size(key, value);
    else if (key == "timing") config.timing = parse_bool(key, value);
    else throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  e.beta = config.betas.front();
}

void write_config_text(std::ostream& out, const CliConfig& config) {
  const ExperimentConfig& e = config.experiment;
  out << "K = " << e.K << '\n'
      << "I = " << e.I << '\n'
      << "N = " << e.N << '\n'
      << "M = " << e.M << '\n'
      << "beta = " << join_betas(config.betas) << '\n'
      << "methods = " << join_methods(e.methods) << '\n'
      << "n_matrices = " << e.n_matrices << '\n'
      << "n_inits = " << e.n_inits << '\n'
      << "max_iters = " << e.max_iters << '\n'
      << "master_seed = " << e.master_seed << '\n'
      << "eps = " << format_double(e.eps) << '\n'
      << "h_update_weights = " << to_string(e.h_weights) << '\n'
      << "jobs = " << config.jobs << '\n'
      << "timing = " << (config.timing ? "true" : "false") << '\n';
}

int cmd_gen(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.experiment.validate();
    prepare_output_dir(config.output_dir);
    std::ostringstream manifest;
    write_config_text(manifest, config);
    for (std::size_t i = 0; i < config.experiment.n_matrices; ++i) {
      const SyntheticData data = gen_V(config.experiment, i);
      save_nmat(config.output_dir / index_name("V", i, "nmat"), data.V);
      save_dictionary(config.output_dir / index_name("W", i, "dict"), data.W);
      save_nmat(config.output_dir / index_name("H", i, "nmat"), data.H);
      manifest << "# " << index_name("V", i, "nmat")
               << " seed = " << derive_seed(config.experiment.master_seed, "data", i) << '\n';
    }
    write_file(config.output_dir / "manifest.txt", [&](std::ostream& f) { f << manifest.str(); });
    out << "wrote " << config.experiment.n_matrices << " matrices to "
        << config.output_dir.string() << '\n';
    return int{kOk};
  });
}

int cmd_fit(const CliConfig& config, const std::filesystem::path& v_path, Method method,
            double beta, std::optional<double> rel_tol, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NonnegMatrix V = load_nmat(v_path);
    ExperimentConfig e = config.experiment;
    e.K = V.rows();
    e.N = V.cols();
    e.beta = beta;
    e.validate();
    const InitFactors start = gen_init(e, 0);

    FitOptions opts;
    opts.max_iters = e.max_iters;
    opts.rel_tol = rel_tol;
    opts.h_weights = e.h_weights;
    FitResult result = fit(method, V, start.W, start.H, Beta(beta), opts, e.eps);

    prepare_output_dir(config.output_dir);
    save_dictionary(config.output_dir / "W.dict", result.state.W);
    save_nmat(config.output_dir / "H.nmat", result.state.H);
    write_file(config.output_dir / "trace.csv",
               [&](std::ostream& f) { write_trace_csv(f, {result.trace}); });
    out << "method=" << to_string(method) << " beta=" << format_double(beta)
        << " iterations=" << result.iterations
        << " final_loss=" << format_double(result.trace.records.back().loss) << '\n';
    return int{kOk};
  });
}

int cmd_bench(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.experiment.validate();
    prepare_output_dir(config.output_dir);
    const auto& methods = config.experiment.methods;
    const bool has_proposed =
        std::find(methods.begin(), methods.end(), Method::proposed) != methods.end();
    const std::string reference(to_string(has_proposed ? Method::proposed : methods.front()));

    std::vector<RuntimeRow> runtime;
    std::ostringstream failures;
    for (double beta : config.betas) {
      ExperimentConfig e = config.experiment;
      e.beta = beta;
      const auto traces = run_ensemble(e, {.jobs = config.jobs, .timing = config.timing});
      const std::string suffix = "_beta" + format_double(beta) + ".csv";

      for (const auto& t : traces) {
        if (t.failure) {
          failures << "# failure run_id = " << t.run_id << " method = " << t.method
                   << " beta = " << format_double(beta) << ": " << *t.failure << '\n';
        }
      }
      std::vector<WelchRow> welch;
      for (Method m : methods) {
        const std::string tag(to_string(m));
        std::vector<LossTrace> mine;
        std::copy_if(traces.begin(), traces.end(), std::back_inserter(mine),
                     [&](const LossTrace& t) { return t.method == tag; });
        write_file(config.output_dir / ("trace_" + tag + suffix),
                   [&](std::ostream& f) { write_trace_csv(f, mine); });
        write_file(config.output_dir / ("stats_" + tag + suffix),
                   [&](std::ostream& f) { write_stats_csv(f, ensemble_stats(traces, tag)); });
        if (tag != reference) {
          auto rows = welch_by_iteration(traces, reference, tag);
          welch.insert(welch.end(), rows.begin(), rows.end());
        }
      }
      write_file(config.output_dir / ("welch" + suffix),
                 [&](std::ostream& f) { write_welch_csv(f, welch); });
      if (config.timing) {
        auto rows = runtime_rows(traces, beta, methods);
        runtime.insert(runtime.end(), rows.begin(), rows.end());
      }
      out << "beta=" << format_double(beta) << ": " << traces.size() << " runs\n";
    }
    if (config.timing) {
      write_file(config.output_dir / "runtime.csv",
                 [&](std::ostream& f) { write_runtime_csv(f, runtime); });
    }
    write_file(config.output_dir / "manifest.txt", [&](std::ostream& f) {
      write_config_text(f, config);
      f << failures.str();
    });
    return int{kOk};
  });
}

int cmd_stats(const std::filesystem::path& trace_a, const std::filesystem::path& trace_b,
              std::size_t iteration, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto load = [](const std::filesystem::path& p) {
      std::ifstream in(p);
      if (!in) throw std::ios_base::failure("cannot open " + p.string());
      return read_trace_csv(in);
    };
    auto collect = [iteration](const std::vector<LossTrace>& traces) {
      std::vector<double> values;
      for (const auto& t : traces) {
        for (const auto& r : t.records) {
          if (r.iteration == iteration) values.push_back(r.loss);
        }
      }
      return values;
    };
    const auto a = collect(load(trace_a));
    const auto b = collect(load(trace_b));
    if (a.empty() || b.empty()) {
      throw ParseError("iteration " + std::to_string(iteration) + " missing from trace");
    }
    if (a.size() < 2 || b.size() < 2) {
      throw ParseError("need at least two runs per trace at iteration " +
                       std::to_string(iteration));
    }
    const WelchResult r = welch_t_test(a, b);
    out << "t=" << format_double(r.t_statistic) << " df=" << format_double(r.degrees_of_freedom)
        << " p=" << format_double(r.p_value) << '\n';
    return int{kOk};
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"beta-divergence convolutional NMF: fitting and benchmark harness", "betacnmf"};
  app.require_subcommand(1);

  struct Flags {
    std::optional<std::string> config_path;
    std::optional<std::string> beta;
    std::optional<std::string> methods;
    std::optional<std::size_t> K, I, N, M, iters, n_matrices, n_inits, jobs;
    std::optional<std::string> seed;
    std::optional<double> eps;
    std::optional<std::string> h_weights;
    bool timing = false;
    std::optional<std::string> out_dir;
  } flags;

  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "key = value config file");
    sub->add_option("--beta", flags.beta, "beta value(s), comma separated");
    sub->add_option("--methods", flags.methods, "method tags, comma separated");
    sub->add_option("--K", flags.K, "visible variables (rows of V)");
    sub->add_option("--I", flags.I, "hidden variables (rank)");
    sub->add_option("--N", flags.N, "time samples (columns of V)");
    sub->add_option("--M", flags.M, "convolution lags");
    sub->add_option("--iters", flags.iters, "iterations per fit");
    sub->add_option("--seed", flags.seed, "master seed (falls back to BETACNMF_SEED)");
    sub->add_option("--n-matrices", flags.n_matrices, "number of data matrices");
    sub->add_option("--n-inits", flags.n_inits, "initializations per matrix");
    sub->add_option("--eps", flags.eps, "clamp floor");
    sub->add_option("--h-weights", flags.h_weights, "dictionary used in the H update: new|old");
    sub->add_option("--jobs", flags.jobs, "parallel runs");
    sub->add_flag("--timing", flags.timing, "record wall time and write runtime.csv");
    sub->add_option("--out", flags.out_dir, "output directory");
  };

  CLI::App* gen = app.add_subcommand("gen", "write synthetic data matrices and true factors");
  add_common(gen);

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one data matrix with one method");
  add_common(fit_cmd);
  std::string v_path;
  std::string method_tag = "proposed";
  std::optional<double> rel_tol;
  fit_cmd->add_option("V", v_path, "NMAT data file")->required();
  fit_cmd->add_option("--method", method_tag, "update scheme");
  fit_cmd->add_option("--rel-tol", rel_tol, "stop when the relative loss change falls below");

  CLI::App* bench = app.add_subcommand("bench", "run the ensemble benchmark");
  add_common(bench);

  CLI::App* stats = app.add_subcommand("stats", "Welch t-test between two trace files");
  std::string trace_a;
  std::string trace_b;
  std::size_t iteration = 0;
  stats->add_option("trace_a", trace_a)->required();
  stats->add_option("trace_b", trace_b)->required();
  stats->add_option("--iteration", iteration, "iteration to compare")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  if (stats->parsed()) return cmd_stats(trace_a, trace_b, iteration, out, err);

  CliConfig config;
  const int layered = guarded(err, [&] {
    if (const char* env = std::getenv("BETACNMF_SEED"); env && *env) {
      config.experiment.master_seed = parse_seed(env);
    }
    if (flags.config_path) {
      std::ifstream in(*flags.config_path);
      if (!in) throw std::ios_base::failure("cannot open config " + *flags.config_path);
      apply_config_text(in, config);
    }
    ExperimentConfig& e = config.experiment;
    if (flags.beta) config.betas = parse_betas(*flags.beta);
    if (flags.methods) e.methods = parse_methods(*flags.methods);
    if (flags.K) e.K = *flags.K;
    if (flags.I) e.I = *flags.I;
    if (flags.N) e.N = *flags.N;
    if (flags.M) e.M = *flags.M;
    if (flags.iters) e.max_iters = *flags.iters;
    if (flags.seed) e.master_seed = parse_seed(*flags.seed);
    if (flags.n_matrices) e.n_matrices = *flags.n_matrices;
    if (flags.n_inits) e.n_inits = *flags.n_inits;
    if (flags.eps) e.eps = *flags.eps;
    if (flags.h_weights) {
      try {
        e.h_weights = parse_h_update_weights(*flags.h_weights);
      } catch (const ValidationError& ex) {
        throw UsageError(ex.what());
      }
    }
    if (flags.jobs) config.jobs = *flags.jobs;
    if (flags.timing) config.timing = true;
    if (flags.out_dir) config.output_dir = *flags.out_dir;
    e.beta = config.betas.front();
    return int{kOk};
  });
  if (layered != kOk) return layered;

  if (gen->parsed()) return cmd_gen(config, out, err);
  if (bench->parsed()) return cmd_bench(config, out, err);

  Method method{};
  try {
    method = parse_method(method_tag);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (config.betas.size() != 1) {
    err << "error: fit takes a single --beta\n";
    return kUsage;
  }
  return cmd_fit(config, v_path, method, config.betas.front(), rel_tol, out, err);
}

}  // namespace betacnmf::cli
