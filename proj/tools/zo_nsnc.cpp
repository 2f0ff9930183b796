// zo-nsnc: experiment runner for the zeroth-order VRG / VRSQN solvers.
//
//   zo-nsnc run     --algo vrsqn --config cfg.txt --seed 7 --out table.csv [--plot-data hist.csv] [--eta 0.05 ...]
//   zo-nsnc compare --config cfg.txt [--config-b other.txt] --out joint.csv
//   zo-nsnc bench   --algo vrg --config cfg.txt --out sweep.csv
//   zo-nsnc verify  [--criteria 1,3,12] [--all]
//
// Exit status: 0 success, 1 run failure, 2 configuration error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "zonsnc/verify.hpp"

namespace {

using namespace zonsnc;

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

struct CommonOptions {
  std::string algo;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  std::optional<std::size_t> jobs;
  std::string out;
  std::string plot_data;
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_algo) {
  if (with_algo) sub->add_option("--algo", o.algo, "vrg or vrsqn")->check(CLI::IsMember({"vrg", "vrsqn"}));
  sub->add_option("--config", o.config, "flat key = value config file");
  sub->add_option("--seed", o.seed, "base seed; replication r uses seed + r");
  sub->add_option("--replications", o.replications, "number of replications R");
  sub->add_option("--jobs", o.jobs, "replications run concurrently");
  sub->add_option("--out", o.out, "CSV output path (stdout when omitted)");
  sub->add_option("--plot-data", o.plot_data, "long-format convergence history CSV");
  sub->allow_extras();
}

/// `--key value` / `--key=value` pairs left over after CLI11 parsing.
void apply_overrides(Config& cfg, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw ConfigError("unexpected argument '" + tok + "'");
    const std::string body = tok.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      cfg.set(body.substr(0, eq), body.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("missing value for '" + tok + "'");
      cfg.set(body, extras[++i]);
    }
  }
}

Config load_config(const std::string& path, const CommonOptions& o, const std::vector<std::string>& extras) {
  Config cfg = path.empty() ? Config{} : Config::load(path);
  if (!o.algo.empty()) cfg.set("algo", o.algo);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (o.replications) cfg.set("replications", std::to_string(*o.replications));
  if (o.jobs) cfg.set("jobs", std::to_string(*o.jobs));
  apply_overrides(cfg, extras);
  return cfg;
}

template <class Fn>
void write_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  fn(os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path);
}

int finish(const std::vector<AggregateReport>& reports) {
  for (const auto& r : reports) print_summary(r, std::cerr);
  for (const auto& r : reports)
    if (r.failures) return kExitRunFailure;
  return kExitOk;
}

int cmd_run(const CommonOptions& o, const std::vector<std::string>& extras) {
  const AggregateReport agg = run_experiment(ExperimentSpec::from_config(load_config(o.config, o, extras)));
  write_output(o.out, [&](std::ostream& os) { emit_csv({agg}, os); });
  if (!o.plot_data.empty()) write_output(o.plot_data, [&](std::ostream& os) { emit_plot_data({agg}, os); });
  return finish({agg});
}

int cmd_compare(const CommonOptions& o, const std::string& config_b, const std::vector<std::string>& extras) {
  Config a = load_config(o.config, o, extras);
  Config b = config_b.empty() ? a : load_config(config_b, o, extras);
  if (config_b.empty()) {
    a.set("algo", "vrg");
    b.set("algo", "vrsqn");
  }
  const Comparison c = compare(ExperimentSpec::from_config(a), ExperimentSpec::from_config(b));
  write_output(o.out, [&](std::ostream& os) { emit_comparison_csv(c, os); });
  if (!o.plot_data.empty())
    write_output(o.plot_data, [&](std::ostream& os) { emit_plot_data({c.first, c.second}, os); });
  return finish({c.first, c.second});
}

int cmd_bench(const CommonOptions& o, const std::vector<std::string>& extras) {
  const Config base = load_config(o.config, o, extras);
  struct Cell {
    const char* kind;
    const char* gamma0;
  };
  const Cell steps[] = {{"constant", "0.01"}, {"sqrt_decay", "1"}, {"linear_decay", "1"}};
  std::vector<AggregateReport> rows;
  for (const auto& step : steps) {
    for (const char* a : {"0.01", "0.1", "1"}) {
      Config cfg = base;
      cfg.set("step.kind", step.kind);
      cfg.set("step.gamma0", step.gamma0);
      cfg.set("step.scale", "100");
      cfg.set("batch.kind", "affine");
      cfg.set("batch.a", a);
      rows.push_back(run_experiment(ExperimentSpec::from_config(cfg)));
      std::cerr << "bench: " << rows.back().gamma_kind << " a=" << a << " done\n";
    }
  }
  write_output(o.out, [&](std::ostream& os) { emit_csv(rows, os); });
  if (!o.plot_data.empty()) write_output(o.plot_data, [&](std::ostream& os) { emit_plot_data(rows, os); });
  return finish(rows);
}

int cmd_verify(const std::vector<int>& criteria, bool all, std::size_t jobs) {
  std::vector<int> ids = criteria;
  if (ids.empty() && !all) ids = {1, 2, 3, 4, 5, 6, 7, 12};
  bool ok = true;
  verify::run_checks(ids, jobs, [&](const verify::CheckResult& r) {
    std::cout << verify::format_result(r) << std::endl;
    ok = ok && r.passed;
  });
  return ok ? kExitOk : kExitRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zeroth-order nonsmooth nonconvex stochastic optimization"};
  app.require_subcommand(1);

  CommonOptions run_opt, cmp_opt, bench_opt;
  std::string config_b;
  std::vector<int> criteria;
  bool verify_all = false;
  std::size_t verify_jobs = 1;

  auto* run = app.add_subcommand("run", "run R replications of one algorithm");
  add_common(run, run_opt, true);
  auto* cmp = app.add_subcommand("compare", "run two specs under the same budget");
  add_common(cmp, cmp_opt, false);
  cmp->add_option("--config-b", config_b, "second config (default: same config with vrg vs vrsqn)");
  auto* bench = app.add_subcommand("bench", "step schedule x batch parameter sweep");
  add_common(bench, bench_opt, true);
  auto* ver = app.add_subcommand("verify", "property and reproduction checks");
  ver->add_option("--criteria", criteria, "criterion numbers to run")->delimiter(',');
  ver->add_flag("--all", verify_all, "include the reference experiments");
  ver->add_option("--jobs", verify_jobs, "threads for replicated experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*run) return cmd_run(run_opt, run->remaining());
    if (*cmp) return cmd_compare(cmp_opt, config_b, cmp->remaining());
    if (*bench) return cmd_bench(bench_opt, bench->remaining());
    if (*ver) return cmd_verify(criteria, verify_all, verify_jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitConfigError;
}
