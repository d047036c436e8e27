// msgd: command-line driver for the missing-data SGD library.
//
//   msgd generate --m 200 --n 20 --seed 1 --out data/desk
//   msgd solve --config configs/horizon_p07.json
//   msgd bounds --matrix A.csv --rhs b.csv --p 0.5 --alpha 1e-4
//   msgd compare-imputation --config configs/imputation.json
//   msgd verify [--matrix A.csv --rhs b.csv]
//
// Exit status: 0 ok, 2 configuration error, 3 numerical error,
// 4 verification failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msgd/msgd.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerify = 4;

struct ProblemFlags {
  std::string matrix;
  std::string rhs;
  std::optional<std::size_t> rhs_column;
  bool header = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--matrix", matrix, "Matrix CSV");
    cmd.add_option("--rhs", rhs, "Right-hand side CSV");
    cmd.add_option("--rhs-column", rhs_column, "Split this zero-based column off the matrix as b");
    cmd.add_flag("--header", header, "Skip the first line of each CSV");
  }

  bool given() const { return !matrix.empty(); }

  msgd::Problem load() const {
    msgd::RhsSpec spec;
    if (!rhs.empty()) {
      spec.path = rhs;
    }
    spec.column = rhs_column;
    return msgd::load_csv_problem(matrix, spec, header);
  }
};

double auto_radius(const msgd::Problem& p) {
  const double r = 10.0 * p.x_star->norm();
  return r > 0.0 ? r : 1.0;
}

void log_auto_radius(double radius) {
  std::cerr << "msgd: radius auto -> 10*||x*|| = " << msgd::format_double(radius) << '\n';
}

msgd::ResolvedExperiment resolve_logged(const msgd::ExperimentConfig& cfg) {
  msgd::ResolvedExperiment r = msgd::resolve(cfg);
  if (r.radius_was_auto) {
    log_auto_radius(r.spec.domain.radius());
  }
  return r;
}

fs::path output_path(const msgd::ExperimentConfig& cfg, const std::string& flag) {
  return flag.empty() ? cfg.output : fs::path(flag);
}

void write_meta(const fs::path& path, const msgd::ExperimentConfig& cfg, const msgd::ResolvedExperiment& r,
                const std::string& command) {
  nlohmann::json meta = {
      {"command", command},
      {"config_digest", r.digest},
      {"trial_count", cfg.trial_count},
      {"root_seed", cfg.root_seed},
      {"radius", r.spec.domain.radius()},
      {"radius_auto", r.radius_was_auto},
      {"p", cfg.p},
  };
  if (r.mu_hat > 0.0) {
    meta["mu_hat"] = r.mu_hat;
  }
  msgd::write_file(path, [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
}

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
  fs::path out = base;
  out += suffix;
  return out;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::int64_t m = msgd::kDeskSize.m;
  std::int64_t n = msgd::kDeskSize.n;
  std::uint64_t seed = 0;
  std::string preset;
  double residual_scale = 0.0;
  std::string out = "problem";
};

int cmd_generate(const GenerateArgs& args, const CLI::App& cmd) {
  std::int64_t m = args.m;
  std::int64_t n = args.n;
  if (!args.preset.empty()) {
    const msgd::ProblemSize size = args.preset == "large" ? msgd::kLargeSize : msgd::kDeskSize;
    if (cmd.count("--m") == 0) {
      m = size.m;
    }
    if (cmd.count("--n") == 0) {
      n = size.n;
    }
  }
  const msgd::Problem p = args.residual_scale > 0.0
                              ? msgd::gen_gaussian_inconsistent(m, n, args.residual_scale, args.seed)
                              : msgd::gen_gaussian_consistent(m, n, args.seed);

  std::ostringstream a_text;
  std::ostringstream b_text;
  msgd::write_matrix_csv(a_text, p.a);
  msgd::write_vector_csv(b_text, p.b);
  const fs::path prefix(args.out);
  if (prefix.has_parent_path()) {
    fs::create_directories(prefix.parent_path());
  }
  msgd::write_file(with_suffix(prefix, "_A.csv"), [&](std::ostream& os) { os << a_text.str(); });
  msgd::write_file(with_suffix(prefix, "_b.csv"), [&](std::ostream& os) { os << b_text.str(); });

  nlohmann::json side = {
      {"generator", args.residual_scale > 0.0 ? "gaussian_inconsistent" : "gaussian_consistent"},
      {"m", m},
      {"n", n},
      {"seed", args.seed},
      {"residual_scale", args.residual_scale},
      {"consistent", p.consistent},
      {"x_star", std::vector<double>(p.x_star->data(), p.x_star->data() + p.x_star->size())},
      {"residual", std::vector<double>(p.residual.data(), p.residual.data() + p.residual.size())},
      {"digest", msgd::fnv1a_hex(a_text.str() + "\n" + b_text.str())},
  };
  msgd::write_file(with_suffix(prefix, ".json"), [&](std::ostream& os) { os << side.dump(2) << '\n'; });
  std::cout << with_suffix(prefix, "_A.csv").string() << '\n'
            << with_suffix(prefix, "_b.csv").string() << '\n'
            << with_suffix(prefix, ".json").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string config;
  std::string output;
};

int cmd_solve(const SolveArgs& args) {
  const msgd::ExperimentConfig cfg = msgd::load_config(args.config);
  const msgd::ResolvedExperiment r = resolve_logged(cfg);
  const msgd::AggregateTrace trace = msgd::run_trials(r.problem, r.spec, cfg.trial_count, cfg.root_seed, r.digest);
  const fs::path out = output_path(cfg, args.output);
  msgd::write_trace_csv(out, trace);
  write_meta(with_suffix(out, ".meta.json"), cfg, r, "solve");
  std::cout << out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BoundsArgs {
  std::string config;
  ProblemFlags problem;
  std::optional<double> p;
  std::optional<double> alpha;
  std::optional<double> radius;
};

int cmd_bounds(const BoundsArgs& args) {
  msgd::Problem problem;
  double p = 1.0;
  std::optional<double> alpha;
  double radius = 0.0;
  if (!args.config.empty()) {
    if (args.problem.given()) {
      throw msgd::ConfigError("give either --config or --matrix, not both");
    }
    const msgd::ExperimentConfig cfg = msgd::load_config(args.config);
    const msgd::ResolvedExperiment r = resolve_logged(cfg);
    problem = r.problem;
    p = cfg.p;
    radius = r.spec.domain.radius();
    if (cfg.schedule.type == "fixed") {
      alpha = cfg.schedule.alpha;
    }
  } else if (args.problem.given()) {
    problem = args.problem.load();
  } else {
    throw msgd::ConfigError("bounds needs --config or --matrix");
  }
  if (args.p) {
    p = *args.p;
  }
  if (args.alpha) {
    alpha = args.alpha;
  }
  if (args.radius) {
    radius = *args.radius;
  } else if (args.config.empty()) {
    radius = auto_radius(problem);
    log_auto_radius(radius);
  }
  const msgd::ProjectionDomain domain(radius);
  if (!domain.contains(*problem.x_star)) {
    throw msgd::ConfigError("--radius " + msgd::format_double(radius) + " does not contain x_star");
  }
  const msgd::BoundsReport report =
      alpha ? msgd::fixed_step_report(problem.a, problem.b, *problem.x_star, problem.residual, p, *alpha,
                                      domain.b_domain())
            : msgd::bounds_report(problem.a, problem.b, *problem.x_star, problem.residual, p, domain.b_domain());
  const nlohmann::json j = report;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string config;
  std::string output;
};

int cmd_compare(const CompareArgs& args) {
  const msgd::ExperimentConfig cfg = msgd::load_config(args.config);
  const msgd::ResolvedExperiment r = resolve_logged(cfg);
  msgd::ImputationSpec spec;
  spec.p = cfg.p;
  spec.schedule = r.spec.schedule;
  spec.domain = r.spec.domain;
  spec.iterations = cfg.iterations;
  spec.trial_count = cfg.trial_count;
  spec.root_seed = cfg.root_seed;
  spec.record_every = cfg.record_every;
  spec.corpus_rows = cfg.corpus_rows;
  const msgd::ImputationComparison cmp = msgd::compare_imputation(r.problem, spec, r.digest);
  if (cmp.empty_groups > 0) {
    std::cerr << "msgd: warning: " << cmp.empty_groups
              << " fully missing rows/columns were imputed with 0 (summed over trials and strategies)\n";
  }

  const fs::path out = output_path(cfg, args.output);
  const fs::path stem = out.parent_path() / out.stem();
  const std::string ext = out.has_extension() ? out.extension().string() : ".csv";
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const msgd::AggregateTrace& t) {
    const fs::path path = with_suffix(stem, "_" + name + ext);
    msgd::write_trace_csv(path, t);
    written.push_back(path);
  };
  emit("msgd", cmp.msgd);
  for (msgd::ImputeStrategy s : msgd::kImputeStrategies) {
    emit(std::string(msgd::to_string(s)), cmp.imputed.at(s));
  }
  write_meta(with_suffix(stem, ".meta.json"), cfg, r, "compare-imputation");
  for (const auto& path : written) {
    std::cout << path.string() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  ProblemFlags problem;
  double p = 0.5;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
};

class Checker {
 public:
  void check(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << ": " << detail << '\n';
    failures_ += ok ? 0 : 1;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::scientific << v;
  return os.str();
}

void verify_unbiased(Checker& c, const msgd::Problem& prob, double p, const std::string& label) {
  msgd::SplitMix64 rng(msgd::derive_seed(static_cast<std::uint64_t>(prob.cols()), 7));
  std::normal_distribution<double> nd;
  msgd::Vector x(prob.cols());
  for (auto& v : x) {
    v = nd(rng);
  }
  const msgd::Vector e = msgd::enumerated_expectation(prob.a, prob.b, x, p, msgd::msgd_direction);
  const msgd::Vector g = msgd::full_gradient(prob.a, prob.b, x);
  const double diff = (e - g).norm();
  c.check(diff <= 1e-10 * (1.0 + g.norm()), label + " unbiased (p=" + msgd::format_double(p) + ")",
          "|E g - grad F| = " + fmt(diff));
}

void verify_moments(Checker& c, const msgd::Problem& prob, double p, std::size_t samples, std::uint64_t seed,
                    const std::string& label) {
  const msgd::Vector& xs = *prob.x_star;
  const double radius = auto_radius(prob);
  const double g_star = msgd::compute_g_star(prob.a, xs, prob.residual, p);
  const msgd::SampleMoment at_star = msgd::sampled_update_second_moment(prob.a, prob.b, xs, p, samples, seed);
  // G* is exactly 0 for a consistent system at p = 1; allow rounding error.
  const double roundoff = 1e-12 * msgd::max_row_norm_sq(prob.a) * (xs.norm() + prob.b.lpNorm<Eigen::Infinity>()) / p;
  c.check(at_star.mean - 3.0 * at_star.std_error <= g_star * (1.0 + 1e-12) + roundoff * roundoff, label + " E|g(x*)|^2 <= G*",
          fmt(at_star.mean) + " +- " + fmt(at_star.std_error) + " vs " + fmt(g_star));

  const double g = msgd::compute_g(prob.a, prob.b, p, radius * radius);
  double worst = 0.0;
  msgd::SplitMix64 rng(msgd::derive_seed(seed, 1));
  std::normal_distribution<double> nd;
  for (int k = 1; k <= 4; ++k) {
    msgd::Vector x(prob.cols());
    for (auto& v : x) {
      v = nd(rng);
    }
    x *= radius * k / 4.0 / x.norm();
    const msgd::SampleMoment mom = msgd::sampled_update_second_moment(prob.a, prob.b, x, p, samples,
                                                                      msgd::derive_seed(seed, 10 + k));
    worst = std::max(worst, mom.mean - 3.0 * mom.std_error);
  }
  c.check(worst <= g, label + " E|g(x)|^2 <= G on W", fmt(worst) + " vs " + fmt(g));

  const msgd::LipschitzSample lip = msgd::sampled_lipschitz(prob.a, prob.b, p, radius, 1000, seed);
  const double l_g = msgd::compute_lg(prob.a, p);
  c.check(lip.max_ratio_over_instance <= 1.0 + 1e-12 && lip.max_ratio <= l_g * (1.0 + 1e-12),
          label + " Lipschitz ratios <= L_g", fmt(lip.max_ratio) + " vs " + fmt(l_g));
}

int cmd_verify(const VerifyArgs& args) {
  Checker c;
  msgd::SplitMix64 rng(args.seed);
  std::normal_distribution<double> nd;
  auto gaussian = [&](Eigen::Index m, Eigen::Index n) {
    msgd::Matrix a(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        a(i, j) = nd(rng);
      }
    }
    return a;
  };

  // Built-in tiny instances.
  double worst = 0.0;
  for (double p : {0.25, 0.5, 0.9, 1.0}) {
    for (int t = 0; t < 20; ++t) {
      const auto m = static_cast<Eigen::Index>(1 + rng.below(4));
      const auto n = static_cast<Eigen::Index>(1 + rng.below(4));
      const msgd::Matrix a = gaussian(m, n);
      const msgd::Vector b = gaussian(m, 1).col(0);
      const msgd::Vector x = gaussian(n, 1).col(0);
      const msgd::Vector e = msgd::enumerated_expectation(a, b, x, p, msgd::msgd_direction);
      worst = std::max(worst, (e - msgd::full_gradient(a, b, x)).norm());
    }
  }
  c.check(worst <= 1e-10, "tiny unbiasedness (80 instances)", "max |E g - grad F| = " + fmt(worst));

  {
    msgd::Matrix a(3, 3);
    a << 1.0, 2.0, -0.5, 0.3, -1.2, 2.2, 1.5, 0.4, 0.9;
    msgd::Vector b(3);
    b << 1.0, -2.0, 0.5;
    msgd::Vector x(3);
    x << 0.7, -0.4, 1.3;
    const msgd::Vector g = msgd::full_gradient(a, b, x);
    const double d1 = (msgd::enumerated_expectation(a, b, x, 0.5, msgd::naive_direction) - g).norm();
    const double d2 = (msgd::enumerated_expectation(a, b, x, 0.5, msgd::naive_scaled_direction) - g).norm();
    c.check(d1 > 1e-3 && d2 > 1e-3, "naive directions biased at p=0.5", fmt(d1) + ", " + fmt(d2));
  }

  const msgd::Problem small = msgd::gen_gaussian_inconsistent(20, 4, 0.2, args.seed);
  verify_moments(c, small, args.p, args.samples / 5, args.seed, "tiny");

  if (args.problem.given()) {
    const msgd::Problem prob = args.problem.load();
    const double cost = static_cast<double>(prob.rows()) * std::ldexp(1.0, static_cast<int>(prob.cols()));
    if (prob.cols() <= msgd::kMaxEnumerationWidth && cost <= 4e6) {
      verify_unbiased(c, prob, args.p, "input");
    } else {
      std::cout << "skip input unbiased: m*2^n too large for exact enumeration\n";
    }
    verify_moments(c, prob, args.p, args.samples, args.seed, "input");
  }
  std::cout << (c.failures() == 0 ? "verify: all checks passed" : "verify: " + std::to_string(c.failures()) +
                                                                     " check(s) failed")
            << '\n';
  return c.failures() == 0 ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least squares SGD with randomly missing entries"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a Gaussian test problem as CSV plus a JSON sidecar");
  generate->add_option("--m", gen.m, "Rows");
  generate->add_option("--n", gen.n, "Columns");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--preset", gen.preset, "desk (200x20) or large (1000x200)")
      ->check(CLI::IsMember({"desk", "large"}));
  generate->add_option("--residual-scale", gen.residual_scale,
                       "Size of a null-space residual relative to ||b||; 0 gives a consistent system")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--out", gen.out, "Output prefix: PREFIX_A.csv, PREFIX_b.csv, PREFIX.json");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run trials from a config and write the mean error trace");
  solve_cmd->add_option("--config", solve.config, "Experiment config JSON")->required();
  solve_cmd->add_option("--output", solve.output, "Trace CSV (overrides the config)");

  BoundsArgs bnd;
  auto* bounds = app.add_subcommand("bounds", "Print the theoretical constants as JSON");
  bounds->add_option("--config", bnd.config, "Experiment config JSON");
  bnd.problem.add_to(*bounds);
  bounds->add_option("--p", bnd.p, "Observation probability");
  bounds->add_option("--alpha", bnd.alpha, "Fixed step size; adds rate and horizon");
  bounds->add_option("--radius", bnd.radius, "Projection radius (default 10*||x*||)");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare-imputation", "mSGD against SGD on imputed matrices");
  compare->add_option("--config", cmp.config, "Experiment config JSON")->required();
  compare->add_option("--output", cmp.output, "Base CSV path; strategy suffixes are appended to its stem");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Check unbiasedness and bound containment");
  ver.problem.add_to(*verify);
  verify->add_option("--p", ver.p, "Observation probability for the sampled checks");
  verify->add_option("--samples", ver.samples, "Monte Carlo samples per point");
  verify->add_option("--seed", ver.seed, "Seed for the built-in instances and sampling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*generate) {
      return cmd_generate(gen, *generate);
    }
    if (*solve_cmd) {
      return cmd_solve(solve);
    }
    if (*bounds) {
      return cmd_bounds(bnd);
    }
    if (*compare) {
      return cmd_compare(cmp);
    }
    return cmd_verify(ver);
  } catch (const msgd::ConfigError& e) {
    std::cerr << "msgd: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const msgd::NumericalError& e) {
    std::cerr << "msgd: numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "msgd: invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "msgd: error: " << e.what() << '\n';
    return 1;
  }
}
