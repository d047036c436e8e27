#ifndef MSGD_CONFIG_HPP
#define MSGD_CONFIG_HPP

// JSON experiment configuration. Every object rejects unknown keys and
// reports the offending field by its dotted path.
//
// {
//   "problem": {"generator": "gaussian_consistent", "m": 200, "n": 20, "seed": 1}
//            | {"generator": "gaussian_inconsistent", "preset": "large", "residual_scale": 0.1, "seed": 1}
//            | {"matrix": "A.csv", "rhs": "b.csv" | "rhs_column": 3, "header": false},
//   "p": 0.7,
//   "mask_mode": "resample" | "frozen",
//   "schedule": {"type": "fixed", "alpha": 1e-4}
//             | {"type": "inverse_decay", "c": 0.01, "mu_hat": "sigma_min_sq" | "mu" | 2.5}
//             | {"type": "geometric_staged", "c": 0.001, "mu_hat": ..., "ratio": 0.8, "period": 100000},
//   "radius": "auto" | 50.0,
//   "iterations": 200000, "trial_count": 20, "record_every": 1000,
//   "root_seed": 7, "output": "trace.csv",
//   "corpus_rows": 20000            (compare-imputation only; optional)
// }

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "msgd/error.hpp"
#include "msgd/experiments.hpp"
#include "msgd/io.hpp"
#include "msgd/masking.hpp"
#include "msgd/problem.hpp"
#include "msgd/solver.hpp"
#include "msgd/trace.hpp"

namespace msgd {

struct GeneratedProblemSpec {
  std::string generator;  // gaussian_consistent | gaussian_inconsistent
  std::int64_t m = kDeskSize.m;
  std::int64_t n = kDeskSize.n;
  std::uint64_t seed = 0;
  double residual_scale = 0.1;
};

struct CsvProblemSpec {
  std::filesystem::path matrix;
  RhsSpec rhs;
  bool header = false;
};

/// mu_hat for decaying schedules: a number, or derived from A as
/// sigma_min(A)^2 ("sigma_min_sq") or sigma_min(A)^2 / m ("mu").
using MuHatSpec = std::variant<double, std::string>;

struct ScheduleSpec {
  std::string type = "fixed";
  double alpha = 1e-4;
  double c = 1e-2;
  MuHatSpec mu_hat = std::string("sigma_min_sq");
  double ratio = 0.8;
  std::size_t period = 100000;
};

struct ExperimentConfig {
  std::variant<GeneratedProblemSpec, CsvProblemSpec> problem;
  double p = 1.0;
  MaskMode mask_mode = MaskMode::kResampleEachIteration;
  ScheduleSpec schedule;
  std::optional<double> radius;  // absent means "auto"
  std::size_t iterations = 1;
  std::size_t trial_count = 20;
  std::size_t record_every = 1;
  std::uint64_t root_seed = 0;
  std::filesystem::path output = "trace.csv";
  std::size_t corpus_rows = 0;

  nlohmann::json source;  // as parsed, used for the digest
};

namespace detail {

class FieldReader {
 public:
  FieldReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw ConfigError(where() + ": expected a JSON object");
    }
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& item : obj_.items()) {
      bool known = false;
      for (const char* k : keys) {
        known = known || item.key() == k;
      }
      if (!known) {
        throw ConfigError(field(item.key()) + ": unknown field");
      }
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const nlohmann::json& raw(const char* key) const {
    if (!obj_.contains(key)) {
      throw ConfigError(field(key) + ": missing required field");
    }
    return obj_.at(key);
  }

  double number(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_number()) {
      throw ConfigError(field(key) + ": expected a number");
    }
    return v.get<double>();
  }

  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t count(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(field(key) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::uint64_t count_or(const char* key, std::uint64_t fallback) const { return has(key) ? count(key) : fallback; }

  std::string text(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_string()) {
      throw ConfigError(field(key) + ": expected a string");
    }
    return v.get<std::string>();
  }

  bool boolean_or(const char* key, bool fallback) const {
    if (!has(key)) {
      return fallback;
    }
    const auto& v = raw(key);
    if (!v.is_boolean()) {
      throw ConfigError(field(key) + ": expected true or false");
    }
    return v.get<bool>();
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const nlohmann::json& obj_;
  std::string path_;
};

inline std::variant<GeneratedProblemSpec, CsvProblemSpec> parse_problem(const nlohmann::json& j,
                                                                        const std::filesystem::path& base_dir) {
  FieldReader r(j, "problem");
  if (r.has("generator")) {
    r.allow_only({"generator", "preset", "m", "n", "seed", "residual_scale"});
    GeneratedProblemSpec g;
    g.generator = r.text("generator");
    if (g.generator != "gaussian_consistent" && g.generator != "gaussian_inconsistent") {
      throw ConfigError(r.field("generator") + ": must be gaussian_consistent or gaussian_inconsistent");
    }
    ProblemSize size = kDeskSize;
    if (r.has("preset")) {
      const std::string preset = r.text("preset");
      if (preset == "large") {
        size = kLargeSize;
      } else if (preset != "desk") {
        throw ConfigError(r.field("preset") + ": must be desk or large");
      }
    }
    g.m = static_cast<std::int64_t>(r.count_or("m", static_cast<std::uint64_t>(size.m)));
    g.n = static_cast<std::int64_t>(r.count_or("n", static_cast<std::uint64_t>(size.n)));
    if (g.m < 1 || g.n < 1 || g.m < g.n) {
      throw ConfigError(r.field("m") + ": need m >= n >= 1");
    }
    g.seed = r.count_or("seed", 0);
    g.residual_scale = r.number_or("residual_scale", 0.1);
    if (g.residual_scale < 0.0) {
      throw ConfigError(r.field("residual_scale") + ": must be non-negative");
    }
    if (g.generator == "gaussian_consistent" && r.has("residual_scale")) {
      throw ConfigError(r.field("residual_scale") + ": only valid for gaussian_inconsistent");
    }
    return g;
  }
  r.allow_only({"matrix", "rhs", "rhs_column", "header"});
  CsvProblemSpec c;
  c.matrix = base_dir / r.text("matrix");
  if (!std::filesystem::exists(c.matrix)) {
    throw ConfigError(r.field("matrix") + ": file not found: " + c.matrix.string());
  }
  if (r.has("rhs") == r.has("rhs_column")) {
    throw ConfigError(r.field("rhs") + ": give exactly one of rhs or rhs_column");
  }
  if (r.has("rhs")) {
    c.rhs.path = base_dir / r.text("rhs");
    if (!std::filesystem::exists(*c.rhs.path)) {
      throw ConfigError(r.field("rhs") + ": file not found: " + c.rhs.path->string());
    }
  } else {
    c.rhs.column = static_cast<std::size_t>(r.count("rhs_column"));
  }
  c.header = r.boolean_or("header", false);
  return c;
}

inline ScheduleSpec parse_schedule(const nlohmann::json& j) {
  FieldReader r(j, "schedule");
  ScheduleSpec s;
  s.type = r.text("type");
  auto read_mu_hat = [&]() {
    if (!r.has("mu_hat")) {
      return;
    }
    const auto& v = r.raw("mu_hat");
    if (v.is_number()) {
      s.mu_hat = v.get<double>();
      if (!(std::get<double>(s.mu_hat) > 0.0)) {
        throw ConfigError(r.field("mu_hat") + ": must be positive");
      }
    } else if (v.is_string() && (v.get<std::string>() == "sigma_min_sq" || v.get<std::string>() == "mu")) {
      s.mu_hat = v.get<std::string>();
    } else {
      throw ConfigError(r.field("mu_hat") + ": expected a positive number, \"sigma_min_sq\" or \"mu\"");
    }
  };
  if (s.type == "fixed") {
    r.allow_only({"type", "alpha"});
    s.alpha = r.number("alpha");
    if (!(s.alpha > 0.0)) {
      throw ConfigError(r.field("alpha") + ": must be positive");
    }
  } else if (s.type == "inverse_decay") {
    r.allow_only({"type", "c", "mu_hat"});
    s.c = r.number_or("c", 1e-2);
    read_mu_hat();
  } else if (s.type == "geometric_staged") {
    r.allow_only({"type", "c", "mu_hat", "ratio", "period"});
    s.c = r.number_or("c", 1e-2);
    read_mu_hat();
    s.ratio = r.number_or("ratio", 0.8);
    s.period = static_cast<std::size_t>(r.count_or("period", 100000));
    if (!(s.ratio > 0.0 && s.ratio < 1.0)) {
      throw ConfigError(r.field("ratio") + ": must lie in (0, 1)");
    }
    if (s.period < 1) {
      throw ConfigError(r.field("period") + ": must be at least 1");
    }
  } else {
    throw ConfigError(r.field("type") + ": must be fixed, inverse_decay or geometric_staged");
  }
  if (!(s.c > 0.0)) {
    throw ConfigError(r.field("c") + ": must be positive");
  }
  return s;
}

}  // namespace detail

/// Parses and validates a config. Relative input paths resolve against
/// `base_dir` (the config file's directory).
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  detail::FieldReader r(j, "");
  r.allow_only({"problem", "p", "mask_mode", "schedule", "radius", "iterations", "trial_count", "record_every",
                "root_seed", "output", "corpus_rows"});
  ExperimentConfig cfg;
  cfg.source = j;
  cfg.problem = detail::parse_problem(r.raw("problem"), base_dir);
  cfg.p = r.number("p");
  if (!(cfg.p > 0.0 && cfg.p <= 1.0)) {
    throw ConfigError("p: must lie in (0, 1]");
  }
  if (r.has("mask_mode")) {
    const std::string mode = r.text("mask_mode");
    if (mode == "frozen") {
      cfg.mask_mode = MaskMode::kFrozenMatrixMask;
    } else if (mode != "resample") {
      throw ConfigError("mask_mode: must be resample or frozen");
    }
  }
  cfg.schedule = detail::parse_schedule(r.raw("schedule"));
  if (r.has("radius")) {
    const auto& v = r.raw("radius");
    if (v.is_string()) {
      if (v.get<std::string>() != "auto") {
        throw ConfigError("radius: expected a positive number or \"auto\"");
      }
    } else if (v.is_number() && v.get<double>() > 0.0) {
      cfg.radius = v.get<double>();
    } else {
      throw ConfigError("radius: expected a positive number or \"auto\"");
    }
  }
  cfg.iterations = static_cast<std::size_t>(r.count("iterations"));
  if (cfg.iterations < 1) {
    throw ConfigError("iterations: must be at least 1");
  }
  cfg.trial_count = static_cast<std::size_t>(r.count_or("trial_count", 20));
  if (cfg.trial_count < 1) {
    throw ConfigError("trial_count: must be at least 1");
  }
  cfg.record_every = static_cast<std::size_t>(r.count_or("record_every", 1));
  if (cfg.record_every < 1) {
    throw ConfigError("record_every: must be at least 1");
  }
  cfg.root_seed = r.count_or("root_seed", 0);
  if (r.has("output")) {
    cfg.output = r.text("output");
  }
  cfg.corpus_rows = static_cast<std::size_t>(r.count_or("corpus_rows", 0));
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

inline Problem build_problem(const ExperimentConfig& cfg) {
  if (const auto* g = std::get_if<GeneratedProblemSpec>(&cfg.problem)) {
    if (g->generator == "gaussian_consistent") {
      return gen_gaussian_consistent(g->m, g->n, g->seed);
    }
    return gen_gaussian_inconsistent(g->m, g->n, g->residual_scale, g->seed);
  }
  const auto& c = std::get<CsvProblemSpec>(cfg.problem);
  return load_csv_problem(c.matrix, c.rhs, c.header);
}

/// A config with every "auto" value resolved against its problem.
struct ResolvedExperiment {
  Problem problem;
  RunSpec spec;
  double mu_hat = 0.0;  // 0 for fixed schedules
  bool radius_was_auto = false;
  std::string digest;
};

inline double resolve_mu_hat(const MuHatSpec& spec, const Matrix& a) {
  if (const auto* v = std::get_if<double>(&spec)) {
    return *v;
  }
  const double s = sigma_min_sq(a);
  return std::get<std::string>(spec) == "mu" ? s / static_cast<double>(a.rows()) : s;
}

inline ResolvedExperiment resolve(const ExperimentConfig& cfg) {
  ResolvedExperiment out;
  out.problem = build_problem(cfg);
  validate_problem(out.problem);
  const Vector& x_star = *out.problem.x_star;

  double radius = 0.0;
  if (cfg.radius) {
    radius = *cfg.radius;
  } else {
    out.radius_was_auto = true;
    radius = 10.0 * x_star.norm();
    if (!(radius > 0.0)) {
      radius = 1.0;
    }
  }
  if (x_star.norm() > radius) {
    throw ConfigError("radius: projection ball of radius " + std::to_string(radius) +
                      " does not contain x_star (norm " + std::to_string(x_star.norm()) + ")");
  }

  const ScheduleSpec& s = cfg.schedule;
  Schedule schedule = Schedule::fixed(s.type == "fixed" ? s.alpha : 1.0);
  if (s.type != "fixed") {
    out.mu_hat = resolve_mu_hat(s.mu_hat, out.problem.a);
    schedule = s.type == "inverse_decay" ? Schedule::inverse_decay(s.c, out.mu_hat)
                                         : Schedule::geometric_staged(s.c, out.mu_hat, s.ratio, s.period);
  }

  out.spec.model = MaskModel(cfg.p, cfg.mask_mode);
  out.spec.schedule = schedule;
  out.spec.domain = ProjectionDomain(radius);
  out.spec.iterations = cfg.iterations;
  out.spec.record_every = cfg.record_every;

  // Digest covers the parsed config, the resolved values and the data.
  nlohmann::json canon = cfg.source;
  canon["resolved"] = {{"radius", format_double(radius)}, {"mu_hat", format_double(out.mu_hat)}};
  std::string data;
  data.reserve(static_cast<std::size_t>(out.problem.a.size() + out.problem.b.size()) * 8);
  data.append(reinterpret_cast<const char*>(out.problem.a.data()),
              static_cast<std::size_t>(out.problem.a.size()) * sizeof(double));
  data.append(reinterpret_cast<const char*>(out.problem.b.data()),
              static_cast<std::size_t>(out.problem.b.size()) * sizeof(double));
  canon["resolved"]["data"] = fnv1a_hex(data);
  out.digest = fnv1a_hex(canon.dump());
  return out;
}

}  // namespace msgd

#endif  // MSGD_CONFIG_HPP
