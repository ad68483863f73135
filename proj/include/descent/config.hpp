#pragma once

#include "descent/manifold.hpp"
#include "descent/noise.hpp"
#include "descent/objective.hpp"
#include "descent/optimize.hpp"
#include "descent/schedule.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace descent {

/// Configuration error; `key` names the offending entry when one exists.
struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string key_, const std::string& message)
      : std::runtime_error(key_.empty() ? message : "[" + key_ + "] " + message),
        key(std::move(key_)) {}
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double_strict(std::string_view s, const std::string& key) {
  const auto t = trim(s);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError(key, "not a number: '" + std::string(t) + "'");
  return v;
}

inline std::int64_t parse_int_strict(std::string_view s, const std::string& key) {
  const auto t = trim(s);
  std::int64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError(key, "not an integer: '" + std::string(t) + "'");
  return v;
}

inline std::uint64_t parse_u64_strict(std::string_view s, const std::string& key) {
  const auto t = trim(s);
  std::uint64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError(key, "not a nonnegative integer: '" + std::string(t) + "'");
  return v;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<double> parse_vector(std::string_view s, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split_ws(s)) out.push_back(parse_double_strict(tok, key));
  if (out.empty()) throw ConfigError(key, "expected at least one number");
  return out;
}

/// Matrix literal: rows delimited by ';', entries by whitespace.
inline Matrix parse_matrix(std::string_view s, const std::string& key) {
  std::vector<std::vector<double>> rows;
  std::size_t start = 0;
  const std::string text(s);
  while (start <= text.size()) {
    const std::size_t pos = text.find(';', start);
    const std::string_view row_text =
        pos == std::string::npos ? std::string_view(text).substr(start)
                                 : std::string_view(text).substr(start, pos - start);
    rows.push_back(parse_vector(row_text, key));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) throw ConfigError(key, "matrix rows have unequal lengths");
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

/// "head key1=v1 key2=v2" value form used by schedule and noise entries.
struct TaggedValue {
  std::string head;
  std::map<std::string, double> params;
};

inline TaggedValue parse_tagged(std::string_view s, const std::string& key) {
  const auto tokens = split_ws(s);
  if (tokens.empty()) throw ConfigError(key, "empty value");
  TaggedValue tv;
  tv.head = tokens.front();
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto pos = tokens[i].find('=');
    if (pos == std::string::npos)
      throw ConfigError(key, "expected name=value, got '" + tokens[i] + "'");
    const std::string name = tokens[i].substr(0, pos);
    if (tv.params.count(name)) throw ConfigError(key, "duplicate parameter '" + name + "'");
    tv.params[name] = parse_double_strict(tokens[i].substr(pos + 1), key);
  }
  return tv;
}

inline double take_param(TaggedValue& tv, const std::string& name, const std::string& key) {
  auto it = tv.params.find(name);
  if (it == tv.params.end()) throw ConfigError(key, tv.head + " requires parameter " + name);
  const double v = it->second;
  tv.params.erase(it);
  return v;
}

inline void expect_no_params(const TaggedValue& tv, const std::string& key) {
  if (!tv.params.empty())
    throw ConfigError(key, "unknown parameter '" + tv.params.begin()->first + "' for " + tv.head);
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "objective.kind",    "objective.dim",      "objective.quadratic.A",
      "objective.quadratic.b", "manifold.kind",  "manifold.dim",
      "schedule.alpha",    "schedule.beta",      "noise.family",
      "noise.q",           "noise.override",     "run.x0",
      "run.seed",          "run.seeds",          "run.max_iters",
      "run.grad_tol",      "run.step_rule",      "run.trace_coords",
      "run.fit_window",
  };
  return keys;
}

inline const std::set<std::string>& known_sections() {
  static const std::set<std::string> sections = {"objective", "manifold", "schedule", "noise", "run"};
  return sections;
}

}  // namespace detail

/// Line-oriented `key = value` experiment description with sections
/// [objective], [manifold], [schedule], [noise], [run]. Inside a section a
/// bare key is prefixed with the section name; keys already carrying a known
/// section prefix are taken as fully qualified. Unknown keys are hard errors.
/// '#' starts a comment.
class ExperimentConfig {
 public:
  enum class Method { Rgd, Momentum, Sgd };

  static ExperimentConfig parse_string(std::string_view text) {
    ExperimentConfig cfg;
    std::string section;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t nl = text.find('\n', start);
      std::string_view line =
          nl == std::string_view::npos ? text.substr(start) : text.substr(start, nl - start);
      start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("", "line " + std::to_string(line_no) + ": malformed section header");
        section = std::string(detail::trim(line.substr(1, line.size() - 2)));
        if (!detail::known_sections().count(section))
          throw ConfigError(section, "unknown section");
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
      std::string key(detail::trim(line.substr(0, eq)));
      const std::string value(detail::trim(line.substr(eq + 1)));
      const std::size_t dot = key.find('.');
      const bool qualified = dot != std::string::npos &&
                             detail::known_sections().count(key.substr(0, dot)) > 0;
      if (!qualified) {
        if (section.empty())
          throw ConfigError(key, "key outside any section must carry a section prefix");
        key = section + "." + key;
      }
      if (cfg.values_.count(key)) throw ConfigError(key, "duplicate key");
      cfg.set(key, value);
    }
    return cfg;
  }

  static ExperimentConfig parse_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("", "cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str());
  }

  /// Sets (or replaces) one entry; the key must be known.
  void set(const std::string& key, const std::string& value) {
    if (!detail::known_keys().count(key)) throw ConfigError(key, "unknown key");
    values_[key] = value;
  }

  /// Removes an entry if present (e.g. a config seed range displaced by a
  /// command-line seed).
  void erase(const std::string& key) { values_.erase(key); }

  /// Applies a `key=value` override (full dotted key).
  void apply_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "override must have the form key=value: '" + assignment + "'");
    set(std::string(detail::trim(assignment.substr(0, eq))),
        std::string(detail::trim(assignment.substr(eq + 1))));
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "required key is missing");
    return it->second;
  }

  /// Seed sweep, ascending. run.seeds = "A..B" (inclusive) or run.seed = N
  /// (default 0); both together are ambiguous and rejected.
  std::vector<std::uint64_t> seeds() const {
    if (has("run.seeds") && has("run.seed"))
      throw ConfigError("run.seeds", "give either run.seed or run.seeds, not both");
    if (has("run.seeds")) {
      const std::string& v = at("run.seeds");
      const std::size_t pos = v.find("..");
      if (pos == std::string::npos)
        throw ConfigError("run.seeds", "expected A..B, got '" + v + "'");
      const std::uint64_t a = detail::parse_u64_strict(v.substr(0, pos), "run.seeds");
      const std::uint64_t b = detail::parse_u64_strict(v.substr(pos + 2), "run.seeds");
      if (b < a) throw ConfigError("run.seeds", "range is empty");
      if (b - a >= 1000000) throw ConfigError("run.seeds", "range is unreasonably large");
      std::vector<std::uint64_t> out;
      for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
      return out;
    }
    return {has("run.seed") ? detail::parse_u64_strict(at("run.seed"), "run.seed") : 0};
  }

  bool trace_coords() const {
    if (!has("run.trace_coords")) return false;
    const std::string& v = at("run.trace_coords");
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("run.trace_coords", "expected true or false, got '" + v + "'");
  }

  std::optional<std::pair<std::int64_t, std::int64_t>> fit_window() const {
    if (!has("run.fit_window")) return std::nullopt;
    const std::string& v = at("run.fit_window");
    const std::size_t pos = v.find(':');
    if (pos == std::string::npos)
      throw ConfigError("run.fit_window", "expected A:B, got '" + v + "'");
    return std::make_pair(detail::parse_int_strict(v.substr(0, pos), "run.fit_window"),
                          detail::parse_int_strict(v.substr(pos + 1), "run.fit_window"));
  }

  /// Which iteration scheme the entries describe: noise present -> sgd;
  /// a momentum rule other than zero -> momentum; otherwise plain descent.
  Method method() const {
    if (has("noise.family")) return Method::Sgd;
    if (has("schedule.beta") && at("schedule.beta") != "zero") return Method::Momentum;
    return Method::Rgd;
  }

  /// Builds the validated RunConfig for one seed. Objective, manifold, point
  /// and schedule constructors enforce their own invariants; anything
  /// config-shaped is rethrown as ConfigError with the offending key.
  RunConfig build_run_config(std::uint64_t seed) const {
    const ManifoldKind manifold = build_manifold();
    RunConfig rc{build_objective(manifold), manifold, build_x0(manifold), build_schedule(),
                 StepRule::ExpMap,          {},       {},                 seed,
                 0,                         0.0,      values_};
    rc.step_rule = build_step_rule();
    rc.noise = build_noise(manifold);
    if (has("noise.override")) {
      if (!rc.noise) throw ConfigError("noise.override", "override given without a noise family");
      rc.noise_override = detail::parse_vector(at("noise.override"), "noise.override");
    }
    rc.max_iters = detail::parse_int_strict(at("run.max_iters"), "run.max_iters");
    if (rc.max_iters < 0) throw ConfigError("run.max_iters", "must be >= 0");
    if (has("run.grad_tol")) {
      rc.grad_tol = detail::parse_double_strict(at("run.grad_tol"), "run.grad_tol");
      if (!(rc.grad_tol >= 0)) throw ConfigError("run.grad_tol", "must be >= 0");
    }
    return rc;
  }

 private:
  ManifoldKind build_manifold() const {
    const std::string& kind = at("manifold.kind");
    const std::int64_t dim = detail::parse_int_strict(at("manifold.dim"), "manifold.dim");
    try {
      if (kind == "euclidean") return ManifoldKind::euclidean(static_cast<int>(dim));
      if (kind == "sphere") return ManifoldKind::sphere(static_cast<int>(dim));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("manifold.dim", e.what());
    }
    throw ConfigError("manifold.kind", "expected euclidean or sphere, got '" + kind + "'");
  }

  Objective build_objective(const ManifoldKind& manifold) const {
    const std::string& kind = at("objective.kind");
    if (has("objective.dim")) {
      const std::int64_t dim = detail::parse_int_strict(at("objective.dim"), "objective.dim");
      if (dim != manifold.dim)
        throw ConfigError("objective.dim", "does not match manifold.dim");
      if (kind == "quadratic")
        throw ConfigError("objective.dim", "quadratic dimension comes from quadratic.b");
    }
    try {
      if (kind == "sphere_height") return Objective::sphere_height(manifold.dim);
      if (kind == "half_square") return Objective::half_square(manifold.dim);
      if (kind == "quadratic") {
        const Matrix a = detail::parse_matrix(at("objective.quadratic.A"), "objective.quadratic.A");
        const auto b_vals = detail::parse_vector(at("objective.quadratic.b"), "objective.quadratic.b");
        Vector b(static_cast<Eigen::Index>(b_vals.size()));
        for (std::size_t i = 0; i < b_vals.size(); ++i) b[static_cast<Eigen::Index>(i)] = b_vals[i];
        if (b.size() != manifold.dim)
          throw ConfigError("objective.quadratic.b", "dimension does not match manifold.dim");
        return Objective::quadratic(a, b);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("objective.kind", e.what());
    }
    throw ConfigError("objective.kind",
                      "expected sphere_height, quadratic or half_square, got '" + kind + "'");
  }

  ManifoldPoint build_x0(const ManifoldKind& manifold) const {
    const std::string& v = at("run.x0");
    try {
      if (v.rfind("perturbed_pole", 0) == 0) {
        if (!manifold.is_sphere())
          throw ConfigError("run.x0", "perturbed_pole requires a sphere manifold");
        auto tv = detail::parse_tagged(v, "run.x0");
        const double theta = detail::take_param(tv, "theta", "run.x0");
        detail::expect_no_params(tv, "run.x0");
        Vector x = Vector::Zero(manifold.dim);
        x[0] = std::sin(theta);
        x[manifold.dim - 1] = std::cos(theta);
        return {manifold, std::move(x)};
      }
      const auto vals = detail::parse_vector(v, "run.x0");
      Vector x(static_cast<Eigen::Index>(vals.size()));
      for (std::size_t i = 0; i < vals.size(); ++i) x[static_cast<Eigen::Index>(i)] = vals[i];
      return {manifold, std::move(x)};
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("run.x0", e.what());
    }
  }

  ScheduleSpec build_schedule() const {
    ScheduleSpec s;
    auto alpha = detail::parse_tagged(at("schedule.alpha"), "schedule.alpha");
    try {
      if (alpha.head == "fixed") {
        s.alpha = AlphaRule::fixed(detail::take_param(alpha, "value", "schedule.alpha"));
      } else if (alpha.head == "powerlaw") {
        const double c = detail::take_param(alpha, "c", "schedule.alpha");
        const double gamma = detail::take_param(alpha, "gamma", "schedule.alpha");
        if (has("noise.family") && !(gamma > 0.5 && gamma <= 1.0))
          throw ConfigError("schedule.alpha",
                            "stochastic descent requires gamma in (0.5, 1]; got gamma=" +
                                std::to_string(gamma));
        s.alpha = AlphaRule::power_law(c, gamma);
      } else if (alpha.head == "linesearch") {
        s.alpha = AlphaRule::exact_line_search();
      } else {
        throw ConfigError("schedule.alpha",
                          "expected fixed, powerlaw or linesearch, got '" + alpha.head + "'");
      }
      detail::expect_no_params(alpha, "schedule.alpha");

      if (has("schedule.beta")) {
        auto beta = detail::parse_tagged(at("schedule.beta"), "schedule.beta");
        if (beta.head == "zero") {
          s.beta = BetaRule::zero();
        } else if (beta.head == "powerlaw") {
          const double d = detail::take_param(beta, "d", "schedule.beta");
          const double gamma = detail::take_param(beta, "gamma", "schedule.beta");
          s.beta = BetaRule::power_law(d, gamma);
        } else if (beta.head == "stepratio") {
          s.beta = BetaRule::step_ratio();
        } else {
          throw ConfigError("schedule.beta",
                            "expected zero, powerlaw or stepratio, got '" + beta.head + "'");
        }
        detail::expect_no_params(beta, "schedule.beta");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("schedule.alpha", e.what());
    }
    return s;
  }

  StepRule build_step_rule() const {
    if (!has("run.step_rule")) return StepRule::ExpMap;
    const std::string& v = at("run.step_rule");
    if (v == "expmap") return StepRule::ExpMap;
    if (v == "retract") return StepRule::NormalizeRetract;
    if (v == "ambient") return StepRule::Ambient;
    throw ConfigError("run.step_rule", "expected expmap, retract or ambient, got '" + v + "'");
  }

  std::optional<NoiseSpec> build_noise(const ManifoldKind& manifold) const {
    if (!has("noise.family")) {
      if (has("noise.q")) throw ConfigError("noise.q", "noise.q given without a noise family");
      return std::nullopt;
    }
    auto tv = detail::parse_tagged(at("noise.family"), "noise.family");
    const double q = has("noise.q") ? detail::parse_double_strict(at("noise.q"), "noise.q") : 4.0;
    try {
      if (tv.head == "zero") {
        detail::expect_no_params(tv, "noise.family");
        return NoiseSpec::zero(manifold.dim, q);
      }
      if (tv.head == "uniform") {
        const double a = detail::take_param(tv, "a", "noise.family");
        detail::expect_no_params(tv, "noise.family");
        return NoiseSpec::uniform(a, q, manifold.dim);
      }
      if (tv.head == "student_t") {
        const double nu = detail::take_param(tv, "nu", "noise.family");
        const double scale = detail::take_param(tv, "scale", "noise.family");
        detail::expect_no_params(tv, "noise.family");
        return NoiseSpec::student_t(nu, scale, q, manifold.dim);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("noise.family", e.what());
    }
    throw ConfigError("noise.family",
                      "expected zero, uniform or student_t, got '" + tv.head + "'");
  }

  std::map<std::string, std::string> values_;
};

}  // namespace descent
