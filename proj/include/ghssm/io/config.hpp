#pragma once

// Run configuration: flat "key = value" text with '#' comments.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ghssm/filter/smcmc.hpp"
#include "ghssm/io/csv.hpp"

namespace ghssm::io {

inline constexpr const char* kSeedEnvVar = "LEVY_SSM_SEED";

struct RunConfig {
  // Langevin model.  Defaults are the synthetic experiment settings.
  double theta = -0.5;
  double mu_w = 0.0;
  double sigma_w = 1.0;
  double mu = 0.0;
  double lambda = -0.8;
  double delta = 1.0;
  double gamma = 0.01;
  double sigma_eps = 0.1;

  // Filter.
  int n_iter = 100;
  int burn_in = 0;
  std::optional<double> z1;
  double gamma_max = 2000.0;
  std::uint64_t seed = 0;

  // simulate
  int n_obs = 200;
  double t_end = 100.0;

  // validate
  int validate_samples = 2000;
  int moment_resamples = 100000;

  [[nodiscard]] GHParams gh() const { return {GIGParams(lambda, delta, gamma), mu_w, sigma_w, mu}; }
  [[nodiscard]] LinearSSM ssm() const { return LinearSSM::langevin(theta, sigma_eps, gh()); }
  [[nodiscard]] FilterConfig filter() const {
    return {n_iter, burn_in, z1, TruncationBudget{gamma_max}, seed, false};
  }

  /// Throws std::invalid_argument / std::domain_error on inconsistent values.
  void validate() const {
    (void)ssm();
    filter().validate();
    if (z1 && *z1 > z1_upper_bound(lambda) * (1.0 + 1e-12))
      throw std::domain_error("z1 exceeds its upper bound for this lambda");
    if (n_obs < 0) throw std::invalid_argument("n_obs must be non-negative");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
    if (validate_samples < 10) throw std::invalid_argument("validate_samples must be at least 10");
    if (moment_resamples < 10) throw std::invalid_argument("moment_resamples must be at least 10");
  }
};

namespace detail {

inline int parse_int(const std::string& v, const std::string& where) {
  const double d = parse_double(v, where);
  if (d != std::floor(d) || std::fabs(d) > 2e9) throw ParseError(where + ": not an integer: '" + v + "'");
  return static_cast<int>(d);
}

inline std::uint64_t parse_seed(const std::string& v, const std::string& where) {
  const auto s = trim(v);
  std::uint64_t out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(where + ": not an unsigned 64-bit seed: '" + std::string(s) + "'");
  return out;
}

}  // namespace detail

/// Applies one key to the config.  Unknown keys are errors.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value,
                             const std::string& where) {
  auto real = [&] { return parse_double(value, where); };
  auto integer = [&] { return detail::parse_int(value, where); };
  if (key == "theta") c.theta = real();
  else if (key == "mu_w") c.mu_w = real();
  else if (key == "sigma_w") c.sigma_w = real();
  else if (key == "mu") c.mu = real();
  else if (key == "lambda") c.lambda = real();
  else if (key == "delta") c.delta = real();
  else if (key == "gamma") c.gamma = real();
  else if (key == "sigma_eps") c.sigma_eps = real();
  else if (key == "n_iter") c.n_iter = integer();
  else if (key == "burn_in") c.burn_in = integer();
  else if (key == "z1") c.z1 = trim(value) == "auto" ? std::nullopt : std::optional<double>(real());
  else if (key == "gamma_max") c.gamma_max = real();
  else if (key == "seed") c.seed = detail::parse_seed(value, where);
  else if (key == "n_obs") c.n_obs = integer();
  else if (key == "t_end") c.t_end = real();
  else if (key == "validate_samples") c.validate_samples = integer();
  else if (key == "moment_resamples") c.moment_resamples = integer();
  else throw ParseError(where + ": unknown key '" + key + "'");
}

inline void read_config(std::istream& in, const std::string& source, RunConfig& c) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    auto view = trim(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = trim(view.substr(0, hash));
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + ": expected key = value");
    const std::string key(trim(view.substr(0, eq)));
    const std::string value(trim(view.substr(eq + 1)));
    if (key.empty()) throw ParseError(where + ": empty key");
    set_config_value(c, key, value, where);
  }
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  RunConfig c;
  read_config(in, path, c);
  return c;
}

/// Seed precedence: explicit flag, then LEVY_SSM_SEED, then the config value.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_seed) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnvVar); env && *env)
    return detail::parse_seed(env, std::string(kSeedEnvVar));
  return config_seed;
}

}  // namespace ghssm::io
