#pragma once

// Subcommand bodies.  Each returns a process exit code: 0 success, 1 failed
// validation or runtime failure, 2 usage or parse error.  Diagnostics go to
// `log`.

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghssm/filter/smcmc.hpp"
#include "ghssm/io/config.hpp"
#include "ghssm/io/csv.hpp"
#include "ghssm/io/svg.hpp"
#include "ghssm/ssm/linear_ssm.hpp"
#include "ghssm/validation/suites.hpp"

namespace ghssm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

inline io::SeriesFile read_series_file(const std::string& path, std::ostream& log) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::ParseError("cannot open '" + path + "'");
  auto s = io::series_from_table(io::read_csv(in, path));
  const auto rep = io::normalize_series(s);
  if (rep.out_of_order > 0)
    log << "warning: " << path << ": " << rep.out_of_order << " row(s) out of time order; series sorted\n";
  if (rep.duplicates > 0)
    log << "warning: " << path << ": " << rep.duplicates << " row(s) with repeated time dropped\n";
  return s;
}

/// Maps exceptions onto exit codes.
template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const io::ParseError& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    log << "error: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    log << "error: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace detail

struct SimulateArgs {
  std::string out = "observations.csv";
  std::string truth;                  // default: <out>.truth.csv
  std::optional<std::string> jumps;   // optional jump listing
  std::optional<std::string> times;   // optional CSV with a time column
};

/// Observation times: user-supplied or n_obs evenly spaced on (0, t_end].
inline std::vector<double> observation_times(const io::RunConfig& c, const std::optional<std::string>& path) {
  std::vector<double> t;
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw io::ParseError("cannot open '" + *path + "'");
    const auto table = io::read_csv(in, *path);
    const std::size_t col = table.has_column("time") ? table.column("time") : 0;
    for (const auto& r : table.rows) t.push_back(r[col]);
    return t;
  }
  for (int i = 1; i <= c.n_obs; ++i) t.push_back(c.t_end * i / c.n_obs);
  return t;
}

inline int cmd_simulate(const io::RunConfig& c, const SimulateArgs& args, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    c.validate();
    const auto ssm = c.ssm();
    const auto times = observation_times(c, args.times);
    RandomStream rng(c.seed);
    const auto path = simulate_path(ssm, Vector::Zero(ssm.dim()), times, TruncationBudget{c.gamma_max}, c.z1, rng);

    std::vector<std::vector<double>> obs_rows, truth_rows, jump_rows;
    for (std::size_t i = 0; i < times.size(); ++i) {
      obs_rows.push_back({times[i], path.observations[i]});
      std::vector<double> row{times[i]};
      for (Eigen::Index k = 0; k < ssm.dim(); ++k) row.push_back(path.states[i][k]);
      truth_rows.push_back(std::move(row));
      for (const auto& r : path.jumps[i].records) jump_rows.push_back({static_cast<double>(i), r.time, r.z});
    }

    auto out = detail::open_out(args.out);
    io::write_provenance(out, c.seed);
    io::write_csv(out, {"time", "y"}, obs_rows);

    auto truth = detail::open_out(args.truth.empty() ? args.out + ".truth.csv" : args.truth);
    io::write_provenance(truth, c.seed);
    io::write_csv(truth, {"time", "x", "xdot"}, truth_rows);

    if (args.jumps) {
      auto j = detail::open_out(*args.jumps);
      io::write_provenance(j, c.seed);
      io::write_csv(j, {"interval", "time", "z"}, jump_rows);
    }
    return kExitOk;
  });
}

struct FilterArgs {
  std::string input;
  std::string out = "filtered.csv";
  std::optional<std::string> svg;
  std::optional<std::string> truth;  // overlaid on the SVG when given
};

inline const std::vector<std::string>& filter_columns() {
  static const std::vector<std::string> cols{"time",    "mean_x",     "mean_xdot",       "var_x",
                                             "var_xdot", "cov_x_xdot", "acceptance_rate", "log_marginal"};
  return cols;
}

inline int cmd_filter(const io::RunConfig& c, const FilterArgs& args, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    c.validate();
    const auto ssm = c.ssm();
    const auto series = detail::read_series_file(args.input, log);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < series.size(); ++i) obs.push_back({series.time[i], series.value[i]});
    const auto results = run_filter(ssm, obs, c.filter());

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& g = results[i].collapsed;
      rows.push_back({obs[i].time, g.mu[0], g.mu[1], g.C(0, 0), g.C(1, 1), g.C(0, 1), results[i].acceptance_rate,
                      results[i].log_marginal});
    }
    auto out = detail::open_out(args.out);
    io::write_provenance(out, c.seed);
    io::write_csv(out, filter_columns(), rows);

    if (args.svg) {
      io::SvgPanel px{"x", {}, {}, {}}, pv{"xdot", {}, {}, {}};
      for (const auto& r : rows) {
        px.mean.push_back(r[1]);
        pv.mean.push_back(r[2]);
        px.sd.push_back(std::sqrt(std::max(r[3], 0.0)));
        pv.sd.push_back(std::sqrt(std::max(r[4], 0.0)));
      }
      if (args.truth) {
        std::ifstream in(*args.truth, std::ios::binary);
        if (!in) throw io::ParseError("cannot open '" + *args.truth + "'");
        const auto t = io::read_csv(in, *args.truth);
        if (t.rows.size() != rows.size()) throw io::ParseError(*args.truth + ": row count differs from the input");
        for (const auto& r : t.rows) {
          px.truth.push_back(r[t.column("x")]);
          pv.truth.push_back(r[t.column("xdot")]);
        }
      }
      auto svg = detail::open_out(*args.svg);
      io::write_svg(svg, series.time, {px, pv});
    }
    return kExitOk;
  });
}

struct ValidateArgs {
  std::optional<std::string> out;  // stdout when empty
};

inline int cmd_validate(const io::RunConfig& c, const ValidateArgs& args, std::ostream& log = std::cerr,
                        std::ostream& stdout_stream = std::cout) {
  return detail::guarded(log, [&] {
    c.validate();
    validation::SuiteOptions opt;
    opt.gh = c.gh();
    opt.theta = c.theta;
    opt.budget = TruncationBudget{c.gamma_max};
    opt.z1 = c.z1;
    opt.samples = c.validate_samples;
    opt.moment_resamples = c.moment_resamples;
    opt.seed = c.seed;
    const auto report = validation::run_validation_suite(opt);
    if (args.out) {
      auto out = detail::open_out(*args.out);
      out << report.dump(2) << '\n';
    } else {
      stdout_stream << report.dump(2) << '\n';
    }
    for (const auto& t : report["tests"])
      if (!t.value("pass", false)) log << "validation failed: " << t.value("name", std::string("?")) << '\n';
    return report.value("pass", false) ? kExitOk : kExitFailure;
  });
}

struct DownsampleArgs {
  std::string input;
  std::string out = "downsampled.csv";
  long long k = 1;
};

inline int cmd_downsample(const DownsampleArgs& args, std::ostream& log = std::cerr) {
  return detail::guarded(log, [&] {
    if (args.k < 1) throw UsageError("downsample: k must be at least 1");
    const auto series = detail::read_series_file(args.input, log);
    if (static_cast<unsigned long long>(args.k) > series.size() && series.size() > 0)
      log << "warning: k = " << args.k << " exceeds the " << series.size() << " input rows; keeping the first row\n";
    const auto ds = io::downsample(series, static_cast<std::size_t>(args.k));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) rows.push_back({ds.time[i], ds.value[i]});
    auto out = detail::open_out(args.out);
    io::write_csv(out, {"time", "value"}, rows);
    return kExitOk;
  });
}

}  // namespace ghssm::cli
