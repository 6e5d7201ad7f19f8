#include "cascade_trace/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cascade_trace {

std::vector<SweepRow> run_sweep(const SweepOptions& options,
                                const std::function<std::unique_ptr<SweepBackend>(std::size_t n)>& make_backend) {
  if (options.n_values.empty()) throw std::invalid_argument("N list is empty");
  if (options.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  const sim::Scenario scenario = sim::builtin_scenario(options.scenario);
  std::vector<SweepRow> rows;
  for (const std::size_t n : options.n_values) {
    for (int run = 0; run < options.repeats; ++run) {
      sim::SimConfig config = options.base;
      config.ancestor_limit = n;
      config.seed = options.seed + static_cast<std::uint64_t>(run);
      auto backend = make_backend(n);
      const auto report = sim::run_scenario(scenario, config, backend->sink(), backend->query());
      rows.push_back({n, run, report.mergelog_count});
    }
  }
  return rows;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : rows) by_n[r.n].push_back(static_cast<double>(r.mergelog_count));
  std::vector<SweepSummary> out;
  for (const auto& [n, xs] : by_n) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double se = 0;
    if (xs.size() > 1) {
      double var = 0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(xs.size() - 1);
      se = std::sqrt(var / static_cast<double>(xs.size()));
    }
    out.push_back({n, mean, se, static_cast<int>(xs.size())});
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "n,run,mergelog_count\n";
  for (const auto& r : rows) os << r.n << "," << r.run << "," << r.mergelog_count << "\n";
  return os.str();
}

std::string sweep_table(const std::vector<SweepSummary>& summary) {
  std::ostringstream os;
  char line[96];
  std::snprintf(line, sizeof line, "%6s %6s %12s %10s\n", "N", "runs", "mergelogs", "stderr");
  os << line;
  for (const auto& s : summary) {
    std::snprintf(line, sizeof line, "%6zu %6d %12.2f %10.2f\n", s.n, s.runs, s.mean, s.stderr_);
    os << line;
  }
  return os.str();
}

}  // namespace cascade_trace
