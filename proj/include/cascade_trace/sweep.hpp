#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cascade_trace/server_process.hpp"
#include "cascade_trace/sim/scenario.hpp"
#include "cascade_trace/trace_client.hpp"

namespace cascade_trace {

/// Sink and query side of one isolated trace server.
class SweepBackend {
 public:
  virtual ~SweepBackend() = default;
  virtual TraceSink& sink() = 0;
  virtual TraceQuery& query() = 0;
};

/// Fresh in-process TraceStore.
class InProcessBackend final : public SweepBackend {
 public:
  InProcessBackend() : sink_(store_) {}
  TraceSink& sink() override { return sink_; }
  TraceQuery& query() override { return store_; }

 private:
  TraceStore store_;
  StoreSink sink_;
};

/// Trace server child process started with `--n-ancestors n`.
class ServerProcessBackend final : public SweepBackend {
 public:
  ServerProcessBackend(const std::string& executable, std::size_t n)
      : process_(executable, {"--n-ancestors", std::to_string(n)}), sink_(process_.url()), client_(process_.url()) {}
  TraceSink& sink() override { return sink_; }
  TraceQuery& query() override { return client_; }
  const ServerProcess& process() const { return process_; }

 private:
  ServerProcess process_;
  HttpTraceSink sink_;
  HttpTraceClient client_;
};

struct SweepOptions {
  std::vector<std::size_t> n_values;
  int repeats = 1;
  std::uint64_t seed = 1;
  sim::SimConfig base;  // ancestor_limit and seed are overwritten per run
  std::string scenario = "n-sweep-step";
};

struct SweepRow {
  std::size_t n;
  int run;
  std::size_t mergelog_count;
};

struct SweepSummary {
  std::size_t n;
  double mean;
  double stderr_;
  int runs;
};

/// Run r of every N uses seed + r, so each N sees the same interleavings.
/// A new backend is created per run and given that run's N. Throws std::invalid_argument for an
/// empty N list or repeats < 1.
std::vector<SweepRow> run_sweep(const SweepOptions& options,
                                const std::function<std::unique_ptr<SweepBackend>(std::size_t n)>& make_backend);

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

/// Header `n,run,mergelog_count`.
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_table(const std::vector<SweepSummary>& summary);

}  // namespace cascade_trace
