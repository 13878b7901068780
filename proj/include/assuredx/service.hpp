#pragma once

// Stateless JSON API over the engines.
//
//   GET  /api/v1/health
//   POST /api/v1/assurance-curve
//   POST /api/v1/sample-size
//   POST /api/v1/prior-sensitivity
//   POST /api/v1/conflict-check
//   POST /api/v1/compare            (?stream=1 for chunked progress)
//
// Request bodies use the run configuration format. Every response body is
// {inputs_echo, result, engine_version, compute_ms}, or {error} on failure.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace assuredx {

struct ServiceOptions {
  std::string address = "127.0.0.1";
  int port = 8080;
  unsigned worker_budget = 1;  // analyses allowed to run at once, across all requests
  std::chrono::milliseconds compare_timeout{300000};
  std::string cors_origin = "*";
  std::int64_t max_n_t = 5000;
  std::int64_t max_cap = 100000;
  std::int64_t max_sim_reps = 200000;
  std::int64_t max_width_reps = 1000;
  std::int64_t max_grid_points = 400;
};

// Reads ASSURE_DX_ADDR, ASSURE_DX_PORT, ASSURE_DX_WORKERS,
// ASSURE_DX_TIMEOUT_MS and ASSURE_DX_CORS_ORIGIN over the defaults.
ServiceOptions service_options_from_env();

// Counting semaphore sized at run time.
class WorkerBudget {
 public:
  explicit WorkerBudget(unsigned slots) : free_(slots == 0 ? 1 : slots) {}
  void acquire();
  void release();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  unsigned free_;
};

class DesignService {
 public:
  explicit DesignService(ServiceOptions options);
  ~DesignService();

  // Binds to options.address; port 0 picks a free port. Returns the port or -1.
  int bind();
  // Blocks serving requests until stop().
  bool serve();
  void stop();

  const ServiceOptions& options() const { return options_; }

 private:
  void install_routes();

  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  WorkerBudget budget_;
};

}  // namespace assuredx
