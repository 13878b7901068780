#include "assuredx/service.hpp"

#include <httplib.h>

#include <cstdlib>
#include <functional>

#include "assuredx/config.hpp"
#include "assuredx/report.hpp"

namespace assuredx {

namespace {

struct HttpError : std::runtime_error {
  HttpError(int s, const std::string& what) : std::runtime_error(what), status(s) {}
  int status;
};

struct Timeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

Json error_body(const std::string& message) { return Json{{"error", message}}; }

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

class BudgetSlot {
 public:
  explicit BudgetSlot(WorkerBudget& b) : budget_(b) { budget_.acquire(); }
  ~BudgetSlot() { budget_.release(); }
  BudgetSlot(const BudgetSlot&) = delete;
  BudgetSlot& operator=(const BudgetSlot&) = delete;

 private:
  WorkerBudget& budget_;
};

Json parse_body(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw HttpError(400, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

ServiceOptions service_options_from_env() {
  ServiceOptions o;
  o.address = env_or("ASSURE_DX_ADDR", o.address);
  o.cors_origin = env_or("ASSURE_DX_CORS_ORIGIN", o.cors_origin);
  try {
    o.port = std::stoi(env_or("ASSURE_DX_PORT", std::to_string(o.port)));
    o.worker_budget = static_cast<unsigned>(
        std::stoul(env_or("ASSURE_DX_WORKERS", std::to_string(default_thread_count()))));
    o.compare_timeout = std::chrono::milliseconds(
        std::stoll(env_or("ASSURE_DX_TIMEOUT_MS", std::to_string(o.compare_timeout.count()))));
  } catch (const std::exception&) {
    throw ConfigError("service environment: ASSURE_DX_PORT, ASSURE_DX_WORKERS and ASSURE_DX_TIMEOUT_MS must be integers");
  }
  return o;
}

void WorkerBudget::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void WorkerBudget::release() {
  {
    std::lock_guard lock(mutex_);
    ++free_;
  }
  cv_.notify_one();
}

DesignService::DesignService(ServiceOptions options)
    : options_(std::move(options)), server_(std::make_unique<httplib::Server>()), budget_(options_.worker_budget) {
  install_routes();
}

DesignService::~DesignService() = default;

int DesignService::bind() {
  if (options_.port == 0) {
    options_.port = server_->bind_to_any_port(options_.address);
    return options_.port;
  }
  return server_->bind_to_port(options_.address, options_.port) ? options_.port : -1;
}

bool DesignService::serve() { return server_->listen_after_bind(); }

void DesignService::stop() { server_->stop(); }

void DesignService::install_routes() {
  auto& srv = *server_;
  const ServiceOptions& opt = options_;

  srv.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  srv.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/api/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, Json{{"status", "ok"}, {"engine_version", kEngineVersion}});
  });

  // Parses and guards a request body; extra top-level keys are pulled out by the caller first.
  auto load = [&opt](Json body) {
    RunConfig c;
    try {
      c = parse_config(body);
    } catch (const ConfigError& e) {
      throw HttpError(400, e.what());
    }
    if (c.cap > opt.max_cap) throw HttpError(400, "study.cap: exceeds " + std::to_string(opt.max_cap));
    if (c.n_t_max > opt.max_n_t) throw HttpError(400, "nT_max: exceeds " + std::to_string(opt.max_n_t));
    if (c.compare.grid.reps > opt.max_sim_reps) throw HttpError(400, "study.compare.reps: too large");
    if (c.compare.widths.reps > opt.max_width_reps) throw HttpError(400, "study.compare.width_reps: too large");
    const auto points = static_cast<std::int64_t>(c.compare.grid.lambdas.size() * c.compare.grid.rhos.size());
    if (points > opt.max_grid_points) throw HttpError(400, "study.compare: too many grid points");
    c.threads = 1;  // parallelism is governed by the worker budget
    c.output = OutputOptions{};
    return c;
  };

  // Runs one analysis under the worker budget and writes the envelope.
  using Compute = std::function<std::pair<Json, bool>(const RunConfig&)>;
  auto endpoint = [this, load](const std::string& path, std::function<RunConfig(Json&)> prepare, Compute compute) {
    server_->Post(path, [this, load, prepare, compute](const httplib::Request& req, httplib::Response& res) {
      try {
        Json body = parse_body(req.body);
        if (!body.is_object()) throw HttpError(400, "request body must be a JSON object");
        RunConfig c = prepare ? prepare(body) : load(body);
        const auto t0 = std::chrono::steady_clock::now();
        std::pair<Json, bool> out;
        {
          BudgetSlot slot(budget_);
          out = compute(c);
        }
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        Json env{{"inputs_echo", rounded(config_to_json(c))},
                 {"result", out.first},
                 {"engine_version", kEngineVersion},
                 {"compute_ms", round_significant(ms, 6)}};
        if (!out.second) env["error"] = "no sample size within the cap reaches the assurance target";
        send_json(res, out.second ? 200 : 422, env);
      } catch (const HttpError& e) {
        send_json(res, e.status, error_body(e.what()));
      } catch (const ConfigError& e) {
        send_json(res, 400, error_body(e.what()));
      } catch (const Timeout& e) {
        send_json(res, 504, error_body(e.what()));
      } catch (const InfeasibleAnalysis& e) {
        send_json(res, 422, error_body(e.what()));
      } catch (const std::domain_error& e) {
        send_json(res, 422, error_body(e.what()));
      } catch (const std::invalid_argument& e) {
        send_json(res, 422, error_body(e.what()));
      } catch (const std::exception& e) {
        send_json(res, 500, error_body(e.what()));
      }
    });
  };

  endpoint(
      "/api/v1/assurance-curve",
      [load](Json& body) {
        std::int64_t n_t_max = 0;
        if (!body.contains("nT_max")) throw HttpError(400, "nT_max: required");
        if (!body["nT_max"].is_number_integer()) throw HttpError(400, "nT_max: expected an integer");
        n_t_max = body["nT_max"].get<std::int64_t>();
        if (n_t_max < 1) throw HttpError(400, "nT_max: must be >= 1");
        body.erase("nT_max");
        body["study"]["n_t_max"] = n_t_max;
        return load(body);
      },
      [](const RunConfig& c) { return std::make_pair(run_curve(c), true); });

  endpoint("/api/v1/sample-size", nullptr, [](const RunConfig& c) {
    RunResult r = run_sample_size(c);
    return std::make_pair(r.result, r.found);
  });

  endpoint("/api/v1/prior-sensitivity", nullptr,
           [](const RunConfig& c) { return std::make_pair(run_sensitivity(c), true); });

  endpoint("/api/v1/conflict-check", nullptr, [](const RunConfig& c) {
    if (!c.conflict.observed) throw HttpError(400, "study.conflict.observed: required");
    return std::make_pair(run_conflict(c), true);
  });

  srv.Post("/api/v1/compare", [this, load](const httplib::Request& req, httplib::Response& res) {
    const auto timeout = options_.compare_timeout;
    RunConfig c;
    try {
      Json body = parse_body(req.body);
      if (!body.is_object()) throw HttpError(400, "request body must be a JSON object");
      c = load(body);
    } catch (const HttpError& e) {
      send_json(res, e.status, error_body(e.what()));
      return;
    }
    const bool stream = req.has_param("stream") && req.get_param_value("stream") != "0";

    if (!stream) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const auto deadline = t0 + timeout;
        Json result;
        {
          BudgetSlot slot(budget_);
          result = run_compare(c, [&](std::size_t, std::size_t) {
            if (std::chrono::steady_clock::now() > deadline) throw Timeout("compare: timed out");
          });
        }
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        send_json(res, 200,
                  Json{{"inputs_echo", rounded(config_to_json(c))},
                       {"result", result},
                       {"engine_version", kEngineVersion},
                       {"compute_ms", round_significant(ms, 6)}});
      } catch (const Timeout& e) {
        send_json(res, 504, error_body(e.what()));
      } catch (const std::exception& e) {
        send_json(res, 422, error_body(e.what()));
      }
      return;
    }

    // Newline-delimited JSON: progress records, then the envelope or an error.
    res.set_chunked_content_provider("application/x-ndjson", [this, c, timeout](std::size_t, httplib::DataSink& sink) {
      auto write_line = [&](const Json& j) {
        const std::string line = j.dump() + "\n";
        sink.write(line.data(), line.size());
      };
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const auto deadline = t0 + timeout;
        Json result;
        {
          BudgetSlot slot(budget_);
          result = run_compare(c, [&](std::size_t done, std::size_t total) {
            write_line(Json{{"progress", {{"done", done}, {"total", total}}}});
            if (std::chrono::steady_clock::now() > deadline) throw Timeout("compare: timed out");
          });
        }
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        write_line(Json{{"inputs_echo", rounded(config_to_json(c))},
                        {"result", result},
                        {"engine_version", kEngineVersion},
                        {"compute_ms", round_significant(ms, 6)}});
      } catch (const std::exception& e) {
        write_line(error_body(e.what()));
      }
      sink.done();
      return true;
    });
  });
}

}  // namespace assuredx
