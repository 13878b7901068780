// HTTP front end. Address, port, worker budget, timeout and CORS origin
// come from ASSURE_DX_* environment variables.

#include <csignal>
#include <iostream>

#include "assuredx/config.hpp"
#include "assuredx/service.hpp"

namespace {
assuredx::DesignService* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}
}  // namespace

int main() {
  assuredx::ServiceOptions opts;
  try {
    opts = assuredx::service_options_from_env();
  } catch (const assuredx::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  assuredx::DesignService service(opts);
  if (service.bind() < 0) {
    std::cerr << "cannot bind " << opts.address << ":" << opts.port << "\n";
    return 1;
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << service.options().address << ":" << service.options().port << "\n";
  return service.serve() ? 0 : 1;
}
