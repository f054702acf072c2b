#pragma once

#include <accessgraph/app/store.hpp>

#include <cstddef>
#include <memory>
#include <string>

namespace accessgraph::app {

struct ServiceOptions {
  std::size_t build_workers = 0;  // concurrent build jobs; 0 = hardware parallelism
  unsigned build_threads = 1;     // threads inside one build
  std::size_t http_threads = 8;   // request handler threads
  std::size_t page_size = 50000;  // default vertices per GET /graphs/{id} page
};

/// HTTP/1.1 JSON API over a ProjectStore.
///
///   POST /scenes                  {name, format, data | data_base64, labels, y_up}
///   GET  /scenes, /scenes/{name}, /scenes/{name}/mesh
///   POST /graphs                  {scene, params, name} -> 202 {job, graph}
///   GET  /jobs/{id}
///   GET  /graphs, /graphs/{id}    ?offset=&limit=  (&format=csr for the binary form)
///   POST /graphs/{id}/costs       {energy, promote}
///   POST /graphs/{id}/viewshed    viewshed config
///   POST /graphs/{id}/paths       {start_key, goal_key, rho, threshold_rules}
///   GET  /graphs/{id}/heatmap     ?metric=
///   GET  /graphs/{id}/report
class Service {
 public:
  explicit Service(ProjectStore& store, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();
  /// Blocks until no build job is queued or running.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace accessgraph::app
