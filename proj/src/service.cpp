#include <accessgraph/app/service.hpp>

#include <accessgraph/app/errors.hpp>
#include <accessgraph/app/pipeline.hpp>
#include <accessgraph/graph_io.hpp>
#include <accessgraph/json_io.hpp>
#include <accessgraph/parallel.hpp>

#include <httplib.h>

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

namespace accessgraph::app {

using nlohmann::json;

namespace {

std::string base64_decode(const std::string& in) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (std::size_t k = 0; k < alphabet.size(); ++k) t[static_cast<unsigned char>(alphabet[k])] = static_cast<int>(k);
    return t;
  }();
  std::string out;
  out.reserve(in.size() * 3 / 4);
  std::uint32_t buffer = 0;
  int bits = 0;
  for (char c : in) {
    if (c == '=' ) break;
    if (c == '\n' || c == '\r' || c == ' ') continue;
    const int value = table[static_cast<unsigned char>(c)];
    if (value < 0) throw Error(ErrorCode::ParseError, "invalid base64 payload");
    buffer = (buffer << 6) | static_cast<std::uint32_t>(value);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xff));
    }
  }
  return out;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("request body is not JSON: ") + e.what());
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::size_t query_size(const httplib::Request& req, const std::string& key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string value = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const long long n = std::stoll(value, &used);
    if (used != value.size() || n < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "query parameter '" + key + "' must be a non-negative integer");
  }
}

struct Job {
  std::string id;
  std::string status; // queued, running, done, failed
  int http_status = 200;
  json error;
  json result;
};

json job_json(const Job& job) {
  json out{{"job", job.id}, {"graph", job.id}, {"status", job.status}};
  if (!job.result.is_null()) out["result"] = job.result;
  if (!job.error.is_null()) out["error"] = job.error;
  return out;
}

} // namespace

struct Service::Impl {
  ProjectStore& store;
  ServiceOptions options;
  httplib::Server server;

  std::mutex jobs_mutex;
  std::condition_variable jobs_cv;
  std::map<std::string, Job> jobs;
  std::deque<std::pair<std::string, BuildPlan>> queue;
  std::size_t running = 0;
  bool stopping = false;
  std::vector<std::jthread> workers;

  Impl(ProjectStore& s, ServiceOptions o) : store(s), options(o) {
    if (options.build_workers == 0) options.build_workers = default_thread_count();
    for (std::size_t k = 0; k < options.build_workers; ++k) workers.emplace_back([this] { work(); });
    const std::size_t http_threads = std::max<std::size_t>(1, options.http_threads);
    server.new_task_queue = [http_threads] { return new httplib::ThreadPool(http_threads); };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    routes();
  }

  ~Impl() {
    {
      std::lock_guard lock(jobs_mutex);
      stopping = true;
    }
    jobs_cv.notify_all();
    server.stop();
  }

  void work() {
    std::unique_lock lock(jobs_mutex);
    while (true) {
      jobs_cv.wait(lock, [&] { return stopping || !queue.empty(); });
      if (stopping) return;
      auto [id, plan] = std::move(queue.front());
      queue.pop_front();
      ++running;
      jobs[id].status = "running";
      lock.unlock();

      Job done;
      done.id = id;
      try {
        const auto handle = execute_build(store, plan, options.build_threads);
        std::shared_lock read(handle->mutex);
        done.status = "done";
        done.result = build_summary(*handle, false);
      } catch (const Error& e) {
        done.status = "failed";
        done.http_status = http_status_for(e.code());
        done.error = error_json(e).at("error");
        if (e.code() == ErrorCode::InvalidStart) done.error["tau"] = to_json(plan.params.start);
      } catch (const std::exception& e) {
        done.status = "failed";
        done.http_status = 500;
        done.error = error_json("Internal", e.what()).at("error");
      }

      lock.lock();
      jobs[id] = std::move(done);
      --running;
      jobs_cv.notify_all();
    }
  }

  // Runs a handler, mapping library errors onto status codes.
  template <typename Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_json(res, http_status_for(e.code()), error_json(e));
    } catch (const json::exception& e) {
      send_json(res, 400, error_json("ParseError", e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, error_json("Internal", e.what()));
    }
  }

  void post_graph(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object()) throw Error(ErrorCode::ParseError, "body must be a JSON object");
    detail::reject_unknown_keys(body, {"scene", "params", "name"}, "graph request");
    if (!body.contains("scene") || !body.contains("params")) {
      throw Error(ErrorCode::InvalidArgument, "graph request needs scene and params");
    }
    const std::string scene = body.at("scene").get<std::string>();
    const std::string name = body.value("name", std::string{});
    BuildPlan plan;
    try {
      plan = plan_build(store, scene, body.at("params"), name, true);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidStart) throw;
      json err = error_json(e);
      err["error"]["tau"] = to_json(params_from_json(body.at("params")).start);
      send_json(res, 422, err);
      return;
    }

    std::lock_guard lock(jobs_mutex);
    if (auto it = jobs.find(plan.id); it != jobs.end() && it->second.status != "failed") {
      json out = job_json(it->second);
      out["cached"] = true;
      send_json(res, it->second.status == "done" ? 200 : 202, out);
      return;
    }
    if (plan.cached) {
      const auto handle = store.graph(plan.id);
      std::shared_lock read(handle->mutex);
      Job& job = jobs[plan.id];
      job = Job{plan.id, "done", 200, json{}, build_summary(*handle, true)};
      json out = job_json(job);
      out["cached"] = true;
      send_json(res, 200, out);
      return;
    }
    Job& job = jobs[plan.id];
    job = Job{plan.id, "queued", 200, json{}, json{}};
    queue.emplace_back(plan.id, std::move(plan));
    jobs_cv.notify_one();
    json out = job_json(job);
    out["cached"] = false;
    send_json(res, 202, out);
  }

  void get_job(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    {
      std::lock_guard lock(jobs_mutex);
      if (auto it = jobs.find(id); it != jobs.end()) {
        send_json(res, it->second.status == "failed" ? it->second.http_status : 200, job_json(it->second));
        return;
      }
    }
    // Completed builds from earlier sessions.
    if (!store.has_graph_id(id)) throw Error(ErrorCode::NotFound, "no job '" + id + "'");
    const auto handle = store.graph(id);
    std::shared_lock read(handle->mutex);
    send_json(res, 200, job_json(Job{id, "done", 200, json{}, build_summary(*handle, true)}));
  }

  void get_graph(const httplib::Request& req, httplib::Response& res) {
    const auto handle = store.graph(req.matches[1]);
    std::shared_lock read(handle->mutex);
    if (req.has_param("format")) {
      const std::string format = req.get_param_value("format");
      if (format == "csr") {
        res.status = 200;
        res.set_content(csr_bytes(handle->graph), "application/octet-stream");
        return;
      }
      if (format != "json") throw Error(ErrorCode::InvalidArgument, "format must be json or csr");
    }
    const std::size_t n = handle->graph.vertex_count();
    const std::size_t offset = query_size(req, "offset", 0);
    const std::size_t limit = query_size(req, "limit", options.page_size);
    if (limit == 0) throw Error(ErrorCode::InvalidArgument, "limit must be > 0");
    json out = graph_to_json(handle->graph, offset, limit);
    out["id"] = handle->meta.id;
    out["name"] = handle->meta.name;
    const std::size_t end = std::min(n, offset + std::min(limit, n));
    out["next_offset"] = end < n ? json(end) : json(nullptr);
    send_json(res, 200, out);
  }

  void post_scene(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object()) throw Error(ErrorCode::ParseError, "body must be a JSON object");
    detail::reject_unknown_keys(body, {"name", "format", "data", "data_base64", "labels", "y_up"}, "scene upload");
    if (!body.contains("name")) throw Error(ErrorCode::InvalidArgument, "scene upload needs a name");
    std::string bytes;
    if (body.contains("data") == body.contains("data_base64")) {
      throw Error(ErrorCode::InvalidArgument, "scene upload needs exactly one of data and data_base64");
    }
    bytes = body.contains("data") ? body.at("data").get<std::string>() : base64_decode(body.at("data_base64").get<std::string>());
    const std::string name = body.at("name").get<std::string>();
    const bool existed = [&] {
      try {
        store.scene_record(name);
        return true;
      } catch (const Error&) {
        return false;
      }
    }();
    const SceneRecord record = store.put_scene(name, bytes, body.value("format", std::string("obj")),
                                               body.value("labels", json::object()), body.value("y_up", false));
    send_json(res, existed ? 200 : 201, to_json(record));
  }

  void get_scene_mesh(const httplib::Request& req, httplib::Response& res) {
    const auto scene = store.scene(req.matches[1]);
    json positions = json::array();
    json indices = json::array();
    json objects = json::array();
    std::size_t base = 0;
    for (const auto& object : scene->objects()) {
      const std::size_t first = indices.size() / 3;
      for (const Vec3& v : object.mesh.vertices) {
        positions.push_back(v.x);
        positions.push_back(v.y);
        positions.push_back(v.z);
      }
      for (const auto& t : object.mesh.triangles) {
        for (auto idx : t) indices.push_back(base + idx);
      }
      base += object.mesh.vertices.size();
      objects.push_back({{"name", object.mesh.name},
                         {"tag", object.tag.to_string()},
                         {"first_triangle", first},
                         {"triangle_count", object.mesh.triangles.size()}});
    }
    send_json(res, 200, {{"positions", positions}, {"indices", indices}, {"objects", objects}});
  }

  void routes() {
    auto on = [this](auto method, const std::string& pattern, void (Impl::*fn)(const httplib::Request&, httplib::Response&)) {
      (server.*method)(pattern, [this, fn](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { (this->*fn)(req, res); });
      });
    };
    using Route = httplib::Server& (httplib::Server::*)(const std::string&, httplib::Server::Handler);
    const Route get = &httplib::Server::Get;
    const Route post = &httplib::Server::Post;

    on(get, "/health", &Impl::get_health);
    on(post, "/scenes", &Impl::post_scene);
    on(get, "/scenes", &Impl::get_scenes);
    on(get, R"(/scenes/([^/]+))", &Impl::get_scene);
    on(get, R"(/scenes/([^/]+)/mesh)", &Impl::get_scene_mesh);
    on(post, "/graphs", &Impl::post_graph);
    on(get, "/graphs", &Impl::get_graphs);
    on(get, R"(/jobs/([^/]+))", &Impl::get_job);
    on(get, R"(/graphs/([^/]+))", &Impl::get_graph);
    on(post, R"(/graphs/([^/]+)/costs)", &Impl::post_costs);
    on(post, R"(/graphs/([^/]+)/viewshed)", &Impl::post_viewshed);
    on(post, R"(/graphs/([^/]+)/paths)", &Impl::post_paths);
    on(get, R"(/graphs/([^/]+)/heatmap)", &Impl::get_heatmap);
    on(get, R"(/graphs/([^/]+)/report)", &Impl::get_report);
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) res.set_content(error_json("NotFound", "no such endpoint").dump(), "application/json");
    });
  }

  void get_health(const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); }

  void get_scenes(const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& r : store.scenes()) out.push_back(to_json(r));
    send_json(res, 200, {{"scenes", out}});
  }

  void get_scene(const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(store.scene_record(req.matches[1])));
  }

  void get_graphs(const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& m : store.graphs()) out.push_back({{"id", m.id}, {"name", m.name}, {"scene", m.scene}});
    send_json(res, 200, {{"graphs", out}});
  }

  void post_costs(const httplib::Request& req, httplib::Response& res) {
    const auto handle = store.graph(req.matches[1]);
    send_json(res, 200, apply_costs(store, *handle, parse_body(req), options.build_threads));
  }

  void post_viewshed(const httplib::Request& req, httplib::Response& res) {
    const auto handle = store.graph(req.matches[1]);
    send_json(res, 200, apply_viewshed(store, *handle, parse_body(req), options.build_threads));
  }

  void post_paths(const httplib::Request& req, httplib::Response& res) {
    const auto handle = store.graph(req.matches[1]);
    const PathQuery query = path_query_from_json(parse_body(req));
    std::shared_lock read(handle->mutex);
    send_json(res, 200, run_path(handle->graph, query));
  }

  void get_heatmap(const httplib::Request& req, httplib::Response& res) {
    const auto handle = store.graph(req.matches[1]);
    if (!req.has_param("metric")) throw Error(ErrorCode::InvalidArgument, "heatmap needs ?metric=");
    std::shared_lock read(handle->mutex);
    send_json(res, 200, run_heatmap(handle->graph, req.get_param_value("metric")));
  }

  void get_report(const httplib::Request& req, httplib::Response& res) {
    const auto handle = store.graph(req.matches[1]);
    std::shared_lock read(handle->mutex);
    send_json(res, 200, graph_report(*handle));
  }
};

Service::Service(ProjectStore& store, ServiceOptions options) : impl_(std::make_unique<Impl>(store, options)) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_idle() {
  std::unique_lock lock(impl_->jobs_mutex);
  impl_->jobs_cv.wait(lock, [&] { return impl_->queue.empty() && impl_->running == 0; });
}

} // namespace accessgraph::app
