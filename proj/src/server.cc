#include "ducg/server.h"

#include <cstdlib>

#include <httplib.h>

#include "ducg/error.h"
#include "ducg/model_io.h"
#include "ducg/validate.h"

namespace ducg {

using nlohmann::json;

ServerConfig apply_environment(ServerConfig config) {
  if (const char* port = std::getenv("DUCG_PORT"); port && *port) {
    char* end = nullptr;
    long value = std::strtol(port, &end, 10);
    if (*end != '\0' || value < 0 || value > 65535) throw SchemaError("DUCG_PORT", "not a valid port number");
    config.port = static_cast<int>(value);
  }
  if (const char* dir = std::getenv("DUCG_DATA_DIR"); dir && *dir) config.data_dir = dir;
  return config;
}

std::pair<int, json> error_response(const std::exception& e) {
  json err = {{"message", e.what()}};
  int status = 500;
  if (auto* s = dynamic_cast<const SchemaError*>(&e)) {
    status = 400;
    err["type"] = "schema";
    if (!s->path().empty()) err["path"] = s->path();
  } else if (dynamic_cast<const ReferenceError*>(&e)) {
    status = 400;
    err["type"] = "reference";
  } else if (dynamic_cast<const NotFoundError*>(&e)) {
    status = 404;
    err["type"] = "not-found";
  } else if (dynamic_cast<const ConflictError*>(&e)) {
    status = 409;
    err["type"] = "conflict";
  } else if (dynamic_cast<const PreconditionError*>(&e)) {
    status = 409;
    err["type"] = "precondition";
  } else if (dynamic_cast<const RejectedError*>(&e)) {
    status = 422;
    err["type"] = "rejected";
  } else if (auto* v = dynamic_cast<const InvalidModelError*>(&e)) {
    status = 422;
    err["type"] = "invalid-model";
    json findings = json::array();
    for (const auto& f : v->report().findings)
      findings.push_back({{"severity", f.severity == Severity::kError ? "error" : "warning"},
                          {"code", f.code},
                          {"message", f.message},
                          {"path", f.path}});
    err["findings"] = findings;
  } else if (dynamic_cast<const SizeError*>(&e)) {
    status = 422;
    err["type"] = "size";
  } else {
    err["type"] = "internal";
  }
  return {status, {{"error", err}}};
}

namespace {

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw SchemaError("", "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON body: ") + e.what());
  }
}

std::string actor_of(const httplib::Request& req, const json& body) {
  if (req.has_header("X-Actor")) return req.get_header_value("X-Actor");
  if (auto it = body.find("actor"); it != body.end()) {
    if (!it->is_string()) throw SchemaError("actor", "expected a string");
    return *it;
  }
  return "anonymous";
}

std::string string_field(const json& body, const char* key, bool required) {
  auto it = body.find(key);
  if (it == body.end()) {
    if (required) throw SchemaError(key, "missing required field");
    return {};
  }
  if (!it->is_string()) throw SchemaError(key, "expected a string");
  return *it;
}

std::vector<Observation> observations_of(const json& body) {
  auto it = body.find("observations");
  if (it == body.end()) throw SchemaError("observations", "missing required field");
  if (!it->is_array()) throw SchemaError("observations", "expected an array");
  std::vector<Observation> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    std::string path = "observations[" + std::to_string(i) + "]";
    const json& o = (*it)[i];
    if (!o.is_object()) throw SchemaError(path, "expected an object");
    if (!o.contains("variable")) throw SchemaError(path + ".variable", "missing required field");
    if (!o.contains("state")) throw SchemaError(path + ".state", "missing required field");
    if (!o["state"].is_number_integer()) throw SchemaError(path + ".state", "expected an integer");
    out.push_back({id_from_json(o["variable"], path + ".variable"), o["state"].get<int>()});
  }
  return out;
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

struct RestServer::Impl {
  DiagnosisService& service;
  httplib::Server http;

  explicit Impl(DiagnosisService& s) : service(s) { install(); }

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const std::exception& e) {
        auto [status, body] = error_response(e);
        send(res, status, body);
      }
    };
  }

  void install() {
    http.Post("/models", guarded([this](const httplib::Request& req, httplib::Response& res) {
      json out = service.register_model(req.body);
      send(res, out.value("created", false) ? 201 : 200, out);
    }));
    http.Get("/models", guarded([this](const httplib::Request&, httplib::Response& res) {
      send(res, 200, service.list_models());
    }));
    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      send(res, 201, service.create_session(string_field(body, "model_id", true), actor_of(req, body)));
    }));
    http.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, service.get_session(req.matches[1]));
    }));
    http.Post(R"(/sessions/([^/]+)/observations)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                json body = parse_body(req);
                auto batch = observations_of(body);
                send(res, 200, service.submit_observations(req.matches[1], batch, actor_of(req, body)));
              }));
    http.Get(R"(/sessions/([^/]+)/explanations/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, service.explanation(req.matches[1], req.matches[2]));
             }));
    http.Post(R"(/sessions/([^/]+)/disagreement)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                json body = parse_body(req);
                send(res, 200,
                     service.flag_disagreement(req.matches[1], string_field(body, "note", false), actor_of(req, body)));
              }));
    http.Post(R"(/sessions/([^/]+)/conclude)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                json body = parse_body(req);
                send(res, 200, service.conclude(req.matches[1], string_field(body, "note", false), actor_of(req, body)));
              }));
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.status == 404 && res.body.empty())
        send(res, 404, {{"error", {{"type", "not-found"}, {"message", "no such route"}}}});
    });
  }
};

RestServer::RestServer(DiagnosisService& service) : impl_(std::make_unique<Impl>(service)) {}
RestServer::~RestServer() = default;

bool RestServer::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }
int RestServer::bind_any_port(const std::string& host) { return impl_->http.bind_to_any_port(host); }
bool RestServer::serve() { return impl_->http.listen_after_bind(); }
void RestServer::stop() { impl_->http.stop(); }
void RestServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace ducg
