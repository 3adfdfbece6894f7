#include "proofminer/http_service.hpp"

#include <regex>

#include "httplib.h"
#include <nlohmann/json.hpp>

namespace proofminer {

namespace {

using ojson = nlohmann::ordered_json;

ApiResponse json_response(int status, const ojson& doc) {
  return ApiResponse{status, doc.dump(), "application/json"};
}

ApiResponse error_response(int status, const std::string& message,
                           const std::vector<std::string>& available = {}) {
  ojson doc;
  doc["error"] = message;
  doc["available"] = available;
  return json_response(status, doc);
}

ojson param_vector_json(const ParamVector& v) {
  ojson j;
  j["params"] = v.params;
  j["combined"] = v.combined;
  return j;
}

ojson session_state(const GuidanceSession& s) {
  ojson j;
  j["session"] = s.id();
  j["state"] = s.cursor();
  j["accepting"] = s.accepting();
  j["script"] = s.render_script();
  return j;
}

ojson options_json(const GuidanceSession& s) {
  const auto o = s.options();
  ojson j;
  j["state"] = o.state;
  j["accepting"] = s.accepting();
  j["canFinish"] = o.can_finish;
  j["suggestions"] = ojson::array();
  for (const auto& sug : o.suggestions) {
    ojson js;
    js["label"] = sug.label.str();
    js["method"] = sug.label.method();
    js["target"] = sug.target;
    js["parameterCandidates"] = ojson::array();
    for (const auto& [v, n] : sug.parameter_candidates) {
      auto jc = param_vector_json(v);
      jc["count"] = n;
      js["parameterCandidates"].push_back(std::move(jc));
    }
    js["combinedHint"] = sug.combined_hint;
    js["leadsToAccepting"] = sug.leads_to_accepting;
    js["weight"] = sug.weight;
    j["suggestions"].push_back(std::move(js));
  }
  return j;
}

ojson graph_json(const Efsm& m) {
  ojson j;
  j["initial"] = m.initial();
  j["states"] = ojson::array();
  for (StateId s = 0; s < m.state_count(); ++s)
    j["states"].push_back({{"id", s}, {"accepting", m.is_accepting(s)}, {"initial", s == m.initial()}});
  j["edges"] = ojson::array();
  for (const auto& t : m.transitions()) {
    ojson e;
    e["source"] = t.source;
    e["target"] = t.target;
    e["label"] = t.label.str();
    e["witnesses"] = ojson::array();
    for (const auto& [v, n] : ranked_witnesses(t.witnesses)) {
      auto jw = param_vector_json(v);
      jw["count"] = n;
      e["witnesses"].push_back(std::move(jw));
    }
    j["edges"].push_back(std::move(e));
  }
  j["dot"] = export_dot(m);
  return j;
}

} // namespace

ApiResponse GuidanceApi::handle(const std::string& method, const std::string& path,
                                const std::string& body, const std::string& format) const {
  static const std::regex model_sessions(R"(^/models/([A-Za-z0-9]+)/sessions$)");
  static const std::regex model_graph(R"(^/models/([A-Za-z0-9]+)/graph$)");
  static const std::regex session_action(R"(^/sessions/([A-Za-z0-9]+)/(options|step|undo|script)$)");
  std::smatch m;

  try {
    if (path == "/models") {
      if (method != "POST")
        return error_response(405, "use POST");
      std::shared_ptr<const Efsm> model;
      try {
        model = std::make_shared<const Efsm>(import_json(body));
      } catch (const ModelError& e) {
        return error_response(400, e.what());
      }
      const auto id = sessions_.add_model(model);
      return json_response(201, {{"model", id}, {"states", model->state_count()}, {"initial", model->initial()}});
    }

    if (std::regex_match(path, m, model_sessions)) {
      if (method != "POST")
        return error_response(405, "use POST");
      const auto model_id = m[1].str();
      if (!sessions_.model(model_id))
        return error_response(404, "unknown model " + model_id);
      const auto id = sessions_.open(model_id);
      return json_response(201, sessions_.with_session(id, session_state));
    }

    if (std::regex_match(path, m, model_graph)) {
      if (method != "GET")
        return error_response(405, "use GET");
      const auto model = sessions_.model(m[1].str());
      if (!model)
        return error_response(404, "unknown model " + m[1].str());
      if (format == "dot")
        return ApiResponse{200, export_dot(*model), "text/vnd.graphviz"};
      return json_response(200, graph_json(*model));
    }

    if (std::regex_match(path, m, session_action)) {
      const auto id = m[1].str();
      const auto action = m[2].str();
      const bool is_get = action == "options" || action == "script";
      if (method != (is_get ? "GET" : "POST"))
        return error_response(405, is_get ? "use GET" : "use POST");

      if (action == "options")
        return json_response(200, sessions_.with_session(id, options_json));
      if (action == "script")
        return json_response(200, sessions_.with_session(id, session_state));
      if (action == "undo") {
        return json_response(200, sessions_.with_session(id, [](GuidanceSession& s) {
                               s.undo();
                               return session_state(s);
                             }));
      }

      ojson req;
      try {
        req = ojson::parse(body);
      } catch (const nlohmann::json::parse_error&) {
        return error_response(400, "step body must be JSON");
      }
      if (!req.is_object() || !req.contains("label") || !req["label"].is_string())
        return error_response(400, "step body needs a string \"label\"");
      std::vector<std::string> params;
      bool combined = false;
      try {
        if (req.contains("params"))
          params = req["params"].get<std::vector<std::string>>();
        if (req.contains("combined"))
          combined = req["combined"].get<bool>();
      } catch (const nlohmann::json::exception&) {
        return error_response(400, "\"params\" must be a list of strings and \"combined\" a boolean");
      }
      const auto label = req["label"].get<std::string>();
      return json_response(200, sessions_.with_session(id, [&](GuidanceSession& s) {
                             const auto out = s.step(label, std::move(params), combined);
                             auto j = session_state(s);
                             j["advisory"] = out.advisory ? ojson(*out.advisory) : ojson(nullptr);
                             return j;
                           }));
    }
  } catch (const GuidanceError& e) {
    const bool missing = std::string_view(e.what()).starts_with("unknown ");
    return error_response(missing ? 404 : 409, e.what(), e.available());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
  return error_response(404, "no route for " + method + " " + path);
}

struct GuidanceServer::Impl {
  explicit Impl(SessionManager& sessions) : api(sessions) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      const auto format = req.has_param("format") ? req.get_param_value("format") : std::string{};
      const auto r = api.handle(req.method, req.path, req.body, format);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Get(R"(/.*)", route);
    server.Post(R"(/.*)", route);
    server.Put(R"(/.*)", route);
    server.Delete(R"(/.*)", route);
    // The web explorer is served from another origin.
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }

  GuidanceApi api;
  httplib::Server server;
};

GuidanceServer::GuidanceServer(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {}
GuidanceServer::~GuidanceServer() = default;

bool GuidanceServer::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int GuidanceServer::bind_any(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool GuidanceServer::serve() {
  return impl_->server.listen_after_bind();
}

void GuidanceServer::stop() {
  impl_->server.stop();
}

void GuidanceServer::wait_until_ready() const {
  impl_->server.wait_until_ready();
}

} // namespace proofminer
