#include "doctest.h"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "proofminer/http_service.hpp"

using namespace proofminer;
using json = nlohmann::json;

namespace {

json parse(const ApiResponse& r) { return json::parse(r.body); }

std::string step_body(const std::string& label, std::vector<std::string> params = {}, bool combined = false) {
  return json{{"label", label}, {"params", params}, {"combined", combined}}.dump();
}

struct Loaded {
  SessionManager sessions;
  GuidanceApi api{sessions};
  std::string model;

  explicit Loaded(const Efsm& m) {
    const auto r = api.handle("POST", "/models", export_json(m));
    REQUIRE(r.status == 201);
    model = parse(r).at("model").get<std::string>();
  }

  std::string open() {
    const auto r = api.handle("POST", "/models/" + model + "/sessions", "");
    REQUIRE(r.status == 201);
    return parse(r).at("session").get<std::string>();
  }
};

} // namespace

TEST_CASE("list and nat walk through the API") {
  Loaded l(*testing::listnat_model());
  const auto s = l.open();

  const auto opts = parse(l.api.handle("GET", "/sessions/" + s + "/options", ""));
  std::set<std::string> methods;
  for (const auto& sug : opts.at("suggestions"))
    methods.insert(sug.at("method").get<std::string>());
  CHECK(methods == std::set<std::string>{"induction", "intros"});
  CHECK(opts.at("canFinish") == false);

  for (const auto& [label, params] : std::vector<std::pair<std::string, std::vector<std::string>>>{
           {"induction", {"l"}}, {"trivial", {}}, {"simpl", {}}, {"rewrite", {"<- IHl"}}, {"trivial", {}}}) {
    const auto r = l.api.handle("POST", "/sessions/" + s + "/step", step_body(label, params));
    CHECK(r.status == 200);
    CHECK(parse(r).contains("advisory"));
  }
  const auto script = parse(l.api.handle("GET", "/sessions/" + s + "/script", ""));
  CHECK(script.at("script") == "induction l. trivial. simpl. rewrite <- IHl. trivial.");
  CHECK(script.at("accepting") == true);

  const auto undone = parse(l.api.handle("POST", "/sessions/" + s + "/undo", ""));
  CHECK(undone.at("script") == "induction l. trivial. simpl. rewrite <- IHl.");
}

TEST_CASE("bool walk through the API") {
  Loaded l(*testing::bool_model());
  const auto s = l.open();
  CHECK(l.api.handle("POST", "/sessions/" + s + "/step", step_body("intros")).status == 200);
  CHECK(l.api.handle("POST", "/sessions/" + s + "/undo", "").status == 200);
  l.api.handle("POST", "/sessions/" + s + "/step", step_body("destruct", {"b1"}, true));
  l.api.handle("POST", "/sessions/" + s + "/step", step_body("destruct", {"b2"}, true));
  l.api.handle("POST", "/sessions/" + s + "/step", step_body("simpl", {"in |- *"}, true));
  const auto last = parse(l.api.handle("POST", "/sessions/" + s + "/step", step_body("trivial")));
  CHECK(last.at("script") == "destruct b1; destruct b2; simpl in |- *; trivial.");
  CHECK(last.at("accepting") == true);
}

TEST_CASE("graph endpoint") {
  const auto model = testing::listnat_model();
  Loaded l(*model);
  const auto r = l.api.handle("GET", "/models/" + l.model + "/graph", "");
  REQUIRE(r.status == 200);
  const auto g = parse(r);
  CHECK(g.at("states").size() == model->state_count());
  CHECK(g.at("edges").size() == model->transitions().size());
  CHECK(g.at("dot") == export_dot(*model));
  const auto dot = l.api.handle("GET", "/models/" + l.model + "/graph", "", "dot");
  CHECK(dot.content_type == "text/vnd.graphviz");
  CHECK(dot.body == export_dot(*model));
}

TEST_CASE("API errors") {
  Loaded l(*testing::listnat_model());
  const auto s = l.open();
  SUBCASE("bad model") { CHECK(l.api.handle("POST", "/models", "{}").status == 400); }
  SUBCASE("unknown ids") {
    CHECK(l.api.handle("POST", "/models/m99/sessions", "").status == 404);
    CHECK(l.api.handle("GET", "/models/m99/graph", "").status == 404);
    CHECK(l.api.handle("GET", "/sessions/s99/options", "").status == 404);
    CHECK(l.api.handle("GET", "/nowhere", "").status == 404);
  }
  SUBCASE("wrong method") {
    CHECK(l.api.handle("GET", "/models", "").status == 405);
    CHECK(l.api.handle("POST", "/sessions/" + s + "/options", "").status == 405);
    CHECK(l.api.handle("GET", "/sessions/" + s + "/step", "").status == 405);
  }
  SUBCASE("bad step bodies") {
    CHECK(l.api.handle("POST", "/sessions/" + s + "/step", "nope").status == 400);
    CHECK(l.api.handle("POST", "/sessions/" + s + "/step", R"({"params":[]})").status == 400);
    CHECK(l.api.handle("POST", "/sessions/" + s + "/step", R"({"label":"induction","params":[1]})").status ==
          400);
  }
  SUBCASE("label not available names the options") {
    const auto r = l.api.handle("POST", "/sessions/" + s + "/step", step_body("omega"));
    CHECK(r.status == 409);
    const auto j = parse(r);
    CHECK(j.at("available") == json::array({"induction", "intros"}));
    CHECK(j.at("error").is_string());
  }
  SUBCASE("undo on an empty history") { CHECK(l.api.handle("POST", "/sessions/" + s + "/undo", "").status == 409); }
}

TEST_CASE("server over a real socket") {
  SessionManager sessions;
  GuidanceServer server(sessions);
  const int port = server.bind_any("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.serve(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto loaded = client.Post("/models", export_json(*testing::listnat_model()), "application/json");
  REQUIRE(loaded);
  CHECK(loaded->status == 201);
  CHECK(loaded->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto model = json::parse(loaded->body).at("model").get<std::string>();

  const auto opened = client.Post("/models/" + model + "/sessions", "", "application/json");
  REQUIRE(opened);
  const auto session = json::parse(opened->body).at("session").get<std::string>();

  const auto stepped = client.Post("/sessions/" + session + "/step", step_body("induction", {"l"}), "application/json");
  REQUIRE(stepped);
  CHECK(stepped->status == 200);

  const auto dot = client.Get("/models/" + model + "/graph?format=dot");
  REQUIRE(dot);
  CHECK(dot->get_header_value("Content-Type").starts_with("text/vnd.graphviz"));

  const auto missing = client.Get("/sessions/nope/options");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  server.stop();
  runner.join();
}
