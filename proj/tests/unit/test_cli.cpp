#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "fixtures.hpp"
#include "proofminer/efsm.hpp"

namespace fs = std::filesystem;
using namespace proofminer;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output only when asked.
Run cli(const std::string& args, bool with_stderr = false) {
  const std::string cmd = std::string(PROOFMINER_CLI) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("proofminer-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string q(const std::string& s) { return "'" + s + "'"; }

} // namespace

TEST_CASE("parse then accept the worked lemma") {
  TempDir dir;
  const auto traces = dir / "ex.json";
  REQUIRE(cli("parse " + q(testing::data_path("table1.v").string()) + " -o " + q(traces)).code == 0);
  const auto corpus = corpus_from_json(slurp(traces));
  REQUIRE(corpus.traces.size() == 1);
  CHECK(corpus.traces[0].events.size() == 9);

  const auto model = dir / "ex.model.json";
  REQUIRE(cli("infer -i " + q(traces) + " -o " + q(model)).code == 0);
  const auto accepted = cli("accept -m " + q(model) + " -i " + q(traces));
  CHECK(accepted.code == 0);
  CHECK(accepted.out == "ex\taccepted\n");
}

TEST_CASE("hold out, infer and suggest") {
  TempDir dir;
  const auto traces = dir / "listnat.json";
  REQUIRE(cli("parse " + q(testing::data_path("listnat.v").string()) + " -o " + q(traces)).code == 0);
  const auto model = dir / "model.json";
  REQUIRE(cli("infer -i " + q(traces) + " --holdout app_nil_l -o " + q(model)).code == 0);
  const auto m = import_json(slurp(model));
  CHECK(m.is_label_deterministic());

  const auto start = cli("suggest -m " + q(model));
  CHECK(start.code == 0);
  CHECK(start.out.find("induction") != std::string::npos);
  CHECK(start.out.find("intros") != std::string::npos);

  const auto done = cli("suggest -m " + q(model) + " --history " +
                        q("induction l. trivial. simpl. rewrite <- IHl. trivial."));
  CHECK(done.code == 0);
  CHECK(done.out.find("can finish") != std::string::npos);

  const auto held = dir / "held.json";
  {
    Corpus only;
    only.traces.push_back(testing::load_fixture("listnat.v").traces.front());
    std::ofstream(held) << corpus_to_json(only);
  }
  const auto r = cli("accept -m " + q(model) + " -i " + q(held) + " --mode control-only");
  CHECK(r.code == 0);
  CHECK(r.out.starts_with("app_nil_l\t"));

  const auto dot = cli("export -m " + q(model) + " --dot -");
  CHECK(dot.code == 0);
  CHECK(dot.out.starts_with("digraph"));
}

TEST_CASE("eval is reproducible") {
  TempDir dir;
  const auto traces = dir / "listnat.json";
  const auto foreign = dir / "foreign.json";
  REQUIRE(cli("parse " + q(testing::data_path("listnat.v").string()) + " -o " + q(traces)).code == 0);
  REQUIRE(cli("parse " + q(testing::data_path("foreign.v").string()) + " -o " + q(foreign)).code == 0);
  const auto args = "eval -i " + q(traces) + " --foreign " + q(foreign) + " -k 5 --negatives 10 --seed 7";
  const auto a = cli(args);
  const auto b = cli(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("Sensitivity") != std::string::npos);
  const auto j = cli(args + " --json -");
  CHECK(j.code == 0);
  CHECK(nlohmann::json::parse(j.out).at("k") == 5);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(cli("").code != 0);
  CHECK(cli("frobnicate").code != 0);
  // Input paths are validated with the flags, before any work.
  CHECK(cli("parse " + q(dir / "missing.v") + " -o " + q(dir / "x.json")).code == 1);
  {
    std::ofstream(dir / "broken.v") << "Lemma a : True.\n(* unterminated\n";
  }
  CHECK(cli("parse " + q(dir / "broken.v") + " -o " + q(dir / "x.json")).code == 2);
  {
    std::ofstream(dir / "empty.json") << R"({"version":1,"traces":[]})";
  }
  CHECK(cli("infer -i " + q(dir / "empty.json") + " -o " + q(dir / "m.json")).code == 3);
  CHECK(cli("eval -i " + q(dir / "empty.json")).code == 4);

  const auto traces = dir / "listnat.json";
  REQUIRE(cli("parse " + q(testing::data_path("listnat.v").string()) + " -o " + q(traces)).code == 0);
  CHECK(cli("infer -i " + q(traces) + " --holdout nosuch -o " + q(dir / "m.json")).code == 1);
  REQUIRE(cli("infer -i " + q(traces) + " -o " + q(dir / "m.json")).code == 0);
  const auto bad = cli("suggest -m " + q(dir / "m.json") + " --history " + q("omega."), true);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("available") != std::string::npos);
  CHECK(cli("accept -m " + q(dir / "m.json") + " -i " + q(traces) + " --mode fuzzy").code == 1);
}
