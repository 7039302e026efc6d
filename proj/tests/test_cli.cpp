#include <doctest.h>

#include <nlohmann/json.hpp>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace mf;

namespace {
struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mframe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_corpus(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/mframe_test_" + name + ".ode";
  std::ofstream(path) << text;
  return path;
}
}  // namespace

TEST_CASE("exit codes") {
  CHECK(invoke({"invariants", "--ode", "0"}).code == cli::ok);
  CHECK(invoke({"invariants", "--ode", "sin(x)"}).code == cli::input_error);
  CHECK(invoke({"invariants", "--ode", "x +"}).code == cli::input_error);
  CHECK(invoke({"invariants", "--ode", "q^2", "--mode", "symbolic", "--budget", "5"}).code ==
        cli::budget_exceeded);
  CHECK(invoke({"verify", "--suite", "structure"}).code == cli::verification_failure);
  CHECK(invoke({"verify", "--suite", "recurrence"}).code == cli::ok);
  CHECK(invoke({"verify", "--suite", "bogus"}).code == cli::input_error);
}

TEST_CASE("text output") {
  const auto o = invoke({"invariants", "--ode", "6"});
  CHECK(o.out.find("verdict linearizable") != std::string::npos);
  const auto w = invoke({"invariants", "--ode", "q^2"});
  CHECK(w.out.find("verdict not-linearizable") != std::string::npos);
  CHECK(w.out.find("branch generic") != std::string::npos);
}

TEST_CASE("machine envelope") {
  const auto o = invoke({"invariants", "--ode", "q^2", "--format", "machine", "--points", "3"});
  REQUIRE(o.code == cli::ok);
  const auto j = nlohmann::json::parse(o.out);
  for (const char* k : {"tool-version", "typo-ledger-version", "config", "results", "suite-residuals"})
    CHECK_MESSAGE(j.contains(k), k);
  CHECK(j["typo-ledger-version"] == "2026.10-1");
  CHECK(j["config"]["points"] == 3);
  CHECK(j["config"]["seed"] == 0);
  CHECK(j["config"]["order"] == 4);
}

TEST_CASE("classify a corpus") {
  const auto path = temp_corpus("pair", "# two flat equations\nflat: 0\nshift: 6\nw: q^2\n");
  const auto o = invoke({"classify", path, "--format", "machine"});
  REQUIRE(o.code == cli::ok);
  const auto j = nlohmann::json::parse(o.out);
  const auto& rows = j["results"];
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["verdict"] == "linearizable");
  CHECK(rows[1]["verdict"] == "linearizable");
  CHECK(rows[2]["verdict"] == "not-linearizable");
  CHECK(invoke({"classify", path, "--format", "machine"}).out == o.out);
}

TEST_CASE("an empty corpus is not an error") {
  const auto path = temp_corpus("empty", "# nothing here\n");
  CHECK(invoke({"classify", path}).code == cli::ok);
}

TEST_CASE("a malformed corpus reports every bad line") {
  const auto path = temp_corpus("bad", "a: p\nb: x +\nc p\n");
  const auto o = invoke({"classify", path});
  CHECK(o.code == cli::input_error);
  CHECK(o.err.find("line 2") != std::string::npos);
  CHECK(o.err.find("line 3") != std::string::npos);
}

TEST_CASE("equivalence command") {
  CHECK(invoke({"equivalent", "--ode", "0", "--ode", "6", "--map-x", "x", "--map-u", "u + x^3"}).out.find(
            "verified-by-hint") != std::string::npos);
  CHECK(invoke({"equivalent", "--ode", "0", "--ode", "q^2"}).out.find("necessarily-inequivalent") !=
        std::string::npos);
}
