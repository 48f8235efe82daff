#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "viewseek/bench.hpp"
#include "viewseek/io.hpp"

using namespace viewseek;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(VIEWSEEK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("viewseek_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("cli suite, run and report") {
  TempDir dir;
  CHECK(run("suite --seed 7 --per-category 2 --out " + dir.path.string()) == 0);
  const auto suite = suite_from_json(Json::parse(read_text_file(dir / "suite.json")));
  CHECK(suite.size() == 10);
  CHECK(read_text_file(dir / "suite.json") == dump_suite(build_suite(7, 2)));

  CHECK(run("run --agent oracle --jobs 2 --suite " + (dir / "suite.json") + " --out " + dir.path.string()) == 0);
  const auto results = results_from_json(Json::parse(read_text_file(dir / "results_oracle.json")));
  REQUIRE(results.size() == 10);
  for (const auto& r : results) CHECK(r.success);

  CHECK(run("report --results " + (dir / "results_oracle.json") + " --out " + dir.path.string()) == 0);
  CHECK(read_text_file(dir / "report.csv") == to_csv(aggregate(results)));
  CHECK(read_text_file(dir / "report.txt") == to_text(aggregate(results)));

  CHECK(run("trace --suite " + (dir / "suite.json") + " --id 3 --agent oracle --out " + dir.path.string()) == 0);
  const Json trace = Json::parse(read_text_file(dir / "trace_3.json"));
  CHECK(trace["steps"].size() == trace["result"]["steps"].get<std::size_t>());
}

TEST_CASE("cli error codes") {
  TempDir dir;
  CHECK(run("run --agent aif --suite " + (dir / "missing.json")) == 2);
  CHECK(run("suite --seed 1 --per-category 1 --out " + dir.path.string()) == 0);
  write_text_file(dir / "bad.json", R"({"noise": {"true_positive_rate": 2.0}})");
  CHECK(run("run --agent aif --config " + (dir / "bad.json") + " --suite " + (dir / "suite.json")) == 1);
  write_text_file(dir / "broken.json", "{ not json");
  CHECK(run("run --agent aif --config " + (dir / "broken.json") + " --suite " + (dir / "suite.json")) == 1);
  CHECK(run("run --agent nobody --suite " + (dir / "suite.json")) == 1);
  CHECK(run("bogus") == 1);
}
