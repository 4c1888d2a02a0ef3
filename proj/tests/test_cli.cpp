#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const fs::path scratch = fs::temp_directory_path() / "swarmflow_test_cli";

struct Result {
  int code;
  std::string out;
};

Result sh(const std::string& args, const std::string& env = "") {
  fs::create_directories(scratch);
  const fs::path log = scratch / "stdout.txt";
  const std::string cmd = env + " " + SWARMFLOW_CLI + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("presets listing") {
  const Result r = sh("presets");
  CHECK(r.code == 0);
  int lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  CHECK(lines >= 9);
  CHECK(r.out.find("constant_state") != std::string::npos);
  CHECK(sh("presets").out == r.out);

  fs::remove_all(scratch / "presets");
  CHECK(sh("presets --write " + (scratch / "presets").string()).code == 0);
  CHECK(fs::exists(scratch / "presets" / "flock_disc.cfg"));
  CHECK(sh("presets --show constant_state").out.find("scenario.name = constant_state") != std::string::npos);
}

TEST_CASE("run exit codes") {
  const fs::path out = scratch / "run";
  fs::remove_all(out);
  Result r = sh("run constant_state -o " + out.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "diagnostics.csv"));
  CHECK(fs::exists(out / "report.txt"));

  r = sh("run no_such_preset");
  CHECK(r.code == 1);
  CHECK(r.out.find("no_such_preset") != std::string::npos);

  write(scratch / "bad.cfg", "scenario.name = x\ngrid.dim = 1\ngrid.cells = 16\nrun.T = -1\n");
  r = sh("run " + (scratch / "bad.cfg").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("run.T") != std::string::npos);

  write(scratch / "typo.cfg", "scenario.name = x\ngrid.dim = 1\ngrid.celss = 16\n");
  r = sh("run " + (scratch / "typo.cfg").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("line 3") != std::string::npos);

  sh("presets --write " + (scratch / "presets").string());
  std::ifstream in(scratch / "presets" / "flock_1d.cfg");
  std::stringstream cfg;
  cfg << in.rdbuf();
  std::string strict = cfg.str();
  const auto at = strict.find("tolerance.flock_C = ");
  REQUIRE(at != std::string::npos);
  strict.replace(at, strict.find('\n', at) - at, "tolerance.flock_C = 1e-9");
  write(scratch / "strict.cfg", strict);
  r = sh("run " + (scratch / "strict.cfg").string());
  CHECK(r.code == 2);

  CHECK(sh("bogus").code == 1);
  CHECK(sh("run").code == 1);
}

TEST_CASE("thread overrides") {
  CHECK(sh("run constant_state", "SWARMFLOW_THREADS=1").code == 0);
  CHECK(sh("run constant_state -t 2").code == 0);
  const Result r = sh("run constant_state", "SWARMFLOW_THREADS=zero");
  CHECK(r.code == 1);
  CHECK(r.out.find("SWARMFLOW_THREADS") != std::string::npos);
}

TEST_CASE("audit a written candidate") {
  const fs::path out = scratch / "audit";
  fs::remove_all(out);
  std::ifstream in((scratch / "presets" / "subsolution_audit_basic.cfg"));
  std::stringstream cfg;
  cfg << in.rdbuf();
  write(scratch / "audit.cfg", cfg.str() + "output.candidate = true\n");
  CHECK(sh("run " + (scratch / "audit.cfg").string() + " -o " + out.string()).code == 0);
  REQUIRE(fs::exists(out / "candidate" / "slices.csv"));
  const Result r = sh("audit " + (out / "candidate").string() + " -o " + (out / "re").string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "re" / "audit.csv"));
  CHECK(sh("audit " + (out / "missing").string()).code == 1);
}
