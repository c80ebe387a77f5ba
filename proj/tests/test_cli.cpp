#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* p = std::getenv("CUTPINN_CLI");
  REQUIRE_MESSAGE(p != nullptr, "CUTPINN_CLI must point at the CLI binary");
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return (status >> 8) & 0xff;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

const std::string kSmokeFlags =
    "--m-int 40 --m-bnd 8 --iters 3 --h1-cadence 0";

}  // namespace

TEST_CASE("usage errors exit with the invalid-config code") {
  CHECK(run("") == 2);                       // a subcommand is required
  CHECK(run("train") == 2);                  // --out is required
  CHECK(run("frobnicate --out /tmp/x") == 2);
  CHECK(run("train --domain square --out /tmp/x") == 2);
  CHECK(run("train --loss huber --out /tmp/x") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("train --help") == 0);
}

TEST_CASE("semantic configuration errors exit with code 2") {
  const fs::path dir = fresh_dir("cli_bad_cfg");
  CHECK(run("train --m-int 0 --out " + dir.string()) == 2);
  CHECK(run("train --m-int 9 --m-bnd 1 --out " + dir.string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("a short training run writes its outputs and reproduces") {
  const fs::path d1 = fresh_dir("cli_train_1");
  const fs::path d2 = fresh_dir("cli_train_2");
  CHECK(run("train --domain disk --loss c2 " + kSmokeFlags + " --out " +
            d1.string()) == 0);
  CHECK(run("train --domain disk --loss c2 " + kSmokeFlags + " --out " +
            d2.string()) == 0);
  for (const char* f : {"trace.csv", "checkpoint.txt", "manifest.txt",
                        "interior.csv", "boundary.csv"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(d1 / f));
    CHECK(read_file(d1 / f) == read_file(d2 / f));
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("config files feed flags and the command line wins") {
  const fs::path dir = fresh_dir("cli_cfg");
  const fs::path cfg = fs::temp_directory_path() / "cli_cfg.ini";
  {
    std::ofstream out(cfg);
    out << "m-int=40\n"
        << "m-bnd=8\n"
        << "iters=2\n"
        << "loss=std\n";
  }
  CHECK(run("train --config " + cfg.string() + " --m-int 50 --out " +
            dir.string()) == 0);
  const std::string manifest = read_file(dir / "manifest.txt");
  CHECK(manifest.find("m_int = 50") != std::string::npos);  // flag overrides
  CHECK(manifest.find("m_bnd = 8") != std::string::npos);   // from the file
  CHECK(manifest.find("loss = std") != std::string::npos);
  fs::remove(cfg);
  fs::remove_all(dir);
}

TEST_CASE("the verify subcommand runs a single named check") {
  const fs::path dir = fresh_dir("cli_verify");
  CHECK(run("verify --only d2-identity --out " + dir.string()) == 0);
  REQUIRE(fs::exists(dir / "checks.csv"));
  REQUIRE(fs::exists(dir / "checks.txt"));
  const std::string txt = read_file(dir / "checks.txt");
  CHECK(txt.find("[PASS] d2-identity") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("plotting renders a trace CSV to SVG") {
  const fs::path dir = fresh_dir("cli_plot");
  REQUIRE(run("train --domain disk --loss std " + kSmokeFlags + " --out " +
              dir.string()) == 0);
  const fs::path svg = dir / "loss.svg";
  CHECK(run("plot --in " + (dir / "trace.csv").string() + " --out " +
            svg.string() + " --kind line --x iter --y loss_total") == 0);
  REQUIRE(fs::exists(svg));
  const std::string body = read_file(svg);
  CHECK(body.rfind("<svg", 0) == 0);
  CHECK(body.find("polyline") != std::string::npos);
  fs::remove_all(dir);
}
