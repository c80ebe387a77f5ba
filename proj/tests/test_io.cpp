#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cutpinn/csv.hpp"
#include "cutpinn/rng.hpp"

using namespace cutpinn;
namespace fs = std::filesystem;

TEST_CASE("full-precision formatting round trips binary64") {
  Rng rng(7, "io-roundtrip");
  for (int k = 0; k < 1000; ++k) {
    const double v = (rng.uniform() - 0.5) *
                     std::pow(10.0, rng.uniform(-12.0, 12.0));
    const std::string s = io::format_full(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(std::strtod(io::format_full(0.1).c_str(), nullptr) == 0.1);
  CHECK(std::strtod(io::format_full(-0.0).c_str(), nullptr) == 0.0);
}

TEST_CASE("CSV writer emits the header and full-precision rows") {
  const fs::path path = fs::temp_directory_path() / "io_test.csv";
  {
    io::CsvWriter w(path.string(), "a,b,c");
    w.row({1.0, 0.1, -2.5e-7});
    w.row(std::vector<std::string>{"x", "y", "z"});
  }
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "a,b,c");
  REQUIRE(std::getline(in, line));
  std::stringstream ss(line);
  std::string tok;
  std::getline(ss, tok, ',');
  CHECK(std::strtod(tok.c_str(), nullptr) == 1.0);
  std::getline(ss, tok, ',');
  CHECK(std::strtod(tok.c_str(), nullptr) == 0.1);
  std::getline(ss, tok, ',');
  CHECK(std::strtod(tok.c_str(), nullptr) == -2.5e-7);
  REQUIRE(std::getline(in, line));
  CHECK(line == "x,y,z");
  fs::remove(path);
}

TEST_CASE("identical rows produce byte-identical files") {
  const fs::path p1 = fs::temp_directory_path() / "io_rep1.csv";
  const fs::path p2 = fs::temp_directory_path() / "io_rep2.csv";
  Rng rng(9, "io-bytes");
  std::vector<double> vals(60);
  for (double& v : vals) v = rng.uniform(-1e3, 1e3);
  for (const auto& p : {p1, p2}) {
    io::CsvWriter w(p.string(), "v1,v2,v3");
    for (int i = 0; i < 20; ++i) {
      w.row({vals[3 * i], vals[3 * i + 1], vals[3 * i + 2]});
    }
  }
  std::ifstream a(p1, std::ios::binary), b(p2, std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("manifest format is flat key = value") {
  const fs::path path = fs::temp_directory_path() / "io_manifest.txt";
  io::write_manifest(path.string(), {{"seed", "42"}, {"loss", "c2"}});
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "seed = 42");
  REQUIRE(std::getline(in, line));
  CHECK(line == "loss = c2");
  fs::remove(path);
}
