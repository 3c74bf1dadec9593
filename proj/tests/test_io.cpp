#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "dftlim/errors.hpp"
#include "dftlim/io.hpp"

using namespace dftlim;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dftlim-io-test-" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};
}  // namespace

TEST_CASE("format_g17 round-trips doubles exactly") {
  for (double v : {0.0, 1.0, -1.0, 1.0 / 3.0, 6.02214076e23, 1e-300,
                   -3.0 * std::pow(2.0, -0.5)}) {
    const std::string s = format_g17(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("atomic write + read round trip; no partial files") {
  TempDir tmp;
  const std::string p = (tmp.path / "a.txt").string();
  CHECK_FALSE(file_exists(p));
  atomic_write_text(p, "hello\nworld\n");
  CHECK(file_exists(p));
  CHECK(read_text_file(p) == "hello\nworld\n");
  atomic_write_text(p, "rewritten");
  CHECK(read_text_file(p) == "rewritten");
  // No stray temporary siblings remain.
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(tmp.path)) {
    (void)e;
    ++count;
  }
  CHECK(count == 1);
  CHECK_THROWS_AS(read_text_file((tmp.path / "missing").string()),
                  ConfigError);
}

TEST_CASE("ensure_directory is mkdir -p") {
  TempDir tmp;
  const std::string deep = (tmp.path / "a" / "b" / "c").string();
  ensure_directory(deep);
  CHECK(fs::is_directory(deep));
  ensure_directory(deep);  // idempotent
  CHECK(fs::is_directory(deep));
}

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text(
      "# comment\n"
      "model = tf_d\n"
      "  b=2.5  \n"
      "\n"
      "z = 1, 2 # trailing comment\n");
  CHECK(kv.at("model") == "tf_d");
  CHECK(kv.at("b") == "2.5");
  CHECK(kv.at("z") == "1, 2");
  CHECK(kv.size() == 3);
  CHECK_THROWS_AS(parse_config_text("justtext\n"), ConfigError);
}

TEST_CASE("cache directory resolution precedence") {
  unsetenv("DFTLIM_CACHE_DIR");
  CHECK(resolve_cache_dir("explicit") == "explicit");
  CHECK(resolve_cache_dir("") == "./.dftlim-cache");
  setenv("DFTLIM_CACHE_DIR", "/tmp/envcache", 1);
  CHECK(resolve_cache_dir("") == "/tmp/envcache");
  CHECK(resolve_cache_dir("explicit") == "explicit");
  unsetenv("DFTLIM_CACHE_DIR");
}
