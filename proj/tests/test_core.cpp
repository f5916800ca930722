#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "netsysid/buffers.hpp"
#include "netsysid/rng.hpp"
#include "netsysid/trace.hpp"

using namespace netsysid;

namespace {

std::filesystem::path fresh_dir(const char* name) {
  std::filesystem::path dir = std::filesystem::path("test_tmp") / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("rng streams replay bitwise for equal keys") {
  RngStream a(42, 3, StreamPurpose::noise);
  RngStream b(42, 3, StreamPurpose::noise);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng keys separate by seed, agent, and purpose") {
  RngStream base(42, 3, StreamPurpose::noise);
  RngStream seed(43, 3, StreamPurpose::noise);
  RngStream agent(42, 4, StreamPurpose::noise);
  RngStream purpose(42, 3, StreamPurpose::initial_state);
  std::uint64_t v = base.next_u64();
  CHECK(v != seed.next_u64());
  CHECK(v != agent.next_u64());
  CHECK(v != purpose.next_u64());
}

TEST_CASE("each normal draw consumes exactly two counter steps") {
  RngStream rng(7, 0, StreamPurpose::noise);
  for (int i = 0; i < 3; ++i) rng.next_normal();
  CHECK(rng.counter() == 6);
}

TEST_CASE("fill_normal equals sequential draws bitwise") {
  RngStream a(9, 1, StreamPurpose::noise);
  RngStream b(9, 1, StreamPurpose::noise);
  std::vector<double> buf(8);
  a.fill_normal(buf);
  for (double v : buf) CHECK(v == b.next_normal());
}

TEST_CASE("unit draws stay inside (0, 1]") {
  RngStream rng(5, 0, StreamPurpose::noise);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.next_unit();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("normal draws have standard moments") {
  RngStream rng(12, 0, StreamPurpose::noise);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = rng.next_normal();
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("buffer planning splits the horizon into blocks") {
  BufferLayout layout = plan_buffers(5000, 240, 24);
  CHECK(layout.block == 264);
  CHECK(layout.buffer_count == 18);
  CHECK(layout.update_count == 240);
  CHECK(layout.gap == 24);
}

TEST_CASE("default gap and radius window at the reference horizons") {
  CHECK(default_gap(5000) == 24);
  CHECK(default_gap(200000) == 128);
  CHECK(default_gap(10000000) == 787);
  CHECK(radius_window(5000) == 17);
  CHECK(radius_window(200000) == 24);
  CHECK(radius_window(10000000) == 32);
}

TEST_CASE("reverse indexing walks each block back to front") {
  BufferLayout layout = plan_buffers(16, 3, 1);  // block 4
  CHECK(layout.reverse_state_index(0, 0) == 3);
  CHECK(layout.reverse_state_index(0, 3) == 0);
  CHECK(layout.reverse_state_index(1, 0) == 7);
  CHECK(layout.reverse_state_index(1, 1) == 6);
}

TEST_CASE("buffer planning rejects degenerate shapes") {
  CHECK_THROWS_AS(plan_buffers(100, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(plan_buffers(100, 1, 0), std::invalid_argument);   // block of 1
  CHECK_THROWS_AS(plan_buffers(10, 20, 5), std::invalid_argument);   // horizon too short
  CHECK_THROWS_AS(plan_buffers(100, 5, -1), std::invalid_argument);
  CHECK_NOTHROW(plan_buffers(100, 1, 1));
}

TEST_CASE("trace CSV round-trips exactly at 17 significant digits") {
  ErrorTrace trace;
  trace.algo = "dsgd-rer";
  trace.label = "m5";
  trace.seed = 3;
  trace.rows = {{0, 264, 0, 1.0 / 3.0}, {0, 264, 1, 0.25}, {1, 528, 0, 1e-7 / 3.0}};
  std::string csv = trace_to_csv(trace);
  CHECK(csv.rfind("algo,seed,buffer,samples,agent,error\n", 0) == 0);

  ErrorTrace back = trace_from_csv(csv, "m5");
  CHECK(back.algo == trace.algo);
  CHECK(back.seed == trace.seed);
  REQUIRE(back.rows.size() == trace.rows.size());
  for (size_t i = 0; i < trace.rows.size(); ++i) {
    CHECK(back.rows[i].buffer == trace.rows[i].buffer);
    CHECK(back.rows[i].samples == trace.rows[i].samples);
    CHECK(back.rows[i].agent == trace.rows[i].agent);
    CHECK(back.rows[i].error == trace.rows[i].error);  // bitwise
  }
}

TEST_CASE("trace parsing rejects mixed algo or seed columns") {
  std::string csv =
      "algo,seed,buffer,samples,agent,error\n"
      "dsgd-rer,1,0,10,0,0.5\n"
      "dsgd-rer,2,0,10,1,0.5\n";
  CHECK_THROWS(trace_from_csv(csv, "x"));
  std::string bad_header = "algo,seed,buffer,agent,error\nv,1,0,0,0.5\n";
  CHECK_THROWS(trace_from_csv(bad_header, "x"));
}

TEST_CASE("trace file names embed label and seed") {
  ErrorTrace trace;
  trace.algo = "dsgd-rer";
  trace.label = "m5";
  trace.seed = 3;
  CHECK(trace_file_name(trace) == "m5__seed3.csv");
  CHECK(label_from_file_name("/some/dir/m5__seed3.csv") == "m5");
  CHECK(label_from_file_name("net-b__seed12.csv") == "net-b");
}

TEST_CASE("traces persist through save and load") {
  auto dir = fresh_dir("trace_io");
  ErrorTrace trace;
  trace.algo = "vanilla-dsgd";
  trace.label = "vanilla";
  trace.seed = 9;
  trace.rows = {{0, 100, 0, 0.125}, {0, 100, 1, 0.5}};
  save_trace(trace, dir.string());
  ErrorTrace back = load_trace((dir / "vanilla__seed9.csv").string());
  CHECK(back.label == "vanilla");
  CHECK(back.seed == 9);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[1].error == 0.5);
}

TEST_CASE("atomic writes land complete and leave no temp files") {
  auto dir = fresh_dir("atomic");
  auto path = dir / "out.txt";
  write_file_atomic(path.string(), "payload\n");
  CHECK(slurp(path) == "payload\n");
  int entries = 0;
  for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
}

}  // TEST_SUITE
