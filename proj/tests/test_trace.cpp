#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "hypernat/trace.hpp"

using namespace hypernat;

namespace {

std::string tmp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_tmp(const std::string& name, const std::string& content) {
  std::string path = tmp_file(name);
  std::ofstream f(path, std::ios::binary);
  f << content;
  return path;
}

const char* kHeader = "t_us,src_ip,src_port,dst_ip,dst_port,proto,size_bytes\n";

}  // namespace

TEST_CASE("flow ids follow first appearance") {
  std::string path = write_tmp("tr_ids.csv",
      std::string(kHeader) +
      "0,10.0.0.1,2000,198.51.100.1,80,17,100\n"
      "1,10.0.0.1,2000,198.51.100.1,80,17,100\n"
      "2,10.0.0.2,2000,198.51.100.1,80,17,100\n"
      "3,10.0.0.1,2000,198.51.100.1,80,17,100\n"
      "4,10.0.0.1,2000,198.51.100.1,80,6,100\n");
  FabricConfig cfg;
  auto recs = load_trace(path, cfg);
  REQUIRE(recs.size() == 5);
  CHECK(recs[0].flow_id == 1);
  CHECK(recs[1].flow_id == 1);
  CHECK(recs[2].flow_id == 2);
  CHECK(recs[3].flow_id == 1);
  CHECK(recs[4].flow_id == 3);  // proto makes it a different connection
  CHECK(recs[1].t == us_to_ns(1));
  CHECK(recs[0].tuple.src == Endpoint{0x0A000001u, 2000});
  CHECK(recs[0].tuple.dst == Endpoint{0xC6336401u, 80});
}

TEST_CASE("trace validation failures carry the line number") {
  FabricConfig cfg;
  SUBCASE("missing file names the path") {
    try {
      load_trace("/nonexistent/nope.csv", cfg);
      FAIL("expected throw");
    } catch (const TraceError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/nope.csv") != std::string::npos);
    }
  }
  SUBCASE("bad header") {
    std::string p = write_tmp("tr_h.csv", "time,stuff\n1,2\n");
    CHECK_THROWS_AS(load_trace(p, cfg), TraceError);
  }
  SUBCASE("unsorted timestamps") {
    std::string p = write_tmp("tr_s.csv",
        std::string(kHeader) +
        "5,10.0.0.1,2000,198.51.100.1,80,17,100\n"
        "4,10.0.0.1,2000,198.51.100.1,80,17,100\n");
    try {
      load_trace(p, cfg);
      FAIL("expected throw");
    } catch (const TraceError& e) {
      CHECK(e.line == 3);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("malformed ip") {
    std::string p = write_tmp("tr_ip.csv",
        std::string(kHeader) + "0,10.0.0.999,2000,198.51.100.1,80,17,100\n");
    try {
      load_trace(p, cfg);
      FAIL("expected throw");
    } catch (const TraceError& e) {
      CHECK(e.line == 2);
    }
  }
  SUBCASE("src outside the internal space") {
    std::string p = write_tmp("tr_src.csv",
        std::string(kHeader) + "0,11.0.0.1,2000,198.51.100.1,80,17,100\n");
    CHECK_THROWS_AS(load_trace(p, cfg), TraceError);
  }
  SUBCASE("dst outside the remote space") {
    std::string p = write_tmp("tr_dst.csv",
        std::string(kHeader) + "0,10.0.0.1,2000,198.51.100.99,80,17,100\n");
    FabricConfig narrow = cfg;
    narrow.remote_space.n_ips = 16;
    CHECK_THROWS_AS(load_trace(p, narrow), TraceError);
  }
  SUBCASE("field count") {
    std::string p = write_tmp("tr_f.csv",
        std::string(kHeader) + "0,10.0.0.1,2000,198.51.100.1,80,17\n");
    CHECK_THROWS_AS(load_trace(p, cfg), TraceError);
  }
  SUBCASE("negative time") {
    std::string p = write_tmp("tr_neg.csv",
        std::string(kHeader) + "-1,10.0.0.1,2000,198.51.100.1,80,17,100\n");
    CHECK_THROWS_AS(load_trace(p, cfg), TraceError);
  }
}

TEST_CASE("generated traces are deterministic and valid") {
  FabricConfig cfg;
  auto a = gen_trace(cfg, 50, 4, 1000, 42);
  auto b = gen_trace(cfg, 50, 4, 1000, 42);
  REQUIRE(a.size() == 200);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].tuple == b[i].tuple);
    CHECK(a[i].flow_id == b[i].flow_id);
  }
  auto c = gen_trace(cfg, 50, 4, 1000, 43);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) any_diff |= !(a[i].tuple == c[i].tuple);
  CHECK(any_diff);

  SUBCASE("round robin at the aggregate rate") {
    // 1000 pps -> packet k at k ms; flows cycle 1..50.
    CHECK(a[0].t == 0);
    CHECK(a[1].t == us_to_ns(1000));
    CHECK(a[50].t == us_to_ns(50000));
    CHECK(a[0].flow_id == 1);
    CHECK(a[49].flow_id == 50);
    CHECK(a[50].flow_id == 1);
    CHECK(a[50].tuple == a[0].tuple);
  }

  SUBCASE("flows are distinct connections") {
    std::set<std::pair<uint64_t, uint64_t>> pairs;
    for (size_t i = 0; i < 50; ++i)
      pairs.insert({a[i].tuple.src.index(), a[i].tuple.dst.index()});
    CHECK(pairs.size() == 50);
  }

  SUBCASE("all endpoints inside their spaces") {
    for (const auto& r : a) {
      CHECK(cfg.internal_space.contains(r.tuple.src));
      CHECK(cfg.remote_space.contains(r.tuple.dst));
    }
  }
}

TEST_CASE("write and reload round-trips exactly") {
  FabricConfig cfg;
  auto a = gen_trace(cfg, 20, 3, 2500, 7);
  std::string path = tmp_file("tr_rt.csv");
  write_trace(path, a);
  auto b = load_trace(path, cfg);
  REQUIRE(b.size() == a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].tuple == b[i].tuple);
    CHECK(a[i].flow_id == b[i].flow_id);
    CHECK(a[i].size_bytes == b[i].size_bytes);
  }
  // Byte-identical rewrite.
  std::string path2 = tmp_file("tr_rt2.csv");
  write_trace(path2, b);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(s1.find(kTraceHeader) == 0);
}

TEST_CASE("generator rejects impossible parameters") {
  FabricConfig cfg;
  CHECK_THROWS_AS(gen_trace(cfg, 0, 5, 1000, 1), ConfigError);
  CHECK_THROWS_AS(gen_trace(cfg, 5, 0, 1000, 1), ConfigError);
  CHECK_THROWS_AS(gen_trace(cfg, 5, 5, 0, 1), ConfigError);
  FabricConfig tiny = cfg;
  tiny.internal_space = EndpointRange{0x0A000000u, 1, 1, 2};
  tiny.remote_space = EndpointRange{0xC6336400u, 1, 1, 2};
  CHECK_THROWS_AS(gen_trace(tiny, 5, 1, 1000, 1), ConfigError);  // only 4 pairs
  CHECK_NOTHROW(gen_trace(tiny, 4, 1, 1000, 1));
}
