#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tcfp/error.hpp"
#include "tcfp/timeseries.hpp"

using namespace tcfp;

namespace {

ChannelSchema stage1_schema() {
  return {{"FIT101", {ChannelKind::sensor, "m3/h"}},
          {"LIT101", {ChannelKind::sensor, "mm"}},
          {"MV101", {ChannelKind::actuator, ""}}};
}

Dataset random_dataset(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Dataset ds;
  ds.start_time = 1700000000;
  ds.channels = {{"FIT101", ChannelKind::sensor, "m3/h", {}},
                 {"LIT101", ChannelKind::sensor, "mm", {}},
                 {"MV101", ChannelKind::actuator, "", {}}};
  for (std::size_t i = 0; i < rows; ++i) {
    ds.channels[0].values.push_back(2.4 * nd(rng) * 1e-3 + 1.0 / 3.0);
    ds.channels[1].values.push_back(650.0 + 100.0 * nd(rng));
    ds.channels[2].values.push_back(static_cast<double>(rng() % 3));
  }
  return ds;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::BadInput;
}

}  // namespace

TEST_SUITE("timeseries") {
  TEST_CASE("ingest a three-row historian dump") {
    test::TempDir dir;
    test::write_text(dir / "a.csv", "time,FIT101,MV101\n0,0.0,1\n1,1.2,0\n2,2.4,2\n");
    auto ds = ingest_csv(dir / "a.csv", stage1_schema());
    CHECK(ds.channels.size() == 2);
    CHECK(ds.length() == 3);
    CHECK(ds.sample_period_s == 1.0);
    CHECK(ds.start_time == 0);
    CHECK(ds.channel("MV101").kind == ChannelKind::actuator);
    CHECK(ds.channel("FIT101").values[2] == 2.4);
  }

  TEST_CASE("ragged timestamps are rejected") {
    test::TempDir dir;
    test::write_text(dir / "a.csv", "time,FIT101\n0,0\n1,1\n3,2\n");
    CHECK(code_of([&] { ingest_csv(dir / "a.csv", stage1_schema()); }) == Errc::RaggedSampling);
  }

  TEST_CASE("ingest error paths") {
    test::TempDir dir;
    test::write_text(dir / "empty.csv", "");
    CHECK(code_of([&] { ingest_csv(dir / "empty.csv", stage1_schema()); }) == Errc::EmptyDataset);
    test::write_text(dir / "header_only.csv", "time,FIT101\n");
    CHECK(code_of([&] { ingest_csv(dir / "header_only.csv", stage1_schema()); }) == Errc::EmptyDataset);
    test::write_text(dir / "unknown.csv", "time,AIT202\n0,1\n");
    CHECK(code_of([&] { ingest_csv(dir / "unknown.csv", stage1_schema()); }) == Errc::UnknownChannel);
    test::write_text(dir / "blank.csv", "time,FIT101\n0,1\n1,\n");
    CHECK(code_of([&] { ingest_csv(dir / "blank.csv", stage1_schema()); }) == Errc::BadInput);
    test::write_text(dir / "status.csv", "time,MV101\n0,1\n1,1.5\n");
    CHECK(code_of([&] { ingest_csv(dir / "status.csv", stage1_schema()); }) == Errc::BadInput);
    CHECK(code_of([&] { ingest_csv(dir / "missing.csv", stage1_schema()); }) == Errc::IoError);
  }

  TEST_CASE("export writes header plus one line per sample") {
    test::TempDir dir;
    Dataset ds;
    ds.channels = {{"FIT101", ChannelKind::sensor, "m3/h", {2.4}}};
    export_csv(ds, dir / "one.csv");
    CHECK(test::read_text(dir / "one.csv") == "time,FIT101\n0,2.4\n");

    Dataset empty;
    CHECK(code_of([&] { export_csv(empty, dir / "e.csv"); }) == Errc::EmptyDataset);
    CHECK(code_of([&] { export_csv(ds, dir.path() / "no" / "such" / "dir.csv"); }) == Errc::IoError);
  }

  TEST_CASE("export then ingest is lossless") {
    test::TempDir dir;
    for (std::size_t rows : {10u, 1000u}) {
      auto ds = random_dataset(rows, rows);
      export_csv(ds, dir / "rt.csv");
      auto back = ingest_csv(dir / "rt.csv", ds.schema());
      CHECK(back == ds);
    }
  }

  TEST_CASE("fractional sample periods survive the round trip") {
    test::TempDir dir;
    auto ds = random_dataset(200, 3);
    ds.sample_period_s = 0.1;
    ds.start_time = 0;
    export_csv(ds, dir / "rt.csv");
    auto back = ingest_csv(dir / "rt.csv", ds.schema());
    CHECK(back.sample_period_s == 0.1);
    CHECK(back == ds);
  }

  TEST_CASE("window slicing") {
    auto ds = random_dataset(10, 11);
    CHECK(window(ds, 0, ds.length()) == ds);

    auto w = window(ds, 2, 5);
    CHECK(w.length() == 3);
    CHECK(w.start_time == ds.start_time + 2);
    CHECK(w.sample_period_s == ds.sample_period_s);
    CHECK(w.channel("LIT101").values[0] == ds.channel("LIT101").values[2]);

    CHECK(code_of([&] { window(ds, 5, 5); }) == Errc::IndexError);
    CHECK(code_of([&] { window(ds, 0, 11); }) == Errc::IndexError);
  }

  TEST_CASE("nested windows compose") {
    auto ds = random_dataset(60, 5);
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      std::size_t a = rng() % 59;
      std::size_t b = a + 1 + rng() % (60 - a - 1);
      std::size_t len = b - a;
      std::size_t c = rng() % len;
      std::size_t d = c + 1 + rng() % (len - c);
      CHECK(window(window(ds, a, b), c, d) == window(ds, a + c, a + d));
    }
  }
}
