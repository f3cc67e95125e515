#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "snc/dataset.hpp"

using namespace snc;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/snc_test_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("read a small long-format CSV") {
  TempFile f("ok.csv",
             "unit_id,time,y,x1\n"
             "a,1,0.5,0.1\n"
             "a,2,1.5,0.2\n"
             "b,1,2.0,-0.3\n");
  auto data = read_dataset_csv(f.path, {"x1"});
  REQUIRE(data.units.size() == 2);
  CHECK(data.total_obs() == 3);
  CHECK(data.n_covariates() == 2);  // intercept + x1
  CHECK(data.covariate_names[0] == "(Intercept)");
  CHECK(data.covariate_names[1] == "x1");
  CHECK(data.units[0].id == "a");
  CHECK(data.units[0].n() == 2);
  CHECK(data.units[0].y[1] == doctest::Approx(1.5));
  CHECK(data.units[0].X(1, 0) == doctest::Approx(1.0));
  CHECK(data.units[0].X(1, 1) == doctest::Approx(0.2));
  CHECK(data.units[1].times[0] == doctest::Approx(1.0));
  CHECK(!data.balanced());
  CHECK_NOTHROW(data.validate());

  auto raw = read_dataset_csv(f.path, {"x1"}, false);
  CHECK(raw.n_covariates() == 1);
}

TEST_CASE("write/read round trip preserves the panel") {
  TempFile f("rt_in.csv",
             "unit_id,time,y,x1\n"
             "u1,1,0.7,1\n"
             "u1,2,0.9,2\n"
             "u2,1,1.1,3\n"
             "u2,2,1.3,4\n");
  auto data = read_dataset_csv(f.path, {"x1"}, false);
  const std::string out = "/tmp/snc_test_rt_out.csv";
  write_dataset_csv(out, data);
  auto back = read_dataset_csv(out, {"x1"}, false);
  std::remove(out.c_str());
  REQUIRE(back.units.size() == data.units.size());
  CHECK(back.balanced());
  for (size_t i = 0; i < data.units.size(); ++i) {
    CHECK(back.units[i].id == data.units[i].id);
    CHECK((back.units[i].y - data.units[i].y).norm() == doctest::Approx(0.0));
    CHECK((back.units[i].times - data.units[i].times).norm() == doctest::Approx(0.0));
    CHECK((back.units[i].X - data.units[i].X).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("CsvError carries the offending row") {
  TempFile bad_y("bady.csv",
                 "unit_id,time,y\n"
                 "a,1,1.0\n"
                 "a,2,-3.0\n");
  try {
    read_dataset_csv(bad_y.path, {});
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.row == 3);
  }

  TempFile bad_parse("badparse.csv",
                     "unit_id,time,y\n"
                     "a,one,1.0\n");
  try {
    read_dataset_csv(bad_parse.path, {});
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.row == 2);
  }

  TempFile bad_header("badhdr.csv", "id,t,resp\na,1,1\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_header.path, {}), CsvError);
  CHECK_THROWS_AS(read_dataset_csv("/tmp/snc_no_such_file.csv", {}), CsvError);

  TempFile missing_cov("badcov.csv", "unit_id,time,y\na,1,1\n");
  CHECK_THROWS_AS(read_dataset_csv(missing_cov.path, {"x9"}), CsvError);
}

TEST_CASE("validate rejects nonpositive y and unsorted times") {
  TempFile f("val.csv",
             "unit_id,time,y\n"
             "a,1,1.0\n"
             "a,2,2.0\n");
  auto data = read_dataset_csv(f.path, {});
  data.units[0].y[0] = 0.0;
  CHECK_THROWS(data.validate());
  data.units[0].y[0] = 1.0;
  data.units[0].times[0] = 5.0;
  CHECK_THROWS(data.validate());
}
