#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

#include "matblow/errors.hpp"
#include "matblow/integrator.hpp"
#include "matblow/matrix_io.hpp"
#include "oracles.hpp"

using namespace matblow;

TEST_CASE("format_double round-trips every double") {
  oracle::Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, std::numeric_limits<double>::min(),
                   std::numeric_limits<double>::max(), std::numeric_limits<double>::denorm_min()}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("JSON matrix round trip is bit exact") {
  oracle::Rng rng(6);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      Matrix m = rng.gaussian(n);
      for (double& v : m.data()) v *= std::pow(10.0, rng.uniform(-20, 20));
      const std::string json = matrix_to_json(m);
      CHECK(parse_matrix(json) == m);
    }
  }
}

TEST_CASE("JSON matrix layout") {
  const Matrix m{{1, 2}, {3, 0.5}};
  CHECK(matrix_to_json(m) == "{\"n\": 2, \"rows\": [[1, 2], [3, 0.5]]}\n");
}

TEST_CASE("plain text matrices") {
  const Matrix expected{{1, 2}, {3, 4}};
  CHECK(parse_matrix("1 2\n3 4\n") == expected);
  CHECK(parse_matrix("1, 2\n3, 4") == expected);
  CHECK(parse_matrix("# a comment\n1\t2   # trailing\n\n3;4\n") == expected);
  CHECK(parse_matrix("  2.5e-1  \n") == Matrix{{0.25}});
  CHECK(parse_matrix("+4.9406564584124654e-324") == Matrix{{std::numeric_limits<double>::denorm_min()}});
  CHECK(parse_matrix("{\"rows\": [[1, 2], [3, 4]]}") == expected);
}

TEST_CASE("malformed matrices are rejected") {
  CHECK_THROWS_AS(parse_matrix(""), ParseError);
  CHECK_THROWS_AS(parse_matrix("# only a comment\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("1 2\n3\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("1 2 3\n4 5 6\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("1 x\n3 4\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("1 nan\n3 4\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("{\"n\": 2, \"rows\": [[1, 2]]}"), ParseError);
  CHECK_THROWS_AS(parse_matrix("{\"n\": 3, \"rows\": [[1, 2], [3, 4]]}"), ParseError);
  CHECK_THROWS_AS(parse_matrix("{\"rows\": [[1, \"a\"], [3, 4]]}"), ParseError);
  CHECK_THROWS_AS(parse_matrix("{\"rows\": "), ParseError);
}

TEST_CASE("matrix files") {
  const auto path = std::filesystem::temp_directory_path() / "matblow_io_test.json";
  const Matrix m{{1.0 / 3.0, -2e-300}, {7e200, 0.0}};
  write_matrix_file(path, m);
  CHECK(read_matrix_file(path) == m);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_matrix_file(path), Error);
}

TEST_CASE("snapshot JSON") {
  IntegrationOptions opts;
  opts.keep_snapshots = true;
  const Trajectory traj = integrate(RhsKind::square(), Matrix{{-1.0}}, 1.0, opts);
  std::ostringstream out;
  write_snapshots_json(out, traj.snapshots);
  const std::string s = out.str();
  CHECK(s.rfind("{\"snapshots\": [", 0) == 0);
  CHECK(s.find("\"step\": 0") != std::string::npos);
  CHECK(s.find("\"n\": 1") != std::string::npos);
}
