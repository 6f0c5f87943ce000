#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rchow/error.hpp"
#include "rchow/harness.hpp"
#include "rchow/ptf_learner.hpp"
#include "rchow/serialize.hpp"

using namespace rchow;

namespace {

Vector unit(int n, int j) {
  Vector v = Vector::Zero(n);
  v(j) = 1.0;
  return v;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    experiment_config_from_json(parse_json_text(text), text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string csv_of(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_results_csv(rows, out);
  return out.str();
}

}  // namespace

TEST_CASE("score examples") {
  const auto dist = make_gaussian(3, 1, 0.0);
  const LTF f(unit(3, 0), 0.0);
  const std::size_t count = 200000;
  const double se = 0.5 / std::sqrt(static_cast<double>(count));
  CHECK(score(f, f, dist, count, 1) <= 3.0 * se);
  CHECK(score(f.negated(), f, dist, count, 1) >= 1.0 - 3.0 * se);
  const double expect = oracle::phi(0.1) - oracle::phi(0.0);
  CHECK(std::abs(score(LTF(unit(3, 0), 0.1), f, dist, count, 2) - expect) <= 3.0 * se);
  CHECK_THROWS_AS(score(f, f, dist, 10, 1), Error);
}

TEST_CASE("config validation") {
  CHECK(message_of(R"({"learner": "ltf", "eps": [], "strategies": ["none"]})").find("eps") != std::string::npos);
  const std::string unknown = "{\n  \"learner\": \"ltf\",\n  \"eps\": [0],\n  \"strategies\": [\"none\"],\n  \"bogus\": 1\n}";
  const std::string msg = message_of(unknown);
  CHECK(msg.find("line 5") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(message_of("{\"learner\": \"ltf\",\n \"eps\": [0.5], \"strategies\": [\"none\"]}").find("eps") != std::string::npos);
  CHECK(message_of("{ \"learner\": ").find("line 1") != std::string::npos);

  CHECK(kind_of([] {
          experiment_config_from_json(parse_json_text(R"({"learner": "ltf", "eps": [0], "strategies": ["sneaky"]})"));
        }) == ErrorKind::UnknownStrategy);
  CHECK(kind_of([] {
          experiment_config_from_json(
              parse_json_text(R"({"learner": "intersection", "eps": [0], "strategies": ["none"], "k": 5})"));
        }) == ErrorKind::ConfigError);
  CHECK(kind_of([] {
          experiment_config_from_json(parse_json_text(
              R"({"learner": "ltf", "eps": [0], "strategies": ["none"], "distribution": {"family": "hypercube"}})"));
        }) == ErrorKind::ConfigError);
}

TEST_CASE("config JSON round trip") {
  const std::string text = R"({"learner": "intersection", "n": 6, "k": 2, "eps": [0.0, 0.02],
    "strategies": ["none", "boundary_flip"], "m": 5000, "trials": 2, "seed": 9, "delta": 0.2})";
  const ExperimentConfig c = experiment_config_from_json(parse_json_text(text), text);
  CHECK(c.learner == LearnerKind::Intersection);
  CHECK(c.d == 2);
  CHECK(c.strategies.size() == 2);
  const ExperimentConfig back = experiment_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("hypothesis JSON round trip") {
  const auto dist = make_gaussian(3, 2, 0.0);
  Vector c = Vector::LinSpaced(10, -1.0, 1.0);
  const Polynomial q(dist.basis_ptr(), c);
  Matrix basis = Matrix::Zero(3, 2);
  basis(0, 0) = 1.0;
  basis(2, 1) = 1.0;
  const std::vector<Hypothesis> hs = {
      LTF(unit(3, 1), -0.25),
      PTF(q),
      PBF(Polynomial(dist.basis_ptr(), round_to_grid(c, 0.05)), 0.1),
      ConstantHypothesis(3, -1.0),
      Intersection({LTF(unit(2, 0), 0.5), LTF(unit(2, 1), -0.5)}, basis),
  };
  const PointMatrix pts = oracle::gaussian_rows(3, 500, 4);
  for (const auto& h : hs) {
    const Json j = to_json(h);
    const Hypothesis back = hypothesis_from_json(Json::parse(j.dump()));
    CHECK(kind_name(back) == kind_name(h));
    CHECK(evaluate_rows(back, pts) == evaluate_rows(h, pts));
  }
  CHECK_THROWS_AS(hypothesis_from_json(Json::parse(R"({"kind": "tree"})")), Error);
}

TEST_CASE("clean LTF baseline over three trials") {
  const std::string text = R"({"learner": "ltf", "n": 20, "eps": [0], "strategies": ["none"],
    "m": 100000, "trials": 3, "seed": 5, "score_count": 100000})";
  const ExperimentConfig c = experiment_config_from_json(parse_json_text(text), text);
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    REQUIRE(r.disagreement.has_value());
    CHECK(*r.disagreement <= 0.05);
    CHECK(r.wall_time_ms == 0.0);
  }
  CHECK(rows[0].seed != rows[1].seed);
}

TEST_CASE("identical configs give identical CSV bytes") {
  const std::string text = R"({"learner": "ptf", "n": 4, "d": 2, "eps": [0, 0.05],
    "strategies": ["random_flip", "chow_attack"], "m": 20000, "trials": 2, "seed": 3, "score_count": 20000})";
  const ExperimentConfig c = experiment_config_from_json(parse_json_text(text), text);
  const std::string a = csv_of(run_experiment(c));
  const std::string b = csv_of(run_experiment(c));
  CHECK(a == b);
  CHECK(a.rfind(std::string(kResultHeader) + "\n", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 9);
}

TEST_CASE("format_row leaves a failed disagreement empty") {
  ResultRow r;
  r.learner = "ltf";
  r.strategy = "none";
  r.eps = 0.1;
  r.seed = 7;
  r.flags = "error=ZeroChowVector";
  const std::string line = format_row(r);
  CHECK(line == "ltf,none,0.10000000000000001,0,7,,,0,0,0,error=ZeroChowVector");
}
