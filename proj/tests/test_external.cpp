#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "predex/engine.hpp"
#include "predex/external.hpp"

using namespace predex;
using predex::testing::TempDir;

namespace {

// Evaluator used across the external tests: sums column "v"; reports an
// error for a 1-row table; ignores unknown keys.
const char* kSumScript = R"PY(
import csv, json, sys

for line in sys.stdin:
    req = json.loads(line)
    if req.get("shutdown"):
        break
    if req["n_rows"] <= 1:
        print(json.dumps({"id": req["id"], "error": "too few rows"}), flush=True)
        continue
    total = 0.0
    with open(req["data_path"]) as f:
        for row in csv.DictReader(f):
            total += float(row["v"])
    print(json.dumps({"id": req["id"], "value": total}), flush=True)
)PY";

}  // namespace

TEST_CASE("external evaluator round trip") {
  TempDir tmp;
  auto script = tmp.write("sum.py", kSumScript);
  auto data = tmp.write("d.csv", "v\n1\n2\n3.5\n");

  ExternalProcess proc("python3 " + script.string(), 30.0);
  REQUIRE(proc.alive());
  auto v = proc.request(data.string(), 3);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(6.5));

  // evaluator-reported errors do not kill the child
  auto err = proc.request(data.string(), 1);
  CHECK_FALSE(err.has_value());
  CHECK(proc.alive());
  CHECK(proc.last_error() == "too few rows");

  auto again = proc.request(data.string(), 3);
  REQUIRE(again.has_value());
  CHECK(*again == doctest::Approx(6.5));
}

TEST_CASE("external evaluator timeout kills the child") {
  TempDir tmp;
  auto script = tmp.write("sleep.py", "import time, sys\nsys.stdin.readline()\ntime.sleep(30)\n");
  ExternalProcess proc("python3 " + script.string(), 0.5);
  auto v = proc.request("/nonexistent.csv", 0);
  CHECK_FALSE(v.has_value());
  CHECK_FALSE(proc.alive());
  CHECK_FALSE(proc.request("/nonexistent.csv", 0).has_value());  // stays dead
}

TEST_CASE("malformed responses are protocol errors") {
  TempDir tmp;
  auto script = tmp.write("bad.py", "import sys\nsys.stdin.readline()\nprint('not json', flush=True)\n");
  ExternalProcess proc("python3 " + script.string(), 10.0);
  CHECK_FALSE(proc.request("/x.csv", 0).has_value());
  CHECK_FALSE(proc.alive());
}

TEST_CASE("mismatched response ids are protocol errors") {
  TempDir tmp;
  auto script = tmp.write("wrongid.py",
                          "import sys, json\nsys.stdin.readline()\n"
                          "print(json.dumps({'id': 999, 'value': 1.0}), flush=True)\n");
  ExternalProcess proc("python3 " + script.string(), 10.0);
  CHECK_FALSE(proc.request("/x.csv", 0).has_value());
  CHECK_FALSE(proc.alive());
}

TEST_CASE("a command that exits immediately fails the first request") {
  ExternalProcess proc("exit 3", 5.0);
  CHECK_FALSE(proc.request("/x.csv", 0).has_value());
  CHECK_FALSE(proc.alive());
}

TEST_CASE("evaluate() drives an external objective end to end") {
  TempDir tmp;
  auto script = tmp.write("sum.py", kSumScript);
  std::istringstream in("v,tag\n10,a\n20,b\n30,a\n40,b\n");
  Relation r = load_csv(in, {});

  ObjectiveSpec spec;
  spec.direction = Direction::low;
  spec.kind = ExternalObjective{"python3 " + script.string(), 30.0};

  auto v = evaluate(spec, r, Predicate{{CategoricalEq{"tag", "a"}}});
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(60.0));  // rows 20 and 40 remain
  auto all = evaluate(spec, r, Predicate{{CategoricalEq{"tag", "zzz"}}});
  REQUIRE(all.has_value());
  CHECK(*all == doctest::Approx(100.0));  // nothing removed
  // the evaluator rejects 1-row tables
  CHECK_FALSE(evaluate(spec, r, Predicate{{NumericRange{"v", 15.0, 45.0}}}).has_value());
}
