#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers/metric_oracles.hpp"
#include "helpers/test_util.hpp"
#include "selftalk/errors.hpp"
#include "selftalk/metrics.hpp"

using namespace selftalk;

namespace {

FaceMesh small_mesh() {
  FaceMesh mesh;
  mesh.vertices = Mat(6, 3);
  for (std::size_t v = 0; v < 6; ++v) mesh.vertices.at(v, 0) = static_cast<double>(v);
  mesh.faces = {{0, 1, 2}, {3, 4, 5}};
  mesh.regions["lips"] = {0, 1};
  mesh.regions["upper_face"] = {3};
  mesh.validate();
  return mesh;
}

VertexSequence zero_seq(std::size_t frames, std::size_t verts, double fps = 25.0) {
  VertexSequence s;
  s.fps = fps;
  s.offsets = Mat(frames, verts * 3);
  return s;
}

}  // namespace

TEST_CASE("lve: identical inputs, hand fixture, aggregation switch") {
  FaceMesh mesh = small_mesh();
  VertexSequence gt = zero_seq(2, 6);
  CHECK(lve(gt, gt, mesh) == 0.0);

  // Frame 0 lip distances {0.1, 0.2}; frame 1 {0.3, 0.05}.
  VertexSequence pred = zero_seq(2, 6);
  pred.at(0, 0, 0) = 0.1;
  pred.at(0, 1, 1) = 0.2;
  pred.at(1, 0, 2) = 0.3;
  pred.at(1, 1, 0) = 0.05;
  CHECK(lve(gt, pred, mesh, LveAggregation::MaxThenMean) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(lve(gt, pred, mesh, LveAggregation::MeanThenMean) ==
        doctest::Approx((0.15 + 0.175) / 2.0).epsilon(1e-12));

  VertexSequence mismatched = zero_seq(3, 6);
  CHECK_THROWS_AS(lve(gt, mismatched, mesh), MismatchError);
}

TEST_CASE("fdd: identical inputs and the single-vertex hand fixture") {
  FaceMesh mesh = small_mesh();
  VertexSequence gt = zero_seq(2, 6);
  gt.at(1, 3, 0) = 1.0;  // upper-face vertex norms [0, 1] -> std 0.5
  VertexSequence pred = zero_seq(2, 6);
  CHECK(fdd(gt, gt, mesh) == 0.0);
  CHECK(fdd(gt, pred, mesh) == doctest::Approx(-0.5).epsilon(1e-12));

  VertexSequence single = zero_seq(1, 6);
  CHECK_THROWS_AS(fdd(single, single, mesh), InvalidArgument);
}

TEST_CASE("lrp: identical inputs, hand count, threshold limit") {
  FaceMesh mesh = small_mesh();
  VertexSequence gt = zero_seq(2, 6);
  CHECK(lrp(gt, gt, mesh, 1e-9) == 1.0);

  // Distances {0.1, 0.3, 0.2, 0.4} over 2 frames x 2 lip vertices.
  VertexSequence pred = zero_seq(2, 6);
  pred.at(0, 0, 0) = 0.1;
  pred.at(0, 1, 0) = 0.3;
  pred.at(1, 0, 0) = 0.2;
  pred.at(1, 1, 0) = 0.4;
  CHECK(lrp(gt, pred, mesh, 0.25) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lrp(gt, pred, mesh, 1e12) == 1.0);
}

TEST_CASE("lrp is monotonically non-decreasing in mu") {
  FaceMesh mesh = small_mesh();
  Rng rng(61);
  VertexSequence gt = zero_seq(4, 6);
  VertexSequence pred = zero_seq(4, 6);
  for (double& x : gt.offsets.v) x = rng.normal(0.0, 0.1);
  for (double& x : pred.offsets.v) x = rng.normal(0.0, 0.1);
  double prev = 0.0;
  for (double mu : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double value = lrp(gt, pred, mesh, mu);
    CHECK(value >= prev);
    prev = value;
  }
}

TEST_CASE("metrics ignore vertices outside their regions") {
  FaceMesh mesh = small_mesh();
  Rng rng(62);
  VertexSequence gt = zero_seq(3, 6);
  VertexSequence pred = zero_seq(3, 6);
  for (double& x : pred.offsets.v) x = rng.normal(0.0, 0.05);
  const double lve_before = lve(gt, pred, mesh);
  const double lrp_before = lrp(gt, pred, mesh, 0.05);
  const double fdd_before = fdd(gt, pred, mesh);
  // Vertex 2 is in no region; vertex 5 is in no region either.
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t ax = 0; ax < 3; ++ax) {
      pred.at(t, 2, ax) += 100.0;
      pred.at(t, 5, ax) -= 50.0;
    }
  CHECK(lve(gt, pred, mesh) == lve_before);
  CHECK(lrp(gt, pred, mesh, 0.05) == lrp_before);
  CHECK(fdd(gt, pred, mesh) == fdd_before);
}

TEST_CASE("all three metrics match brute-force oracles on random instances") {
  Rng rng(63);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t frames = 2 + rng.index(4);  // T in [2,5]
    const std::size_t verts = 4 + rng.index(3);   // V in [4,6]
    FaceMesh mesh;
    mesh.vertices = Mat(verts, 3);
    for (double& x : mesh.vertices.v) x = rng.normal();
    std::vector<std::size_t> lips, upper;
    for (std::size_t v = 0; v < verts; ++v) {
      if (rng.uniform() < 0.5) lips.push_back(v);
      if (rng.uniform() < 0.5) upper.push_back(v);
    }
    if (lips.empty()) lips.push_back(0);
    if (upper.empty()) upper.push_back(verts - 1);
    mesh.regions["lips"] = lips;
    mesh.regions["upper_face"] = upper;
    mesh.validate();

    VertexSequence gt = zero_seq(frames, verts);
    VertexSequence pred = zero_seq(frames, verts);
    for (double& x : gt.offsets.v) x = rng.normal(0.0, 0.2);
    for (double& x : pred.offsets.v) x = rng.normal(0.0, 0.2);
    const double mu = 0.05 + 0.4 * rng.uniform();

    CHECK(std::fabs(lve(gt, pred, mesh) - testutil::lve_oracle(gt, pred, lips, true)) < 1e-12);
    CHECK(std::fabs(lve(gt, pred, mesh, LveAggregation::MeanThenMean) -
                    testutil::lve_oracle(gt, pred, lips, false)) < 1e-12);
    CHECK(std::fabs(fdd(gt, pred, mesh) - testutil::fdd_oracle(gt, pred, upper)) < 1e-12);
    CHECK(std::fabs(lrp(gt, pred, mesh, mu) - testutil::lrp_oracle(gt, pred, lips, mu)) < 1e-12);
  }
}

TEST_CASE("evaluate aggregates per-sample rows into corpus means") {
  FaceMesh mesh = small_mesh();
  Rng rng(64);
  VertexSequence gt = zero_seq(3, 6);
  VertexSequence pred_a = zero_seq(3, 6);
  VertexSequence pred_b = zero_seq(3, 6);
  for (double& x : pred_a.offsets.v) x = rng.normal(0.0, 0.01);
  for (double& x : pred_b.offsets.v) x = rng.normal(0.0, 0.01);

  MetricParams params;
  params.mu = 0.02;
  EvalReport report = evaluate({{"a", &gt, &pred_a}, {"b", &gt, &pred_b}}, mesh, params);
  REQUIRE(report.per_sample.size() == 2);
  CHECK(report.lve ==
        doctest::Approx((report.per_sample[0].lve + report.per_sample[1].lve) / 2.0));
  CHECK(report.lrp ==
        doctest::Approx((report.per_sample[0].lrp + report.per_sample[1].lrp) / 2.0));
  CHECK(report.lrp >= 0.0);
  CHECK(report.lrp <= 1.0);

  auto dir = std::filesystem::temp_directory_path() / "selftalk_report";
  std::filesystem::create_directories(dir);
  write_report_json(report, (dir / "report.json").string());
  write_report_csv(report, (dir / "report.csv").string());
  std::ifstream json_in(dir / "report.json");
  std::string text((std::istreambuf_iterator<char>(json_in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"per_sample\"") != std::string::npos);
  std::ifstream csv_in(dir / "report.csv");
  std::string header;
  std::getline(csv_in, header);
  CHECK(header == "sample_id,lve,fdd,lrp");
}
