// metrics.hpp — evaluation metrics over offset sequences: lip vertex error,
// upper-face dynamics deviation, lip readability percentage.
#pragma once

#include <string>
#include <vector>

#include "selftalk/mesh.hpp"

namespace selftalk {

enum class LveAggregation { MaxThenMean, MeanThenMean };

struct MetricParams {
  double mu = 1e-4;  // LRP threshold, mesh units
  LveAggregation lve_agg = LveAggregation::MaxThenMean;
  std::string lip_region = "lips";
  std::string upper_region = "upper_face";
};

// Per-frame lip-vertex L2 distances aggregated max-then-mean (FaceFormer
// convention) or mean-then-mean.
double lve(const VertexSequence& gt, const VertexSequence& pred, const FaceMesh& mesh,
           LveAggregation agg = LveAggregation::MaxThenMean,
           const std::string& region = "lips");

// Mean over upper-face vertices of std_t(||pred_t,v||) - std_t(||gt_t,v||),
// population standard deviation; needs T >= 2.
double fdd(const VertexSequence& gt, const VertexSequence& pred, const FaceMesh& mesh,
           const std::string& region = "upper_face");

// Fraction of (frame, lip vertex) pairs with distance strictly below mu.
double lrp(const VertexSequence& gt, const VertexSequence& pred, const FaceMesh& mesh,
           double mu, const std::string& region = "lips");

struct SampleEval {
  std::string sample_id;
  double lve = 0.0;
  double fdd = 0.0;
  double lrp = 0.0;
};

struct EvalReport {
  double lve = 0.0;  // corpus means of the per-sample values
  double fdd = 0.0;
  double lrp = 0.0;
  double mu = 0.0;
  std::string lve_aggregation;
  std::string lip_region;
  std::string upper_region;
  std::vector<SampleEval> per_sample;
};

struct EvalInstance {
  std::string sample_id;
  const VertexSequence* gt = nullptr;
  const VertexSequence* pred = nullptr;
};

EvalReport evaluate(const std::vector<EvalInstance>& instances, const FaceMesh& mesh,
                    const MetricParams& params);

void write_report_json(const EvalReport& report, const std::string& path);
void write_report_csv(const EvalReport& report, const std::string& path);

}  // namespace selftalk
