#include "selftalk/metrics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {

void check_pair(const VertexSequence& gt, const VertexSequence& pred) {
  if (gt.frames() != pred.frames() || gt.offsets.cols != pred.offsets.cols)
    throw MismatchError("metrics: ground-truth and prediction shapes differ");
}

double vertex_distance(const VertexSequence& a, const VertexSequence& b, std::size_t t,
                       std::size_t v) {
  double d2 = 0.0;
  for (std::size_t ax = 0; ax < 3; ++ax) {
    const double d = a.at(t, v, ax) - b.at(t, v, ax);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

}  // namespace

double lve(const VertexSequence& gt, const VertexSequence& pred, const FaceMesh& mesh,
           LveAggregation agg, const std::string& region) {
  check_pair(gt, pred);
  const auto& lips = mesh.region(region);
  if (lips.empty()) throw InvalidArgument("lve: empty region");
  double total = 0.0;
  for (std::size_t t = 0; t < gt.frames(); ++t) {
    double frame_value = 0.0;
    for (std::size_t v : lips) {
      const double d = vertex_distance(gt, pred, t, v);
      if (agg == LveAggregation::MaxThenMean)
        frame_value = std::max(frame_value, d);
      else
        frame_value += d / static_cast<double>(lips.size());
    }
    total += frame_value;
  }
  return total / static_cast<double>(gt.frames());
}

double fdd(const VertexSequence& gt, const VertexSequence& pred, const FaceMesh& mesh,
           const std::string& region) {
  check_pair(gt, pred);
  if (gt.frames() < 2) throw InvalidArgument("fdd: needs at least 2 frames");
  const auto& upper = mesh.region(region);
  if (upper.empty()) throw InvalidArgument("fdd: empty region");

  auto norm_std = [](const VertexSequence& seq, std::size_t v) {
    const double frames = static_cast<double>(seq.frames());
    double mean = 0.0;
    for (std::size_t t = 0; t < seq.frames(); ++t) {
      double n2 = 0.0;
      for (std::size_t ax = 0; ax < 3; ++ax) n2 += seq.at(t, v, ax) * seq.at(t, v, ax);
      mean += std::sqrt(n2);
    }
    mean /= frames;
    double var = 0.0;
    for (std::size_t t = 0; t < seq.frames(); ++t) {
      double n2 = 0.0;
      for (std::size_t ax = 0; ax < 3; ++ax) n2 += seq.at(t, v, ax) * seq.at(t, v, ax);
      const double d = std::sqrt(n2) - mean;
      var += d * d;
    }
    return std::sqrt(var / frames);
  };

  double total = 0.0;
  for (std::size_t v : upper) total += norm_std(pred, v) - norm_std(gt, v);
  return total / static_cast<double>(upper.size());
}

double lrp(const VertexSequence& gt, const VertexSequence& pred, const FaceMesh& mesh, double mu,
           const std::string& region) {
  check_pair(gt, pred);
  if (!(mu > 0.0)) throw InvalidArgument("lrp: mu must be positive");
  const auto& lips = mesh.region(region);
  if (lips.empty()) throw InvalidArgument("lrp: empty region");
  std::size_t readable = 0;
  for (std::size_t t = 0; t < gt.frames(); ++t)
    for (std::size_t v : lips)
      if (vertex_distance(gt, pred, t, v) < mu) ++readable;
  return static_cast<double>(readable) / static_cast<double>(gt.frames() * lips.size());
}

EvalReport evaluate(const std::vector<EvalInstance>& instances, const FaceMesh& mesh,
                    const MetricParams& params) {
  if (instances.empty()) throw InvalidArgument("evaluate: no samples");
  EvalReport report;
  report.mu = params.mu;
  report.lve_aggregation = params.lve_agg == LveAggregation::MaxThenMean ? "max" : "mean";
  report.lip_region = params.lip_region;
  report.upper_region = params.upper_region;
  for (const auto& inst : instances) {
    SampleEval row;
    row.sample_id = inst.sample_id;
    row.lve = lve(*inst.gt, *inst.pred, mesh, params.lve_agg, params.lip_region);
    row.fdd = fdd(*inst.gt, *inst.pred, mesh, params.upper_region);
    row.lrp = lrp(*inst.gt, *inst.pred, mesh, params.mu, params.lip_region);
    report.per_sample.push_back(row);
  }
  for (const auto& row : report.per_sample) {
    report.lve += row.lve;
    report.fdd += row.fdd;
    report.lrp += row.lrp;
  }
  const double n = static_cast<double>(report.per_sample.size());
  report.lve /= n;
  report.fdd /= n;
  report.lrp /= n;
  return report;
}

void write_report_json(const EvalReport& report, const std::string& path) {
  nlohmann::json j;
  j["lve"] = report.lve;
  j["fdd"] = report.fdd;
  j["lrp"] = report.lrp;
  j["mu"] = report.mu;
  j["lve_aggregation"] = report.lve_aggregation;
  j["lip_region"] = report.lip_region;
  j["upper_region"] = report.upper_region;
  j["per_sample"] = nlohmann::json::array();
  for (const auto& row : report.per_sample)
    j["per_sample"].push_back(
        {{"id", row.sample_id}, {"lve", row.lve}, {"fdd", row.fdd}, {"lrp", row.lrp}});
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_report_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_report_csv: cannot open " + path);
  out << "sample_id,lve,fdd,lrp\n";
  char line[160];
  for (const auto& row : report.per_sample) {
    std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g\n", row.sample_id.c_str(), row.lve,
                  row.fdd, row.lrp);
    out << line;
  }
  std::snprintf(line, sizeof(line), "mean,%.17g,%.17g,%.17g\n", report.lve, report.fdd,
                report.lrp);
  out << line;
}

}  // namespace selftalk
