// losses.hpp — the four training losses and their weighted total: per-frame
// vertex MSE, velocity matching, latent consistency, and CTC text consistency.
#pragma once

#include <cstddef>
#include <vector>

#include "selftalk/mesh.hpp"
#include "selftalk/tensor.hpp"
#include "selftalk/text.hpp"

namespace selftalk {

struct LossWeights {
  double rec = 1000.0;
  double vel = 1000.0;
  double lat = 0.001;
  double ctc = 0.0001;
};

struct LossBreakdown {
  double rec = 0.0;
  double vel = 0.0;
  double lat = 0.0;
  double ctc = 0.0;
  double total = 0.0;
  bool ctc_skipped = false;  // target infeasible for the frame count
};

// Offsets are T x 3V; losses normalize per frame and per vertex.
Tensor rec_loss(const Tensor& predicted, const Tensor& target);
// Frame-difference MSE over t = 2..T, normalized by max(T-1, 1); zero for T=1.
Tensor vel_loss(const Tensor& predicted, const Tensor& target);
// Mean over frames of the mean squared feature difference (both T x F).
Tensor lat_loss(const Tensor& audio_latents, const Tensor& lip_latents);
// -log sum over alignments collapsing to `target`, log-space forward
// recursion; gradients via the forward/backward (alpha-beta) algorithm.
// Infeasible targets yield +infinity with zero gradient (never thrown).
Tensor ctc_loss(const Tensor& probs, const std::vector<std::size_t>& target,
                std::size_t blank_index);

bool ctc_feasible(std::size_t frames, const std::vector<std::size_t>& target);

// Plain-value conveniences for evaluation paths.
double rec_loss(const VertexSequence& gt, const VertexSequence& predicted);
double vel_loss(const VertexSequence& gt, const VertexSequence& predicted);
double ctc_loss(const TextDistribution& dist, const Transcript& target, const Vocabulary& vocab);

struct TotalLoss {
  Tensor value;  // graph node over the finite terms
  LossBreakdown breakdown;
};

// total = w.rec*rec + w.vel*vel + w.lat*lat + w.ctc*ctc; an infinite ctc term
// is dropped from the graph and flagged in the breakdown.
TotalLoss total_loss(const Tensor& rec, const Tensor& vel, const Tensor& lat, const Tensor& ctc,
                     const LossWeights& weights);

}  // namespace selftalk
