// features.hpp — timed feature matrices shared by the audio and lip encoders.
#pragma once

#include "selftalk/mat.hpp"

namespace selftalk {

// T x F feature rows on a frame timeline.
struct FeatureSequence {
  Mat values;
  double fps = 0.0;

  std::size_t frames() const { return values.rows; }
  std::size_t dim() const { return values.cols; }
};

// Audio latents x_e2 or lip latents l; same layout, different producers.
using LatentSequence = FeatureSequence;

}  // namespace selftalk
