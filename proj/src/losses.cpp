#include "selftalk/losses.hpp"

#include <cmath>
#include <limits>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double logsumexp3(double a, double b, double c) { return logsumexp2(logsumexp2(a, b), c); }

void check_offset_pair(const Tensor& predicted, const Tensor& target, const char* op) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
    throw MismatchError(std::string(op) + ": shape mismatch");
  if (predicted.cols() == 0 || predicted.cols() % 3 != 0)
    throw MismatchError(std::string(op) + ": columns must be a positive multiple of 3");
}

}  // namespace

Tensor rec_loss(const Tensor& predicted, const Tensor& target) {
  check_offset_pair(predicted, target, "rec_loss");
  const double frames = static_cast<double>(predicted.rows());
  const double verts = static_cast<double>(predicted.cols() / 3);
  Tensor d = sub(predicted, target);
  return scale(sum_all(hadamard(d, d)), 1.0 / (frames * verts));
}

Tensor vel_loss(const Tensor& predicted, const Tensor& target) {
  check_offset_pair(predicted, target, "vel_loss");
  const std::size_t frames = predicted.rows();
  if (frames < 2) return Tensor::zeros(1, 1);
  const std::size_t steps = frames - 1;
  const double verts = static_cast<double>(predicted.cols() / 3);
  Tensor dp = sub(slice_rows(predicted, 1, steps), slice_rows(predicted, 0, steps));
  Tensor dt = sub(slice_rows(target, 1, steps), slice_rows(target, 0, steps));
  Tensor d = sub(dp, dt);
  return scale(sum_all(hadamard(d, d)), 1.0 / (static_cast<double>(steps) * verts));
}

Tensor lat_loss(const Tensor& audio_latents, const Tensor& lip_latents) {
  if (audio_latents.rows() != lip_latents.rows() || audio_latents.cols() != lip_latents.cols())
    throw MismatchError("lat_loss: latent dimensions disagree; the diagram is mis-wired");
  Tensor d = sub(audio_latents, lip_latents);
  return mean_all(hadamard(d, d));
}

bool ctc_feasible(std::size_t frames, const std::vector<std::size_t>& target) {
  std::size_t needed = target.size();
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++needed;
  return frames >= needed;
}

Tensor ctc_loss(const Tensor& probs, const std::vector<std::size_t>& target,
                std::size_t blank_index) {
  const std::size_t T = probs.rows();
  const std::size_t U = probs.cols();
  if (T == 0 || U < 2) throw InvalidArgument("ctc_loss: needs frames and at least 2 symbols");
  if (blank_index >= U) throw InvalidArgument("ctc_loss: blank index out of range");
  for (std::size_t s : target) {
    if (s >= U) throw InvalidArgument("ctc_loss: target symbol out of range");
    if (s == blank_index) throw InvalidArgument("ctc_loss: target contains the blank");
  }

  if (!ctc_feasible(T, target)) {
    Tensor inf = Tensor::zeros(1, 1);
    inf.values()[0] = std::numeric_limits<double>::infinity();
    return inf;
  }

  const std::size_t L = target.size();
  const std::size_t S = 2 * L + 1;
  auto label = [&](std::size_t i) { return (i % 2 == 0) ? blank_index : target[i / 2]; };
  auto lp = [&](std::size_t t, std::size_t k) {
    const double p = probs.at(t, k);
    return p > 0.0 ? std::log(p) : kNegInf;
  };

  // Forward variables, emissions included at each step.
  std::vector<double> alpha(T * S, kNegInf);
  alpha[0] = lp(0, blank_index);
  if (S > 1) alpha[1] = lp(0, label(1));
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t i = 0; i < S; ++i) {
      double acc = alpha[(t - 1) * S + i];
      if (i >= 1) acc = logsumexp2(acc, alpha[(t - 1) * S + i - 1]);
      if (i >= 2 && label(i) != blank_index && label(i) != label(i - 2))
        acc = logsumexp2(acc, alpha[(t - 1) * S + i - 2]);
      alpha[t * S + i] = acc == kNegInf ? kNegInf : acc + lp(t, label(i));
    }
  }
  double log_z = alpha[(T - 1) * S + S - 1];
  if (S > 1) log_z = logsumexp2(log_z, alpha[(T - 1) * S + S - 2]);

  Tensor out = make_custom_op(
      1, 1, {probs},
      [T, U, S, L, blank_index, target, alpha, log_z](TensorNode& node) {
        auto& parent = *node.parents[0];
        if (!parent.requires_grad) return;
        if (log_z == kNegInf) return;  // no feasible path carries no gradient
        auto label = [&](std::size_t i) {
          return (i % 2 == 0) ? blank_index : target[i / 2];
        };
        auto lp = [&](std::size_t t, std::size_t k) {
          const double p = parent.value[t * U + k];
          return p > 0.0 ? std::log(p) : kNegInf;
        };
        // Backward variables with the same emission convention as alpha.
        std::vector<double> beta(T * S, kNegInf);
        beta[(T - 1) * S + S - 1] = lp(T - 1, label(S - 1));
        if (S > 1) beta[(T - 1) * S + S - 2] = lp(T - 1, label(S - 2));
        for (std::size_t t = T - 1; t-- > 0;) {
          for (std::size_t i = 0; i < S; ++i) {
            double acc = beta[(t + 1) * S + i];
            if (i + 1 < S) acc = logsumexp2(acc, beta[(t + 1) * S + i + 1]);
            if (i + 2 < S && label(i + 2) != blank_index && label(i + 2) != label(i))
              acc = logsumexp2(acc, beta[(t + 1) * S + i + 2]);
            beta[t * S + i] = acc == kNegInf ? kNegInf : acc + lp(t, label(i));
          }
        }
        const double upstream = node.grad[0];
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t i = 0; i < S; ++i) {
            const double a = alpha[t * S + i];
            const double b = beta[t * S + i];
            if (a == kNegInf || b == kNegInf) continue;
            const std::size_t k = label(i);
            // alpha and beta both include the frame-t emission; divide one out.
            const double posterior = std::exp(a + b - lp(t, k) - log_z);
            const double p = parent.value[t * U + k];
            if (p > 0.0) parent.grad[t * U + k] -= upstream * posterior / p;
          }
        }
        (void)L;
      });
  out.values()[0] = -log_z;
  return out;
}

double rec_loss(const VertexSequence& gt, const VertexSequence& predicted) {
  return rec_loss(Tensor::constant(predicted.offsets), Tensor::constant(gt.offsets)).item();
}

double vel_loss(const VertexSequence& gt, const VertexSequence& predicted) {
  return vel_loss(Tensor::constant(predicted.offsets), Tensor::constant(gt.offsets)).item();
}

double ctc_loss(const TextDistribution& dist, const Transcript& target, const Vocabulary& vocab) {
  return ctc_loss(Tensor::constant(dist.probs), vocab.encode(target), vocab.blank_index).item();
}

TotalLoss total_loss(const Tensor& rec, const Tensor& vel, const Tensor& lat, const Tensor& ctc,
                     const LossWeights& weights) {
  TotalLoss result;
  result.breakdown.rec = rec.item();
  result.breakdown.vel = vel.item();
  result.breakdown.lat = lat.item();
  result.breakdown.ctc = ctc.item();
  result.breakdown.ctc_skipped = !std::isfinite(ctc.item());

  Tensor total = add(add(scale(rec, weights.rec), scale(vel, weights.vel)),
                     scale(lat, weights.lat));
  if (!result.breakdown.ctc_skipped) total = add(total, scale(ctc, weights.ctc));
  result.value = total;
  result.breakdown.total = total.item();
  return result;
}

}  // namespace selftalk
