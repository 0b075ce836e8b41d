#include <doctest.h>

#include <cmath>

#include "helpers/test_util.hpp"
#include "selftalk/corpus.hpp"
#include "selftalk/errors.hpp"
#include "selftalk/lipreader.hpp"
#include "selftalk/losses.hpp"

using namespace selftalk;
using testutil::finite_difference_check;
using testutil::random_mat;

namespace {
constexpr double kGradTol = 1e-4;

LipReaderConfig tiny_config(std::size_t vocab_size = 4) {
  LipReaderConfig cfg;
  cfg.latent_dim = 8;
  cfg.encoder_layers = 1;
  cfg.heads = 2;
  cfg.ffn_dim = 12;
  cfg.vocab_size = vocab_size;
  return cfg;
}

FaceMesh tetra_with_lips(std::vector<std::size_t> lips) {
  FaceMesh mesh;
  mesh.vertices = Mat(4, 3, {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1});
  mesh.faces = {{0, 1, 2}};
  mesh.regions["lips"] = std::move(lips);
  mesh.validate();
  return mesh;
}
}  // namespace

TEST_CASE("select_lip_offsets: zero input, single-vertex region") {
  FaceMesh mesh = tetra_with_lips({2});
  VertexSequence seq;
  seq.fps = 25.0;
  seq.offsets = Mat(3, 12);
  Mat lips = select_lip_offsets(seq, mesh);
  CHECK(lips.rows == 3);
  CHECK(lips.cols == 3);
  for (double v : lips.v) CHECK(v == 0.0);

  Rng rng(3);
  for (double& v : seq.offsets.v) v = rng.normal();
  lips = select_lip_offsets(seq, mesh);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t ax = 0; ax < 3; ++ax) CHECK(lips.at(t, ax) == seq.at(t, 2, ax));
}

TEST_CASE("lip losses put exactly zero gradient on non-lip vertices") {
  FaceMesh mesh = tetra_with_lips({1, 3});
  LipReadingInterpreter reader(tiny_config(), 2, 51);
  Rng rng(4);
  Tensor offsets = Tensor::parameter(random_mat(rng, 3, 12, 0.01));
  Tensor latents = reader.encode(reader.select_lips(offsets, mesh));
  Tensor probs = reader.decode_probs(latents);
  Tensor loss = add(ctc_loss(probs, {1, 2}, 0), mean_all(hadamard(latents, latents)));
  backward(loss);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t v : {0u, 2u}) {
      for (std::size_t ax = 0; ax < 3; ++ax) CHECK(offsets.grad()[t * 12 + 3 * v + ax] == 0.0);
    }
    bool lip_touched = false;
    for (std::size_t v : {1u, 3u})
      for (std::size_t ax = 0; ax < 3; ++ax)
        if (offsets.grad()[t * 12 + 3 * v + ax] != 0.0) lip_touched = true;
    CHECK(lip_touched);
  }
}

TEST_CASE("encode: shape contract and active position encodings") {
  LipReadingInterpreter reader(tiny_config(), 2, 52);
  Rng rng(5);
  Mat lips = random_mat(rng, 6, 6, 0.1);
  Tensor latents = reader.encode(Tensor::constant(lips));
  CHECK(latents.rows() == 6);
  CHECK(latents.cols() == 8);

  // Swap two identical frames; outputs must differ because positions matter.
  Mat swapped = lips;
  for (std::size_t c = 0; c < 6; ++c) std::swap(swapped.at(1, c), swapped.at(4, c));
  Tensor latents2 = reader.encode(Tensor::constant(swapped));
  double diff = 0.0;
  for (std::size_t c = 0; c < 8; ++c) diff += std::fabs(latents.at(1, c) - latents2.at(1, c));
  CHECK(diff > 1e-9);
}

TEST_CASE("lip reader end-to-end gradient check") {
  LipReadingInterpreter reader(tiny_config(), 2, 53);
  Rng rng(6);
  Tensor lips = Tensor::parameter(random_mat(rng, 3, 6, 0.1));
  Tensor target_latents = Tensor::constant(random_mat(rng, 3, 8));
  std::vector<std::size_t> text = {1, 2};
  auto builder = [&] {
    Tensor latents = reader.encode(lips);
    Tensor probs = reader.decode_probs(latents);
    return add(lat_loss(target_latents, latents), ctc_loss(probs, text, 0));
  };
  std::vector<Tensor> wiggle{lips};
  for (auto& p : reader.parameters()) wiggle.push_back(p.tensor);
  CHECK(finite_difference_check(builder, wiggle, 1e-6) < kGradTol);
}

TEST_CASE("decode_probs: simplex rows; zero projection gives the uniform row") {
  LipReadingInterpreter reader(tiny_config(5), 2, 54);
  Rng rng(7);
  Tensor latents = Tensor::constant(random_mat(rng, 4, 8));
  Tensor probs = reader.decode_probs(latents);
  for (std::size_t t = 0; t < 4; ++t) {
    double sum = 0.0;
    for (std::size_t u = 0; u < 5; ++u) sum += probs.at(t, u);
    CHECK(std::fabs(sum - 1.0) < 1e-6);
  }

  for (auto& p : reader.parameters())
    if (p.name.find("ctc_proj") != std::string::npos)
      for (double& v : p.tensor.values()) v = 0.0;
  Tensor uniform = reader.decode_probs(latents);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t u = 0; u < 5; ++u)
      CHECK(uniform.at(t, u) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("softmax shift invariance at the projection") {
  Rng rng(8);
  Mat logits = random_mat(rng, 3, 5);
  Tensor p1 = softmax_rows(Tensor::constant(logits));
  Mat shifted = logits;
  for (std::size_t c = 0; c < 5; ++c) shifted.at(1, c) += 17.25;
  Tensor p2 = softmax_rows(Tensor::constant(shifted));
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t u = 0; u < 5; ++u)
      CHECK(std::fabs(p1.at(t, u) - p2.at(t, u)) < 1e-9);
}

TEST_CASE("lipread: deterministic, zero motion tolerated, vocab checked") {
  SynthConfig cfg;
  cfg.sample_count = 1;
  Corpus corpus = generate_synthetic_corpus(cfg, 13);
  LipReaderConfig lr = tiny_config(corpus.vocab.size());
  LipReadingInterpreter reader(lr, corpus.mesh.region("lips").size(), 55);

  auto a = reader.lipread(corpus.samples[0].gt_offsets, corpus.mesh, corpus.vocab);
  auto b = reader.lipread(corpus.samples[0].gt_offsets, corpus.mesh, corpus.vocab);
  CHECK(a.transcript == b.transcript);
  CHECK(a.dist.probs.v == b.dist.probs.v);
  a.dist.validate();
  CHECK(a.latents.values.rows == corpus.samples[0].gt_offsets.frames());

  VertexSequence still;
  still.fps = corpus.fps;
  still.offsets = Mat(5, corpus.mesh.vertex_count() * 3);
  CHECK_NOTHROW(reader.lipread(still, corpus.mesh, corpus.vocab));

  Vocabulary wrong = Vocabulary::toy(2);
  CHECK_THROWS_AS(reader.lipread(still, corpus.mesh, wrong), MismatchError);
}
