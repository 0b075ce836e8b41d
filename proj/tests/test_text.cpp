#include <doctest.h>

#include "helpers/test_util.hpp"
#include "selftalk/errors.hpp"
#include "selftalk/text.hpp"

using namespace selftalk;

namespace {

// Five-line reference decoder kept deliberately independent of the library
// implementation.
Transcript reference_decode(const TextDistribution& d, const Vocabulary& v) {
  Transcript out;
  std::vector<std::size_t> arg;
  for (std::size_t t = 0; t < d.frames(); ++t) {
    std::size_t best = 0;
    for (std::size_t u = 1; u < d.symbols(); ++u)
      if (d.probs.at(t, u) > d.probs.at(t, best)) best = u;
    arg.push_back(best);
  }
  for (std::size_t i = 0; i < arg.size(); ++i)
    if ((i == 0 || arg[i] != arg[i - 1]) && arg[i] != v.blank_index) out += v.symbols[arg[i]];
  return out;
}

TextDistribution one_hot_frames(const std::vector<std::size_t>& ids, std::size_t symbols) {
  TextDistribution d;
  d.fps = 25.0;
  d.probs = Mat(ids.size(), symbols);
  for (std::size_t t = 0; t < ids.size(); ++t) d.probs.at(t, ids[t]) = 1.0;
  return d;
}

}  // namespace

TEST_CASE("vocabulary: toy construction, encode, and invariants") {
  Vocabulary v = Vocabulary::toy(6);
  CHECK(v.size() == 7);
  CHECK(v.blank() == "-");
  CHECK(v.encode("abc") == std::vector<std::size_t>{1, 2, 3});
  CHECK_THROWS_AS(v.encode("a-b"), InvalidArgument);
  CHECK_THROWS_AS(v.encode("az"), InvalidArgument);

  Vocabulary dup;
  dup.symbols = {"a", "a"};
  CHECK_THROWS_AS(dup.validate(), FormatError);
  Vocabulary tiny;
  tiny.symbols = {"a"};
  CHECK_THROWS_AS(tiny.validate(), FormatError);
}

TEST_CASE("greedy decode: collapse and blank rules") {
  Vocabulary v = Vocabulary::toy(2);  // -, a, b
  // [a, a, -, b] -> "ab"
  CHECK(greedy_ctc_decode(one_hot_frames({1, 1, 0, 2}, 3), v) == "ab");
  // [a, -, a] -> "aa": the blank separates the repeat
  CHECK(greedy_ctc_decode(one_hot_frames({1, 0, 1}, 3), v) == "aa");
  // all blank -> ""
  CHECK(greedy_ctc_decode(one_hot_frames({0, 0, 0}, 3), v) == "");
}

TEST_CASE("greedy decode matches the reference decoder on random distributions") {
  Vocabulary v = Vocabulary::toy(4);
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    TextDistribution d;
    d.fps = 25.0;
    d.probs = Mat(20, v.size());
    for (std::size_t t = 0; t < 20; ++t) {
      double sum = 0.0;
      for (std::size_t u = 0; u < v.size(); ++u) {
        d.probs.at(t, u) = rng.uniform() + 1e-6;
        sum += d.probs.at(t, u);
      }
      for (std::size_t u = 0; u < v.size(); ++u) d.probs.at(t, u) /= sum;
    }
    d.validate();
    CHECK(greedy_ctc_decode(d, v) == reference_decode(d, v));

    // Frame duplication leaves the decode unchanged.
    TextDistribution doubled;
    doubled.fps = d.fps;
    doubled.probs = Mat(40, v.size());
    for (std::size_t t = 0; t < 20; ++t)
      for (std::size_t u = 0; u < v.size(); ++u) {
        doubled.probs.at(2 * t, u) = d.probs.at(t, u);
        doubled.probs.at(2 * t + 1, u) = d.probs.at(t, u);
      }
    CHECK(greedy_ctc_decode(doubled, v) == greedy_ctc_decode(d, v));
  }
}

TEST_CASE("text distribution validation") {
  TextDistribution d = one_hot_frames({1, 0}, 3);
  CHECK_NOTHROW(d.validate());
  d.probs.at(0, 0) = 0.5;  // row sums to 1.5
  CHECK_THROWS_AS(d.validate(), FormatError);
  d.probs.at(0, 0) = -0.5;
  CHECK_THROWS_AS(d.validate(), FormatError);
}

TEST_CASE("edit distance and character accuracy") {
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(edit_distance("abc", "") == 3);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(char_accuracy("abcd", "abcd") == 1.0);
  CHECK(char_accuracy("abcd", "abce") == doctest::Approx(0.75));
  CHECK(char_accuracy("", "xyz") == 0.0);
}
