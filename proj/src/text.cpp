#include "selftalk/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "selftalk/errors.hpp"

namespace selftalk {

void Vocabulary::validate() const {
  if (symbols.size() < 2) throw FormatError("vocabulary: needs at least 2 symbols");
  if (blank_index >= symbols.size()) throw FormatError("vocabulary: blank index out of range");
  std::set<std::string> seen(symbols.begin(), symbols.end());
  if (seen.size() != symbols.size()) throw FormatError("vocabulary: duplicate symbols");
}

std::size_t Vocabulary::index_of(char c) const {
  const std::string s(1, c);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] == s) return i;
  }
  throw InvalidArgument(std::string("vocabulary: unknown symbol '") + c + "'");
}

std::vector<std::size_t> Vocabulary::encode(const Transcript& text) const {
  std::vector<std::size_t> ids;
  ids.reserve(text.size());
  for (char c : text) {
    const std::size_t idx = index_of(c);
    if (idx == blank_index) throw InvalidArgument("vocabulary: transcript contains the blank");
    ids.push_back(idx);
  }
  return ids;
}

Vocabulary Vocabulary::toy(std::size_t letters) {
  Vocabulary v;
  v.symbols.push_back("-");
  for (std::size_t i = 0; i < letters; ++i)
    v.symbols.push_back(std::string(1, static_cast<char>('a' + i)));
  v.blank_index = 0;
  v.validate();
  return v;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  nlohmann::json j;
  j["symbols"] = vocab.symbols;
  j["blank_index"] = vocab.blank_index;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_vocabulary: cannot open " + path);
  out << j.dump(2) << '\n';
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_vocabulary: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw FormatError("load_vocabulary: bad JSON in " + path + ": " + e.what());
  }
  Vocabulary v;
  v.symbols = j.at("symbols").get<std::vector<std::string>>();
  v.blank_index = j.at("blank_index").get<std::size_t>();
  v.validate();
  return v;
}

void TextDistribution::validate(double tol) const {
  if (probs.rows == 0 || probs.cols < 2)
    throw FormatError("text distribution: needs frames and at least 2 symbols");
  for (std::size_t t = 0; t < probs.rows; ++t) {
    double sum = 0.0;
    for (std::size_t u = 0; u < probs.cols; ++u) {
      const double p = probs.at(t, u);
      if (!(p >= 0.0)) throw FormatError("text distribution: negative probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > tol)
      throw FormatError("text distribution: row does not sum to 1");
  }
}

Transcript greedy_ctc_decode(const TextDistribution& dist, const Vocabulary& vocab) {
  if (dist.symbols() != vocab.size())
    throw MismatchError("greedy_ctc_decode: distribution width does not match vocabulary");
  Transcript out;
  std::size_t prev = vocab.size();  // sentinel
  for (std::size_t t = 0; t < dist.frames(); ++t) {
    std::size_t best = 0;
    double best_p = dist.probs.at(t, 0);
    for (std::size_t u = 1; u < dist.symbols(); ++u) {
      if (dist.probs.at(t, u) > best_p) {
        best_p = dist.probs.at(t, u);
        best = u;
      }
    }
    if (best != prev && best != vocab.blank_index) out += vocab.symbols[best];
    prev = best;
  }
  return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double char_accuracy(const std::string& reference, const std::string& hypothesis) {
  const double denom = std::max<std::size_t>(reference.size(), 1);
  const double acc = 1.0 - static_cast<double>(edit_distance(reference, hypothesis)) / denom;
  return std::max(0.0, std::min(1.0, acc));
}

}  // namespace selftalk
