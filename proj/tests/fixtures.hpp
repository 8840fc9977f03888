#pragma once

// Synthetic datasets shared by the unit, pipeline and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "readcx/complexity.hpp"
#include "readcx/embed.hpp"
#include "readcx/gaze.hpp"
#include "readcx/random.hpp"

namespace fixtures {

inline std::string sid(std::size_t i) { return "s" + std::to_string(1000 + i); }

/// Profiles whose nine feature values are drawn independently, so that no
/// feature can be predicted from another.
inline std::vector<readcx::ProfileRow> independent_profiles(std::size_t n, std::uint64_t seed,
                                                            const std::string& lang = "en") {
  std::mt19937_64 rng(seed);
  std::vector<readcx::ProfileRow> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, readcx::kNumFeatures> v{};
    v[0] = 3.0 + static_cast<double>(readcx::uniform_below(rng, 40));
    v[1] = 3.0 + 4.0 * readcx::uniform01(rng);
    v[2] = 2.0 + 5.0 * readcx::uniform01(rng);
    v[3] = static_cast<double>(readcx::uniform_below(rng, 10));
    v[4] = readcx::uniform01(rng);
    v[5] = 1.0 + static_cast<double>(readcx::uniform_below(rng, 8));
    v[6] = 1.0 + 3.0 * readcx::uniform01(rng);
    v[7] = 1.0 + static_cast<double>(readcx::uniform_below(rng, 15));
    v[8] = static_cast<double>(readcx::uniform_below(rng, 5));
    out.push_back({sid(i), lang, readcx::ComplexityProfile::from_values(v)});
  }
  return out;
}

/// Pure Gaussian noise embeddings for the given ids.
inline readcx::EmbeddingSet noise_embeddings(const std::vector<readcx::ProfileRow>& rows, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  readcx::EmbeddingSet set(dim, "noise");
  for (const auto& r : rows) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = readcx::standard_normal(rng);
    set.add(r.sentence_id, v);
  }
  return set;
}

/// Noise embeddings whose leading coordinates carry the listed features
/// exactly (coordinate j holds feature encoded[j]).
inline readcx::EmbeddingSet encoding_embeddings(const std::vector<readcx::ProfileRow>& rows,
                                                const std::vector<std::size_t>& encoded, int dim, std::uint64_t seed) {
  auto set = noise_embeddings(rows, dim, seed);
  readcx::EmbeddingSet out(dim, "encoded");
  for (const auto& r : rows) {
    auto v = set.at(r.sentence_id);
    const auto values = r.profile.values();
    for (std::size_t j = 0; j < encoded.size(); ++j) v[j] = values[encoded[j]];
    out.add(r.sentence_id, v);
  }
  return out;
}

/// Sentence metrics that depend on sentence length plus Gaussian noise.
inline std::vector<readcx::GazeMetrics> length_metrics(const std::vector<readcx::ProfileRow>& rows, double noise_sd,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<readcx::GazeMetrics> out;
  for (const auto& r : rows) {
    const double len = r.profile.sentence_length;
    readcx::GazeMetrics g;
    g.sentence_id = r.sentence_id;
    auto draw = [&](double scale, double mean) { return std::max(0.0, mean + scale * noise_sd * readcx::standard_normal(rng)); };
    g.fixation_count = draw(1.0, 1.2 * len);
    g.total_fixation_duration = draw(200.0, 240.0 * len);
    g.first_pass_duration = draw(200.0, 180.0 * len);
    g.regression_duration = draw(200.0, 60.0 * len);
    out.push_back(g);
  }
  return out;
}

}  // namespace fixtures
