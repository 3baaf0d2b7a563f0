#pragma once

// Synthetic marker vectors drawn from class-conditional Gaussians fitted to
// published per-class marker statistics. Values are clipped to [0,1].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "revdetect/markers.hpp"
#include "revdetect/model.hpp"

namespace revdetect::synthetic {

using Moments = std::array<double, kNumMarkers>;

inline constexpr Moments kHumanMean{0.205, 0.213, 0.268, 0.524, 0.284, 0.502, 0.405, 0.167};
inline constexpr Moments kHumanSd{0.227, 0.146, 0.178, 0.128, 0.148, 0.208, 0.265, 0.112};

// AI rows mix three generator styles: neutral 50%, two adversarial 25% each.
inline constexpr Moments kAiNeutralMean{0.849, 0.665, 0.748, 0.810, 0.793, 0.840, 0.894, 0.696};
inline constexpr Moments kAiStyleAMean{0.077, 0.201, 0.262, 0.298, 0.164, 0.330, 0.048, 0.105};
inline constexpr Moments kAiStyleBMean{0.053, 0.177, 0.292, 0.299, 0.143, 0.315, 0.042, 0.096};
// Within-component variance: pooled AI variance minus between-component variance.
inline constexpr Moments kAiWithinVar{0.000713, 0.005285, 0.003476, 0.001156,
                                      0.002034, 0.003776, 0.000420, 0.001335};

struct Sample {
  std::vector<FeatureRow> X;
  std::vector<int> y;
};

inline FeatureRow draw(std::mt19937_64& rng, const Moments& mean, const Moments& var_or_sd, bool is_variance) {
  FeatureRow x{};
  for (std::size_t j = 0; j < kNumMarkers; ++j) {
    const double sd = is_variance ? std::sqrt(var_or_sd[j]) : var_or_sd[j];
    std::normal_distribution<double> dist(mean[j], sd);
    x[j] = clip_unit(dist(rng));
  }
  return x;
}

// n_human Human rows followed by n_ai AI rows, then shuffled.
inline Sample generate(std::size_t n_human, std::size_t n_ai, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Sample s;
  for (std::size_t i = 0; i < n_human; ++i) {
    s.X.push_back(draw(rng, kHumanMean, kHumanSd, false));
    s.y.push_back(0);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n_ai; ++i) {
    const double r = u(rng);
    const auto& mean = r < 0.5 ? kAiNeutralMean : r < 0.75 ? kAiStyleAMean : kAiStyleBMean;
    s.X.push_back(draw(rng, mean, kAiWithinVar, true));
    s.y.push_back(1);
  }
  std::vector<std::size_t> order(s.X.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Sample out;
  for (auto i : order) {
    out.X.push_back(s.X[i]);
    out.y.push_back(s.y[i]);
  }
  return out;
}

}  // namespace revdetect::synthetic
