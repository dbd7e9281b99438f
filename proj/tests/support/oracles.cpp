#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include "sumkit/rng.hpp"

namespace sumkit::oracle {

Subset brute_force_knapsack(std::span<const ShotScore> shots, std::size_t budget) {
  Subset best;
  const std::size_t n = shots.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Subset s;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(bits >> i & 1)) continue;
      s.shots.push_back(i);
      s.frames += shots[i].length();
    }
    if (s.frames > budget) continue;
    s.objective = knapsack_objective(shots, s.shots);
    const bool better = s.objective > best.objective ||
                        (s.objective == best.objective &&
                         (s.frames < best.frames || (s.frames == best.frames && s.shots < best.shots)));
    if (bits == 0 || better) best = s;
  }
  return best;
}

double kendall_tau_pairs(std::span<const float> a, std::span<const float> b, TauVariant variant) {
  const std::size_t n = a.size();
  double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = static_cast<double>(a[i]) - a[j], db = static_cast<double>(b[i]) - b[j];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ++ties_a;
      } else if (db == 0) {
        ++ties_b;
      } else if ((da > 0) == (db > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  if (variant == TauVariant::a) return (concordant - discordant) / (n * (n - 1) / 2.0);
  const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
  return denom == 0 ? 0.0 : (concordant - discordant) / denom;
}

namespace {
std::vector<double> mid_ranks(std::span<const float> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (float x : v) {
      below += x < v[i];
      equal += x == v[i];
    }
    r[i] = below + (equal + 1) / 2.0;
  }
  return r;
}
}  // namespace

double spearman_direct(std::span<const float> a, std::span<const float> b) {
  const auto ra = mid_ranks(a), rb = mid_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa == 0 || sbb == 0 ? 0.0 : sab / std::sqrt(saa * sbb);
}

std::vector<std::uint8_t> keyshots_direct(std::span<const float> labels,
                                          std::span<const std::size_t> boundaries, double fraction) {
  struct Marked {
    std::size_t shot;
    double density;
  };
  std::vector<Marked> marked;
  for (std::size_t s = 0; s + 1 < boundaries.size(); ++s) {
    double keys = 0;
    for (std::size_t f = boundaries[s]; f < boundaries[s + 1]; ++f) keys += labels[f] > 0.5f;
    if (keys > 0) marked.push_back({s, keys / static_cast<double>(boundaries[s + 1] - boundaries[s])});
  }
  std::stable_sort(marked.begin(), marked.end(),
                   [](const Marked& x, const Marked& y) { return x.density > y.density; });
  const auto budget = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(labels.size())));
  std::vector<std::uint8_t> mask(labels.size(), 0);
  std::size_t used = 0;
  for (const Marked& m : marked) {
    const std::size_t len = boundaries[m.shot + 1] - boundaries[m.shot];
    if (used + len > budget) continue;
    used += len;
    for (std::size_t f = boundaries[m.shot]; f < boundaries[m.shot + 1]; ++f) mask[f] = 1;
  }
  return mask;
}

std::vector<ShotScore> random_shots(std::uint64_t seed, std::size_t count, std::size_t max_len) {
  Rng rng(seed);
  std::vector<ShotScore> shots;
  std::size_t start = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = 1 + rng.below(max_len);
    shots.push_back({i, start, start + len, rng.uniform()});
    start += len;
  }
  return shots;
}

}  // namespace sumkit::oracle
