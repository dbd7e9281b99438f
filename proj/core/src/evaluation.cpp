#include "sumkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "sumkit/errors.hpp"

namespace sumkit {

PrecisionRecall prf1(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> ref) {
  if (pred.size() != ref.size()) {
    throw ShapeError("prf1: mask lengths differ (" + std::to_string(pred.size()) + " vs " +
                     std::to_string(ref.size()) + ")");
  }
  std::size_t overlap = 0, np = 0, nr = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, r = ref[i] != 0;
    overlap += p && r;
    np += p;
    nr += r;
  }
  PrecisionRecall out;
  out.precision = np ? static_cast<double>(overlap) / static_cast<double>(np) : 0.0;
  out.recall = nr ? static_cast<double>(overlap) / static_cast<double>(nr) : 0.0;
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

F1Aggregation parse_f1_aggregation(std::string_view text) {
  if (text == "avg") return F1Aggregation::avg;
  if (text == "max") return F1Aggregation::max;
  throw ConfigError("f1 aggregation must be 'avg' or 'max'");
}

double multi_ref_f1(std::span<const std::uint8_t> pred,
                    std::span<const std::vector<std::uint8_t>> references, F1Aggregation mode) {
  if (references.empty()) throw UsageError("multi_ref_f1: no reference summaries");
  double total = 0.0, best = 0.0;
  for (const auto& ref : references) {
    const double f = prf1(pred, ref).f1;
    total += f;
    best = std::max(best, f);
  }
  return mode == F1Aggregation::max ? best : total / static_cast<double>(references.size());
}

namespace {

// Counts inversions of `v` by merge sort; equal values are not inversions.
std::uint64_t count_inversions(std::vector<float>& v, std::vector<float>& scratch,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

// Number of pairs sharing a value within runs of equal elements of a sorted
// sequence, for a key extractor.
template <typename It, typename Eq>
std::uint64_t tied_pairs(It begin, It end, Eq eq) {
  std::uint64_t total = 0, run = 1;
  for (It it = begin; it != end; ++it) {
    if (it != begin && eq(*(it - 1), *it)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  total += run * (run - 1) / 2;
  return total;
}

}  // namespace

double kendall_tau(std::span<const float> pred, std::span<const float> ref, TauVariant variant) {
  const std::size_t n = pred.size();
  if (ref.size() != n) throw ShapeError("kendall_tau: length mismatch");
  if (n < 2) throw UsageError("kendall_tau needs at least two values");

  // Knight's algorithm: sort by (ref, pred), count ties, then count
  // discordant pairs as inversions of pred in that order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ref[a] != ref[b]) return ref[a] < ref[b];
    return pred[a] < pred[b];
  });
  const std::uint64_t total_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t ties_ref = tied_pairs(order.begin(), order.end(),
                                            [&](std::size_t a, std::size_t b) { return ref[a] == ref[b]; });
  const std::uint64_t ties_joint = tied_pairs(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ref[a] == ref[b] && pred[a] == pred[b];
  });

  std::vector<float> p(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = pred[order[i]];
  const std::uint64_t discordant = count_inversions(p, scratch, 0, n);
  // p is now sorted
  const std::uint64_t ties_pred =
      tied_pairs(p.begin(), p.end(), [](float a, float b) { return a == b; });

  // concordant + discordant = pairs tied in neither ranking
  const std::uint64_t untied = total_pairs - ties_ref - ties_pred + ties_joint;
  const double c_minus_d = static_cast<double>(untied) - 2.0 * static_cast<double>(discordant);

  if (variant == TauVariant::a) return c_minus_d / static_cast<double>(total_pairs);
  const double denom = std::sqrt(static_cast<double>(total_pairs - ties_pred) *
                                 static_cast<double>(total_pairs - ties_ref));
  if (denom == 0.0) return 0.0;
  return c_minus_d / denom;
}

std::vector<double> average_ranks(std::span<const float> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const float> pred, std::span<const float> ref) {
  const std::size_t n = pred.size();
  if (ref.size() != n) throw ShapeError("spearman_rho: length mismatch");
  if (n < 2) throw UsageError("spearman_rho needs at least two values");
  const std::vector<double> rp = average_ranks(pred), rr = average_ranks(ref);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;  // mean of mid-ranks
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rp[i] - mean, y = rr[i] - mean;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

RankMetrics rank_metrics_per_annotator(std::span<const float> pred,
                                       std::span<const std::vector<float>> annotator_scores,
                                       TauVariant variant) {
  if (annotator_scores.empty()) throw UsageError("rank metrics need at least one annotator");
  RankMetrics m;
  for (const auto& scores : annotator_scores) {
    m.tau += kendall_tau(pred, scores, variant);
    m.rho += spearman_rho(pred, scores);
  }
  m.tau /= static_cast<double>(annotator_scores.size());
  m.rho /= static_cast<double>(annotator_scores.size());
  return m;
}

void MetricReport::finalize() {
  mean_f1 = mean_tau = mean_rho = 0.0;
  rank_videos = 0;
  for (const auto& v : videos) {
    mean_f1 += v.f1;
    if (v.has_rank_metrics) {
      mean_tau += v.tau;
      mean_rho += v.rho;
      ++rank_videos;
    }
  }
  if (!videos.empty()) mean_f1 /= static_cast<double>(videos.size());
  if (rank_videos) {
    mean_tau /= static_cast<double>(rank_videos);
    mean_rho /= static_cast<double>(rank_videos);
  }
}

std::string MetricReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["f1_mode"] = f1_mode;
  nlohmann::ordered_json vids = nlohmann::ordered_json::array();
  for (const auto& v : videos) {
    nlohmann::ordered_json o;
    o["video_id"] = v.video_id;
    nlohmann::ordered_json refs = nlohmann::ordered_json::array();
    for (const auto& r : v.per_reference) {
      refs.push_back({{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}});
    }
    o["references"] = std::move(refs);
    o["f1"] = v.f1;
    if (v.has_rank_metrics) {
      o["tau"] = v.tau;
      o["rho"] = v.rho;
    }
    vids.push_back(std::move(o));
  }
  j["videos"] = std::move(vids);
  nlohmann::ordered_json agg;
  agg["videos"] = videos.size();
  agg["f1"] = mean_f1;
  if (rank_videos) {
    agg["tau"] = mean_tau;
    agg["rho"] = mean_rho;
  }
  agg["human_tau"] = kHumanKendallTau;
  agg["human_rho"] = kHumanSpearmanRho;
  j["aggregate"] = std::move(agg);
  return j.dump(indent);
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os.precision(9);
  os << "video_id,f1,tau,rho\n";
  for (const auto& v : videos) {
    os << v.video_id << ',' << v.f1 << ',';
    if (v.has_rank_metrics) os << v.tau << ',' << v.rho;
    else os << ',';
    os << '\n';
  }
  os << "mean," << mean_f1 << ',';
  if (rank_videos) os << mean_tau << ',' << mean_rho;
  else os << ',';
  os << '\n';
  return os.str();
}

}  // namespace sumkit
