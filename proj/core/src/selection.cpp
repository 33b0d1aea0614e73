#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "cdel/errors.hpp"
#include "cdel/validity.hpp"

namespace cdel {

std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot normalize an empty list");
  std::vector<double> out(values.size(), 0.0);
  bool saturated = false;
  for (double v : values) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
      throw DataError("cannot normalize NaN or -infinity");
    }
    saturated = saturated || std::isinf(v);
  }
  if (saturated) {
    const bool all = std::all_of(values.begin(), values.end(), [](double v) { return std::isinf(v); });
    if (!all) {
      for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::isinf(values[i]) ? 1.0 : 0.0;
    }
    return out;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range == 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

std::vector<double> comprehensive_indicator(std::span<const ValidityScores> candidates) {
  if (candidates.empty()) throw DataError("comprehensive indicator needs at least one candidate");
  std::vector<double> sc, chs, dbi;
  for (const auto& s : candidates) {
    sc.push_back(s.sc);
    chs.push_back(s.chs);
    dbi.push_back(s.dbi);
  }
  const auto sc_n = minmax_normalize(sc);
  const auto chs_n = minmax_normalize(chs);
  const auto dbi_n = minmax_normalize(dbi);
  std::vector<double> ci(candidates.size());
  for (std::size_t i = 0; i < ci.size(); ++i) ci[i] = sc_n[i] + chs_n[i] - dbi_n[i];
  return ci;
}

double elbow_select(std::span<const CurvePoint> curve, Orientation orientation) {
  if (curve.empty()) throw DataError("elbow selection needs at least one point");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].t > curve[i - 1].t)) throw DataError("elbow curve must have strictly increasing t");
  }
  const double sign = orientation == Orientation::maximize ? 1.0 : -1.0;
  const auto& first = curve.front();
  const auto& last = curve.back();
  const double y0 = sign * first.value;
  const double y1 = sign * last.value;

  double lo = y0;
  double hi = y0;
  for (const auto& p : curve) {
    lo = std::min(lo, sign * p.value);
    hi = std::max(hi, sign * p.value);
  }
  const double x_range = last.t - first.t;
  const double y_range = hi - lo;

  std::size_t best = 0;
  double best_distance = 1e-12;
  bool found = false;
  if (y_range > 0.0 && std::isfinite(y_range)) {
    // Unit square: the argmax is scale-free and the straight-line tolerance absolute.
    const double ys = (y1 - y0) / y_range;
    const double chord_length = std::sqrt(1.0 + ys * ys);
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
      const double x = (curve[i].t - first.t) / x_range;
      const double y = (sign * curve[i].value - y0) / y_range;
      const double distance = (y - ys * x) / chord_length;
      if (distance > best_distance) {
        best_distance = distance;
        best = i;
        found = true;
      }
    }
  }
  if (found) return curve[best].t;
  return y1 > y0 ? last.t : first.t;
}

std::vector<double> threshold_grid(double t_min, double t_max) {
  std::vector<double> grid;
  if (!(t_max >= t_min)) return grid;
  // Tolerance absorbs representation error when an extreme is itself on the grid.
  constexpr double kSlack = 1e-9;
  auto k_lo = static_cast<long long>(std::ceil(t_min / kThresholdStep - kSlack));
  const auto k_hi = static_cast<long long>(std::floor(t_max / kThresholdStep + kSlack));
  k_lo = std::max<long long>(k_lo, 1);
  for (long long k = k_lo; k <= k_hi; ++k) grid.push_back(static_cast<double>(k) / 10.0);
  return grid;
}

SweepResult sweep_thresholds(const DistanceMatrix& dm, const EmbeddingMatrix& emb, Linkage linkage,
                             unsigned threads) {
  const auto n = static_cast<std::size_t>(dm.size());
  if (n < 3) throw DataError("threshold sweep needs at least 3 face-bearing samples, got " + std::to_string(n));
  SweepResult result;
  result.linkage = linkage;
  result.t_min = dm.min_off_diagonal();
  result.t_max = dm.max_off_diagonal();
  const auto grid = threshold_grid(result.t_min, result.t_max);
  if (grid.empty()) {
    std::ostringstream msg;
    msg << "threshold grid is empty: distances span [" << result.t_min << ", " << result.t_max
        << "], which contains no positive multiple of " << kThresholdStep;
    throw DataError(msg.str());
  }

  const EmbeddingMatrix aligned = emb.select(dm.ids());
  const LinkageTree tree = build_linkage(dm, linkage);

  struct Slot {
    std::optional<ValidityScores> scores;
    ExcludedCandidate excluded;
  };
  std::vector<Slot> slots(grid.size());
  auto evaluate = [&](std::size_t g) {
    const double t = grid[g];
    const auto labels = tree.cut(t);
    const int c = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    if (c < 2) {
      slots[g].excluded = {t, c, "single cluster (c < 2)"};
      return;
    }
    if (static_cast<std::size_t>(c) > n - 1) {
      slots[g].excluded = {t, c, "all singletons (c > n-1)"};
      return;
    }
    ValidityScores s;
    s.t = t;
    s.c = c;
    s.sc = silhouette_from_labels(dm.values(), labels, c);
    s.chs = calinski_harabasz_from_labels(aligned.values(), labels, c);
    s.dbi = davies_bouldin_from_labels(aligned.values(), labels, c);
    if (std::isinf(s.chs) || std::isinf(s.dbi)) {
      slots[g].excluded = {t, c, std::isinf(s.chs) ? "saturated CHS (zero within-cluster scatter)"
                                                   : "saturated DBI (coincident centroids)"};
      return;
    }
    slots[g].scores = s;
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(grid.size()));
  if (workers <= 1) {
    for (std::size_t g = 0; g < grid.size(); ++g) evaluate(g);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t g = next++; g < grid.size(); g = next++) evaluate(g);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (auto& slot : slots) {
    if (slot.scores) {
      result.scores.push_back(*slot.scores);
    } else {
      result.excluded.push_back(std::move(slot.excluded));
    }
  }
  return result;
}

SelectionReport select_from_picks(const std::array<ValidityScores, 3>& picks) {
  for (const auto& p : picks) {
    if (!p.t) throw DataError("threshold picks must carry their t");
  }
  SelectionReport report;
  report.picks = picks;
  const auto ci = comprehensive_indicator(picks);
  std::size_t best = 0;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    report.picks_t[i] = *picks[i].t;
    report.ci[i] = ci[i];
    if (ci[i] > ci[best] || (ci[i] == ci[best] && *picks[i].t < *picks[best].t)) best = i;
  }
  report.t_op = *picks[best].t;
  report.c_op = picks[best].c;
  return report;
}

SelectionReport select_optimal_threshold(const SweepResult& sweep) {
  if (sweep.scores.empty()) {
    std::string reasons;
    for (const auto& e : sweep.excluded) {
      std::ostringstream item;
      item << (reasons.empty() ? "" : "; ") << "t=" << e.t << ": " << e.reason;
      reasons += item.str();
    }
    throw DataError("no threshold candidate survived the sweep (" + (reasons.empty() ? std::string("empty grid") : reasons) + ")");
  }
  const auto& scores = sweep.scores;
  auto pick = [&](auto member, Orientation orientation) -> const ValidityScores& {
    if (scores.size() == 1) return scores.front();
    std::vector<CurvePoint> curve;
    curve.reserve(scores.size());
    for (const auto& s : scores) curve.push_back({*s.t, s.*member});
    const double t = elbow_select(curve, orientation);
    return *std::find_if(scores.begin(), scores.end(), [t](const ValidityScores& s) { return *s.t == t; });
  };
  return select_from_picks({pick(&ValidityScores::sc, Orientation::maximize),
                            pick(&ValidityScores::chs, Orientation::maximize),
                            pick(&ValidityScores::dbi, Orientation::minimize)});
}

std::string_view algorithm_name(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::hierarchical:
      return "hierarchical";
    case Algorithm::kmeans:
      return "kmeans";
    case Algorithm::spectral:
      return "spectral";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept {
  for (Algorithm a : {Algorithm::hierarchical, Algorithm::kmeans, Algorithm::spectral}) {
    if (text == algorithm_name(a)) return a;
  }
  if (text == "k-means") return Algorithm::kmeans;
  return std::nullopt;
}

Algorithm select_algorithm(std::span<const AlgorithmRun> runs) {
  if (runs.empty()) throw DataError("algorithm selection needs at least one run");
  std::vector<ValidityScores> scores;
  for (const auto& r : runs) scores.push_back(r.scores);
  const auto ci = comprehensive_indicator(scores);
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const bool tie_wins = ci[i] == ci[best] &&
                          static_cast<int>(runs[i].algorithm) < static_cast<int>(runs[best].algorithm);
    if (ci[i] > ci[best] || tie_wins) best = i;
  }
  return runs[best].algorithm;
}

}  // namespace cdel
