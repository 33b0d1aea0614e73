#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdel/types.hpp"

namespace cdel {

// counts[actual][predicted], class order negative, neutral, positive.
class ConfusionMatrix {
 public:
  using Counts = std::array<std::array<std::int64_t, kNumClasses>, kNumClasses>;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(const Counts& counts);

  void add(Label actual, Label predicted) { ++counts_[index_of(actual)][index_of(predicted)]; }

  [[nodiscard]] std::int64_t at(Label actual, Label predicted) const {
    return counts_[index_of(actual)][index_of(predicted)];
  }
  [[nodiscard]] const Counts& counts() const noexcept { return counts_; }
  [[nodiscard]] std::int64_t total() const noexcept;
  [[nodiscard]] std::int64_t trace() const noexcept;
  [[nodiscard]] std::int64_t row_sum(Label actual) const noexcept;
  [[nodiscard]] std::int64_t column_sum(Label predicted) const noexcept;

 private:
  Counts counts_{};
};

[[nodiscard]] ConfusionMatrix confusion_matrix(std::span<const Label> predicted, std::span<const Label> gold);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// One-vs-rest counts from the matrix; every 0/0 is 0.
[[nodiscard]] ClassMetrics class_prf(const ConfusionMatrix& cm, Label label);
[[nodiscard]] double macro_f1(const ConfusionMatrix& cm);
[[nodiscard]] double accuracy(const ConfusionMatrix& cm);

struct MetricsReport {
  ConfusionMatrix confusion;
  std::array<ClassMetrics, kNumClasses> per_class{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::int64_t samples = 0;

  static MetricsReport from(const ConfusionMatrix& cm);

  [[nodiscard]] std::string to_json(std::string_view config_hash = "") const;
  [[nodiscard]] static std::string csv_header();
  [[nodiscard]] std::string csv_row() const;
};

// Within each class, round-half-up(fraction * count) samples of a seeded shuffle
// go to the second part; both parts keep the input order.
[[nodiscard]] std::pair<SampleTable, SampleTable> stratified_split(const SampleTable& data, double fraction,
                                                                  std::uint64_t seed);

// Fold index per record. Per-class fold sizes differ by at most one.
[[nodiscard]] std::vector<int> stratified_folds(const SampleTable& data, int k, std::uint64_t seed);

// Fits on `train`, returns one predicted label per record of `held_out`.
using FoldRunner = std::function<std::vector<Label>(const SampleTable& train, const SampleTable& held_out,
                                                    int fold)>;

struct CrossValidationResult {
  std::vector<MetricsReport> folds;
  std::vector<double> fold_macro_f1;
  double mean_macro_f1 = 0.0;
};

[[nodiscard]] double arithmetic_mean(std::span<const double> values);

[[nodiscard]] CrossValidationResult kfold_crossval(const SampleTable& data, int k, const FoldRunner& runner,
                                                   std::uint64_t seed);

}  // namespace cdel
