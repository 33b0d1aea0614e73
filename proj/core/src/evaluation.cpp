#include "cdel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cdel/errors.hpp"
#include "cdel/io.hpp"
#include "cdel/random.hpp"

namespace cdel {
namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<std::vector<std::size_t>> indices_by_class(const SampleTable& data) {
  std::vector<std::vector<std::size_t>> by_class(kNumClasses);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    if (!r.label) throw DataError("sample '" + r.id + "' has no label");
    by_class[index_of(*r.label)].push_back(i);
  }
  return by_class;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(const Counts& counts) : counts_(counts) {
  for (const auto& row : counts_) {
    for (auto v : row) {
      if (v < 0) throw DataError("confusion matrix counts must be non-negative");
    }
  }
}

std::int64_t ConfusionMatrix::total() const noexcept {
  std::int64_t t = 0;
  for (const auto& row : counts_) t += std::accumulate(row.begin(), row.end(), std::int64_t{0});
  return t;
}

std::int64_t ConfusionMatrix::trace() const noexcept {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) t += counts_[i][i];
  return t;
}

std::int64_t ConfusionMatrix::row_sum(Label actual) const noexcept {
  const auto& row = counts_[index_of(actual)];
  return std::accumulate(row.begin(), row.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::column_sum(Label predicted) const noexcept {
  std::int64_t t = 0;
  for (const auto& row : counts_) t += row[index_of(predicted)];
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const Label> predicted, std::span<const Label> gold) {
  if (predicted.size() != gold.size()) {
    throw DataError("confusion matrix needs equal lengths: " + std::to_string(predicted.size()) +
                    " predictions vs " + std::to_string(gold.size()) + " gold labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], predicted[i]);
  return cm;
}

ClassMetrics class_prf(const ConfusionMatrix& cm, Label label) {
  const auto tp = static_cast<double>(cm.at(label, label));
  const double fp = static_cast<double>(cm.column_sum(label)) - tp;
  const double fn = static_cast<double>(cm.row_sum(label)) - tp;
  return {ratio(tp, tp + fp), ratio(tp, tp + fn), ratio(2.0 * tp, 2.0 * tp + fp + fn)};
}

double macro_f1(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (Label l : kClassOrder) sum += class_prf(cm, l).f1;
  return sum / static_cast<double>(kNumClasses);
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw DataError("accuracy of an empty confusion matrix is undefined");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

MetricsReport MetricsReport::from(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.confusion = cm;
  for (Label l : kClassOrder) r.per_class[index_of(l)] = class_prf(cm, l);
  r.macro_f1 = cdel::macro_f1(cm);
  r.accuracy = cdel::accuracy(cm);
  r.samples = cm.total();
  return r;
}

std::string MetricsReport::to_json(std::string_view config_hash) const {
  nlohmann::ordered_json doc;
  doc["format"] = "cdel-metrics/1";
  doc["config_hash"] = std::string(config_hash);
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (Label l : kClassOrder) classes.push_back(label_name(l));
  doc["class_order"] = classes;
  doc["confusion_matrix"] = confusion.counts();
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (Label l : kClassOrder) {
    const auto& m = per_class[index_of(l)];
    per[std::string(label_name(l))] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  }
  doc["per_class"] = per;
  doc["macro_f1"] = macro_f1;
  doc["accuracy"] = accuracy;
  doc["samples"] = samples;
  return doc.dump(2) + "\n";
}

std::string MetricsReport::csv_header() {
  return "samples,accuracy,macro_f1,p_neg,r_neg,f1_neg,p_neu,r_neu,f1_neu,p_pos,r_pos,f1_pos";
}

std::string MetricsReport::csv_row() const {
  std::string row = std::to_string(samples) + "," + io::format_real(accuracy) + "," + io::format_real(macro_f1);
  for (const auto& m : per_class) {
    row += "," + io::format_real(m.precision) + "," + io::format_real(m.recall) + "," + io::format_real(m.f1);
  }
  return row;
}

std::pair<SampleTable, SampleTable> stratified_split(const SampleTable& data, double fraction,
                                                     std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ConfigError("split fraction must lie in [0, 1], got " + std::to_string(fraction));
  }
  auto by_class = indices_by_class(data);
  std::vector<char> in_b(data.size(), 0);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(seed, c));
    rng.shuffle(std::span<std::size_t>(idx));
    const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size()) + 0.5));
    for (std::size_t i = 0; i < std::min(take, idx.size()); ++i) in_b[idx[i]] = 1;
  }
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i < data.size(); ++i) (in_b[i] ? b : a).push_back(i);
  return {data.subset(a), data.subset(b)};
}

std::vector<int> stratified_folds(const SampleTable& data, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2, got " + std::to_string(k));
  auto by_class = indices_by_class(data);
  std::size_t smallest = SIZE_MAX;
  for (const auto& idx : by_class) {
    if (!idx.empty()) smallest = std::min(smallest, idx.size());
  }
  if (smallest == SIZE_MAX) throw DataError("cross-validation over an empty dataset");
  if (static_cast<std::size_t>(k) > smallest) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the smallest class count " + std::to_string(smallest));
  }
  std::vector<int> fold(data.size(), -1);
  // Deal each class round-robin, continuing where the previous class stopped so
  // overall fold sizes stay balanced too.
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(seed, c));
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i : idx) fold[i] = static_cast<int>(cursor++ % static_cast<std::size_t>(k));
  }
  return fold;
}

double arithmetic_mean(std::span<const double> values) {
  if (values.empty()) throw DataError("mean of an empty list");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

CrossValidationResult kfold_crossval(const SampleTable& data, int k, const FoldRunner& runner, std::uint64_t seed) {
  const auto fold = stratified_folds(data, k, seed);
  CrossValidationResult result;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
    const SampleTable train = data.subset(train_idx);
    const SampleTable held_out = data.subset(test_idx);
    const auto predicted = runner(train, held_out, f);
    std::vector<Label> gold;
    for (const auto& r : held_out.records()) gold.push_back(*r.label);
    const auto report = MetricsReport::from(confusion_matrix(predicted, gold));
    result.folds.push_back(report);
    result.fold_macro_f1.push_back(report.macro_f1);
  }
  result.mean_macro_f1 = arithmetic_mean(result.fold_macro_f1);
  return result;
}

}  // namespace cdel
