#include "cdel/types.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "cdel/errors.hpp"

namespace cdel {

std::string_view label_name(Label label) noexcept {
  switch (label) {
    case Label::negative:
      return "negative";
    case Label::neutral:
      return "neutral";
    case Label::positive:
      return "positive";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  for (Label l : kClassOrder) {
    if (text == label_name(l)) return l;
  }
  return std::nullopt;
}

Label label_at(std::size_t index) {
  if (index >= kNumClasses) throw DataError("class index out of range: " + std::to_string(index));
  return kClassOrder[index];
}

// --- SampleTable ---

SampleTable::SampleTable(std::vector<SampleRecord> records) : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& id = records_[i].id;
    if (id.empty()) throw DataError("sample id must be non-empty (record " + std::to_string(i + 1) + ")");
    if (!index_.emplace(id, i).second) throw DataError("duplicate sample id '" + id + "'");
  }
}

const SampleRecord* SampleTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<std::string> SampleTable::ids() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.id);
  return out;
}

bool SampleTable::all_labeled() const noexcept {
  for (const auto& r : records_) {
    if (!r.label) return false;
  }
  return true;
}

SampleTable SampleTable::subset(std::span<const std::size_t> indices) const {
  std::vector<SampleRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records_.at(i));
  return SampleTable(std::move(out));
}

// --- EmbeddingMatrix ---

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, Eigen::MatrixXd values)
    : ids_(std::move(ids)), values_(std::move(values)) {
  if (static_cast<Eigen::Index>(ids_.size()) != values_.rows()) {
    throw DataError("embedding matrix has " + std::to_string(values_.rows()) + " rows but " +
                    std::to_string(ids_.size()) + " ids");
  }
  if (values_.cols() < 1) throw DataError("embedding dimension must be >= 1");
  if (!values_.allFinite()) throw DataError("embedding matrix contains non-finite values");
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) throw DataError("embedding id must be non-empty");
    if (!index_.emplace(ids_[i], static_cast<Eigen::Index>(i)).second) {
      throw DataError("duplicate embedding id '" + ids_[i] + "'");
    }
  }
}

std::optional<Eigen::Index> EmbeddingMatrix::row_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::string> ids) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto r = row_of(ids[i]);
    if (!r) throw DataError("no embedding for id '" + ids[i] + "'");
    out.row(static_cast<Eigen::Index>(i)) = values_.row(*r);
  }
  return EmbeddingMatrix({ids.begin(), ids.end()}, std::move(out));
}

// --- FaceEncodingSet ---

FaceEncodingSet::FaceEncodingSet(EmbeddingMatrix encodings, std::vector<std::string> faceless_ids)
    : encodings_(std::move(encodings)), faceless_ids_(std::move(faceless_ids)) {
  std::unordered_set<std::string> seen;
  for (const auto& id : faceless_ids_) {
    if (encodings_.row_of(id)) {
      throw DataError("id '" + id + "' is both face-bearing and faceless");
    }
    if (!seen.insert(id).second) throw DataError("duplicate faceless id '" + id + "'");
  }
}

FaceEncodingSet FaceEncodingSet::derive(const SampleTable& table, const EmbeddingMatrix& encodings) {
  for (const auto& id : encodings.ids()) {
    if (!table.contains(id)) {
      throw DataError("face encoding for id '" + id + "' which is not in the manifest");
    }
  }
  std::vector<std::string> face_ids;
  std::vector<std::string> faceless;
  for (const auto& r : table.records()) {
    if (encodings.row_of(r.id)) {
      face_ids.push_back(r.id);
    } else {
      faceless.push_back(r.id);
    }
  }
  if (face_ids.empty()) {
    return FaceEncodingSet(EmbeddingMatrix({}, Eigen::MatrixXd(0, encodings.dim())),
                           std::move(faceless));
  }
  return FaceEncodingSet(encodings.select(face_ids), std::move(faceless));
}

// --- ClusterAssignment ---

ClusterAssignment::ClusterAssignment(std::vector<std::string> ids, std::vector<int> cluster_ids,
                                     std::optional<int> faceless_cluster_id)
    : ids_(std::move(ids)), clusters_(std::move(cluster_ids)), faceless_(faceless_cluster_id) {
  if (ids_.size() != clusters_.size()) {
    throw DataError("assignment has " + std::to_string(ids_.size()) + " ids but " +
                    std::to_string(clusters_.size()) + " cluster ids");
  }
  int max_id = -1;
  for (int c : clusters_) {
    if (c < 0) throw DataError("negative cluster id " + std::to_string(c));
    max_id = std::max(max_id, c);
  }
  cluster_count_ = max_id + 1;
  std::vector<bool> used(static_cast<std::size_t>(cluster_count_), false);
  for (int c : clusters_) used[static_cast<std::size_t>(c)] = true;
  for (int c = 0; c < cluster_count_; ++c) {
    if (!used[static_cast<std::size_t>(c)]) {
      throw DataError("cluster ids are not contiguous: id " + std::to_string(c) + " is unused");
    }
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw DataError("id '" + ids_[i] + "' assigned more than once");
    }
  }
  if (faceless_ && (*faceless_ < 0 || *faceless_ >= cluster_count_)) {
    throw DataError("faceless cluster id " + std::to_string(*faceless_) + " outside [0, " +
                    std::to_string(cluster_count_) + ")");
  }
}

ClusterAssignment ClusterAssignment::from_raw_labels(std::vector<std::string> ids,
                                                     std::span<const int> raw_labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(raw_labels.size());
  for (int raw : raw_labels) {
    auto [it, inserted] = remap.emplace(raw, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return ClusterAssignment(std::move(ids), std::move(out));
}

std::optional<int> ClusterAssignment::cluster_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return clusters_[it->second];
}

std::vector<std::size_t> ClusterAssignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(cluster_count_), 0);
  for (int c : clusters_) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

std::vector<int> ClusterAssignment::labels_for(std::span<const std::string> ids) const {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto c = cluster_of(id);
    if (!c) throw DataError("id '" + id + "' has no cluster assignment");
    out.push_back(*c);
  }
  return out;
}

// --- ClassPriors ---

ClassPriors::ClassPriors() { p_.fill(1.0 / static_cast<double>(kNumClasses)); }

ClassPriors::ClassPriors(std::array<double, kNumClasses> priors) : p_(priors) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (!(p_[i] > 0.0 && p_[i] <= 1.0)) {
      throw ConfigError("class prior for '" + std::string(label_name(kClassOrder[i])) +
                        "' must be in (0, 1], got " + std::to_string(p_[i]));
    }
    sum += p_[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("class priors must sum to 1, got " + std::to_string(sum));
  }
}

ClassPriors ClassPriors::from_counts(std::span<const std::size_t, kNumClasses> counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::array<double, kNumClasses> p{};
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (counts[i] == 0) {
      throw DataError("class '" + std::string(label_name(kClassOrder[i])) +
                      "' has no samples; its prior would be zero");
    }
    p[i] = static_cast<double>(counts[i]) / total;
  }
  return ClassPriors(p);
}

ClassPriors ClassPriors::from_labels(std::span<const Label> labels) {
  std::array<std::size_t, kNumClasses> counts{};
  for (Label l : labels) ++counts[index_of(l)];
  return from_counts(counts);
}

}  // namespace cdel
