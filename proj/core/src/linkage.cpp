#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "cdel/clustering.hpp"
#include "cdel/errors.hpp"

namespace cdel {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  // The surviving root is always the smaller index.
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a > b) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
    return a;
  }

 private:
  std::vector<int> parent_;
};

struct RawMerge {
  int a;  // any leaf of the first cluster
  int b;  // any leaf of the second cluster
  double height;
};

// Sorts by height and numbers internal nodes the way scipy's linkage matrix does.
LinkageTree assemble(int n, std::vector<RawMerge> raw) {
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMerge& x, const RawMerge& y) { return x.height < y.height; });
  DisjointSets sets(n);
  std::vector<int> node_of(static_cast<std::size_t>(n));
  std::vector<int> size_of(static_cast<std::size_t>(n), 1);
  std::iota(node_of.begin(), node_of.end(), 0);
  std::vector<Merge> merges;
  merges.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int ra = sets.find(raw[i].a);
    const int rb = sets.find(raw[i].b);
    const int na = node_of[static_cast<std::size_t>(ra)];
    const int nb = node_of[static_cast<std::size_t>(rb)];
    const int size = size_of[static_cast<std::size_t>(ra)] + size_of[static_cast<std::size_t>(rb)];
    merges.push_back({std::min(na, nb), std::max(na, nb), raw[i].height, size});
    const int root = sets.unite(ra, rb);
    node_of[static_cast<std::size_t>(root)] = n + static_cast<int>(i);
    size_of[static_cast<std::size_t>(root)] = size;
  }
  return LinkageTree(n, std::move(merges));
}

std::vector<RawMerge> minimum_spanning_merges(const Eigen::MatrixXd& d) {
  const auto n = static_cast<int>(d.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  std::vector<double> best(static_cast<std::size_t>(n), kInf);
  std::vector<int> from(static_cast<std::size_t>(n), 0);
  std::vector<RawMerge> out;
  out.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
  int current = 0;
  in_tree[0] = 1;
  for (int step = 1; step < n; ++step) {
    int next = -1;
    double next_d = kInf;
    for (int j = 0; j < n; ++j) {
      if (in_tree[static_cast<std::size_t>(j)]) continue;
      const double dj = d(current, j);
      if (dj < best[static_cast<std::size_t>(j)]) {
        best[static_cast<std::size_t>(j)] = dj;
        from[static_cast<std::size_t>(j)] = current;
      }
      if (best[static_cast<std::size_t>(j)] < next_d || next < 0) {
        next_d = best[static_cast<std::size_t>(j)];
        next = j;
      }
    }
    out.push_back({from[static_cast<std::size_t>(next)], next, next_d});
    in_tree[static_cast<std::size_t>(next)] = 1;
    current = next;
  }
  return out;
}

std::vector<RawMerge> nearest_neighbour_chain(const Eigen::MatrixXd& dist, Linkage linkage) {
  const auto n = static_cast<int>(dist.rows());
  Eigen::MatrixXd d = dist;
  std::vector<double> size(static_cast<std::size_t>(n), 1.0);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<int> chain;
  chain.reserve(static_cast<std::size_t>(n));
  std::vector<RawMerge> out;
  out.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));

  for (int remaining = n; remaining > 1; --remaining) {
    if (chain.empty()) {
      for (int i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)]) {
          chain.push_back(i);
          break;
        }
      }
    }
    int x = 0;
    int y = 0;
    double current = 0.0;
    while (true) {
      x = chain.back();
      // Prefer the previous chain element on ties so the chain cannot cycle.
      if (chain.size() >= 2) {
        y = chain[chain.size() - 2];
        current = d(x, y);
      } else {
        y = -1;
        current = std::numeric_limits<double>::infinity();
      }
      for (int i = 0; i < n; ++i) {
        if (!active[static_cast<std::size_t>(i)] || i == x) continue;
        if (d(x, i) < current) {
          current = d(x, i);
          y = i;
        }
      }
      if (chain.size() >= 2 && y == chain[chain.size() - 2]) break;
      chain.push_back(y);
    }
    chain.pop_back();
    chain.pop_back();
    out.push_back({x, y, current});

    const double sx = size[static_cast<std::size_t>(x)];
    const double sy = size[static_cast<std::size_t>(y)];
    for (int k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == x || k == y) continue;
      double v = 0.0;
      switch (linkage) {
        case Linkage::complete:
          v = std::max(d(x, k), d(y, k));
          break;
        case Linkage::average:
          v = (sx * d(x, k) + sy * d(y, k)) / (sx + sy);
          break;
        case Linkage::single:
          v = std::min(d(x, k), d(y, k));
          break;
      }
      d(y, k) = v;
      d(k, y) = v;
    }
    active[static_cast<std::size_t>(x)] = 0;
    size[static_cast<std::size_t>(y)] = sx + sy;
  }
  return out;
}

}  // namespace

LinkageTree::LinkageTree(int leaf_count, std::vector<Merge> merges)
    : n_(leaf_count), merges_(std::move(merges)) {
  if (n_ < 1) throw DataError("linkage tree needs at least one leaf");
  if (static_cast<int>(merges_.size()) != n_ - 1) {
    throw DataError("linkage tree over " + std::to_string(n_) + " leaves needs " +
                    std::to_string(n_ - 1) + " merges");
  }
}

std::vector<int> LinkageTree::cut(double t) const {
  DisjointSets sets(n_);
  std::vector<int> leaf_of(static_cast<std::size_t>(2 * n_ - 1));
  std::vector<char> ok(static_cast<std::size_t>(2 * n_ - 1), 1);
  std::iota(leaf_of.begin(), leaf_of.begin() + n_, 0);
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    const Merge& m = merges_[i];
    const auto node = static_cast<std::size_t>(n_) + i;
    leaf_of[node] = leaf_of[static_cast<std::size_t>(m.left)];
    ok[node] = m.height <= t && ok[static_cast<std::size_t>(m.left)] && ok[static_cast<std::size_t>(m.right)];
    if (ok[node]) {
      sets.unite(leaf_of[static_cast<std::size_t>(m.left)], leaf_of[static_cast<std::size_t>(m.right)]);
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(n_));
  std::unordered_map<int, int> first;
  for (int i = 0; i < n_; ++i) {
    auto [it, inserted] = first.emplace(sets.find(i), static_cast<int>(first.size()));
    labels[static_cast<std::size_t>(i)] = it->second;
  }
  return labels;
}

LinkageTree build_linkage(const DistanceMatrix& dm, Linkage linkage) {
  const auto n = static_cast<int>(dm.size());
  if (n < 1) throw DataError("cannot build a linkage tree over zero samples");
  auto raw = linkage == Linkage::single ? minimum_spanning_merges(dm.values())
                                        : nearest_neighbour_chain(dm.values(), linkage);
  return assemble(n, std::move(raw));
}

}  // namespace cdel
