#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace nodal {

/// Disjoint sets with union by size and path halving.
class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  /// Returns false when i and j were already joined.
  bool unite(int i, int j) {
    i = find(i);
    j = find(j);
    if (i == j) return false;
    if (size_[i] < size_[j]) std::swap(i, j);
    parent_[j] = i;
    size_[i] += size_[j];
    return true;
  }

  /// Dense relabeling 0..k-1 in order of first appearance by index.
  std::vector<int> dense_labels(int* count) {
    std::vector<int> label(parent_.size(), -1), out(parent_.size());
    int next = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const int r = find(static_cast<int>(i));
      if (label[r] < 0) label[r] = next++;
      out[i] = label[r];
    }
    if (count) *count = next;
    return out;
  }

private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace nodal
