#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "medspec/error.hpp"

namespace medspec {

/// Static k-d tree over row-major points of any dimension. Queries break
/// distance ties toward the lower point index, so results are deterministic.
class KdTree {
 public:
  struct Hit {
    double dist2;
    int index;
    bool operator<(const Hit& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index); }
  };

  KdTree() = default;
  KdTree(std::vector<double> points, int dim) : pts_(std::move(points)), dim_(dim) {
    if (dim_ <= 0) fail(ErrorCode::domain, "k-d tree dimension must be positive");
    if (pts_.size() % static_cast<std::size_t>(dim_) != 0) fail(ErrorCode::shape, "point buffer not a multiple of dim");
    n_ = static_cast<int>(pts_.size() / static_cast<std::size_t>(dim_));
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), 0);
    nodes_.reserve(2 * static_cast<std::size_t>(n_) / kLeaf + 2);
    if (n_ > 0) build(0, n_);
  }

  int size() const { return n_; }
  int dim() const { return dim_; }
  const double* point(int i) const { return pts_.data() + static_cast<std::size_t>(i) * dim_; }

  /// The k nearest points, sorted by (distance, index). `exclude` skips one
  /// index (self queries).
  std::vector<Hit> knn(const double* q, int k, int exclude = -1) const {
    std::vector<Hit> heap;
    if (k <= 0 || n_ == 0) return heap;
    heap.reserve(k + 1);
    search_knn(0, q, k, exclude, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

  Hit nearest(const double* q) const {
    auto h = knn(q, 1);
    if (h.empty()) fail(ErrorCode::empty_input, "nearest-neighbor query on an empty tree");
    return h.front();
  }

  /// All points with squared distance <= r2, sorted by (distance, index).
  std::vector<Hit> radius(const double* q, double r2) const {
    std::vector<Hit> out;
    if (n_ > 0) search_radius(0, q, r2, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr int kLeaf = 12;
  struct Node {
    int begin, end;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
  };

  double dist2(const double* q, int i) const {
    const double* p = point(i);
    double s = 0.0;
    for (int c = 0; c < dim_; ++c) {
      const double d = q[c] - p[c];
      s += d * d;
    }
    return s;
  }

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeaf) return id;
    int axis = 0;
    double best = -1.0;
    for (int c = 0; c < dim_; ++c) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = begin; i < end; ++i) {
        const double v = point(perm_[i])[c];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best) {
        best = hi - lo;
        axis = c;
      }
    }
    if (best <= 0.0) return id;  // all points coincide
    const int mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end, [&](int a, int b) {
      const double va = point(a)[axis], vb = point(b)[axis];
      return va < vb || (va == vb && a < b);
    });
    const double split = point(perm_[mid])[axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search_knn(int id, const double* q, int k, int exclude, std::vector<Hit>& heap) const {
    const Node& nd = nodes_[id];
    if (nd.axis < 0) {
      for (int i = nd.begin; i < nd.end; ++i) {
        const int idx = perm_[i];
        if (idx == exclude) continue;
        const Hit h{dist2(q, idx), idx};
        if (static_cast<int>(heap.size()) < k) {
          heap.push_back(h);
          std::push_heap(heap.begin(), heap.end());
        } else if (h < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = h;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double diff = q[nd.axis] - nd.split;
    const int near = diff < 0 ? nd.left : nd.right;
    const int far = diff < 0 ? nd.right : nd.left;
    search_knn(near, q, k, exclude, heap);
    // Equal distance may still hide a lower index, hence <=.
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().dist2) search_knn(far, q, k, exclude, heap);
  }

  void search_radius(int id, const double* q, double r2, std::vector<Hit>& out) const {
    const Node& nd = nodes_[id];
    if (nd.axis < 0) {
      for (int i = nd.begin; i < nd.end; ++i) {
        const double d = dist2(q, perm_[i]);
        if (d <= r2) out.push_back({d, perm_[i]});
      }
      return;
    }
    const double diff = q[nd.axis] - nd.split;
    const int near = diff < 0 ? nd.left : nd.right;
    const int far = diff < 0 ? nd.right : nd.left;
    search_radius(near, q, r2, out);
    if (diff * diff <= r2) search_radius(far, q, r2, out);
  }

  std::vector<double> pts_;
  int dim_ = 1;
  int n_ = 0;
  std::vector<int> perm_;
  std::vector<Node> nodes_;
};

}  // namespace medspec
