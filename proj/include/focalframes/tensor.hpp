#ifndef FOCALFRAMES_TENSOR_HPP
#define FOCALFRAMES_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "focalframes/rational.hpp"
#include "focalframes/ranges.hpp"

namespace focalframes {

/// Axis classes for SmallTensor. Extents are fixed by IndexRanges:
/// A (normal/leaf) -> l, P (tangential) -> r, Alpha (hyperplane) -> bigN - n,
/// I (point-augmented, 0 plus leaf) -> 1 + l.
enum class Axis { A, P, Alpha, I };

inline int axis_extent(const IndexRanges& rg, Axis ax) {
  switch (ax) {
    case Axis::A: return rg.l;
    case Axis::P: return rg.r;
    case Axis::Alpha:
      if (!rg.bigN) fail(Errc::ShapeMismatch, "hyperplane axis needs an embedding dimension");
      return *rg.bigN - rg.n;
    case Axis::I: return 1 + rg.l;
  }
  return 0;
}

inline const char* axis_name(Axis ax) {
  switch (ax) {
    case Axis::A: return "a";
    case Axis::P: return "p";
    case Axis::Alpha: return "alpha";
    case Axis::I: return "i";
  }
  return "?";
}

/// Dense small tensor over labeled axes. Scalar kind K is either Rat (exact)
/// or double; a tensor never mixes kinds. Storage is row-major; symmetry is
/// a declaration checked by symmetries_hold, not an enforced storage scheme.
template <class K>
class SmallTensor {
public:
  SmallTensor() = default;

  SmallTensor(std::vector<Axis> axes, std::vector<int> extents)
      : axes_(std::move(axes)), extents_(std::move(extents)) {
    if (axes_.size() != extents_.size())
      fail(Errc::ShapeMismatch, "axis list and extent list differ in length");
    std::size_t total = 1;
    for (int e : extents_) {
      if (e < 1) fail(Errc::ShapeMismatch, "tensor extent must be positive");
      total *= static_cast<std::size_t>(e);
    }
    data_.assign(total, ScalarTraits<K>::zero());
  }

  static SmallTensor zeros(const IndexRanges& rg, std::vector<Axis> axes) {
    std::vector<int> ext;
    ext.reserve(axes.size());
    for (Axis ax : axes) ext.push_back(axis_extent(rg, ax));
    return SmallTensor(std::move(axes), std::move(ext));
  }

  int order() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<int>& extents() const { return extents_; }
  const std::vector<K>& data() const { return data_; }
  std::vector<K>& data() { return data_; }

  std::size_t offset(std::initializer_list<int> idx) const {
    if (idx.size() != axes_.size())
      fail(Errc::ShapeMismatch, "index arity does not match tensor order");
    std::size_t off = 0;
    int k = 0;
    for (int i : idx) {
      if (i < 0 || i >= extents_[k])
        fail(Errc::ShapeMismatch, "index out of range on axis " + std::string(axis_name(axes_[k])));
      off = off * static_cast<std::size_t>(extents_[k]) + static_cast<std::size_t>(i);
      ++k;
    }
    return off;
  }

  K& at(std::initializer_list<int> idx) { return data_[offset(idx)]; }
  const K& at(std::initializer_list<int> idx) const { return data_[offset(idx)]; }

  K& operator()(int i) { return at({i}); }
  const K& operator()(int i) const { return at({i}); }
  K& operator()(int i, int j) { return at({i, j}); }
  const K& operator()(int i, int j) const { return at({i, j}); }
  K& operator()(int i, int j, int k) { return at({i, j, k}); }
  const K& operator()(int i, int j, int k) const { return at({i, j, k}); }
  K& operator()(int i, int j, int k, int m) { return at({i, j, k, m}); }
  const K& operator()(int i, int j, int k, int m) const { return at({i, j, k, m}); }

  void declare_symmetric(int ax1, int ax2) {
    if (ax1 < 0 || ax2 < 0 || ax1 >= order() || ax2 >= order() || ax1 == ax2)
      fail(Errc::ShapeMismatch, "bad symmetric axis pair");
    if (extents_[ax1] != extents_[ax2] || axes_[ax1] != axes_[ax2])
      fail(Errc::ShapeMismatch, "symmetric axes must share class and extent");
    symmetric_pairs_.emplace_back(std::min(ax1, ax2), std::max(ax1, ax2));
  }

  const std::vector<std::pair<int, int>>& symmetric_pairs() const { return symmetric_pairs_; }

  /// True when every declared symmetry holds coefficient-wise (exactly for
  /// rationals, within tol for floats).
  bool symmetries_hold(double tol = kDefaultTol) const {
    for (auto [x, y] : symmetric_pairs_) {
      std::vector<int> idx(axes_.size(), 0);
      do {
        std::vector<int> swapped = idx;
        std::swap(swapped[x], swapped[y]);
        const K& u = data_[offset_v(idx)];
        const K& v = data_[offset_v(swapped)];
        if constexpr (ScalarTraits<K>::exact) {
          if (!(u == v)) return false;
        } else {
          if (std::abs(u - v) > tol) return false;
        }
      } while (next_index(idx));
    }
    return true;
  }

  void check_matches(const IndexRanges& rg) const {
    for (std::size_t k = 0; k < axes_.size(); ++k)
      if (extents_[k] != axis_extent(rg, axes_[k]))
        fail(Errc::ShapeMismatch, std::string("axis ") + axis_name(axes_[k]) +
                                      " extent does not match index ranges");
  }

  bool next_index(std::vector<int>& idx) const {
    for (int k = order() - 1; k >= 0; --k) {
      if (++idx[k] < extents_[k]) return true;
      idx[k] = 0;
    }
    return false;
  }

  std::size_t offset_v(const std::vector<int>& idx) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k)
      off = off * static_cast<std::size_t>(extents_[k]) + static_cast<std::size_t>(idx[k]);
    return off;
  }

  double max_abs() const {
    double m = 0.0;
    for (const K& v : data_) m = std::max(m, std::abs(ScalarTraits<K>::to_double(v)));
    return m;
  }

  bool all_zero(double tol = 0.0) const {
    for (const K& v : data_)
      if (!ScalarTraits<K>::is_zero(v, tol)) return false;
    return true;
  }

  SmallTensor<double> to_double() const {
    SmallTensor<double> out(axes_, extents_);
    for (std::size_t k = 0; k < data_.size(); ++k)
      out.data()[k] = ScalarTraits<K>::to_double(data_[k]);
    for (auto [x, y] : symmetric_pairs_) out.declare_symmetric(x, y);
    return out;
  }

private:
  std::vector<Axis> axes_;
  std::vector<int> extents_;
  std::vector<K> data_;
  std::vector<std::pair<int, int>> symmetric_pairs_;
};

/// Summed contraction of t1 with t2 over the given (axis-of-t1, axis-of-t2)
/// pairs. Paired axes must agree in class and extent. Result axes are the
/// free axes of t1 followed by the free axes of t2.
template <class K>
SmallTensor<K> contract(const SmallTensor<K>& t1, const SmallTensor<K>& t2,
                        const std::vector<std::pair<int, int>>& pairs) {
  std::vector<bool> used1(t1.order(), false), used2(t2.order(), false);
  for (auto [x, y] : pairs) {
    if (x < 0 || x >= t1.order() || y < 0 || y >= t2.order())
      fail(Errc::AxisMismatch, "contraction axis out of range");
    if (used1[x] || used2[y]) fail(Errc::AxisMismatch, "axis contracted twice");
    if (t1.axes()[x] != t2.axes()[y])
      fail(Errc::AxisMismatch, std::string("cannot contract axis class ") +
                                   axis_name(t1.axes()[x]) + " with " + axis_name(t2.axes()[y]));
    if (t1.extents()[x] != t2.extents()[y])
      fail(Errc::AxisMismatch, "contracted axes differ in extent");
    used1[x] = used2[y] = true;
  }

  std::vector<Axis> out_axes;
  std::vector<int> out_ext;
  std::vector<int> free1, free2;
  for (int k = 0; k < t1.order(); ++k)
    if (!used1[k]) {
      free1.push_back(k);
      out_axes.push_back(t1.axes()[k]);
      out_ext.push_back(t1.extents()[k]);
    }
  for (int k = 0; k < t2.order(); ++k)
    if (!used2[k]) {
      free2.push_back(k);
      out_axes.push_back(t2.axes()[k]);
      out_ext.push_back(t2.extents()[k]);
    }
  // Fully contracted inputs give an order-0 tensor holding one scalar.
  SmallTensor<K> out(out_axes, out_ext);

  std::vector<int> idx1(t1.order(), 0), idx2(t2.order(), 0);
  std::vector<int> out_idx(out_axes.size(), 0);
  std::vector<int> sum_idx(pairs.size(), 0);

  // Iterate over the free index space, then sum over the paired extents.
  bool more_out = true;
  while (more_out) {
    K acc = ScalarTraits<K>::zero();
    std::fill(sum_idx.begin(), sum_idx.end(), 0);
    bool more_sum = true;
    while (more_sum) {
      for (std::size_t k = 0; k < free1.size(); ++k) idx1[free1[k]] = out_idx[k];
      for (std::size_t k = 0; k < free2.size(); ++k) idx2[free2[k]] = out_idx[free1.size() + k];
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        idx1[pairs[k].first] = sum_idx[k];
        idx2[pairs[k].second] = sum_idx[k];
      }
      acc += t1.data()[t1.offset_v(idx1)] * t2.data()[t2.offset_v(idx2)];
      more_sum = false;
      for (int k = static_cast<int>(pairs.size()) - 1; k >= 0; --k) {
        if (++sum_idx[k] < t1.extents()[pairs[k].first]) {
          more_sum = true;
          break;
        }
        sum_idx[k] = 0;
      }
      if (pairs.empty()) break;
    }
    if (out.order() == 0)
      out.data()[0] = acc;
    else
      out.data()[out.offset_v(out_idx)] = acc;

    more_out = false;
    for (int k = static_cast<int>(out_idx.size()) - 1; k >= 0; --k) {
      if (++out_idx[k] < out.extents()[k]) {
        more_out = true;
        break;
      }
      out_idx[k] = 0;
    }
    if (out_idx.empty()) break;
  }
  return out;
}

} // namespace focalframes

#endif
