#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

#include "twistlab/rational.hpp"

namespace twistlab {

/// Finitely supported coefficient vector over 1-based coordinates.
///
/// Entries are kept sorted by index and exact zeros are never stored, so
/// support queries are trivial and equality is support-wise. The scalar type
/// is either double (float64 mode) or Rational (exact mode).
template <typename T>
class SparseVec {
 public:
  using Entry = std::pair<int, T>;

  SparseVec() = default;
  SparseVec(std::initializer_list<Entry> init) {
    for (const auto& [j, v] : init) set(j, v);
  }

  static SparseVec unit(int j, T v = T(1)) {
    SparseVec r;
    r.set(j, v);
    return r;
  }

  const std::vector<Entry>& entries() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t supportSize() const { return items_.size(); }

  int minIndex() const { return items_.empty() ? 0 : items_.front().first; }
  int maxIndex() const { return items_.empty() ? 0 : items_.back().first; }

  T get(int j) const {
    auto it = find(j);
    return it != items_.end() && it->first == j ? it->second : T(0);
  }

  void set(int j, T v) {
    if (j < 1) throw std::invalid_argument("SparseVec: coordinate indices are 1-based");
    auto it = find(j);
    if (it != items_.end() && it->first == j) {
      if (isZero(v)) {
        items_.erase(it);
      } else {
        it->second = v;
      }
    } else if (!isZero(v)) {
      items_.insert(it, {j, v});
    }
  }

  void add(int j, T v) { set(j, get(j) + v); }

  SparseVec& operator+=(const SparseVec& o) {
    for (const auto& [j, v] : o.items_) add(j, v);
    return *this;
  }
  SparseVec& operator-=(const SparseVec& o) {
    for (const auto& [j, v] : o.items_) add(j, T(0) - v);
    return *this;
  }
  SparseVec& operator*=(T s) {
    if (isZero(s)) {
      items_.clear();
      return *this;
    }
    for (auto& [j, v] : items_) v = v * s;
    return *this;
  }

  friend SparseVec operator+(SparseVec a, const SparseVec& b) { return a += b; }
  friend SparseVec operator-(SparseVec a, const SparseVec& b) { return a -= b; }
  friend SparseVec operator*(T s, SparseVec a) { return a *= s; }

  SparseVec cwiseAbs() const {
    SparseVec r = *this;
    for (auto& [j, v] : r.items_) v = absOf(v);
    return r;
  }

  friend bool operator==(const SparseVec& a, const SparseVec& b) { return a.items_ == b.items_; }

 private:
  static bool isZero(const T& v) {
    if constexpr (std::is_same_v<T, Rational>) {
      return v.isZero();
    } else {
      return v == T(0);
    }
  }
  static T absOf(const T& v) {
    if constexpr (std::is_same_v<T, Rational>) {
      return v.abs();
    } else {
      return std::abs(v);
    }
  }

  typename std::vector<Entry>::iterator find(int j) {
    return std::lower_bound(items_.begin(), items_.end(), j,
                            [](const Entry& e, int k) { return e.first < k; });
  }
  typename std::vector<Entry>::const_iterator find(int j) const {
    return std::lower_bound(items_.begin(), items_.end(), j,
                            [](const Entry& e, int k) { return e.first < k; });
  }

  std::vector<Entry> items_;
};

using DVec = SparseVec<double>;
using QVec = SparseVec<Rational>;

inline double l1Norm(const DVec& x) {
  double s = 0;
  for (const auto& [j, v] : x.entries()) s += std::abs(v);
  return s;
}

inline double l2Norm(const DVec& x) {
  double s = 0;
  for (const auto& [j, v] : x.entries()) s += v * v;
  return std::sqrt(s);
}

inline double linfNorm(const DVec& x) {
  double s = 0;
  for (const auto& [j, v] : x.entries()) s = std::max(s, std::abs(v));
  return s;
}

inline double dot(const DVec& a, const DVec& b) {
  double s = 0;
  const auto& ae = a.entries();
  const auto& be = b.entries();
  std::size_t i = 0, k = 0;
  while (i < ae.size() && k < be.size()) {
    if (ae[i].first < be[k].first) {
      ++i;
    } else if (be[k].first < ae[i].first) {
      ++k;
    } else {
      s += ae[i].second * be[k].second;
      ++i;
      ++k;
    }
  }
  return s;
}

inline DVec toDouble(const QVec& x) {
  DVec r;
  for (const auto& [j, v] : x.entries()) r.set(j, v.toDouble());
  return r;
}

}  // namespace twistlab
