#include "greenwave/sparse_vec.hpp"

#include <algorithm>
#include <cmath>

namespace greenwave {

SparseVec SparseVec::unit(std::uint32_t index, double value) {
  SparseVec v;
  if (value != 0.0) v.entries_.push_back({index, value});
  return v;
}

SparseVec SparseVec::from_dense(std::span<const double> dense) {
  SparseVec v;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) v.entries_.push_back({static_cast<std::uint32_t>(i), dense[i]});
  }
  return v;
}

double SparseVec::operator[](std::uint32_t index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, std::uint32_t i) { return e.index < i; });
  return (it != entries_.end() && it->index == index) ? it->value : 0.0;
}

void SparseVec::add_scaled(const SparseVec& other, double a) {
  if (other.entries_.empty() || a == 0.0) return;
  if (entries_.empty()) {
    entries_.reserve(other.entries_.size());
    for (const auto& e : other.entries_) {
      const double v = a * e.value;
      if (v != 0.0) entries_.push_back({e.index, v});
    }
    return;
  }
  std::vector<Entry> merged;
  merged.reserve(entries_.size() + other.entries_.size());
  auto lhs = entries_.begin();
  auto rhs = other.entries_.begin();
  while (lhs != entries_.end() || rhs != other.entries_.end()) {
    if (rhs == other.entries_.end() || (lhs != entries_.end() && lhs->index < rhs->index)) {
      merged.push_back(*lhs++);
    } else if (lhs == entries_.end() || rhs->index < lhs->index) {
      const double v = a * rhs->value;
      if (v != 0.0) merged.push_back({rhs->index, v});
      ++rhs;
    } else {
      const double v = lhs->value + a * rhs->value;
      if (v != 0.0) merged.push_back({lhs->index, v});
      ++lhs;
      ++rhs;
    }
  }
  entries_.swap(merged);
}

void SparseVec::add(std::uint32_t index, double value) {
  if (value == 0.0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, std::uint32_t i) { return e.index < i; });
  if (it != entries_.end() && it->index == index) {
    it->value += value;
    if (it->value == 0.0) entries_.erase(it);
  } else {
    entries_.insert(it, {index, value});
  }
}

void SparseVec::scale(double a) {
  if (a == 0.0) {
    entries_.clear();
    return;
  }
  for (auto& e : entries_) e.value *= a;
}

SparseVec SparseVec::scaled(double a) const {
  SparseVec v = *this;
  v.scale(a);
  return v;
}

std::vector<double> SparseVec::dense(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  for (const auto& e : entries_) {
    if (e.index < n) out[e.index] = e.value;
  }
  return out;
}

void SparseVec::accumulate_into(std::span<double> dense, double a) const {
  for (const auto& e : entries_) {
    if (e.index < dense.size()) dense[e.index] += a * e.value;
  }
}

double SparseVec::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
  return m;
}

bool operator==(const SparseVec& a, const SparseVec& b) {
  return std::equal(a.entries_.begin(), a.entries_.end(), b.entries_.begin(), b.entries_.end(),
                    [](const SparseVec::Entry& x, const SparseVec::Entry& y) {
                      return x.index == y.index && x.value == y.value;
                    });
}

}  // namespace greenwave
