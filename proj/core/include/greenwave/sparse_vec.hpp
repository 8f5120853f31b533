#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace greenwave {

/// Sparse vector over parameter indices, kept sorted with no stored zeros.
///
/// Perturbations only travel along the artery through burst fronts and are
/// wiped by queue-emptying events, so derivative vectors touch a handful of
/// parameters even on long chains. Storing them sparsely keeps the work per
/// event independent of the chain length.
class SparseVec {
 public:
  struct Entry {
    std::uint32_t index;
    double value;
  };

  SparseVec() = default;

  static SparseVec unit(std::uint32_t index, double value = 1.0);
  static SparseVec from_dense(std::span<const double> dense);

  double operator[](std::uint32_t index) const;

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  void clear() noexcept { entries_.clear(); }

  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  /// this += a * other
  void add_scaled(const SparseVec& other, double a);
  void add(std::uint32_t index, double value);
  void scale(double a);
  SparseVec scaled(double a) const;

  std::vector<double> dense(std::size_t n) const;
  /// dense += a * this
  void accumulate_into(std::span<double> dense, double a) const;

  double max_abs() const noexcept;

  friend bool operator==(const SparseVec& a, const SparseVec& b);

 private:
  std::vector<Entry> entries_;
};

}  // namespace greenwave
