#ifndef NETEVO_FENWICK_HPP
#define NETEVO_FENWICK_HPP

#include <cstddef>
#include <vector>

namespace netevo {

/// Binary-indexed tree over nonnegative weights: point update, prefix sum
/// and cumulative-distribution draw in O(log n).
class FenwickTree {
public:
    FenwickTree() = default;
    explicit FenwickTree(std::size_t n) { resize(n); }

    std::size_t size() const { return values_.size(); }

    /// Grows to n slots, preserving existing weights.
    void resize(std::size_t n);

    void add(std::size_t i, double delta);
    void set(std::size_t i, double value) { add(i, value - values_[i]); }
    double value(std::size_t i) const { return values_[i]; }

    /// Sum of weights with index < i.
    double prefix(std::size_t i) const;
    double total() const { return prefix(size()); }

    /// Smallest index i with prefix(i + 1) > r, i.e. the slot an inverse-CDF
    /// draw with uniform r in [0, total()) lands on. Slots of zero weight
    /// are never returned while r < total().
    std::size_t lower_bound(double r) const;

private:
    std::vector<double> tree_;    // 1-based
    std::vector<double> values_;  // raw weights, for set()
};

}  // namespace netevo

#endif  // NETEVO_FENWICK_HPP
