#include "netevo/fenwick.hpp"

#include <algorithm>

namespace netevo {

void FenwickTree::resize(std::size_t n) {
    if (n <= values_.size()) return;
    std::size_t cap = std::max(n, values_.size() * 2 + 8);
    std::vector<double> old;
    old.swap(values_);
    values_.assign(cap, 0.0);
    tree_.assign(cap + 1, 0.0);
    for (std::size_t i = 0; i < old.size(); ++i) {
        values_[i] = old[i];
        if (old[i] != 0.0) {
            for (std::size_t j = i + 1; j <= cap; j += j & (~j + 1)) {
                tree_[j] += old[i];
            }
        }
    }
}

void FenwickTree::add(std::size_t i, double delta) {
    values_[i] += delta;
    for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) {
        tree_[j] += delta;
    }
}

double FenwickTree::prefix(std::size_t i) const {
    double sum = 0.0;
    for (std::size_t j = std::min(i, values_.size()); j > 0; j -= j & (~j + 1)) {
        sum += tree_[j];
    }
    return sum;
}

std::size_t FenwickTree::lower_bound(double r) const {
    std::size_t pos = 0;
    std::size_t mask = 1;
    while (mask * 2 <= values_.size()) mask *= 2;
    for (; mask > 0; mask /= 2) {
        std::size_t next = pos + mask;
        if (next < tree_.size() && tree_[next] <= r) {
            r -= tree_[next];
            pos = next;
        }
    }
    return pos;  // first index whose cumulative sum exceeds the original r
}

}  // namespace netevo
