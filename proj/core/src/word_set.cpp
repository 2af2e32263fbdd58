#include "ore/word_set.hpp"

#include <iterator>

namespace ore {

WordSet WordSet::all(std::size_t n) {
    WordSet s;
    s.indices_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.indices_[i] = i;
    return s;
}

WordSet WordSet::from_mask(const std::vector<bool>& mask) {
    WordSet s;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) s.indices_.push_back(i);
    }
    return s;
}

void WordSet::normalize() {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

void WordSet::insert(std::size_t index) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
    if (it == indices_.end() || *it != index) indices_.insert(it, index);
}

void WordSet::erase(std::size_t index) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
    if (it != indices_.end() && *it == index) indices_.erase(it);
}

WordSet WordSet::united(const WordSet& other) const {
    WordSet out;
    std::set_union(begin(), end(), other.begin(), other.end(), std::back_inserter(out.indices_));
    return out;
}

WordSet WordSet::minus(const WordSet& other) const {
    WordSet out;
    std::set_difference(begin(), end(), other.begin(), other.end(), std::back_inserter(out.indices_));
    return out;
}

WordSet WordSet::intersected(const WordSet& other) const {
    WordSet out;
    std::set_intersection(begin(), end(), other.begin(), other.end(),
                          std::back_inserter(out.indices_));
    return out;
}

WordSet WordSet::complement(std::size_t n) const {
    return all(n).minus(*this);
}

bool WordSet::intersects(const WordSet& other) const {
    auto a = begin();
    auto b = other.begin();
    while (a != end() && b != other.end()) {
        if (*a == *b) return true;
        if (*a < *b) {
            ++a;
        } else {
            ++b;
        }
    }
    return false;
}

bool WordSet::is_subset_of(const WordSet& other) const {
    return std::includes(other.begin(), other.end(), begin(), end());
}

std::vector<bool> WordSet::mask(std::size_t n) const {
    std::vector<bool> m(n, false);
    for (auto i : indices_) {
        if (i < n) m[i] = true;
    }
    return m;
}

std::string WordSet::to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(indices_[i]);
    }
    return s + "}";
}

} // namespace ore
