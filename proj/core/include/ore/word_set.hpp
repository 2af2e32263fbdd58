#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace ore {

/// A set of word positions, kept sorted and duplicate-free. Ordering is
/// lexicographic over the sorted index sequence.
class WordSet {
public:
    using const_iterator = std::vector<std::size_t>::const_iterator;

    WordSet() = default;
    WordSet(std::initializer_list<std::size_t> indices) : indices_(indices) { normalize(); }
    explicit WordSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) { normalize(); }

    /// {0, ..., n-1}
    static WordSet all(std::size_t n);
    static WordSet from_mask(const std::vector<bool>& mask);

    bool contains(std::size_t index) const {
        return std::binary_search(indices_.begin(), indices_.end(), index);
    }
    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    const_iterator begin() const noexcept { return indices_.begin(); }
    const_iterator end() const noexcept { return indices_.end(); }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

    void insert(std::size_t index);
    void erase(std::size_t index);

    WordSet united(const WordSet& other) const;
    WordSet minus(const WordSet& other) const;
    WordSet intersected(const WordSet& other) const;
    /// Positions of {0..n-1} not in this set.
    WordSet complement(std::size_t n) const;

    bool intersects(const WordSet& other) const;
    bool is_subset_of(const WordSet& other) const;

    std::vector<bool> mask(std::size_t n) const;
    std::string to_string() const;

    friend bool operator==(const WordSet&, const WordSet&) = default;
    friend auto operator<=>(const WordSet& a, const WordSet& b) { return a.indices_ <=> b.indices_; }

private:
    void normalize();

    std::vector<std::size_t> indices_;
};

} // namespace ore
