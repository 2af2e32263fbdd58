#include "ore/cost.hpp"

#include "ore/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ore {

CostFunction::CostFunction(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] <= 0.0)
            throw InvalidInput("cost of word " + std::to_string(i) + " must be finite and positive");
    }
}

CostFunction CostFunction::uniform(std::size_t n, double value) {
    return CostFunction(std::vector<double>(n, value));
}

double CostFunction::total(const WordSet& words) const {
    double s = 0.0;
    for (auto i : words) s += values_.at(i);
    return s;
}

double CostFunction::total() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

bool cost_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool cost_less(double a, double b) { return a < b && !cost_equal(a, b); }

void ConstraintSpec::validate(std::size_t n) const {
    for (const auto* set : {&include, &exclude}) {
        for (auto i : *set) {
            if (i >= n) throw InvalidIndex("constraint position " + std::to_string(i) + " out of range");
        }
    }
    if (include.intersects(exclude)) throw InvalidInput("include and exclude constraints overlap");
}

} // namespace ore
