#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ore::detail {

namespace {

constexpr double kEps = 1e-11;

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : cols_(cols), a_(rows + 1, std::vector<double>(cols + 1, 0.0)) {}

    double& at(std::size_t r, std::size_t c) { return a_[r][c]; }
    double& rhs(std::size_t r) { return a_[r][cols_]; }
    std::vector<double>& objective() { return a_.back(); }
    std::size_t rows() const { return a_.size() - 1; }

    void pivot(std::size_t pr, std::size_t pc) {
        auto& p = a_[pr];
        const double inv = 1.0 / p[pc];
        for (auto& v : p) v *= inv;
        p[pc] = 1.0;
        for (std::size_t r = 0; r < a_.size(); ++r) {
            if (r == pr) continue;
            const double f = a_[r][pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) a_[r][c] -= f * p[c];
            a_[r][pc] = 0.0;
        }
    }

    // Minimise the objective row over columns [0, usable). Bland's rule.
    void run(std::vector<std::size_t>& basis, std::size_t usable) {
        for (;;) {
            std::size_t pc = usable;
            for (std::size_t c = 0; c < usable; ++c) {
                if (objective()[c] < -kEps) {
                    pc = c;
                    break;
                }
            }
            if (pc == usable) return;
            std::size_t pr = rows();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows(); ++r) {
                if (a_[r][pc] <= kEps) continue;
                const double ratio = rhs(r) / a_[r][pc];
                if (ratio < best - kEps || (ratio <= best + kEps && pr < rows() && basis[r] < basis[pr])) {
                    best = ratio;
                    pr = r;
                }
            }
            if (pr == rows()) return;  // unbounded; cannot happen on a box
            pivot(pr, pc);
            basis[pr] = pc;
        }
    }

private:
    std::size_t cols_;
    std::vector<std::vector<double>> a_;
};

} // namespace

std::optional<LpSolution> minimize(const LinearForm& objective, const Box& box,
                                   const std::vector<LinearForm>& constraints) {
    const std::size_t n = box.size();
    // Variables y = x - lo in [0, width]. Rows: y_k <= width_k, then c(lo + y) >= 0.
    struct Row {
        std::vector<double> coeffs;
        double rhs;
        bool geq;
    };
    std::vector<Row> rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> e(n, 0.0);
        e[k] = 1.0;
        rows.push_back({std::move(e), box.hi[k] - box.lo[k], false});
    }
    for (const auto& c : constraints) {
        rows.push_back({c.coeffs, -c.eval(box.lo), true});
    }
    for (auto& r : rows) {
        if (r.rhs < 0.0) {
            for (auto& v : r.coeffs) v = -v;
            r.rhs = -r.rhs;
            r.geq = !r.geq;
        }
    }
    const std::size_t m = rows.size();
    std::size_t artificial = 0;
    for (const auto& r : rows) artificial += r.geq ? 1 : 0;
    const std::size_t slack0 = n, art0 = n + m, cols = n + m + artificial;

    Tableau t(m, cols);
    std::vector<std::size_t> basis(m);
    std::size_t next_art = art0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) t.at(i, k) = rows[i].coeffs[k];
        t.rhs(i) = rows[i].rhs;
        if (rows[i].geq) {
            t.at(i, slack0 + i) = -1.0;
            t.at(i, next_art) = 1.0;
            basis[i] = next_art++;
        } else {
            t.at(i, slack0 + i) = 1.0;
            basis[i] = slack0 + i;
        }
    }

    if (artificial > 0) {
        auto& obj = t.objective();
        for (std::size_t i = 0; i < m; ++i) {
            if (!rows[i].geq) continue;
            for (std::size_t c = 0; c < art0; ++c) obj[c] -= t.at(i, c);
            obj[cols] -= t.rhs(i);
        }
        t.run(basis, art0);
        const double scale = 1.0 + std::abs(obj[cols]);
        if (-obj[cols] > 1e-9 * scale) return std::nullopt;
        // Drive remaining artificials out of the basis where possible.
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < art0) continue;
            for (std::size_t c = 0; c < art0; ++c) {
                if (std::abs(t.at(i, c)) > 1e-9) {
                    t.pivot(i, c);
                    basis[i] = c;
                    break;
                }
            }
        }
    }

    auto& obj = t.objective();
    std::fill(obj.begin(), obj.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) obj[k] = objective.coeffs[k];
    for (std::size_t i = 0; i < m; ++i) {
        const double f = obj[basis[i]];
        if (f == 0.0) continue;
        for (std::size_t c = 0; c <= cols; ++c) obj[c] -= f * t.at(i, c);
    }
    t.run(basis, art0);

    LpSolution out;
    out.point = box.lo;
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) out.point[basis[i]] += t.rhs(i);
    }
    for (std::size_t k = 0; k < n; ++k) out.point[k] = std::clamp(out.point[k], box.lo[k], box.hi[k]);
    out.value = objective.eval(out.point);
    return out;
}

} // namespace ore::detail
