#include "ore/bounds.hpp"

#include "ore/errors.hpp"

#include <algorithm>

namespace ore {

PiecewiseLinearNet::PiecewiseLinearNet(const Network& source) : input_dim_(source.input_dim()) {
    const Network net = source.has_conv() ? source.lowered() : source;
    std::size_t width = net.input_dim();
    for (const auto& layer : net.layers()) {
        if (const auto* a = std::get_if<AffineLayer>(&layer)) {
            stages_.push_back({a->weights, a->bias, false});
            width = a->weights.rows();
        } else {
            if (stages_.empty()) stages_.push_back({Matrix::identity(width), std::vector<double>(width, 0.0), false});
            stages_.back().relu = true;  // relu twice in a row is relu
        }
    }
}

bool PiecewiseLinearNet::has_relu() const {
    return std::any_of(stages_.begin(), stages_.end(), [](const Stage& s) { return s.relu; });
}

double LinearForm::min_over(const Box& box) const {
    double s = constant;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * (coeffs[k] > 0.0 ? box.lo[k] : box.hi[k]);
    return s;
}

double LinearForm::max_over(const Box& box) const {
    double s = constant;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * (coeffs[k] > 0.0 ? box.hi[k] : box.lo[k]);
    return s;
}

std::vector<double> LinearForm::argmin_corner(const Box& box) const {
    std::vector<double> x(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] > 0.0) {
            x[k] = box.lo[k];
        } else if (coeffs[k] < 0.0) {
            x[k] = box.hi[k];
        } else {
            x[k] = 0.5 * (box.lo[k] + box.hi[k]);
        }
    }
    return x;
}

double LinearForm::eval(std::span<const double> x) const {
    double s = constant;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * x[k];
    return s;
}

namespace {

void scale(LinearForm& f, double factor, double shift) {
    // f <- factor * (f - shift)
    for (auto& c : f.coeffs) c *= factor;
    f.constant = factor * (f.constant - shift);
}

void zero(LinearForm& f) {
    std::fill(f.coeffs.begin(), f.coeffs.end(), 0.0);
    f.constant = 0.0;
}

// Combine the previous layer's forms through one weight row, picking the
// lower or upper form of each input by the weight sign.
void combine(std::span<const double> row, double bias, const std::vector<LinearForm>& lower,
             const std::vector<LinearForm>& upper, LinearForm& out_lo, LinearForm& out_up) {
    const std::size_t n = lower.front().coeffs.size();
    out_lo.coeffs.assign(n, 0.0);
    out_up.coeffs.assign(n, 0.0);
    out_lo.constant = bias;
    out_up.constant = bias;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const double w = row[i];
        if (w == 0.0) continue;
        const LinearForm& for_lo = w > 0.0 ? lower[i] : upper[i];
        const LinearForm& for_up = w > 0.0 ? upper[i] : lower[i];
        for (std::size_t k = 0; k < n; ++k) {
            out_lo.coeffs[k] += w * for_lo.coeffs[k];
            out_up.coeffs[k] += w * for_up.coeffs[k];
        }
        out_lo.constant += w * for_lo.constant;
        out_up.constant += w * for_up.constant;
    }
}

} // namespace

SymbolicBounds propagate(const PiecewiseLinearNet& net, const Box& box, const PhaseAssignment& phases) {
    if (box.size() != net.input_dim())
        throw InvalidInput("box has dimension " + std::to_string(box.size()) + ", network expects " +
                           std::to_string(net.input_dim()));
    const std::size_t n = net.input_dim();
    std::vector<LinearForm> lower(n), upper(n);
    for (std::size_t k = 0; k < n; ++k) {
        lower[k].coeffs.assign(n, 0.0);
        lower[k].coeffs[k] = 1.0;
        upper[k] = lower[k];
    }

    SymbolicBounds out;
    const auto& stages = net.stages();
    out.pre_activation.resize(stages.size());
    for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
        const auto& st = stages[s];
        const std::size_t m = st.weights.rows();
        std::vector<LinearForm> next_lo(m), next_up(m);
        for (std::size_t j = 0; j < m; ++j) combine(st.weights.row(j), st.bias[j], lower, upper, next_lo[j], next_up[j]);

        if (st.relu) {
            auto& pre = out.pre_activation[s];
            pre.resize(m);
            const bool has_phases = s < phases.size() && !phases[s].empty();
            for (std::size_t j = 0; j < m; ++j) {
                const double lo = next_lo[j].min_over(box);
                const double hi = next_up[j].max_over(box);
                pre[j] = {lo, hi};
                const Phase phase = has_phases ? phases[s][j] : Phase::Free;
                if (phase == Phase::Active) {
                    if (hi < 0.0) out.infeasible = true;
                    out.phase_constraints.push_back(next_up[j]);
                    continue;
                }
                if (phase == Phase::Inactive) {
                    if (lo > 0.0) out.infeasible = true;
                    out.phase_constraints.push_back(next_lo[j]);
                    scale(out.phase_constraints.back(), -1.0, 0.0);
                    zero(next_lo[j]);
                    zero(next_up[j]);
                    continue;
                }
                if (hi <= 0.0) {
                    zero(next_lo[j]);
                    zero(next_up[j]);
                } else if (lo < 0.0) {
                    out.unstable.push_back({s, j, lo, hi});
                    const double up_min = next_up[j].min_over(box);
                    if (up_min < 0.0) scale(next_up[j], hi / (hi - up_min), up_min);
                    const double lo_max = next_lo[j].max_over(box);
                    if (lo_max <= 0.0) {
                        zero(next_lo[j]);
                    } else {
                        scale(next_lo[j], lo_max / (lo_max - lo), 0.0);
                    }
                }
            }
        }
        lower = std::move(next_lo);
        upper = std::move(next_up);
    }
    out.final_lower = std::move(lower);
    out.final_upper = std::move(upper);
    return out;
}

LinearForm SymbolicBounds::gap_lower(const PiecewiseLinearNet& net, Label target, Label rival) const {
    const auto& last = net.stages().back();
    std::vector<double> row(last.weights.cols());
    auto t = last.weights.row(target);
    auto r = last.weights.row(rival);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = t[i] - r[i];
    LinearForm lo, up;
    combine(row, last.bias[target] - last.bias[rival], final_lower, final_upper, lo, up);
    return lo;
}

LinearForm SymbolicBounds::logit_upper(const PiecewiseLinearNet& net, Label label) const {
    const auto& last = net.stages().back();
    LinearForm lo, up;
    combine(last.weights.row(label), last.bias[label], final_lower, final_upper, lo, up);
    return up;
}

LinearForm SymbolicBounds::logit_lower(const PiecewiseLinearNet& net, Label label) const {
    const auto& last = net.stages().back();
    LinearForm lo, up;
    combine(last.weights.row(label), last.bias[label], final_lower, final_upper, lo, up);
    return lo;
}

namespace {

std::vector<Interval> interval_pass(const PiecewiseLinearNet& net, const Box& box) {
    std::vector<Interval> cur(box.size());
    for (std::size_t k = 0; k < cur.size(); ++k) cur[k] = {box.lo[k], box.hi[k]};
    for (const auto& st : net.stages()) {
        std::vector<Interval> next(st.weights.rows());
        for (std::size_t i = 0; i < next.size(); ++i) {
            double lo = st.bias[i], hi = st.bias[i];
            const auto row = st.weights.row(i);
            for (std::size_t k = 0; k < cur.size(); ++k) {
                lo += row[k] * (row[k] > 0.0 ? cur[k].lo : cur[k].hi);
                hi += row[k] * (row[k] > 0.0 ? cur[k].hi : cur[k].lo);
            }
            if (st.relu) {
                lo = std::max(lo, 0.0);
                hi = std::max(hi, 0.0);
            }
            next[i] = {lo, hi};
        }
        cur = std::move(next);
    }
    return cur;
}

} // namespace

std::vector<Interval> bounds(const PiecewiseLinearNet& net, const Box& box) {
    const auto sb = propagate(net, box);
    // Both enclosures are sound; keep the tighter side of each.
    const auto plain = interval_pass(net, box);
    std::vector<Interval> out(net.num_labels());
    for (Label j = 0; j < out.size(); ++j) {
        out[j] = {std::max(sb.logit_lower(net, j).min_over(box), plain[j].lo),
                  std::min(sb.logit_upper(net, j).max_over(box), plain[j].hi)};
    }
    return out;
}

std::vector<Interval> bounds(const Network& net, const Box& box) {
    return bounds(PiecewiseLinearNet(net), box);
}

} // namespace ore
