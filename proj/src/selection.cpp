#include "srtrl/selection.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "srtrl/errors.hpp"

namespace srtrl {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::ring: return "ring";
        case Strategy::random: return "random";
        case Strategy::oracle: return "oracle";
        case Strategy::anti_oracle: return "anti-oracle";
        case Strategy::dynamic: return "dynamic";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "ring") return Strategy::ring;
    if (name == "random") return Strategy::random;
    if (name == "oracle") return Strategy::oracle;
    if (name == "anti-oracle") return Strategy::anti_oracle;
    if (name == "dynamic") return Strategy::dynamic;
    throw ContractViolation("unknown selection strategy '" + std::string(name) + "'");
}

namespace {

std::vector<Index> ring_row(Index i, Index k, Index n) {
    const Index left = k / 2;
    const Index right = k - left;
    std::vector<Index> row;
    row.reserve(static_cast<std::size_t>(k));
    for (Index d = 1; d <= left; ++d) row.push_back(((i - d) % n + n) % n);
    for (Index d = 1; d <= right; ++d) row.push_back((i + d) % n);
    return row;
}

// Stable ordering on score keeps the lower index first among ties.
std::vector<Index> top_k(const Vec& score, Index k, bool largest) {
    std::vector<Index> idx(static_cast<std::size_t>(score.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        return largest ? score[a] > score[b] : score[a] < score[b];
    });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

}  // namespace

PropagationMask build_mask(Strategy strategy, Index k, Index n, const Mat& w_hh, Rng& rng,
                           const Vec* row_norms) {
    if (k < 0 || k > n) throw ContractViolation("build_mask: k must lie in [0, n]");
    if (w_hh.rows() != n || w_hh.cols() != n) throw ContractViolation("build_mask: w_hh must be n x n");
    if (strategy == Strategy::dynamic && (row_norms == nullptr || row_norms->size() != n))
        throw ContractViolation("build_mask: dynamic selection needs Jacobian row norms");
    if (k == n) return PropagationMask::all_ones(n);
    if (k == 0) return PropagationMask::all_zeros(n);

    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        switch (strategy) {
            case Strategy::ring:
                row = ring_row(i, k, n);
                break;
            case Strategy::random: {
                std::vector<Index> pool(static_cast<std::size_t>(n));
                std::iota(pool.begin(), pool.end(), Index{0});
                for (Index s = 0; s < k; ++s) {
                    std::uniform_int_distribution<Index> pick(s, n - 1);
                    std::swap(pool[static_cast<std::size_t>(s)], pool[static_cast<std::size_t>(pick(rng))]);
                }
                row.assign(pool.begin(), pool.begin() + k);
                break;
            }
            case Strategy::oracle:
                row = top_k(w_hh.row(i).cwiseAbs().transpose(), k, true);
                break;
            case Strategy::anti_oracle:
                row = top_k(w_hh.row(i).cwiseAbs().transpose(), k, false);
                break;
            case Strategy::dynamic:
                row = top_k(w_hh.row(i).cwiseAbs().transpose().cwiseProduct(*row_norms), k, true);
                break;
        }
    }
    return PropagationMask(n, std::move(rows));
}

bool self_inclusion_policy(Strategy strategy, Index k, Index n) {
    if (k == n && n > 0) return true;
    if (k == 0) return false;
    return strategy != Strategy::ring;
}

Index recompute_period(Strategy strategy) {
    switch (strategy) {
        case Strategy::oracle:
        case Strategy::anti_oracle: return 200;
        case Strategy::dynamic: return 1;
        default: return 0;
    }
}

MaskSelector::MaskSelector(Strategy strategy, Index k, Index n, Rng rng)
    : strategy_(strategy), k_(k), n_(n), rng_(std::move(rng)) {
    if (k < 0 || k > n) throw ContractViolation("MaskSelector: k must lie in [0, n]");
}

bool MaskSelector::update(Step step, const Mat& w_hh, const Vec* row_norms) {
    const Index period = recompute_period(strategy_);
    const bool due = !built_ || (period > 0 && step % period == 0);
    if (!due || (built_ && (k_ == 0 || k_ == n_))) return false;
    auto next = build_mask(strategy_, k_, n_, w_hh, rng_, row_norms);
    const bool changed = !built_ || !(next == mask_);
    mask_ = std::move(next);
    built_ = true;
    return changed;
}

}  // namespace srtrl
