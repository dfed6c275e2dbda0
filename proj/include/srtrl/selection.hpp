#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "srtrl/rng.hpp"
#include "srtrl/tensor_core.hpp"

namespace srtrl {

enum class Strategy { ring, random, oracle, anti_oracle, dynamic };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

/// Builds a mask with exactly k ones per row.
///
/// ring: floor(k/2) neighbours on each side of i, the odd extra one clockwise
/// (i + ceil(k/2)). random: k columns per row without replacement. oracle /
/// anti_oracle: the k largest / smallest |w_hh[i, l]|. dynamic: the k largest
/// |w_hh[i, l]| * ||J[l, :]||. Ties go to the lower column index. k == n is
/// always the all-ones mask.
///
/// `row_norms` (size n) is required for the dynamic strategy.
PropagationMask build_mask(Strategy strategy, Index k, Index n, const Mat& w_hh, Rng& rng,
                           const Vec* row_norms = nullptr);

/// Whether row i may select its own column under `strategy`. Ring never does
/// for k < n; magnitude and random strategies can; k == n always does.
bool self_inclusion_policy(Strategy strategy, Index k, Index n);

/// Steps between recomputations: 0 means fixed at construction.
Index recompute_period(Strategy strategy);

/// Owns the current mask of a run and its recompute schedule.
class MaskSelector {
public:
    MaskSelector(Strategy strategy, Index k, Index n, Rng rng);

    /// Rebuilds the mask if `step` is on the schedule (and on the first call).
    /// Returns true if the mask changed identity.
    bool update(Step step, const Mat& w_hh, const Vec* row_norms = nullptr);

    const PropagationMask& mask() const { return mask_; }
    Strategy strategy() const { return strategy_; }
    Index k() const { return k_; }

private:
    Strategy strategy_;
    Index k_;
    Index n_;
    Rng rng_;
    PropagationMask mask_;
    bool built_ = false;
};

}  // namespace srtrl
