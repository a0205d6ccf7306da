#pragma once

#include <string>
#include <vector>

#include "latcor/dataset.hpp"
#include "latcor/polychoric.hpp"
#include "latcor/polyserial.hpp"

namespace latcor {

/// One estimated pair.  An empty `error` means the estimate is valid;
/// otherwise the entry is absent and `error` carries the reason.
struct PairEstimate {
    std::string method;  // pearson | polyserial | tetrachoric | polychoric
    double rho = 0.0;
    double se = 0.0;
    int iterations = 0;
    bool converged = true;
    std::size_t n_used = 0;
    double seconds = 0.0;
    std::string error;

    bool ok() const { return error.empty(); }
};

/// Pairwise-complete estimate of one column pair, with the estimator
/// picked from the column kinds.
PairEstimate estimate_pair(const Column& x, const Column& y);

struct MatrixResult {
    std::vector<std::string> names;
    // Upper-triangular storage: pair (i, j) with i < j at [i][j - i - 1].
    std::vector<std::vector<PairEstimate>> pairs;

    const PairEstimate& at(std::size_t i, std::size_t j) const;
};

/// Estimates every non-ignored column pair, optionally across `threads`
/// workers.  Failed pairs are recorded, not thrown.  Output is
/// schedule-invariant: entries are stored by pair position.
MatrixResult correlation_matrix(const Dataset& ds, int threads = 1);

}  // namespace latcor
