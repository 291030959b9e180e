#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "gerber/errors.hpp"
#include "gerber/returns.hpp"

namespace gerber {

/// Piercing thresholds h_k = c * sigma_k.
struct ThresholdVector {
    double fraction = 0.0;   // c
    Eigen::VectorXd levels;  // h, all entries > 0
};

inline ThresholdVector build_thresholds(const Eigen::VectorXd& sigmas, double c) {
    if (!std::isfinite(c) || c <= 0.0)
        throw ValidationError("threshold fraction must be positive and finite");
    for (Eigen::Index k = 0; k < sigmas.size(); ++k)
        if (!std::isfinite(sigmas(k)) || sigmas(k) <= 0.0)
            throw ValidationError("standard deviation must be positive and finite (column " +
                                  std::to_string(k + 1) + ")");
    return ThresholdVector{c, c * sigmas};
}

/// The four indicator matrices derived from returns and thresholds.
/// Boundary equality counts as piercing: up uses >=, down uses <=.
/// For each cell exactly one of up/down/neutral is 1.
struct IndicatorSet {
    Eigen::MatrixXi up;         // 1 where r_tk >= +h_k
    Eigen::MatrixXi down;       // 1 where r_tk <= -h_k
    Eigen::MatrixXi direction;  // up - down, in {-1, 0, +1}
    Eigen::MatrixXi neutral;    // 1 - |direction|

    Eigen::Index periods() const { return up.rows(); }
    Eigen::Index assets() const { return up.cols(); }
};

inline IndicatorSet build_indicators(const ReturnMatrix& r, const ThresholdVector& th) {
    if (th.levels.size() != r.assets())
        throw ValidationError("threshold vector has " + std::to_string(th.levels.size()) +
                              " entries, return matrix has " + std::to_string(r.assets()) +
                              " columns");
    for (Eigen::Index k = 0; k < th.levels.size(); ++k)
        if (!std::isfinite(th.levels(k)) || th.levels(k) <= 0.0)
            throw ValidationError("threshold level must be positive and finite (column " +
                                  std::to_string(k + 1) + ")");

    const Eigen::Index periods = r.periods();
    const Eigen::Index assets = r.assets();
    IndicatorSet ind;
    ind.up.resize(periods, assets);
    ind.down.resize(periods, assets);
    ind.direction.resize(periods, assets);
    ind.neutral.resize(periods, assets);
    for (Eigen::Index k = 0; k < assets; ++k) {
        const double level = th.levels(k);
        for (Eigen::Index t = 0; t < periods; ++t) {
            const double v = r.values(t, k);
            const int u = v >= level ? 1 : 0;
            const int d = v <= -level ? 1 : 0;
            // disjoint by h_k > 0; cannot both fire
            ind.up(t, k) = u;
            ind.down(t, k) = d;
            ind.direction(t, k) = u - d;
            ind.neutral(t, k) = 1 - (u + d);
        }
    }
    return ind;
}

} // namespace gerber
