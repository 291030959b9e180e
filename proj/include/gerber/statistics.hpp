#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gerber/errors.hpp"
#include "gerber/indicators.hpp"
#include "gerber/returns.hpp"

namespace gerber {

enum class GerberVariant { original, gs1, gs2 };

inline const char* variant_name(GerberVariant v) {
    switch (v) {
        case GerberVariant::original: return "original";
        case GerberVariant::gs1: return "gs1";
        case GerberVariant::gs2: return "gs2";
    }
    return "?";
}

inline std::optional<GerberVariant> parse_variant(std::string_view name) {
    if (name == "original") return GerberVariant::original;
    if (name == "gs1") return GerberVariant::gs1;
    if (name == "gs2") return GerberVariant::gs2;
    return std::nullopt;
}

/// Counts of one asset pair's observations over the nine regions of the
/// {up, neutral, down} x {up, neutral, down} grid. First letter is asset i's
/// region, second is asset j's: u = at or above +h, d = at or below -h,
/// n = strictly between. The nine counts sum to the number of periods.
struct PairCounts {
    long uu = 0, dd = 0, ud = 0, du = 0;
    long un = 0, nu = 0, dn = 0, nd = 0;
    long nn = 0;

    long total() const { return uu + dd + ud + du + un + nu + dn + nd + nn; }
    long concordant() const { return uu + dd; }
    long discordant() const { return ud + du; }
    long pierce_i() const { return uu + un + ud + du + dn + dd; }  // periods asset i pierces
    long pierce_j() const { return uu + nu + ud + du + nd + dd; }  // periods asset j pierces
};

/// One period's joint observation for a pair: +1 when both returns pierce
/// their thresholds in the same direction, -1 in opposite directions,
/// 0 when either is neutral. Equal to the product of the two direction signs.
inline int joint_observation(double r_i, double r_j, double h_i, double h_j) {
    const int f_i = r_i >= h_i ? 1 : (r_i <= -h_i ? -1 : 0);
    const int f_j = r_j >= h_j ? 1 : (r_j <= -h_j ? -1 : 0);
    return f_i * f_j;
}

/// Direct per-period tally for one pair; the ground-truth path the matrix
/// identities are tested against.
inline PairCounts pair_counts(const IndicatorSet& ind, Eigen::Index i, Eigen::Index j) {
    if (i < 0 || j < 0 || i >= ind.assets() || j >= ind.assets())
        throw ValidationError("asset index out of range");
    PairCounts pc;
    for (Eigen::Index t = 0; t < ind.periods(); ++t) {
        const int fi = ind.direction(t, i);
        const int fj = ind.direction(t, j);
        if (fi > 0) {
            if (fj > 0)
                ++pc.uu;
            else if (fj < 0)
                ++pc.ud;
            else
                ++pc.un;
        } else if (fi < 0) {
            if (fj > 0)
                ++pc.du;
            else if (fj < 0)
                ++pc.dd;
            else
                ++pc.dn;
        } else {
            if (fj > 0)
                ++pc.nu;
            else if (fj < 0)
                ++pc.nd;
            else
                ++pc.nn;
        }
    }
    return pc;
}

/// The K x K count matrices, as exact integer matrix products.
struct CountMatrices {
    Eigen::MatrixXi up_up;       // U^T U, joint upper piercings
    Eigen::MatrixXi down_down;   // D^T D, joint lower piercings
    Eigen::MatrixXi concordant;  // up_up + down_down
    Eigen::MatrixXi discordant;  // U^T D + D^T U
    Eigen::MatrixXi net;         // concordant - discordant == (U-D)^T (U-D)

    Eigen::Index assets() const { return net.rows(); }
};

inline CountMatrices count_matrices(const IndicatorSet& ind) {
    CountMatrices cm;
    cm.up_up = ind.up.transpose() * ind.up;
    cm.down_down = ind.down.transpose() * ind.down;
    cm.concordant = cm.up_up + cm.down_down;
    Eigen::MatrixXi cross = ind.up.transpose() * ind.down;
    cm.discordant = cross + cross.transpose();
    cm.net = cm.concordant - cm.discordant;
    return cm;
}

/// Counts of jointly neutral periods per pair, as the integer product of the
/// neutral indicators with themselves.
inline Eigen::MatrixXi joint_neutral_counts(const IndicatorSet& ind) {
    return ind.neutral.transpose() * ind.neutral;
}

/// A computed co-movement matrix with its provenance.
struct GerberMatrix {
    GerberVariant variant = GerberVariant::original;
    Eigen::MatrixXd values;  // K x K symmetric, entries in [-1, 1] up to rounding
    double threshold_fraction = 0.0;  // c used to build the thresholds, 0 when unknown
    long periods = 0;                 // T
    std::vector<std::string> asset_labels;              // may be empty
    std::vector<std::pair<int, int>> convention_cells;  // original only: 0/0 cells, i <= j

    Eigen::Index assets() const { return values.rows(); }
};

namespace detail {

inline std::string asset_name(const std::vector<std::string>& labels, Eigen::Index i) {
    if (i >= 0 && static_cast<std::size_t>(i) < labels.size())
        return "'" + labels[static_cast<std::size_t>(i)] + "'";
    return "asset " + std::to_string(i + 1);
}

} // namespace detail

/// Original statistic: (concordant - discordant) / (concordant + discordant),
/// elementwise. Pairs with no joint piercings have a 0/0 ratio; those cells
/// take 0 off-diagonal and 1 on the diagonal and are recorded in
/// convention_cells so consumers can audit them.
inline GerberMatrix gerber_original(const CountMatrices& cm,
                                    const std::vector<std::string>& labels = {}) {
    const Eigen::Index assets = cm.assets();
    GerberMatrix g;
    g.variant = GerberVariant::original;
    g.asset_labels = labels;
    g.values.resize(assets, assets);
    for (Eigen::Index i = 0; i < assets; ++i)
        for (Eigen::Index j = i; j < assets; ++j) {
            const long conc = cm.concordant(i, j);
            const long disc = cm.discordant(i, j);
            double v;
            if (conc + disc == 0) {
                v = i == j ? 1.0 : 0.0;
                g.convention_cells.emplace_back(static_cast<int>(i), static_cast<int>(j));
            } else {
                v = static_cast<double>(conc - disc) / static_cast<double>(conc + disc);
            }
            g.values(i, j) = v;
            g.values(j, i) = v;
        }
    return g;
}

/// Gerber statistic 1: the net count matrix H scaled by the square roots of
/// its diagonal, H_ij / sqrt(H_ii * H_jj). Also evaluates the equivalent
/// two-sided diagonal scaling J H J and checks the two forms agree to 1e-12.
/// Requires every asset to pierce its threshold at least once (H_ii > 0).
inline GerberMatrix gerber_gs1(const CountMatrices& cm,
                               const std::vector<std::string>& labels = {}) {
    const Eigen::Index assets = cm.assets();
    std::string never_pierce;
    for (Eigen::Index i = 0; i < assets; ++i)
        if (cm.net(i, i) <= 0) {
            if (!never_pierce.empty()) never_pierce += ", ";
            never_pierce += detail::asset_name(labels, i);
        }
    if (!never_pierce.empty())
        throw PreconditionError("gs1 is undefined: asset(s) never pierce their threshold: " +
                                never_pierce);

    Eigen::VectorXd root_diag(assets);
    for (Eigen::Index i = 0; i < assets; ++i)
        root_diag(i) = std::sqrt(static_cast<double>(cm.net(i, i)));

    GerberMatrix g;
    g.variant = GerberVariant::gs1;
    g.asset_labels = labels;
    g.values.resize(assets, assets);
    for (Eigen::Index i = 0; i < assets; ++i)
        for (Eigen::Index j = i; j < assets; ++j) {
            const double v = static_cast<double>(cm.net(i, j)) / (root_diag(i) * root_diag(j));
            g.values(i, j) = v;
            g.values(j, i) = v;
        }

    // Second route: J H J with J = diag(1 / sqrt(H_ii)).
    Eigen::VectorXd inv_root = root_diag.cwiseInverse();
    Eigen::MatrixXd alt =
        inv_root.asDiagonal() * cm.net.cast<double>() * inv_root.asDiagonal();
    const double divergence = (g.values - alt).cwiseAbs().maxCoeff();
    if (divergence > 1e-12)
        throw std::logic_error("gs1 matrix forms disagree by " + format_double(divergence));
    return g;
}

/// Gerber statistic 2: H_ij / (T - nn_ij) where nn_ij counts jointly neutral
/// periods. Pairs whose observations are all jointly neutral are rejected;
/// a diagonal hit means the asset never pierces at all.
inline GerberMatrix gerber_gs2(const CountMatrices& cm, const Eigen::MatrixXi& joint_neutral,
                               long periods, const std::vector<std::string>& labels = {}) {
    const Eigen::Index assets = cm.assets();
    if (joint_neutral.rows() != assets || joint_neutral.cols() != assets)
        throw ValidationError("joint-neutral count matrix has wrong dimensions");
    if (periods < 1) throw ValidationError("period count must be positive");

    std::string degenerate;
    for (Eigen::Index i = 0; i < assets; ++i)
        for (Eigen::Index j = i; j < assets; ++j)
            if (joint_neutral(i, j) >= periods) {
                if (!degenerate.empty()) degenerate += ", ";
                degenerate += "(" + detail::asset_name(labels, i) + ", " +
                              detail::asset_name(labels, j) + ")";
            }
    if (!degenerate.empty())
        throw PreconditionError(
            "gs2 is undefined: all observations jointly neutral for pair(s): " + degenerate);

    GerberMatrix g;
    g.variant = GerberVariant::gs2;
    g.asset_labels = labels;
    g.periods = periods;
    g.values.resize(assets, assets);
    for (Eigen::Index i = 0; i < assets; ++i)
        for (Eigen::Index j = i; j < assets; ++j) {
            const double v = static_cast<double>(cm.net(i, j)) /
                             static_cast<double>(periods - joint_neutral(i, j));
            g.values(i, j) = v;
            g.values(j, i) = v;
        }
    return g;
}

/// Full pipeline via the matrix identities: indicators -> count matrices ->
/// variant, with provenance stamped on the result.
inline GerberMatrix compute_gerber(const ReturnMatrix& r, const ThresholdVector& th,
                                   GerberVariant variant) {
    IndicatorSet ind = build_indicators(r, th);
    CountMatrices cm = count_matrices(ind);
    GerberMatrix g;
    switch (variant) {
        case GerberVariant::original:
            g = gerber_original(cm, r.asset_labels);
            break;
        case GerberVariant::gs1:
            g = gerber_gs1(cm, r.asset_labels);
            break;
        case GerberVariant::gs2:
            g = gerber_gs2(cm, joint_neutral_counts(ind), r.periods(), r.asset_labels);
            break;
    }
    g.threshold_fraction = th.fraction;
    g.periods = r.periods();
    return g;
}

/// Definitional path: every entry from per-period joint observations and
/// per-pair grid tallies, no matrix products. Serves as the ground truth the
/// vectorized path is checked against.
inline GerberMatrix gerber_oracle(const ReturnMatrix& r, const ThresholdVector& th,
                                  GerberVariant variant) {
    IndicatorSet ind = build_indicators(r, th);
    const Eigen::Index assets = r.assets();
    const long periods = r.periods();

    GerberMatrix g;
    g.variant = variant;
    g.asset_labels = r.asset_labels;
    g.threshold_fraction = th.fraction;
    g.periods = periods;
    g.values.resize(assets, assets);

    if (variant == GerberVariant::gs1) {
        std::string never_pierce;
        for (Eigen::Index i = 0; i < assets; ++i)
            if (pair_counts(ind, i, i).pierce_i() == 0) {
                if (!never_pierce.empty()) never_pierce += ", ";
                never_pierce += detail::asset_name(r.asset_labels, i);
            }
        if (!never_pierce.empty())
            throw PreconditionError("gs1 is undefined: asset(s) never pierce their threshold: " +
                                    never_pierce);
    }

    for (Eigen::Index i = 0; i < assets; ++i)
        for (Eigen::Index j = i; j < assets; ++j) {
            double v = 0.0;
            switch (variant) {
                case GerberVariant::original: {
                    long sum = 0, abs_sum = 0;
                    for (long t = 0; t < periods; ++t) {
                        const int m = joint_observation(r.values(t, i), r.values(t, j),
                                                        th.levels(i), th.levels(j));
                        sum += m;
                        abs_sum += std::abs(m);
                    }
                    if (abs_sum == 0) {
                        v = i == j ? 1.0 : 0.0;
                        g.convention_cells.emplace_back(static_cast<int>(i),
                                                        static_cast<int>(j));
                    } else {
                        v = static_cast<double>(sum) / static_cast<double>(abs_sum);
                    }
                    break;
                }
                case GerberVariant::gs1: {
                    const PairCounts pc = pair_counts(ind, i, j);
                    v = static_cast<double>(pc.concordant() - pc.discordant()) /
                        std::sqrt(static_cast<double>(pc.pierce_i()) *
                                  static_cast<double>(pc.pierce_j()));
                    break;
                }
                case GerberVariant::gs2: {
                    const PairCounts pc = pair_counts(ind, i, j);
                    if (pc.nn >= periods)
                        throw PreconditionError(
                            "gs2 is undefined: all observations jointly neutral for pair (" +
                            detail::asset_name(r.asset_labels, i) + ", " +
                            detail::asset_name(r.asset_labels, j) + ")");
                    v = static_cast<double>(pc.concordant() - pc.discordant()) /
                        static_cast<double>(periods - pc.nn);
                    break;
                }
            }
            g.values(i, j) = v;
            g.values(j, i) = v;
        }
    return g;
}

/// Scales a co-movement matrix into a covariance matrix:
/// cov_ij = sigma_i * g_ij * sigma_j. A diagonal congruence, so positive
/// semidefiniteness of g carries over.
inline Eigen::MatrixXd covariance_from_gerber(const GerberMatrix& g,
                                              const Eigen::VectorXd& sigmas) {
    if (sigmas.size() != g.assets())
        throw ValidationError("sigma vector has " + std::to_string(sigmas.size()) +
                              " entries, matrix has " + std::to_string(g.assets()) + " assets");
    for (Eigen::Index k = 0; k < sigmas.size(); ++k)
        if (!std::isfinite(sigmas(k)) || sigmas(k) <= 0.0)
            throw ValidationError("standard deviation must be positive and finite (column " +
                                  std::to_string(k + 1) + ")");
    const Eigen::Index assets = g.assets();
    Eigen::MatrixXd cov(assets, assets);
    for (Eigen::Index i = 0; i < assets; ++i)
        for (Eigen::Index j = i; j < assets; ++j) {
            const double v = sigmas(i) * g.values(i, j) * sigmas(j);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    return cov;
}

} // namespace gerber
