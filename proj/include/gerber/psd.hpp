#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "gerber/errors.hpp"
#include "gerber/format.hpp"
#include "gerber/indicators.hpp"
#include "gerber/returns.hpp"
#include "gerber/statistics.hpp"

namespace gerber {

enum class PsdVerdict { psd, not_psd, borderline };

inline const char* verdict_name(PsdVerdict v) {
    switch (v) {
        case PsdVerdict::psd: return "psd";
        case PsdVerdict::not_psd: return "not_psd";
        case PsdVerdict::borderline: return "borderline";
    }
    return "?";
}

/// Outcome of the two-instrument positive-semidefiniteness check.
struct PsdReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    bool cholesky_ok = false;    // factorization succeeded at the reported shift
    double cholesky_shift = 0.0; // diagonal shift used for the successful attempt, else last tried
    double tolerance = 0.0;
    PsdVerdict verdict = PsdVerdict::not_psd;
};

namespace detail {

inline void require_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw ValidationError("matrix is not square");
    const double skew = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (skew > 1e-12)
        throw ValidationError("matrix is not symmetric (max |A - A^T| = " +
                              format_double(skew) + ")");
}

/// Cholesky factorization attempt on A + shift * I, requiring strictly
/// positive pivots. Hand-rolled so its failure modes are independent of the
/// eigen-solver route.
inline bool cholesky_with_shift(const Eigen::MatrixXd& a, double shift) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j) + shift;
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) return false;  // also rejects NaN
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

} // namespace detail

/// Smallest and largest eigenvalues of a symmetric matrix.
inline std::pair<double, double> symmetric_eigen_extremes(const Eigen::MatrixXd& m) {
    detail::require_symmetric(m);
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed to converge");
    const auto& ev = solver.eigenvalues();
    return {ev(0), ev(ev.size() - 1)};
}

/// Two-instrument PSD check. The primary instrument is the eigenvalue route:
/// PSD iff lambda_min >= -tol * max(1, |lambda_max|). The second is Cholesky
/// with a diagonal shift of 0, then tol. When the eigen route says no but
/// unshifted Cholesky succeeds the instruments disagree inside the noise
/// floor, and the verdict is borderline rather than not_psd.
inline PsdReport check_psd(const Eigen::MatrixXd& m, double tolerance = 1e-10) {
    if (!(tolerance > 0.0) || !std::isfinite(tolerance))
        throw ValidationError("tolerance must be positive and finite");
    PsdReport rep;
    rep.tolerance = tolerance;
    auto [lo, hi] = symmetric_eigen_extremes(m);
    rep.lambda_min = lo;
    rep.lambda_max = hi;

    const bool plain_ok = detail::cholesky_with_shift(m, 0.0);
    if (plain_ok) {
        rep.cholesky_ok = true;
        rep.cholesky_shift = 0.0;
    } else {
        rep.cholesky_ok = detail::cholesky_with_shift(m, tolerance);
        rep.cholesky_shift = tolerance;
    }

    const double floor = -tolerance * std::max(1.0, std::abs(hi));
    if (lo >= floor)
        rep.verdict = PsdVerdict::psd;
    else if (plain_ok)
        rep.verdict = PsdVerdict::borderline;
    else
        rep.verdict = PsdVerdict::not_psd;
    return rep;
}

/// Confirms the net count matrix is the Gram matrix of the direction columns:
/// exact integer equality of H with (U-D)^T (U-D) and of its pieces, plus a
/// randomized batch of quadratic forms x^T H x checked non-negative.
inline bool verify_squared_form(const IndicatorSet& ind, const CountMatrices& cm,
                                int quadratic_trials = 64, std::uint64_t seed = 20260823) {
    const Eigen::MatrixXi gram = ind.direction.transpose() * ind.direction;
    if (gram != cm.net) return false;
    if (cm.concordant != cm.up_up + cm.down_down) return false;
    Eigen::MatrixXi cross = ind.up.transpose() * ind.down;
    if (cm.discordant != Eigen::MatrixXi(cross + cross.transpose())) return false;

    const Eigen::MatrixXd h = cm.net.cast<double>();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double slack = 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff());
    for (int trial = 0; trial < quadratic_trials; ++trial) {
        Eigen::VectorXd x(h.rows());
        for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = gauss(rng);
        if (x.dot(h * x) < -slack) return false;
    }
    return true;
}

/// Outcome of the series construction check for gs2.
struct SeriesCheck {
    long terms_used = 0;
    double max_abs_error = 0.0;   // |partial sum - gs2| over all entries, final term
    double x_max = 0.0;           // largest off-thing ratio nn_ij / T encountered
    bool partial_sums_psd = true; // every partial sum passed the PSD check
};

/// Rebuilds gs2 as the limit of the elementwise geometric series
///   sum_{p>=0} A .* X^{.p},  A = H/T,  X = NN/T,
/// whose partial sums are elementwise products of PSD matrices and therefore
/// PSD themselves. Runs until every entry is within `tolerance` of the closed
/// form, checking each partial sum for positive semidefiniteness on the way.
inline SeriesCheck verify_series_construction(const IndicatorSet& ind, const GerberMatrix& g2,
                                              long periods, double tolerance = 1e-10) {
    if (g2.variant != GerberVariant::gs2)
        throw ValidationError("series construction applies to the gs2 variant only");
    if (periods < 1) throw ValidationError("period count must be positive");
    if (!(tolerance > 0.0) || !std::isfinite(tolerance))
        throw ValidationError("tolerance must be positive and finite");

    const double t = static_cast<double>(periods);
    const Eigen::MatrixXd a =
        (ind.direction.transpose() * ind.direction).cast<double>() / t;
    const Eigen::MatrixXd x = joint_neutral_counts(ind).cast<double>() / t;

    SeriesCheck out;
    out.x_max = x.maxCoeff();
    if (out.x_max >= 1.0)
        throw PreconditionError(
            "series construction diverges: a pair is jointly neutral in every period");

    // Geometric decay of the entrywise ratios bounds how many terms the
    // tolerance can possibly require; use it as a runaway guard.
    long cap = 16;
    if (out.x_max > 0.0)
        cap += static_cast<long>(std::ceil(std::log(tolerance * (1.0 - out.x_max)) /
                                           std::log(out.x_max))) + 1;

    Eigen::MatrixXd xpow = Eigen::MatrixXd::Ones(a.rows(), a.cols());  // X^{.0}
    Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    while (true) {
        partial += a.cwiseProduct(xpow);
        ++out.terms_used;
        if (check_psd(partial, 1e-10).verdict == PsdVerdict::not_psd)
            out.partial_sums_psd = false;
        out.max_abs_error = (partial - g2.values).cwiseAbs().maxCoeff();
        if (out.max_abs_error <= tolerance) break;
        if (out.terms_used >= cap)
            throw std::logic_error("series failed to reach tolerance within " +
                                   std::to_string(cap) + " terms (error " +
                                   format_double(out.max_abs_error) + ")");
        xpow = xpow.cwiseProduct(x);
    }
    return out;
}

/// A concrete return matrix whose original-statistic matrix has a negative
/// eigenvalue, with the evidence attached.
struct NonPsdWitness {
    ReturnMatrix returns;
    PsdReport report;
    std::uint64_t seed = 0;
    long trial_index = 0;
};

struct WitnessSearch {
    std::optional<NonPsdWitness> witness;
    long trials_run = 0;
};

namespace detail {

/// splitmix64 step; decorrelates per-trial seeds derived from one base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (trial + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Trial generator. Even trials draw iid Gaussian returns; odd trials draw a
/// regime-flip design (per-asset sign applied to a shared driver, flipped
/// after a random changepoint, plus small noise) that produces discordance
/// patterns the original statistic turns non-PSD far more often.
inline Eigen::MatrixXd witness_candidate(std::mt19937_64& rng, long periods, long assets,
                                         bool regime_flip) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd r(periods, assets);
    if (!regime_flip) {
        for (long t = 0; t < periods; ++t)
            for (long k = 0; k < assets; ++k) r(t, k) = gauss(rng);
        return r;
    }
    Eigen::VectorXd z(periods);
    for (long t = 0; t < periods; ++t) z(t) = gauss(rng);
    std::uniform_int_distribution<long> change(1, periods - 1);
    std::bernoulli_distribution coin(0.5);
    for (long k = 0; k < assets; ++k) {
        const double sign = coin(rng) ? 1.0 : -1.0;
        const long tau = change(rng);
        for (long t = 0; t < periods; ++t) {
            const double s = t < tau ? sign : -sign;
            r(t, k) = s * z(t) + 0.2 * gauss(rng);
        }
    }
    return r;
}

} // namespace detail

/// Randomized search for returns whose original-statistic matrix is not PSD.
/// Deterministic in (trials, periods, assets, c, seed); each trial reseeds
/// from the base seed so results do not depend on how earlier trials consumed
/// the generator.
inline WitnessSearch find_non_psd_original(long trials, long periods, long assets, double c,
                                           std::uint64_t seed) {
    if (trials < 1) throw ValidationError("trial count must be positive");
    if (periods < 2) throw ValidationError("need at least 2 return periods");
    if (assets < 1) throw ValidationError("need at least 1 asset");
    if (!(c > 0.0) || !std::isfinite(c))
        throw ValidationError("threshold fraction must be positive and finite");

    WitnessSearch out;
    for (long trial = 0; trial < trials; ++trial) {
        ++out.trials_run;
        std::mt19937_64 rng(detail::mix_seed(seed, static_cast<std::uint64_t>(trial)));
        ReturnMatrix r;
        r.values = detail::witness_candidate(rng, periods, assets, trial % 2 == 1);
        r.asset_labels = detail::default_labels(assets);

        Eigen::VectorXd sigmas;
        try {
            sigmas = column_stddevs(r);
        } catch (const ValidationError&) {
            continue;  // a constant column; vanishingly rare, just redraw
        }
        GerberMatrix g =
            compute_gerber(r, build_thresholds(sigmas, c), GerberVariant::original);
        PsdReport rep = check_psd(g.values, 1e-10);
        if (rep.lambda_min < -1e-8) {
            out.witness = NonPsdWitness{std::move(r), rep, seed, trial};
            return out;
        }
    }
    return out;
}

} // namespace gerber
