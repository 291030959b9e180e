// Acceptance battery for the library's central claims. Each criterion prints
// exactly one PASS/FAIL line; the process exit code is the number of failed
// criteria. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "gerber/gerber.hpp"

#include "testutil.hpp"

using gerber::CountMatrices;
using gerber::GerberMatrix;
using gerber::GerberVariant;
using gerber::IndicatorSet;
using gerber::PairCounts;
using gerber::PsdVerdict;
using gerber::ReturnMatrix;
using gerber::SeriesCheck;
using gerber::ThresholdVector;

namespace {

int failures = 0;

void report(int index, const char* title, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", index, title,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Criteria 1-5 share one seeded instance sweep over T x K x tail-shape x c.
struct SweepResult {
    long instances = 0;
    long valid = 0;  // every asset pierces at least once: gs1/gs2 defined
    long psd_failures = 0;       // criterion 1
    long identity_failures = 0;  // criterion 2
    long oracle_failures = 0;    // criterion 3
    long dual_form_failures = 0; // criterion 4
    long series_failures = 0;    // criterion 5
    double elapsed = 0.0;
};

SweepResult run_sweep() {
    const long periods_grid[] = {5, 8, 12, 17, 23, 31, 40, 50};
    const double c_grid[] = {0.25, 0.5, 1.0};
    const auto start = std::chrono::steady_clock::now();

    SweepResult res;
    std::uint64_t combo = 0;
    for (long periods : periods_grid)
        for (long assets = 2; assets <= 10; ++assets)
            for (int heavy = 0; heavy <= 1; ++heavy)
                for (double c : c_grid)
                    for (int rep = 0; rep < 4; ++rep) {
                        const std::uint64_t seed =
                            gerber::detail::mix_seed(0x5eedba5e, combo++);
                        const ReturnMatrix r = testutil::make_returns(
                            testutil::random_returns(seed, periods, assets, heavy == 1));
                        ++res.instances;

                        ThresholdVector th;
                        try {
                            th = testutil::natural_thresholds(r, c);
                        } catch (const gerber::ValidationError&) {
                            continue;  // constant column; absurdly unlikely
                        }
                        const IndicatorSet ind = gerber::build_indicators(r, th);
                        const CountMatrices cm = gerber::count_matrices(ind);
                        const Eigen::MatrixXi jn = gerber::joint_neutral_counts(ind);

                        // criterion 2: exact integer identities
                        bool identities = gerber::verify_squared_form(ind, cm);
                        for (Eigen::Index i = 0; identities && i < assets; ++i)
                            for (Eigen::Index j = i; identities && j < assets; ++j) {
                                const PairCounts pc = gerber::pair_counts(ind, i, j);
                                identities = pc.total() == periods &&
                                             pc.uu == cm.up_up(i, j) &&
                                             pc.dd == cm.down_down(i, j) &&
                                             pc.concordant() == cm.concordant(i, j) &&
                                             pc.discordant() == cm.discordant(i, j) &&
                                             pc.concordant() - pc.discordant() ==
                                                 cm.net(i, j) &&
                                             pc.nn == jn(i, j);
                            }
                        if (!identities) ++res.identity_failures;

                        // criterion 3, original variant: defined on every instance
                        {
                            const GerberMatrix fast =
                                gerber::compute_gerber(r, th, GerberVariant::original);
                            const GerberMatrix slow =
                                gerber::gerber_oracle(r, th, GerberVariant::original);
                            if ((fast.values - slow.values).cwiseAbs().maxCoeff() > 1e-12 ||
                                fast.convention_cells != slow.convention_cells)
                                ++res.oracle_failures;
                        }

                        if (!testutil::all_assets_pierce(ind)) continue;
                        ++res.valid;

                        const GerberMatrix g1 = gerber::gerber_gs1(cm, r.asset_labels);
                        const GerberMatrix g2 =
                            gerber::gerber_gs2(cm, jn, periods, r.asset_labels);

                        // criterion 1: both variants PSD at relative tolerance 1e-10
                        if (gerber::check_psd(g1.values, 1e-10).verdict != PsdVerdict::psd ||
                            gerber::check_psd(g2.values, 1e-10).verdict != PsdVerdict::psd)
                            ++res.psd_failures;

                        // criterion 3, gs1/gs2 against the definitional oracle
                        {
                            const GerberMatrix o1 =
                                gerber::gerber_oracle(r, th, GerberVariant::gs1);
                            const GerberMatrix o2 =
                                gerber::gerber_oracle(r, th, GerberVariant::gs2);
                            if ((g1.values - o1.values).cwiseAbs().maxCoeff() > 1e-12 ||
                                (g2.values - o2.values).cwiseAbs().maxCoeff() > 1e-12)
                                ++res.oracle_failures;
                        }

                        // criterion 4: dual forms and unit diagonal of gs1
                        {
                            Eigen::VectorXd inv_root(assets);
                            for (Eigen::Index i = 0; i < assets; ++i)
                                inv_root(i) =
                                    1.0 / std::sqrt(static_cast<double>(cm.net(i, i)));
                            const Eigen::MatrixXd alt = inv_root.asDiagonal() *
                                                        cm.net.cast<double>() *
                                                        inv_root.asDiagonal();
                            const double diag_dev =
                                (g1.values.diagonal() - Eigen::VectorXd::Ones(assets))
                                    .cwiseAbs()
                                    .maxCoeff();
                            if ((g1.values - alt).cwiseAbs().maxCoeff() > 1e-12 ||
                                diag_dev > 1e-12)
                                ++res.dual_form_failures;
                        }

                        // criterion 5: series construction within the geometric bound
                        try {
                            const SeriesCheck sc =
                                gerber::verify_series_construction(ind, g2, periods, 1e-10);
                            long bound = 1;
                            if (sc.x_max > 0.0)
                                bound = static_cast<long>(std::ceil(
                                            std::log(1e-10 * (1.0 - sc.x_max)) /
                                            std::log(sc.x_max))) +
                                        1;
                            if (!sc.partial_sums_psd || sc.max_abs_error > 1e-10 ||
                                sc.terms_used > bound ||
                                (sc.x_max == 0.0 && sc.terms_used != 1))
                                ++res.series_failures;
                        } catch (const std::exception&) {
                            ++res.series_failures;
                        }
                    }
    res.elapsed = seconds_since(start);
    return res;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

void criterion_6_witness() {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::string found;
    const long dims[][2] = {{3, 10}, {4, 20}, {5, 30}, {6, 40}};  // {assets, periods}
    for (const auto& d : dims) {
        const auto search = gerber::find_non_psd_original(
            10000, d[1], d[0], 0.5, 20260823 + static_cast<std::uint64_t>(d[0]));
        if (!search.witness || search.witness->report.lambda_min >= -1e-8) {
            pass = false;
            found += fmt(" K=%ld:none/%ld", d[0], search.trials_run);
            continue;
        }
        found += fmt(" K=%ld:trial=%ld", d[0], search.witness->trial_index);

        // persist, reload, and reproduce lambda_min within 1e-12
        testutil::TempDir dir;
        const auto path = dir.path() / "witness.csv";
        gerber::save_returns(path, search.witness->returns);
        const ReturnMatrix back = gerber::load_returns(path);
        const GerberMatrix g = gerber::compute_gerber(
            back, testutil::natural_thresholds(back, 0.5), GerberVariant::original);
        const double reloaded = gerber::check_psd(g.values, 1e-10).lambda_min;
        if (std::abs(reloaded - search.witness->report.lambda_min) > 1e-12) pass = false;
    }
    report(6, "non-PSD witness for the original statistic found and reproduced", pass,
           fmt("first witness per config:%s, %.1f s", found.c_str(),
               seconds_since(start)));
}

void criterion_7_fixture() {
    const ReturnMatrix r = gerber::load_returns(testutil::data_dir() / "returns_ab.csv");
    const ThresholdVector th = testutil::natural_thresholds(r, 0.5);

    const double orig = gerber::compute_gerber(r, th, GerberVariant::original).values(0, 1);
    const double g1 = gerber::compute_gerber(r, th, GerberVariant::gs1).values(0, 1);
    const double g2 = gerber::compute_gerber(r, th, GerberVariant::gs2).values(0, 1);

    // recompute from scratch: bit-stability within the process
    const double orig2 = gerber::compute_gerber(r, th, GerberVariant::original).values(0, 1);
    const double g1b = gerber::compute_gerber(r, th, GerberVariant::gs1).values(0, 1);
    const double g2b = gerber::compute_gerber(r, th, GerberVariant::gs2).values(0, 1);

    // and via explicit unit thresholds, which induce the same indicators
    ThresholdVector unit = testutil::unit_thresholds();
    const double g2u = gerber::compute_gerber(r, unit, GerberVariant::gs2).values(0, 1);

    const bool pass = std::abs(orig - 1.0 / 3.0) <= 1e-15 &&
                      std::abs(g1 - 0.2886751345948129) <= 1e-15 && g2 == 0.25 &&
                      orig == orig2 && g1 == g1b && g2 == g2b && g2u == g2;
    report(7, "fixture regression: g = 1/3, gs1 = 1/sqrt(12), gs2 = 1/4", pass,
           fmt("original=%s gs1=%s gs2=%s", gerber::format_double(orig).c_str(),
               gerber::format_double(g1).c_str(), gerber::format_double(g2).c_str()));
}

void criterion_8_equivariance() {
    const ReturnMatrix r = testutil::make_returns(testutil::random_returns(8887, 30, 5));
    const Eigen::VectorXd sigmas = gerber::column_stddevs(r);
    bool pass = true;
    std::string note;

    for (double lambda : {2.0, 3.7, 0.125}) {
        ReturnMatrix scaled = r;
        scaled.values.col(1) *= lambda;
        Eigen::VectorXd scaled_sigmas = sigmas;
        scaled_sigmas(1) *= lambda;
        for (auto v : {GerberVariant::original, GerberVariant::gs1, GerberVariant::gs2}) {
            const GerberMatrix base =
                gerber::compute_gerber(r, gerber::build_thresholds(sigmas, 0.5), v);
            const GerberMatrix after = gerber::compute_gerber(
                scaled, gerber::build_thresholds(scaled_sigmas, 0.5), v);
            if (!(base.values == after.values)) {
                pass = false;
                note += fmt(" scale(%s,%g)", gerber::variant_name(v), lambda);
            }
        }
    }

    ReturnMatrix neg = r;
    neg.values.col(2) = -r.values.col(2);
    for (auto v : {GerberVariant::original, GerberVariant::gs1, GerberVariant::gs2}) {
        const GerberMatrix base =
            gerber::compute_gerber(r, gerber::build_thresholds(sigmas, 0.5), v);
        const GerberMatrix after = gerber::compute_gerber(
            neg, gerber::build_thresholds(gerber::column_stddevs(neg), 0.5), v);
        for (Eigen::Index i = 0; i < 5; ++i)
            for (Eigen::Index j = 0; j < 5; ++j) {
                const double want = ((i == 2) != (j == 2)) ? -base.values(i, j)
                                                           : base.values(i, j);
                if (after.values(i, j) != want) {
                    pass = false;
                    note += fmt(" negate(%s,%ld,%ld)", gerber::variant_name(v),
                                static_cast<long>(i), static_cast<long>(j));
                }
            }
    }
    report(8, "scale equivariance bit-identical, column negation flips signs", pass,
           pass ? "lambda in {2, 3.7, 0.125} and negation, all variants"
                : "mismatches:" + note);
}

void criterion_9_performance() {
    const long assets = 100, periods = 5000;
    const ReturnMatrix r =
        testutil::make_returns(testutil::random_returns(909, periods, assets));
    const ThresholdVector th = testutil::natural_thresholds(r, 0.5);

    const auto start = std::chrono::steady_clock::now();
    const IndicatorSet ind = gerber::build_indicators(r, th);
    const CountMatrices cm = gerber::count_matrices(ind);
    const Eigen::MatrixXi jn = gerber::joint_neutral_counts(ind);
    const GerberMatrix g0 = gerber::gerber_original(cm, r.asset_labels);
    const GerberMatrix g1 = gerber::gerber_gs1(cm, r.asset_labels);
    const GerberMatrix g2 = gerber::gerber_gs2(cm, jn, periods, r.asset_labels);
    const auto rep0 = gerber::check_psd(g0.values, 1e-10);
    const auto rep1 = gerber::check_psd(g1.values, 1e-10);
    const auto rep2 = gerber::check_psd(g2.values, 1e-10);
    const double elapsed = seconds_since(start);

    const bool pass = elapsed <= 5.0 && rep1.verdict == PsdVerdict::psd &&
                      rep2.verdict == PsdVerdict::psd;
    report(9, "K=100, T=5000: all variants plus PSD checks within 5 s", pass,
           fmt("%.2f s, original lambda_min=%s", elapsed,
               gerber::format_double(rep0.lambda_min).c_str()));
}

} // namespace

int main() {
    const SweepResult sweep = run_sweep();
    const std::string shared = fmt("%ld instances, %ld valid", sweep.instances, sweep.valid);

    report(1, "gs1 and gs2 positive semidefinite on every valid random instance",
           sweep.psd_failures == 0 && sweep.valid >= 1000 && sweep.elapsed <= 60.0,
           fmt("%s, %ld violations, %.1f s", shared.c_str(), sweep.psd_failures,
               sweep.elapsed));
    report(2, "exact integer identity suite on every instance",
           sweep.identity_failures == 0,
           fmt("%s, %ld violations", shared.c_str(), sweep.identity_failures));
    report(3, "matrix-form statistics match the definitional oracle",
           sweep.oracle_failures == 0,
           fmt("%s, %ld divergences", shared.c_str(), sweep.oracle_failures));
    report(4, "gs1 dual forms agree, diagonal is one",
           sweep.dual_form_failures == 0,
           fmt("%ld valid instances, %ld divergences", sweep.valid,
               sweep.dual_form_failures));
    report(5, "gs2 series construction converges within the geometric bound",
           sweep.series_failures == 0,
           fmt("%ld valid instances, %ld failures", sweep.valid, sweep.series_failures));

    criterion_6_witness();
    criterion_7_fixture();
    criterion_8_equivariance();
    criterion_9_performance();

    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
