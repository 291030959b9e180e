// Command-line front end: compute a co-movement matrix from a returns CSV,
// verify the algebraic identities and PSD claims on a data set, or search for
// returns whose original-statistic matrix fails positive semidefiniteness.
//
// Exit codes: 0 success; 1 invalid input or configuration; 2 statistic
// undefined on this data (variant precondition); 3 PSD failure (compute
// --check-psd found not_psd, verify had failing checks, find-witness found
// nothing).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gerber/gerber.hpp"

namespace {

struct ComputeConfig {
    std::string input;
    std::string variant;
    double c = 0.5;
    std::string output;
    std::string format = "csv";
    bool check_psd = false;
    bool covariance = false;
    bool dump_indicators = false;
    double tolerance = 1e-10;
};

struct VerifyConfig {
    std::string input;
    double c = 0.5;
    double tolerance = 1e-10;
};

struct WitnessConfig {
    long trials = 10000;
    long rows = 20;
    long cols = 4;
    double c = 0.5;
    std::uint64_t seed = 1;
    std::string output;  // stem for <stem>_returns.csv and <stem>_meta.json
};

void write_or_stdout(const std::string& path, const std::string& payload) {
    if (path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream os(path);
    if (!os) throw gerber::ValidationError("cannot open '" + path + "' for writing");
    os << payload;
    if (!os) throw gerber::ValidationError("failed while writing '" + path + "'");
}

void append_sigma_block(std::ostream& os, const gerber::ReturnMatrix& r,
                        const Eigen::VectorXd& sigmas) {
    os << "# sigma (denominator T-1)\n";
    for (Eigen::Index k = 0; k < sigmas.size(); ++k)
        os << r.asset_labels[static_cast<std::size_t>(k)] << ','
           << gerber::format_double(sigmas(k)) << '\n';
}

void append_psd_block(std::ostream& os, const gerber::PsdReport& rep) {
    os << "# psd\n"
       << "verdict," << gerber::verdict_name(rep.verdict) << '\n'
       << "lambda_min," << gerber::format_double(rep.lambda_min) << '\n'
       << "lambda_max," << gerber::format_double(rep.lambda_max) << '\n'
       << "cholesky_ok," << (rep.cholesky_ok ? "true" : "false") << '\n'
       << "cholesky_shift," << gerber::format_double(rep.cholesky_shift) << '\n'
       << "tolerance," << gerber::format_double(rep.tolerance) << '\n';
}

int run_compute(const ComputeConfig& cfg) {
    using namespace gerber;
    ReturnMatrix r = load_returns(cfg.input);
    const Eigen::VectorXd sigmas = column_stddevs(r);
    const ThresholdVector th = build_thresholds(sigmas, cfg.c);
    const auto variant = parse_variant(cfg.variant);
    if (!variant) throw ValidationError("unknown variant '" + cfg.variant + "'");

    if (cfg.dump_indicators)
        write_indicator_csv(std::cerr, build_indicators(r, th), r.asset_labels);

    const GerberMatrix g = compute_gerber(r, th, *variant);
    std::optional<PsdReport> rep;
    if (cfg.check_psd) rep = check_psd(g.values, cfg.tolerance);
    std::optional<Eigen::MatrixXd> cov;
    if (cfg.covariance) cov = covariance_from_gerber(g, sigmas);

    std::ostringstream out;
    if (cfg.format == "csv") {
        write_gerber_csv(out, g);
        if (cov) {
            append_sigma_block(out, r, sigmas);
            out << "# covariance\n";
            write_matrix_csv(out, *cov, r.asset_labels);
        }
        if (rep) append_psd_block(out, *rep);
    } else {
        nlohmann::json j = gerber_to_json(g);
        nlohmann::json sig = nlohmann::json::array();
        for (Eigen::Index k = 0; k < sigmas.size(); ++k) sig.push_back(sigmas(k));
        j["sigma"] = std::move(sig);
        j["sigma_denominator"] = "T-1";
        if (cov) j["covariance"] = matrix_to_json(*cov);
        if (rep) j["psd"] = psd_to_json(*rep);
        out << j.dump(2) << '\n';
    }
    write_or_stdout(cfg.output, out.str());
    return rep && rep->verdict == PsdVerdict::not_psd ? 3 : 0;
}

int run_verify(const VerifyConfig& cfg) {
    using namespace gerber;
    ReturnMatrix r = load_returns(cfg.input);
    const Eigen::VectorXd sigmas = column_stddevs(r);
    const ThresholdVector th = build_thresholds(sigmas, cfg.c);
    const IndicatorSet ind = build_indicators(r, th);
    const CountMatrices cm = count_matrices(ind);
    const Eigen::MatrixXi jn = joint_neutral_counts(ind);
    const long periods = r.periods();

    int passed = 0, total = 0;
    const auto check = [&](const char* name, bool ok, const std::string& details = "") {
        ++total;
        if (ok) ++passed;
        std::cout << (ok ? "pass " : "FAIL ") << name;
        if (!details.empty()) std::cout << ' ' << details;
        std::cout << '\n';
    };

    check("squared_form", verify_squared_form(ind, cm));

    bool counts_ok = true, sums_ok = true, neutral_ok = true;
    for (Eigen::Index i = 0; i < r.assets(); ++i)
        for (Eigen::Index j = i; j < r.assets(); ++j) {
            const PairCounts pc = pair_counts(ind, i, j);
            counts_ok = counts_ok && pc.uu == cm.up_up(i, j) && pc.dd == cm.down_down(i, j) &&
                        pc.concordant() == cm.concordant(i, j) &&
                        pc.discordant() == cm.discordant(i, j) &&
                        pc.concordant() - pc.discordant() == cm.net(i, j);
            sums_ok = sums_ok && pc.total() == periods;
            neutral_ok = neutral_ok && pc.nn == jn(i, j);
        }
    check("count_identities", counts_ok);
    check("region_sums", sums_ok);
    check("joint_neutral_counts", neutral_ok);

    const auto oracle_check = [&](GerberVariant v, const char* name) -> GerberMatrix {
        const GerberMatrix fast = compute_gerber(r, th, v);
        const GerberMatrix slow = gerber_oracle(r, th, v);
        const double diff = (fast.values - slow.values).cwiseAbs().maxCoeff();
        bool ok = diff <= 1e-12;
        if (v == GerberVariant::original)
            ok = ok && fast.convention_cells == slow.convention_cells;
        check(name, ok, "max_abs_diff=" + format_double(diff));
        return fast;
    };
    const GerberMatrix g0 = oracle_check(GerberVariant::original, "oracle_original");
    const GerberMatrix g1 = oracle_check(GerberVariant::gs1, "oracle_gs1");
    const GerberMatrix g2 = oracle_check(GerberVariant::gs2, "oracle_gs2");

    {
        Eigen::VectorXd inv_root(cm.assets());
        for (Eigen::Index i = 0; i < cm.assets(); ++i)
            inv_root(i) = 1.0 / std::sqrt(static_cast<double>(cm.net(i, i)));
        const Eigen::MatrixXd alt =
            inv_root.asDiagonal() * cm.net.cast<double>() * inv_root.asDiagonal();
        const double diff = (g1.values - alt).cwiseAbs().maxCoeff();
        check("gs1_dual_form", diff <= 1e-12, "max_abs_diff=" + format_double(diff));
        const double dev =
            (g1.values.diagonal() - Eigen::VectorXd::Ones(cm.assets())).cwiseAbs().maxCoeff();
        check("gs1_diagonal", dev <= 1e-12, "max_abs_dev=" + format_double(dev));
    }

    const auto psd_check = [&](const Eigen::MatrixXd& m, const char* name) {
        const PsdReport rep = check_psd(m, cfg.tolerance);
        check(name, rep.verdict == PsdVerdict::psd,
              "lambda_min=" + format_double(rep.lambda_min));
    };
    psd_check(g1.values, "gs1_psd");
    psd_check(g2.values, "gs2_psd");
    psd_check(covariance_from_gerber(g1, sigmas), "covariance_gs1_psd");
    psd_check(covariance_from_gerber(g2, sigmas), "covariance_gs2_psd");

    {
        const SeriesCheck sc = verify_series_construction(ind, g2, periods, cfg.tolerance);
        long bound = 1;
        if (sc.x_max > 0.0)
            bound = static_cast<long>(std::ceil(std::log(cfg.tolerance * (1.0 - sc.x_max)) /
                                                std::log(sc.x_max))) + 1;
        check("series_construction", sc.partial_sums_psd && sc.terms_used <= bound,
              "terms_used=" + std::to_string(sc.terms_used) +
                  " x_max=" + format_double(sc.x_max) +
                  " max_abs_error=" + format_double(sc.max_abs_error));
    }

    {
        const PsdReport rep = check_psd(g0.values, cfg.tolerance);
        std::cout << "info original_psd verdict=" << verdict_name(rep.verdict)
                  << " lambda_min=" << format_double(rep.lambda_min)
                  << " zero_over_zero_cells=" << g0.convention_cells.size() << '\n';
    }

    std::cout << "RESULT " << (passed == total ? "pass" : "fail") << " (" << passed << '/'
              << total << " checks)\n";
    return passed == total ? 0 : 3;
}

int run_find_witness(const WitnessConfig& cfg) {
    using namespace gerber;
    const WitnessSearch ws =
        find_non_psd_original(cfg.trials, cfg.rows, cfg.cols, cfg.c, cfg.seed);
    if (!ws.witness) {
        std::cerr << "no witness found in " << ws.trials_run << " trials (rows=" << cfg.rows
                  << " cols=" << cfg.cols << " c=" << format_double(cfg.c)
                  << " seed=" << cfg.seed << ")\n";
        return 3;
    }
    const NonPsdWitness& w = *ws.witness;
    nlohmann::json meta = witness_meta_json(w);
    meta["trials_run"] = ws.trials_run;
    meta["c"] = cfg.c;

    if (cfg.output.empty()) {
        write_returns(std::cout, w.returns);
        std::cerr << meta.dump(2) << '\n';
    } else {
        save_returns(cfg.output + "_returns.csv", w.returns);
        std::ofstream ms(cfg.output + "_meta.json");
        if (!ms)
            throw ValidationError("cannot open '" + cfg.output + "_meta.json' for writing");
        ms << meta.dump(2) << '\n';
        std::cerr << "witness written to " << cfg.output << "_returns.csv and " << cfg.output
                  << "_meta.json (lambda_min=" << format_double(w.report.lambda_min) << ")\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thresholded co-movement statistics for return series"};
    app.require_subcommand(1);

    ComputeConfig ccfg;
    CLI::App* compute = app.add_subcommand(
        "compute", "Compute a co-movement matrix from a returns CSV");
    compute->add_option("--input", ccfg.input, "Returns CSV (periods x assets)")->required();
    compute->add_option("--variant", ccfg.variant, "Statistic: original, gs1, or gs2")
        ->required()
        ->check(CLI::IsMember({"original", "gs1", "gs2"}));
    compute->add_option("--c", ccfg.c, "Threshold fraction of each column's sigma")
        ->capture_default_str();
    compute->add_option("--output", ccfg.output, "Output path (default: stdout)");
    compute->add_option("--format", ccfg.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    compute->add_flag("--check-psd", ccfg.check_psd,
                      "Append a PSD report; exit 3 if the matrix is not PSD");
    compute->add_flag("--covariance", ccfg.covariance,
                      "Also emit the induced covariance matrix");
    compute->add_flag("--dump-indicators", ccfg.dump_indicators,
                      "Dump the indicator matrices to stderr");
    compute->add_option("--tolerance", ccfg.tolerance, "PSD tolerance")
        ->capture_default_str();

    VerifyConfig vcfg;
    CLI::App* verify = app.add_subcommand(
        "verify", "Run the identity and PSD check battery on a returns CSV");
    verify->add_option("--input", vcfg.input, "Returns CSV (periods x assets)")->required();
    verify->add_option("--c", vcfg.c, "Threshold fraction of each column's sigma")
        ->capture_default_str();
    verify->add_option("--tolerance", vcfg.tolerance, "Check tolerance")
        ->capture_default_str();

    WitnessConfig wcfg;
    CLI::App* witness = app.add_subcommand(
        "find-witness",
        "Search for returns whose original-statistic matrix is not PSD");
    witness->add_option("--trials", wcfg.trials, "Maximum trials")->capture_default_str();
    witness->add_option("--rows", wcfg.rows, "Return periods per trial")
        ->capture_default_str();
    witness->add_option("--cols", wcfg.cols, "Assets per trial")->capture_default_str();
    witness->add_option("--c", wcfg.c, "Threshold fraction of each column's sigma")
        ->capture_default_str();
    witness->add_option("--seed", wcfg.seed, "Base seed")->capture_default_str();
    witness->add_option("--output", wcfg.output,
                        "Stem for <stem>_returns.csv and <stem>_meta.json "
                        "(default: CSV to stdout, metadata to stderr)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (compute->parsed()) return run_compute(ccfg);
        if (verify->parsed()) return run_verify(vcfg);
        return run_find_witness(wcfg);
    } catch (const gerber::PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
