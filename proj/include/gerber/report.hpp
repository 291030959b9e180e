#pragma once

#include <Eigen/Dense>

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gerber/format.hpp"
#include "gerber/indicators.hpp"
#include "gerber/psd.hpp"
#include "gerber/returns.hpp"
#include "gerber/statistics.hpp"

namespace gerber {

/// Labeled K x K matrix as CSV: header row of asset labels with an empty
/// lead cell, then one labeled row per asset.
inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m,
                             const std::vector<std::string>& labels, char delimiter = ',') {
    std::vector<std::string> names = labels;
    if (names.size() != static_cast<std::size_t>(m.cols()))
        names = detail::default_labels(m.cols());
    for (const auto& name : names) os << delimiter << name;
    os << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << delimiter << format_double(m(i, j));
        os << '\n';
    }
}

inline void write_gerber_csv(std::ostream& os, const GerberMatrix& g, char delimiter = ',') {
    write_matrix_csv(os, g.values, g.asset_labels, delimiter);
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json gerber_to_json(const GerberMatrix& g) {
    nlohmann::json j;
    j["variant"] = variant_name(g.variant);
    j["c"] = g.threshold_fraction;
    j["periods"] = g.periods;
    j["assets"] = g.assets();
    j["labels"] = g.asset_labels.empty() ? detail::default_labels(g.assets())
                                         : g.asset_labels;
    j["matrix"] = matrix_to_json(g.values);
    if (g.variant == GerberVariant::original) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& [a, b] : g.convention_cells) cells.push_back({a, b});
        j["zero_over_zero_cells"] = std::move(cells);
    }
    return j;
}

inline nlohmann::json psd_to_json(const PsdReport& rep) {
    nlohmann::json j;
    j["verdict"] = verdict_name(rep.verdict);
    j["lambda_min"] = rep.lambda_min;
    j["lambda_max"] = rep.lambda_max;
    j["cholesky_ok"] = rep.cholesky_ok;
    j["cholesky_shift"] = rep.cholesky_shift;
    j["tolerance"] = rep.tolerance;
    return j;
}

inline nlohmann::json witness_meta_json(const NonPsdWitness& w) {
    nlohmann::json j;
    j["seed"] = w.seed;
    j["trial_index"] = w.trial_index;
    j["lambda_min"] = w.report.lambda_min;
    j["lambda_max"] = w.report.lambda_max;
    j["verdict"] = verdict_name(w.report.verdict);
    j["periods"] = w.returns.periods();
    j["assets"] = w.returns.assets();
    return j;
}

/// The four indicator matrices as labeled CSV blocks, one "# name" comment
/// line before each.
inline void write_indicator_csv(std::ostream& os, const IndicatorSet& ind,
                                const std::vector<std::string>& labels, char delimiter = ',') {
    std::vector<std::string> names = labels;
    if (names.size() != static_cast<std::size_t>(ind.assets()))
        names = detail::default_labels(ind.assets());
    const auto block = [&](const char* title, const Eigen::MatrixXi& m) {
        os << "# " << title << '\n';
        for (std::size_t k = 0; k < names.size(); ++k)
            os << (k == 0 ? "" : std::string(1, delimiter)) << names[k];
        os << '\n';
        for (Eigen::Index t = 0; t < m.rows(); ++t) {
            for (Eigen::Index k = 0; k < m.cols(); ++k)
                os << (k == 0 ? "" : std::string(1, delimiter)) << m(t, k);
            os << '\n';
        }
    };
    block("up", ind.up);
    block("down", ind.down);
    block("direction", ind.direction);
    block("neutral", ind.neutral);
}

} // namespace gerber
