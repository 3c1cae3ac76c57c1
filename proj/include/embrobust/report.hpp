#ifndef EMBROBUST_REPORT_HPP
#define EMBROBUST_REPORT_HPP

#include "confounders.hpp"
#include "dataset.hpp"
#include "knn.hpp"
#include "neighbors.hpp"
#include "robustness.hpp"
#include "tsne.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

/**
 * @file report.hpp
 *
 * @brief JSON and CSV serialization of analysis results.
 *
 * Numbers are written with 17 significant digits, so text output is reproducible and round-trips exactly.
 */

namespace embrobust {

using json = nlohmann::ordered_json;

inline std::string csv_number(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

inline json to_json(const RobustnessReport& r) {
    return json{ { "k", r.k }, { "numerator", r.numerator }, { "denominator", r.denominator }, { "r_k", r.r_k }, { "r_min", r.r_min }, { "r_max", r.r_max } };
}

inline RobustnessReport robustness_from_json(const json& j) {
    RobustnessReport r;
    r.k = j.at("k").get<std::size_t>();
    r.numerator = j.at("numerator").get<std::uint64_t>();
    r.denominator = j.at("denominator").get<std::uint64_t>();
    r.r_k = j.at("r_k").get<double>();
    r.r_min = j.at("r_min").get<double>();
    r.r_max = j.at("r_max").get<double>();
    return r;
}

/**
 * CSV with columns `j,f_bio,f_conf`, ranks starting at 1.
 */
inline std::string curves_csv(const FrequencyCurves& fc) {
    std::string out = "j,f_bio,f_conf\n";
    for (std::size_t j = 0; j < fc.size(); ++j) {
        out += std::to_string(j + 1) + "," + csv_number(fc.f_bio[j]) + "," + csv_number(fc.f_conf[j]) + "\n";
    }
    return out;
}

inline json to_json(const EvalResult& r, const EmbeddingDataset& ds, bool with_predictions = false) {
    json out{ { "method", r.method }, { "target", axis_name(r.target) } };
    json configs = json::array();
    for (std::size_t c = 0; c < r.accuracy_mean.size(); ++c) {
        json entry;
        if (!r.k_grid.empty()) {
            entry["k"] = r.k_grid[c];
        }
        entry["accuracy_mean"] = r.accuracy_mean[c];
        entry["accuracy_std"] = r.accuracy_std[c];
        entry["fold_accuracy"] = r.fold_accuracy[c];
        if (with_predictions) {
            const auto& names = ds.classes(r.target);
            json preds = json::array();
            for (auto p : r.predictions[c]) {
                preds.push_back(names[p]);
            }
            entry["predictions"] = std::move(preds);
        }
        configs.push_back(std::move(entry));
    }
    out["results"] = std::move(configs);
    return out;
}

inline json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

inline std::string optional_csv(const std::optional<double>& v) {
    return v ? csv_number(*v) : std::string();
}

/**
 * CSV with columns `k,frac_same_center,acc_bio,acc_conf`; an undefined fraction is left empty.
 */
inline std::string confounders_csv(const ConfounderReport& r) {
    std::string out = "k,frac_same_center,acc_bio,acc_conf\n";
    for (std::size_t g = 0; g < r.k_grid.size(); ++g) {
        out += std::to_string(r.k_grid[g]) + "," + optional_csv(r.frac_same_center[g]) + "," + csv_number(r.acc_bio[g]) + "," + csv_number(r.acc_conf[g]) + "\n";
    }
    return out;
}

inline json to_json(const ConfounderReport& r) {
    json fracs = json::array();
    for (const auto& f : r.frac_same_center) {
        fracs.push_back(optional_number(f));
    }
    return json{ { "k_grid", r.k_grid }, { "reps", r.reps }, { "seed", r.seed }, { "num_folds", r.num_folds }, { "chance_level", r.chance_level },
                 { "frac_same_center", std::move(fracs) }, { "misclassified", r.misclassified }, { "acc_bio", r.acc_bio }, { "acc_conf", r.acc_conf } };
}

/**
 * CSV with columns `bin_lo,bin_hi,count,logreg_error_rate`; an empty bin's rate is left empty.
 */
inline std::string relation_bins_csv(const CenterErrorRelation& r) {
    std::string out = "bin_lo,bin_hi,count,logreg_error_rate\n";
    for (const auto& b : r.bins) {
        out += csv_number(b.lo) + "," + csv_number(b.hi) + "," + std::to_string(b.count) + "," + optional_csv(b.logreg_error_rate) + "\n";
    }
    return out;
}

inline json to_json(const CenterErrorRelation& r, const EmbeddingDataset& ds) {
    json bins = json::array();
    for (const auto& b : r.bins) {
        bins.push_back(json{ { "bin_lo", b.lo }, { "bin_hi", b.hi }, { "count", b.count }, { "logreg_error_rate", optional_number(b.logreg_error_rate) } });
    }
    json samples = json::array();
    for (std::size_t i = 0; i < r.center_error_fraction.size(); ++i) {
        samples.push_back(json{ { "sample_id", ds.id(i) }, { "center_error_fraction", r.center_error_fraction[i] }, { "logreg_error", static_cast<bool>(r.logreg_error[i]) } });
    }
    return json{ { "k_grid", r.k_grid }, { "reps", r.reps }, { "seed", r.seed }, { "lambda", r.lambda }, { "bins", std::move(bins) }, { "per_sample", std::move(samples) } };
}

inline json to_json(const TsneConfig& c) {
    return json{ { "perplexity", c.perplexity }, { "iterations", c.iterations }, { "early_exaggeration", c.early_exaggeration },
                 { "exaggeration_iterations", c.exaggeration_iterations }, { "learning_rate", c.learning_rate }, { "initial_momentum", c.initial_momentum },
                 { "final_momentum", c.final_momentum }, { "momentum_switch", c.momentum_switch }, { "seed", c.seed }, { "input_metric", "cosine distance, squared" } };
}

/**
 * CSV with columns `sample_id,x,y`.
 */
inline std::string coords_csv(const EmbeddingDataset& ds, const std::vector<double>& coords) {
    std::string out = "sample_id,x,y\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += ds.id(i) + "," + csv_number(coords[2 * i]) + "," + csv_number(coords[2 * i + 1]) + "\n";
    }
    return out;
}

/**
 * CSV with columns `iter,kl`, iterations starting at 0.
 */
inline std::string kl_csv(const std::vector<double>& trace) {
    std::string out = "iter,kl\n";
    for (std::size_t t = 0; t < trace.size(); ++t) {
        out += std::to_string(t) + "," + csv_number(trace[t]) + "\n";
    }
    return out;
}

}

#endif
