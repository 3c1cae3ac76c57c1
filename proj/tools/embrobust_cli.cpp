#include "embrobust/embrobust.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace embrobust;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_precondition = 3;

struct CommonArgs {
    std::vector<std::string> manifests;
    std::vector<std::string> embeddings;
    std::vector<std::string> names;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool exclude_same_group = false;
};

struct Args {
    CommonArgs common;
    std::size_t k = 0;
    std::vector<std::size_t> k_grid = log_spaced_grid();
    int reps = 5;
    int folds = 5;
    double lambda = 1e-3;
    std::vector<std::string> targets{ "bio", "conf" };
    std::vector<std::string> coords;
    TsneConfig tsne;

    // synth
    std::string layout = "balanced";
    std::size_t n_bio = 5, n_conf = 5, per_cell = 80, dim = 768, group_size = 10;
    double bio_strength = 1, conf_strength = 0.5, noise_sigma = 0.3;
    std::string format = "binary";
};

struct NamedDataset {
    std::string name;
    std::string manifest;
    std::string embeddings;
    EmbeddingDataset data;
};

std::string default_name(const std::string& manifest) {
    fs::path p(manifest);
    if (p.filename() == "manifest.csv" && p.has_parent_path() && !p.parent_path().filename().empty()) {
        return p.parent_path().filename().string();
    }
    return p.stem().string();
}

std::vector<NamedDataset> load_inputs(const CommonArgs& c, bool single) {
    if (c.manifests.empty() || c.manifests.size() != c.embeddings.size()) {
        throw CLI::ValidationError("--manifest/--embeddings", "give one --embeddings per --manifest");
    }
    if (single && c.manifests.size() != 1) {
        throw CLI::ValidationError("--manifest", "this subcommand takes exactly one dataset");
    }
    if (!c.names.empty() && c.names.size() != c.manifests.size()) {
        throw CLI::ValidationError("--name", "give one --name per dataset or none");
    }
    std::vector<NamedDataset> out;
    for (std::size_t d = 0; d < c.manifests.size(); ++d) {
        NamedDataset nd;
        nd.name = c.names.empty() ? default_name(c.manifests[d]) : c.names[d];
        nd.manifest = c.manifests[d];
        nd.embeddings = c.embeddings[d];
        try {
            nd.data = load_dataset(nd.manifest, nd.embeddings);
        } catch (const DatasetError& e) {
            throw DatasetError(nd.manifest + ": " + e.what());
        }
        out.push_back(std::move(nd));
    }
    return out;
}

/**
 * @brief Records the parameters, inputs and outputs of one invocation.
 */
class RunManifest {
public:
    RunManifest(std::string subcommand, const CommonArgs& c) : subcommand(std::move(subcommand)) {
        params["seed"] = c.seed;
        params["exclude_same_group"] = c.exclude_same_group;
        for (std::size_t d = 0; d < c.manifests.size(); ++d) {
            inputs.push_back(json{ { "manifest", c.manifests[d] }, { "embeddings", d < c.embeddings.size() ? c.embeddings[d] : "" } });
        }
    }

    json params = json::object();

    void output(const std::string& file) { outputs.push_back(file); }

    json to_json(bool with_outputs = true) const {
        json out{ { "tool", "embrobust" }, { "version", EMBROBUST_VERSION }, { "subcommand", subcommand }, { "parameters", params }, { "inputs", inputs } };
        if (with_outputs) {
            out["outputs"] = outputs;
        }
        return out;
    }

    std::string note() const { return "embrobust " + subcommand + "; run manifest: run_manifest.json"; }

private:
    std::string subcommand;
    json inputs = json::array();
    std::vector<std::string> outputs;
};

class OutputDir {
public:
    OutputDir(const std::string& dir, RunManifest& manifest) : root(dir), manifest(manifest) {
        if (dir.empty()) {
            throw CLI::ValidationError("--out-dir", "required");
        }
        fs::create_directories(root);
    }

    void write(const std::string& file, const std::string& content) {
        write_text(root / file, content);
        manifest.output(file);
    }

    void write_json(const std::string& file, json payload) {
        json doc{ { "run_manifest", manifest.to_json(false) } };
        for (auto& [key, value] : payload.items()) {
            doc[key] = value;
        }
        write(file, doc.dump(2) + "\n");
    }

    void finish() {
        manifest.output("run_manifest.json");
        write_text(root / "run_manifest.json", manifest.to_json().dump(2) + "\n");
    }

private:
    fs::path root;
    RunManifest& manifest;
};

NeighborOptions neighbor_options(const CommonArgs& c) {
    NeighborOptions opt;
    opt.exclude_same_group = c.exclude_same_group;
    opt.num_threads = c.threads;
    return opt;
}

RepeatedKnnOptions repeated_options(const Args& a) {
    RepeatedKnnOptions opt;
    opt.k_grid = a.k_grid;
    opt.reps = a.reps;
    opt.seed = a.common.seed;
    opt.num_folds = a.folds;
    return opt;
}

std::vector<double> as_double(const std::vector<std::size_t>& v) {
    return std::vector<double>(v.begin(), v.end());
}

int cmd_index(const Args& a) {
    auto inputs = load_inputs(a.common, false);
    RunManifest manifest("index", a.common);
    manifest.params["k"] = a.k;
    OutputDir out(a.common.out_dir, manifest);

    json entries = json::array();
    std::vector<std::pair<std::string, RobustnessReport>> reports;
    for (const auto& in : inputs) {
        auto nt = build_neighbor_table(in.data, neighbor_options(a.common));
        auto report = robustness_index(in.data, nt, a.k);
        entries.push_back(json{ { "name", in.name }, { "n", in.data.size() }, { "dim", in.data.dim() }, { "report", to_json(report) }, { "r_k_display", display_value(report.r_k) } });
        reports.emplace_back(in.name, report);
    }
    out.write_json("robustness_index.json", json{ { "datasets", entries } });

    std::stable_sort(reports.begin(), reports.end(), [](const auto& x, const auto& y) { return x.second.r_k < y.second.r_k; });
    std::vector<svg::Bar> bars;
    for (const auto& [name, r] : reports) {
        bars.push_back(svg::Bar{ name, r.r_k, display_value(r.r_k) });
    }
    out.write("robustness_index.svg", svg::bar_chart("Robustness index (k=" + std::to_string(a.k) + ")", "robustness index", bars, 1.0, manifest.note()));
    out.finish();

    for (const auto& e : entries) {
        std::cout << e["name"].get<std::string>() << "\tR_" << a.k << " = " << e["r_k_display"].get<std::string>() << "\n";
    }
    return 0;
}

int cmd_curves(const Args& a) {
    auto inputs = load_inputs(a.common, true);
    const auto& ds = inputs.front().data;
    RunManifest manifest("curves", a.common);
    OutputDir out(a.common.out_dir, manifest);

    auto nt = build_neighbor_table(ds, neighbor_options(a.common));
    auto fc = frequency_curves(ds, nt);
    auto chance = chance_levels(ds);
    out.write("frequency_curves.csv", curves_csv(fc));

    std::vector<double> ranks(fc.size());
    std::iota(ranks.begin(), ranks.end(), 1.0);
    std::vector<svg::Series> series{
        { "same biological label", "#1f77b4", ranks, fc.f_bio },
        { "same confounder label", "#ff7f0e", ranks, fc.f_conf },
    };
    std::vector<svg::Rule> rules{ { "chance (bio)", "#9ecae1", chance.bio }, { "chance (conf)", "#fdd0a2", chance.conf } };
    out.write("frequency_curves.svg", svg::line_chart(inputs.front().name + ": label agreement of the j-th neighbor", "neighbor rank j", "fraction of samples", series, false, rules,
                                                      std::make_pair(0.0, 1.0), manifest.note()));
    out.write_json("frequency_curves.json", json{ { "name", inputs.front().name }, { "ranks", fc.size() }, { "chance_bio", chance.bio }, { "chance_conf", chance.conf } });
    out.finish();
    return 0;
}

json accuracy_entry(const EvalResult& r) {
    return json{ { "accuracy_mean", r.accuracy_mean.front() }, { "accuracy_std", r.accuracy_std.front() }, { "fold_accuracy", r.fold_accuracy.front() } };
}

int cmd_eval(const Args& a) {
    auto inputs = load_inputs(a.common, false);
    if (!a.coords.empty() && a.coords.size() != inputs.size()) {
        throw CLI::ValidationError("--coords", "give one coords file per dataset");
    }
    RunManifest manifest("eval", a.common);
    manifest.params["k"] = a.k;
    manifest.params["lambda"] = a.lambda;
    manifest.params["folds"] = a.folds;
    manifest.params["targets"] = a.targets;
    manifest.params["coords"] = a.coords;
    manifest.params["coords_knn_metric"] = "euclidean";
    OutputDir out(a.common.out_dir, manifest);

    LogRegOptions lr;
    lr.lambda = a.lambda;
    std::vector<Axis> axes;
    for (const auto& t : a.targets) {
        axes.push_back(t == "bio" ? Axis::bio : Axis::conf);
    }

    // name -> view -> method -> axis -> mean accuracy
    struct Scores {
        std::map<std::string, std::map<std::string, std::map<std::string, double>>> by_view;
    };
    std::vector<std::pair<std::string, Scores>> scores;
    json entries = json::array();

    for (std::size_t d = 0; d < inputs.size(); ++d) {
        const auto& in = inputs[d];
        Scores sc;
        json entry{ { "name", in.name }, { "n", in.data.size() } };

        auto run_view = [&](const EmbeddingDataset& view, Metric metric, const std::string& key) {
            auto folds = assign_folds(view, a.folds, a.common.seed);
            auto opt = neighbor_options(a.common);
            opt.metric = metric;
            auto nt = build_neighbor_table(view, opt);
            json knn_json{ { "k", a.k } }, lr_json{ { "lambda", a.lambda } };
            for (auto axis : axes) {
                auto knn = knn_predict(view, nt, folds, axis, a.k);
                auto reg = logreg_cv(view, folds, axis, lr, a.common.threads);
                knn_json[axis_name(axis)] = accuracy_entry(knn);
                lr_json[axis_name(axis)] = accuracy_entry(reg);
                sc.by_view[key]["knn"][axis_name(axis)] = knn.accuracy_mean.front();
                sc.by_view[key]["logreg"][axis_name(axis)] = reg.accuracy_mean.front();
            }
            entry[key] = json{ { "knn", knn_json }, { "logreg", lr_json } };
        };

        run_view(in.data, Metric::cosine, "embeddings");
        if (!a.coords.empty()) {
            auto view = with_coords(in.data, read_coords_csv(a.coords[d]));
            run_view(view, Metric::euclidean, "coords_2d");
        }
        entries.push_back(std::move(entry));
        scores.emplace_back(in.name, std::move(sc));
    }
    out.write_json("eval.json", json{ { "datasets", entries } });

    if (axes.size() == 2) {
        std::vector<std::string> views{ "embeddings" };
        if (!a.coords.empty()) {
            views.push_back("coords_2d");
        }
        for (const auto& view : views) {
            for (const std::string method : { "knn", "logreg" }) {
                std::vector<svg::Point> pts;
                for (std::size_t d = 0; d < scores.size(); ++d) {
                    const auto& m = scores[d].second.by_view.at(view).at(method);
                    pts.push_back(svg::Point{ m.at("bio"), m.at("conf"), svg::palette_color(svg::bio_palette(), d), scores[d].first });
                }
                std::string suffix = view == "embeddings" ? "" : "_2d";
                std::string what = view == "embeddings" ? "full embeddings" : "2D coordinates";
                out.write("accuracy_" + method + suffix + ".svg",
                          svg::scatter_chart(method + " on " + what + ": biological vs confounder accuracy", "biological label accuracy", "confounder label accuracy", pts, {}, 5,
                                             std::make_pair(0.0, 1.0), manifest.note()));
            }
        }
    }
    out.finish();
    return 0;
}

int cmd_confounders(const Args& a) {
    auto inputs = load_inputs(a.common, true);
    RunManifest manifest("confounders", a.common);
    manifest.params["k_grid"] = a.k_grid;
    manifest.params["reps"] = a.reps;
    manifest.params["folds"] = a.folds;
    manifest.params["accuracy_curves_on"] = "restricted subset";
    OutputDir out(a.common.out_dir, manifest);

    auto restricted = restrict_for_confounders(inputs.front().data);
    auto nt = build_neighbor_table(restricted.data, neighbor_options(a.common));
    auto report = confounder_analysis(restricted.data, nt, repeated_options(a));

    out.write("confounders.csv", confounders_csv(report));
    out.write_json("confounders.json", json{ { "name", inputs.front().name }, { "retained_classes", restricted.retained_classes }, { "n_restricted", restricted.data.size() }, { "report", to_json(report) } });

    std::vector<double> frac;
    for (const auto& f : report.frac_same_center) {
        frac.push_back(f ? *f : std::numeric_limits<double>::quiet_NaN());
    }
    auto ks = as_double(report.k_grid);
    std::vector<svg::Series> series{
        { "same-confounder fraction among wrong-class neighbors", "#d62728", ks, frac },
        { "biological accuracy", "#2ca02c", ks, report.acc_bio },
        { "confounder accuracy", "#1f77b4", ks, report.acc_conf },
    };
    std::vector<svg::Rule> rules{ { "chance level", "#d62728", report.chance_level } };
    out.write("confounders.svg", svg::line_chart(inputs.front().name + ": same-confounder neighbors behind kNN errors", "k", "fraction / accuracy", series, true, rules,
                                                 std::make_pair(0.0, 1.0), manifest.note()));
    out.finish();
    return 0;
}

int cmd_tsne(const Args& a) {
    auto inputs = load_inputs(a.common, true);
    const auto& ds = inputs.front().data;
    if (ds.size() < 10) {
        throw CLI::ValidationError("tsne", "need at least 10 samples, got " + std::to_string(ds.size()));
    }
    auto cfg = a.tsne;
    cfg.seed = a.common.seed;
    cfg.num_threads = a.common.threads;

    RunManifest manifest("tsne", a.common);
    manifest.params["tsne"] = to_json(cfg);
    OutputDir out(a.common.out_dir, manifest);

    auto proj = tsne(ds, cfg);
    out.write("tsne_coords.csv", coords_csv(ds, proj.coords));
    out.write("tsne_kl.csv", kl_csv(proj.kl_trace));

    for (auto axis : { Axis::bio, Axis::conf }) {
        const auto& palette = axis == Axis::bio ? svg::bio_palette() : svg::conf_palette();
        auto labels = ds.labels(axis);
        std::vector<svg::Point> pts;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            pts.push_back(svg::Point{ proj.coords[2 * i], proj.coords[2 * i + 1], svg::palette_color(palette, labels[i]), "" });
        }
        std::vector<std::pair<std::string, std::string>> legend;
        for (std::size_t c = 0; c < ds.classes(axis).size(); ++c) {
            legend.emplace_back(ds.classes(axis)[c], svg::palette_color(palette, c));
        }
        std::string what = axis == Axis::bio ? "biological label" : "confounder label";
        out.write(std::string("tsne_") + axis_name(axis) + ".svg",
                  svg::scatter_chart(inputs.front().name + ": t-SNE colored by " + what, "t-SNE 1", "t-SNE 2", pts, legend, 2.5, std::nullopt, manifest.note()));
    }

    std::size_t tk = std::min<std::size_t>(12, (ds.size() - 1) / 2);
    json diag{ { "final_kl", proj.kl_trace.empty() ? 0.0 : proj.kl_trace.back() },
               { "fallback_rows", proj.fallback_rows },
               { "trustworthiness_k", tk },
               { "trustworthiness", trustworthiness(ds, proj.coords, tk, Metric::cosine, a.common.threads) },
               { "nearest_centroid_accuracy_bio", nearest_centroid_accuracy(proj.coords, ds.labels(Axis::bio), ds.bio_classes().size()) },
               { "nearest_centroid_accuracy_conf", nearest_centroid_accuracy(proj.coords, ds.labels(Axis::conf), ds.conf_classes().size()) } };
    out.write_json("tsne.json", json{ { "name", inputs.front().name }, { "config", to_json(cfg) }, { "diagnostics", diag } });
    out.finish();
    return 0;
}

int cmd_relation(const Args& a) {
    auto inputs = load_inputs(a.common, true);
    const auto& ds = inputs.front().data;
    RunManifest manifest("relation", a.common);
    manifest.params["k_grid"] = a.k_grid;
    manifest.params["reps"] = a.reps;
    manifest.params["folds"] = a.folds;
    manifest.params["lambda"] = a.lambda;
    manifest.params["runs"] = "every (rep, k) pair";
    manifest.params["majority"] = "strictly more than k/2";
    manifest.params["bins"] = 10;
    OutputDir out(a.common.out_dir, manifest);

    LogRegOptions lr;
    lr.lambda = a.lambda;
    auto nt = build_neighbor_table(ds, neighbor_options(a.common));
    auto rel = center_error_relation(ds, nt, repeated_options(a), lr, a.common.threads);

    out.write("relation_bins.csv", relation_bins_csv(rel));
    out.write_json("relation.json", json{ { "name", inputs.front().name }, { "relation", to_json(rel, ds) } });

    std::vector<double> xs, ys;
    for (const auto& b : rel.bins) {
        if (b.logreg_error_rate) {
            xs.push_back(0.5 * (b.lo + b.hi));
            ys.push_back(*b.logreg_error_rate);
        }
    }
    std::vector<svg::Series> series{ { "logistic regression error rate", "#d62728", xs, ys } };
    out.write("relation.svg", svg::line_chart(inputs.front().name + ": regression errors vs center-related kNN errors", "fraction of kNN runs with a center-related error",
                                              "logistic regression error rate", series, false, {}, std::make_pair(0.0, 1.0), manifest.note()));
    out.finish();
    return 0;
}

int cmd_synth(const Args& a) {
    SynthSpec spec;
    if (a.layout == "tcga2k") {
        spec = tcga2k_layout(a.per_cell);
    } else {
        spec.per_cell = balanced_cells(a.n_bio, a.n_conf, a.per_cell);
    }
    spec.dim = a.dim;
    spec.bio_strength = a.bio_strength;
    spec.conf_strength = a.conf_strength;
    spec.noise_sigma = a.noise_sigma;
    spec.seed = a.common.seed;
    spec.group_size = a.group_size;

    RunManifest manifest("synth", a.common);
    manifest.params["layout"] = a.layout;
    manifest.params["n_bio"] = spec.num_bio();
    manifest.params["n_conf"] = spec.num_conf();
    manifest.params["per_cell"] = spec.per_cell;
    manifest.params["dim"] = spec.dim;
    manifest.params["bio_strength"] = spec.bio_strength;
    manifest.params["conf_strength"] = spec.conf_strength;
    manifest.params["noise_sigma"] = spec.noise_sigma;
    manifest.params["group_size"] = spec.group_size;
    manifest.params["format"] = a.format;

    EmbeddingDataset ds;
    try {
        ds = generate(spec);
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("synth", e.what());
    }
    OutputDir out(a.common.out_dir, manifest);
    out.write("manifest.csv", format_manifest(ds));
    if (a.format == "csv") {
        out.write("embeddings.csv", format_embeddings_csv(ds));
    } else {
        out.write("embeddings.bin", format_embeddings_binary(ds));
    }
    out.finish();
    return 0;
}

void add_common(CLI::App* sub, Args& a, bool with_inputs) {
    if (with_inputs) {
        sub->add_option("--manifest", a.common.manifests, "Manifest CSV (repeat for several datasets)")->required()->check(CLI::ExistingFile);
        sub->add_option("--embeddings", a.common.embeddings, "Embeddings file, CSV or EMB1 binary (one per --manifest)")->required()->check(CLI::ExistingFile);
        sub->add_option("--name", a.common.names, "Display name per dataset");
        sub->add_flag("--exclude-same-group", a.common.exclude_same_group, "Ignore neighbors sharing the sample's group id");
    }
    sub->add_option("--out-dir", a.common.out_dir, "Output directory")->required();
    sub->add_option("--seed", a.common.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", a.common.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber)->capture_default_str();
}

void add_grid(CLI::App* sub, Args& a) {
    sub->add_option("--k-grid", a.k_grid, "Comma-separated kNN neighbor counts")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--reps", a.reps, "Re-foldings with distinct seeds")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--folds", a.folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
}

}

int main(int argc, char** argv) {
    CLI::App app{ "Quantify how strongly embeddings are organized by biological versus confounder labels" };
    app.set_version_flag("--version", EMBROBUST_VERSION);
    app.require_subcommand(1);
    Args a;

    auto* index = app.add_subcommand("index", "Robustness index per dataset (JSON + bar chart)");
    add_common(index, a, true);
    a.k = 50;
    index->add_option("--k", a.k, "Neighbors per sample")->check(CLI::PositiveNumber)->capture_default_str();

    auto* curves = app.add_subcommand("curves", "Per-rank same-label frequency curves (CSV + line chart)");
    add_common(curves, a, true);

    auto* eval = app.add_subcommand("eval", "Cross-validated kNN and logistic regression probes");
    add_common(eval, a, true);
    std::size_t eval_k = 3;
    eval->add_option("--k", eval_k, "kNN neighbors")->check(CLI::PositiveNumber)->capture_default_str();
    eval->add_option("--lambda", a.lambda, "L2 penalty for logistic regression")->check(CLI::NonNegativeNumber)->capture_default_str();
    eval->add_option("--folds", a.folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
    eval->add_option("--target", a.targets, "Label axes to predict: bio, conf")->check(CLI::IsMember({ "bio", "conf" }))->capture_default_str();
    eval->add_option("--coords", a.coords, "2D coordinates CSV per dataset (sample_id,x,y)")->check(CLI::ExistingFile);

    auto* conf = app.add_subcommand("confounders", "Same-confounder attribution of kNN errors");
    add_common(conf, a, true);
    add_grid(conf, a);

    auto* ts = app.add_subcommand("tsne", "2D t-SNE projection and colored scatter plots");
    add_common(ts, a, true);
    ts->add_option("--perplexity", a.tsne.perplexity)->check(CLI::PositiveNumber)->capture_default_str();
    ts->add_option("--iterations", a.tsne.iterations)->check(CLI::PositiveNumber)->capture_default_str();
    ts->add_option("--learning-rate", a.tsne.learning_rate)->check(CLI::PositiveNumber)->capture_default_str();
    ts->add_option("--early-exaggeration", a.tsne.early_exaggeration)->check(CLI::PositiveNumber)->capture_default_str();
    ts->add_option("--exaggeration-iterations", a.tsne.exaggeration_iterations)->check(CLI::NonNegativeNumber)->capture_default_str();

    auto* rel = app.add_subcommand("relation", "Relate logistic regression errors to center-related kNN errors");
    add_common(rel, a, true);
    add_grid(rel, a);
    rel->add_option("--lambda", a.lambda, "L2 penalty for logistic regression")->check(CLI::NonNegativeNumber)->capture_default_str();

    auto* syn = app.add_subcommand("synth", "Write a synthetic dataset");
    add_common(syn, a, false);
    syn->add_option("--layout", a.layout, "Cell layout: balanced or tcga2k")->check(CLI::IsMember({ "balanced", "tcga2k" }))->capture_default_str();
    syn->add_option("--n-bio", a.n_bio)->check(CLI::PositiveNumber)->capture_default_str();
    syn->add_option("--n-conf", a.n_conf)->check(CLI::PositiveNumber)->capture_default_str();
    syn->add_option("--per-cell", a.per_cell, "Samples per populated cell")->check(CLI::PositiveNumber)->capture_default_str();
    syn->add_option("--dim", a.dim)->capture_default_str();
    syn->add_option("--bio-strength", a.bio_strength)->capture_default_str();
    syn->add_option("--conf-strength", a.conf_strength)->capture_default_str();
    syn->add_option("--noise-sigma", a.noise_sigma)->capture_default_str();
    syn->add_option("--group-size", a.group_size, "Samples per group id (0 = ungrouped)")->capture_default_str();
    syn->add_option("--format", a.format, "Embedding file format: binary or csv")->check(CLI::IsMember({ "binary", "csv" }))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*index) {
            return cmd_index(a);
        }
        if (*curves) {
            return cmd_curves(a);
        }
        if (*eval) {
            a.k = eval_k;
            return cmd_eval(a);
        }
        if (*conf) {
            return cmd_confounders(a);
        }
        if (*ts) {
            return cmd_tsne(a);
        }
        if (*rel) {
            return cmd_relation(a);
        }
        if (*syn) {
            return cmd_synth(a);
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_precondition;
    } catch (const NonFiniteLossError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_precondition;
    } catch (const NonFiniteKlError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_precondition;
    } catch (const DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return exit_usage;
}
