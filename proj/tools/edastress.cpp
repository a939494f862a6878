// Command-line front end: synth -> extract -> evaluate -> compare, each step
// writing a reproducibility manifest next to its outputs.

#include "edastress/csv.hpp"
#include "edastress/errors.hpp"
#include "edastress/features.hpp"
#include "edastress/ingest.hpp"
#include "edastress/manifest.hpp"
#include "edastress/protocol.hpp"
#include "edastress/stats.hpp"
#include "edastress/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

namespace fs = std::filesystem;
using namespace edastress;

namespace {

std::string fmt(double v) { return csv::format_double(v); }

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct GlobalArgs {
    std::uint64_t seed = 1;
    int threads = default_threads();
};

void ensure_out_dir(const fs::path& dir, bool force) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw_data(dir.string() + " exists and is not a directory");
        if (!fs::is_empty(dir) && !force) {
            throw_data("output directory " + dir.string() + " is not empty (use --force)");
        }
    } else {
        fs::create_directories(dir);
    }
}

std::vector<Family> parse_families(const std::string& arg) {
    if (arg == "all") return all_families();
    std::vector<Family> out;
    std::string item;
    std::istringstream is(arg);
    while (std::getline(is, item, ',')) {
        if (!item.empty()) out.push_back(family_from_name(item));
    }
    if (out.empty()) throw_usage("--families: no valid family in '" + arg + "'");
    // Canonical family order, duplicates removed.
    std::vector<Family> canonical;
    for (Family f : all_families()) {
        if (std::find(out.begin(), out.end(), f) != out.end()) canonical.push_back(f);
    }
    return canonical;
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
    std::string out;
    bool force = false;
    int subjects = 7;
    double fs = 5.0;
    int segments = 10;
    double segment_s = 120.0;
    double stress_rate = 10.0;
    double nonstress_rate = 2.0;
    std::pair<double, double> amp_stress = {0.3, 1.0};
    std::pair<double, double> amp_nonstress = {0.1, 0.4};
    std::pair<double, double> baseline = {2.0, 12.0};
    double noise_std = 0.003;
    std::pair<double, double> rate_spread = {1.0, 1.0};
    std::pair<double, double> amp_spread = {1.0, 1.0};
};

int cmd_synth(const GlobalArgs& g, const SynthArgs& a) {
    SyntheticConfig cfg;
    cfg.n_subjects = a.subjects;
    cfg.sampling_rate_hz = a.fs;
    cfg.segment_plan = SyntheticConfig::default_plan(a.segments, a.segment_s);
    cfg.baseline_scl_us = a.baseline;
    cfg.scr_rate_stress_per_min = a.stress_rate;
    cfg.scr_rate_nonstress_per_min = a.nonstress_rate;
    cfg.amp_stress_us = a.amp_stress;
    cfg.amp_nonstress_us = a.amp_nonstress;
    cfg.noise_std_us = a.noise_std;
    cfg.subject_rate_scale = a.rate_spread;
    cfg.subject_amp_scale = a.amp_spread;
    cfg.rng_seed = g.seed;

    const fs::path out_dir(a.out);
    ensure_out_dir(out_dir, a.force);

    const auto records = generate_synthetic(cfg);
    RunManifest manifest;
    manifest.command = "synth";
    manifest.seed = g.seed;
    manifest.feature_set_version = kFeatureSetVersion;
    manifest.grid_version = kGridVersion;
    manifest.created_at = current_timestamp();
    manifest.config = {
        {"subjects", std::to_string(a.subjects)},
        {"fs", fmt(a.fs)},
        {"segments", std::to_string(a.segments)},
        {"segment_s", fmt(a.segment_s)},
        {"stress_rate", fmt(a.stress_rate)},
        {"nonstress_rate", fmt(a.nonstress_rate)},
        {"amp_stress", fmt(a.amp_stress.first) + ".." + fmt(a.amp_stress.second)},
        {"amp_nonstress", fmt(a.amp_nonstress.first) + ".." + fmt(a.amp_nonstress.second)},
        {"baseline", fmt(a.baseline.first) + ".." + fmt(a.baseline.second)},
        {"noise_std", fmt(a.noise_std)},
        {"rate_spread", fmt(a.rate_spread.first) + ".." + fmt(a.rate_spread.second)},
        {"amp_spread", fmt(a.amp_spread.first) + ".." + fmt(a.amp_spread.second)},
    };

    for (const SignalRecord& rec : records) {
        const fs::path csv_path = write_canonical(rec, out_dir);
        std::cout << "wrote " << csv_path.string() << " (" << rec.size() << " samples at "
                  << fmt(rec.sampling_rate_hz) << " Hz)\n";
    }
    manifest.write(out_dir / "run_manifest.json");
    return 0;
}

// --- extract ---------------------------------------------------------------

struct ExtractArgs {
    std::string in;
    std::string out;
    double window_s = 60.0;
    double shift_s = 30.0;
};

int cmd_extract(const GlobalArgs& g, const ExtractArgs& a) {
    const fs::path in_dir(a.in);
    if (!fs::is_directory(in_dir)) throw_data(a.in + " is not a directory");

    std::vector<fs::path> csv_files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.path().extension() == ".csv") csv_files.push_back(entry.path());
    }
    std::sort(csv_files.begin(), csv_files.end());
    if (csv_files.empty()) throw_data("no canonical .csv files in " + a.in);

    RunManifest manifest;
    manifest.command = "extract";
    manifest.seed = g.seed;
    manifest.feature_set_version = kFeatureSetVersion;
    manifest.grid_version = kGridVersion;
    manifest.created_at = current_timestamp();
    manifest.config = {
        {"window_s", fmt(a.window_s)},
        {"shift_s", fmt(a.shift_s)},
    };

    ExtractOptions opts;
    opts.window_s = a.window_s;
    opts.shift_s = a.shift_s;

    std::vector<WindowFeatures> rows;
    for (const fs::path& file : csv_files) {
        manifest.add_input(file);
        const SignalRecord rec = load_canonical(file);
        const ExtractResult res = extract_features(rec, opts);
        std::cout << rec.subject_id << " (" << fmt(rec.sampling_rate_hz) << " Hz): "
                  << (res.filtered ? "low-pass applied" : "no filtering (cutoff outside (0,1) of Nyquist)");
        if (res.record_too_short) std::cout << "; record shorter than one window";
        if (res.windows_dropped_tie > 0) {
            std::cout << "; dropped " << res.windows_dropped_tie << " tied window(s)";
        }
        std::cout << "; " << res.rows.size() << " windows\n";
        rows.insert(rows.end(), res.rows.begin(), res.rows.end());
    }

    std::stable_sort(rows.begin(), rows.end(), [](const WindowFeatures& a_, const WindowFeatures& b_) {
        return std::tie(a_.subject_id, a_.t_start_s) < std::tie(b_.subject_id, b_.t_start_s);
    });

    const fs::path out_path(a.out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_features_csv(out_path, rows);
    manifest.write(out_path.string() + ".manifest.json");
    std::cout << "wrote " << rows.size() << " feature rows to " << a.out << "\n";
    return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    std::string features;
    std::string out;
    std::string dataset;
    std::string protocol = "both";
    std::string families = "all";
    double test_frac = 0.286;
    std::string svm_kernel = "linear";
    bool mlp_class_weight = false;
};

int cmd_evaluate(const GlobalArgs& g, const EvaluateArgs& a) {
    const fs::path features_path(a.features);
    const auto rows = load_features_csv(features_path);
    if (rows.empty()) throw_data(a.features + " holds no feature rows");

    const std::string dataset =
        a.dataset.empty() ? features_path.stem().string() : a.dataset;
    const auto families = parse_families(a.families);

    EvalOptions opts;
    opts.test_frac = a.test_frac;
    opts.threads = g.threads;
    opts.train.svm_rbf_kernel = a.svm_kernel == "rbf";
    opts.train.mlp_class_weight = a.mlp_class_weight;

    std::vector<BAScore> scores;
    std::vector<SkipEntry> skips;
    if (a.protocol == "both" || a.protocol == "ud") {
        auto res = run_user_dependent(rows, dataset, families, g.seed, opts);
        scores.insert(scores.end(), res.scores.begin(), res.scores.end());
        skips.insert(skips.end(), res.skips.begin(), res.skips.end());
    }
    if (a.protocol == "both" || a.protocol == "ui") {
        auto res = run_user_independent(rows, dataset, families, g.seed, opts);
        scores.insert(scores.end(), res.scores.begin(), res.scores.end());
        skips.insert(skips.end(), res.skips.begin(), res.skips.end());
    }

    const auto family_rank = [](Family f) {
        const auto fams = all_families();
        return std::distance(fams.begin(), std::find(fams.begin(), fams.end(), f));
    };
    std::stable_sort(scores.begin(), scores.end(), [&](const BAScore& s1, const BAScore& s2) {
        return std::tuple(s1.dataset, s1.subject_id, family_rank(s1.family),
                          protocol_name(s1.protocol)) <
               std::tuple(s2.dataset, s2.subject_id, family_rank(s2.family),
                          protocol_name(s2.protocol));
    });

    const fs::path out_path(a.out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_scores_csv(out_path, scores);

    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.seed = g.seed;
    manifest.feature_set_version = kFeatureSetVersion;
    manifest.grid_version = kGridVersion;
    manifest.created_at = current_timestamp();
    manifest.add_input(features_path);
    manifest.config = {
        {"dataset", dataset},
        {"protocol", a.protocol},
        {"families", a.families},
        {"test_frac", fmt(a.test_frac)},
        {"svm_kernel", a.svm_kernel},
        {"mlp_class_weight", a.mlp_class_weight ? "true" : "false"},
    };
    manifest.write(out_path.string() + ".manifest.json");

    const fs::path skips_path = out_path.string() + ".skips.csv";
    write_skips_csv(skips_path, skips);
    std::cout << "wrote " << scores.size() << " scores to " << a.out << " ("
              << skips.size() << " skip(s) logged)\n";
    return 0;
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
    std::vector<std::string> scores;
    std::string out = "report.json";
    std::string plots;
    int hypothesis = 1;
    double alpha1 = 0.001;
    double alpha2 = 0.05;
    double ci_level = -1.0; // <0: derive from the hypothesis defaults
    std::string group_a;
    std::string group_b;
    std::string ad_table = "paper";
};

nlohmann::ordered_json json_bound(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nlohmann::ordered_json normality_json(const NormalityReport& r) {
    return {{"shapiro_w", r.shapiro_w},
            {"shapiro_p", r.shapiro_p},
            {"ad_statistic", r.ad_statistic},
            {"ad_critical_005", r.ad_critical_005},
            {"normal_at_005", r.normal_at_005}};
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_qq_csv(const fs::path& path, const std::vector<QqPoint>& points) {
    std::ofstream out(path);
    if (!out) throw_data("cannot write " + path.string());
    out << "theoretical_q,sample_q\n";
    for (const QqPoint& p : points) {
        out << fmt(p.theoretical_q) << ',' << fmt(p.sample_q) << '\n';
    }
}

void write_hist_csv(const fs::path& path, const std::vector<HistogramBin>& bins) {
    std::ofstream out(path);
    if (!out) throw_data("cannot write " + path.string());
    out << "bin_left,bin_right,count\n";
    for (const HistogramBin& b : bins) {
        out << fmt(b.left) << ',' << fmt(b.right) << ',' << b.count << '\n';
    }
}

int cmd_compare(const GlobalArgs& g, const CompareArgs& a) {
    std::vector<BAScore> all;
    RunManifest manifest;
    manifest.command = "compare";
    manifest.seed = g.seed;
    manifest.feature_set_version = kFeatureSetVersion;
    manifest.grid_version = kGridVersion;
    manifest.created_at = current_timestamp();
    for (const std::string& file : a.scores) {
        manifest.add_input(file);
        const auto scores = load_scores_csv(file);
        all.insert(all.end(), scores.begin(), scores.end());
    }
    if (all.empty()) throw_data("score tables are empty");

    const AdTable table = a.ad_table == "stephens" ? AdTable::stephens : AdTable::paper;
    HypothesisReport report;
    if (a.hypothesis == 1) {
        std::vector<BAScore> ud, ui;
        for (const BAScore& s : all) {
            (s.protocol == Protocol::user_dependent ? ud : ui).push_back(s);
        }
        Hypothesis1Options opts;
        opts.alpha = a.alpha1;
        if (a.ci_level > 0.0) opts.ci_level = a.ci_level;
        opts.ad_table = table;
        report = run_hypothesis1(ud, ui, opts);
    } else {
        std::string name_a = a.group_a, name_b = a.group_b;
        if (name_a.empty() || name_b.empty()) {
            std::vector<std::string> datasets;
            for (const BAScore& s : all) {
                if (std::find(datasets.begin(), datasets.end(), s.dataset) == datasets.end()) {
                    datasets.push_back(s.dataset);
                }
            }
            if (datasets.size() != 2) {
                throw_usage("--hypothesis 2 needs --group-a/--group-b unless exactly two "
                            "datasets are present");
            }
            std::sort(datasets.begin(), datasets.end());
            name_a = datasets[0];
            name_b = datasets[1];
        }
        // Only user-dependent scores enter the resolution comparison.
        std::vector<BAScore> ga, gb;
        for (const BAScore& s : all) {
            if (s.protocol != Protocol::user_dependent) continue;
            if (s.dataset == name_a) ga.push_back(s);
            else if (s.dataset == name_b) gb.push_back(s);
        }
        if (ga.empty() || gb.empty()) {
            throw_protocol("hypothesis 2: no user-dependent scores for '" + name_a +
                           "' / '" + name_b + "'");
        }
        Hypothesis2Options opts;
        opts.alpha = a.alpha2;
        if (a.ci_level > 0.0) opts.ci_level = a.ci_level;
        opts.ad_table = table;
        report = run_hypothesis2(ga, gb, opts);
    }

    manifest.config = {
        {"hypothesis", std::to_string(a.hypothesis)},
        {"alpha1", fmt(a.alpha1)},
        {"alpha2", fmt(a.alpha2)},
        {"ci_level", fmt(report.test.ci_level)},
        {"ad_table", a.ad_table},
        {"group_a", report.group_a.name},
        {"group_b", report.group_b.name},
    };

    const fs::path out_path(a.out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    const fs::path plot_dir = a.plots.empty()
        ? (out_path.has_parent_path() ? out_path.parent_path() : fs::path("."))
        : fs::path(a.plots);
    fs::create_directories(plot_dir);

    write_qq_csv(plot_dir / ("qq_" + report.group_a.name + ".csv"), report.group_a.qq);
    write_qq_csv(plot_dir / ("qq_" + report.group_b.name + ".csv"), report.group_b.qq);
    write_hist_csv(plot_dir / "hist_diff.csv", report.diff_histogram);

    const HypothesisTestResult& t = report.test;
    nlohmann::ordered_json j;
    j["report"] = "hypothesis" + std::to_string(report.hypothesis);
    j["test"] = {
        {"name", t.test_name},
        {"alternative", alternative_name(t.alternative)},
        {"statistic_u", t.statistic},
        {"rank_sum_w", t.rank_sum_w},
        {"p_value", t.p_value},
        {"alpha", t.alpha},
        {"exact", t.exact},
        {"n1", t.n1},
        {"n2", t.n2},
        {"ci_level", t.ci_level},
        {"ci_low", json_bound(t.ci_low)},
        {"ci_high", json_bound(t.ci_high)},
        {"hodges_lehmann", t.point_estimate},
        {"effect_size", t.effect_size ? nlohmann::ordered_json(*t.effect_size)
                                      : nlohmann::ordered_json(nullptr)},
        {"reject_null", t.reject_null},
    };
    j["mirrored_orientation"] = {
        {"note", report.group_b.name + " minus " + report.group_a.name},
        {"statistic_u", report.mirrored_statistic},
        {"hodges_lehmann", report.mirrored_hl},
        {"ci_low", json_bound(report.mirrored_ci_low)},
        {"ci_high", json_bound(report.mirrored_ci_high)},
    };
    j["groups"] = nlohmann::ordered_json::object();
    for (const GroupAnalysis* grp : {&report.group_a, &report.group_b}) {
        j["groups"][grp->name] = {
            {"n", grp->values.size()},
            {"median", median_of(grp->values)},
            {"normality", normality_json(grp->normality)},
        };
    }
    j["difference_normality"] = normality_json(report.diff_normality);
    j["decision"] = report.decision;
    j["manifest_hash"] = manifest.hash();

    std::ofstream out(out_path);
    if (!out) throw_data("cannot write " + a.out);
    out << j.dump(2) << '\n';
    manifest.write(out_path.string() + ".manifest.json");

    std::cout << report.decision << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EDA stress-detection laboratory"};
    app.set_config("--config", "", "Read options from an INI file");
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--seed", g.seed, "Global RNG seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads for evaluation")
        ->capture_default_str();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic EDA corpus");
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_flag("--force", synth.force, "Write into a non-empty directory");
    synth_cmd->add_option("--subjects", synth.subjects)->capture_default_str();
    synth_cmd->add_option("--fs", synth.fs, "Sampling rate (Hz)")->capture_default_str();
    synth_cmd->add_option("--segments", synth.segments, "Alternating segments")->capture_default_str();
    synth_cmd->add_option("--segment-s", synth.segment_s, "Segment length (s)")->capture_default_str();
    synth_cmd->add_option("--stress-rate", synth.stress_rate, "SCR events/min under stress")->capture_default_str();
    synth_cmd->add_option("--nonstress-rate", synth.nonstress_rate, "SCR events/min at rest")->capture_default_str();
    synth_cmd->add_option("--amp-stress", synth.amp_stress, "SCR amplitude range under stress (uS)");
    synth_cmd->add_option("--amp-nonstress", synth.amp_nonstress, "SCR amplitude range at rest (uS)");
    synth_cmd->add_option("--baseline", synth.baseline, "Per-subject baseline SCL range (uS)");
    synth_cmd->add_option("--noise-std", synth.noise_std, "Gaussian noise std (uS)")->capture_default_str();
    synth_cmd->add_option("--rate-spread", synth.rate_spread, "Per-subject event-rate multiplier range");
    synth_cmd->add_option("--amp-spread", synth.amp_spread, "Per-subject amplitude multiplier range");

    ExtractArgs extract;
    auto* extract_cmd = app.add_subcommand("extract", "Extract window features from a corpus");
    extract_cmd->add_option("--in", extract.in, "Corpus directory")->required();
    extract_cmd->add_option("--out", extract.out, "Feature CSV path")->required();
    extract_cmd->add_option("--window-s", extract.window_s)->capture_default_str();
    extract_cmd->add_option("--shift-s", extract.shift_s)->capture_default_str();

    EvaluateArgs evaluate;
    auto* eval_cmd = app.add_subcommand("evaluate", "Train and score stress detectors");
    eval_cmd->add_option("--features", evaluate.features, "Feature CSV")->required();
    eval_cmd->add_option("--out", evaluate.out, "Score table CSV path")->required();
    eval_cmd->add_option("--dataset", evaluate.dataset, "Dataset name (default: file stem)");
    eval_cmd->add_option("--protocol", evaluate.protocol, "ud, ui, or both")
        ->check(CLI::IsMember({"ud", "ui", "both"}))->capture_default_str();
    eval_cmd->add_option("--families", evaluate.families, "all or comma list (lr,rf,svm,mlp,knn)")
        ->capture_default_str();
    eval_cmd->add_option("--test-frac", evaluate.test_frac, "Stratified holdout test fraction")
        ->capture_default_str();
    eval_cmd->add_option("--svm-kernel", evaluate.svm_kernel, "linear or rbf")
        ->check(CLI::IsMember({"linear", "rbf"}))->capture_default_str();
    eval_cmd->add_flag("--mlp-class-weight", evaluate.mlp_class_weight,
                       "Weight the MLP loss by class balance");

    CompareArgs compare;
    auto* compare_cmd = app.add_subcommand("compare", "Run a hypothesis test on score tables");
    compare_cmd->add_option("--scores", compare.scores, "Score table CSV(s)")->required();
    compare_cmd->add_option("--out", compare.out, "Report JSON path")->capture_default_str();
    compare_cmd->add_option("--plots", compare.plots, "Plot-data directory (default: with report)");
    compare_cmd->add_option("--hypothesis", compare.hypothesis, "1 or 2")
        ->check(CLI::IsMember({1, 2}))->capture_default_str();
    compare_cmd->add_option("--alpha1", compare.alpha1, "Significance for hypothesis 1")
        ->capture_default_str();
    compare_cmd->add_option("--alpha2", compare.alpha2, "Significance for hypothesis 2")
        ->capture_default_str();
    compare_cmd->add_option("--ci-level", compare.ci_level, "Confidence level override");
    compare_cmd->add_option("--group-a", compare.group_a, "Hypothesis 2: first dataset");
    compare_cmd->add_option("--group-b", compare.group_b, "Hypothesis 2: second dataset");
    compare_cmd->add_option("--ad-table", compare.ad_table, "paper or stephens")
        ->check(CLI::IsMember({"paper", "stephens"}))->capture_default_str();

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed()) return cmd_synth(g, synth);
        if (extract_cmd->parsed()) return cmd_extract(g, extract);
        if (eval_cmd->parsed()) return cmd_evaluate(g, evaluate);
        if (compare_cmd->parsed()) return cmd_compare(g, compare);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
