#include "edastress/protocol.hpp"

#include "edastress/csv.hpp"
#include "edastress/errors.hpp"
#include "edastress/prng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <thread>
#include <variant>

namespace edastress {

double balanced_accuracy(std::span<const std::uint8_t> y_true,
                         std::span<const std::uint8_t> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw_protocol("balanced_accuracy: length mismatch");
    }
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i]) {
            (y_pred[i] ? tp : fn) += 1;
        } else {
            (y_pred[i] ? fp : tn) += 1;
        }
    }
    if (tp + fn == 0 || tn + fp == 0) {
        throw_protocol("balanced_accuracy: y_true contains a single class");
    }
    if (tp + fn == tn + fp) {
        // Balanced classes: BA reduces to plain accuracy, exactly.
        return static_cast<double>(tp + tn) / static_cast<double>(y_true.size());
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
    return 0.5 * (tpr + tnr);
}

std::string protocol_name(Protocol p) {
    return p == Protocol::user_dependent ? "user_dependent" : "user_independent";
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "user_dependent") return Protocol::user_dependent;
    if (name == "user_independent") return Protocol::user_independent;
    throw_data("unknown protocol '" + name + "'");
}

SplitPlan stratified_split(std::span<const std::uint8_t> labels, double test_frac,
                           std::uint64_t seed) {
    if (!(test_frac > 0.0 && test_frac < 1.0)) {
        throw_protocol("stratified_split: test fraction must lie in (0,1)");
    }
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    if (by_class[0].size() < 2 || by_class[1].size() < 2) {
        throw_protocol("stratified_split: each class needs at least 2 windows");
    }

    Rng rng(derive_seed(seed, fnv1a64("stratified-split")));
    SplitPlan plan;
    plan.strategy = SplitStrategy::stratified_holdout;
    for (auto& cls : by_class) {
        const auto n_c = cls.size();
        auto n_test = static_cast<std::size_t>(
            std::lround(test_frac * static_cast<double>(n_c)));
        n_test = std::clamp<std::size_t>(n_test, 1, n_c - 1);
        rng.shuffle(cls);
        for (std::size_t i = 0; i < n_c; ++i) {
            (i < n_test ? plan.test_indices : plan.train_indices).push_back(cls[i]);
        }
    }
    std::sort(plan.train_indices.begin(), plan.train_indices.end());
    std::sort(plan.test_indices.begin(), plan.test_indices.end());
    return plan;
}

std::vector<SplitPlan> logo_splits(std::span<const std::string> row_subjects) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < row_subjects.size(); ++i) {
        groups[row_subjects[i]].push_back(i);
    }
    if (groups.size() < 2) {
        throw_protocol("leave-one-group-out needs at least 2 subjects");
    }
    std::vector<SplitPlan> plans;
    plans.reserve(groups.size());
    for (const auto& [subject, test_idx] : groups) {
        SplitPlan plan;
        plan.strategy = SplitStrategy::logo;
        plan.held_out_subject = subject;
        plan.test_indices = test_idx;
        for (const auto& [other, idx] : groups) {
            if (other == subject) continue;
            plan.train_indices.insert(plan.train_indices.end(), idx.begin(), idx.end());
        }
        std::sort(plan.train_indices.begin(), plan.train_indices.end());
        plans.push_back(std::move(plan));
    }
    return plans;
}

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto n_threads = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct SubjectRows {
    std::string subject;
    std::vector<std::size_t> idx;
};

std::vector<SubjectRows> group_by_subject(const std::vector<WindowFeatures>& rows) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) groups[rows[i].subject_id].push_back(i);
    std::vector<SubjectRows> out;
    out.reserve(groups.size());
    for (auto& [subject, idx] : groups) out.push_back({subject, std::move(idx)});
    return out;
}

Matrix make_matrix(const std::vector<WindowFeatures>& rows, std::span<const std::size_t> idx) {
    Matrix x(idx.size(), kFeatureCount);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto& v = rows[idx[i]].values;
        std::copy(v.begin(), v.end(), x.row(i));
    }
    return x;
}

std::vector<std::uint8_t> make_labels(const std::vector<WindowFeatures>& rows,
                                      std::span<const std::size_t> idx) {
    std::vector<std::uint8_t> y(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) y[i] = rows[idx[i]].label;
    return y;
}

using UnitResult = std::variant<std::monostate, BAScore, SkipEntry>;

} // namespace

EvalResult run_user_dependent(const std::vector<WindowFeatures>& rows,
                              const std::string& dataset,
                              const std::vector<Family>& families,
                              std::uint64_t seed, const EvalOptions& options) {
    const auto subjects = group_by_subject(rows);
    const std::size_t n_units = subjects.size() * families.size();
    std::vector<UnitResult> results(n_units);

    parallel_for(n_units, options.threads, [&](std::size_t unit) {
        const auto& subj = subjects[unit / families.size()];
        const Family family = families[unit % families.size()];
        const std::string fam = family_name(family);
        try {
            const auto y_all = make_labels(rows, subj.idx);
            const SplitPlan split = stratified_split(
                y_all, options.test_frac, derive_seed(seed, fnv1a64("ud-split"), fnv1a64(subj.subject)));

            std::vector<std::size_t> train_idx, test_idx;
            for (std::size_t i : split.train_indices) train_idx.push_back(subj.idx[i]);
            for (std::size_t i : split.test_indices) test_idx.push_back(subj.idx[i]);

            const Matrix x_train = make_matrix(rows, train_idx);
            const Matrix x_test = make_matrix(rows, test_idx);
            const auto y_train = make_labels(rows, train_idx);
            const auto y_test = make_labels(rows, test_idx);

            const TrainedModel model = grid_search(
                family, x_train, y_train,
                derive_seed(seed, fnv1a64("ud"), fnv1a64(subj.subject), static_cast<std::uint64_t>(family)),
                options.train);
            const double ba = balanced_accuracy(y_test, predict(model, x_test));
            results[unit] = BAScore{dataset, subj.subject, family, Protocol::user_dependent, ba};
        } catch (const Error& e) {
            results[unit] = SkipEntry{dataset, subj.subject, fam, "user_dependent", e.what()};
        }
    });

    EvalResult out;
    for (const auto& r : results) {
        if (std::holds_alternative<BAScore>(r)) out.scores.push_back(std::get<BAScore>(r));
        else if (std::holds_alternative<SkipEntry>(r)) out.skips.push_back(std::get<SkipEntry>(r));
    }
    return out;
}

EvalResult run_user_independent(const std::vector<WindowFeatures>& rows,
                                const std::string& dataset,
                                const std::vector<Family>& families,
                                std::uint64_t seed, const EvalOptions& options) {
    std::vector<std::string> row_subjects;
    row_subjects.reserve(rows.size());
    for (const auto& r : rows) row_subjects.push_back(r.subject_id);
    const auto plans = logo_splits(row_subjects);

    const std::size_t n_units = plans.size() * families.size();
    std::vector<UnitResult> results(n_units);

    parallel_for(n_units, options.threads, [&](std::size_t unit) {
        const auto& plan = plans[unit / families.size()];
        const Family family = families[unit % families.size()];
        const std::string fam = family_name(family);
        try {
            const Matrix x_train = make_matrix(rows, plan.train_indices);
            const Matrix x_test = make_matrix(rows, plan.test_indices);
            const auto y_train = make_labels(rows, plan.train_indices);
            const auto y_test = make_labels(rows, plan.test_indices);

            const TrainedModel model = grid_search(
                family, x_train, y_train,
                derive_seed(seed, fnv1a64("ui"), fnv1a64(plan.held_out_subject),
                            static_cast<std::uint64_t>(family)),
                options.train);
            const double ba = balanced_accuracy(y_test, predict(model, x_test));
            results[unit] = BAScore{dataset, plan.held_out_subject, family,
                                    Protocol::user_independent, ba};
        } catch (const Error& e) {
            results[unit] = SkipEntry{dataset, plan.held_out_subject, fam,
                                      "user_independent", e.what()};
        }
    });

    EvalResult out;
    for (const auto& r : results) {
        if (std::holds_alternative<BAScore>(r)) out.scores.push_back(std::get<BAScore>(r));
        else if (std::holds_alternative<SkipEntry>(r)) out.skips.push_back(std::get<SkipEntry>(r));
    }
    return out;
}

void write_scores_csv(const std::filesystem::path& path, const std::vector<BAScore>& scores) {
    std::ofstream out(path);
    if (!out) throw_data("cannot write " + path.string());
    out << "dataset,subject_id,family,protocol,balanced_accuracy\n";
    for (const BAScore& s : scores) {
        out << s.dataset << ',' << s.subject_id << ',' << family_name(s.family) << ','
            << protocol_name(s.protocol) << ',' << csv::format_double(s.balanced_accuracy)
            << '\n';
    }
}

std::vector<BAScore> load_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw_data(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "dataset,subject_id,family,protocol,balanced_accuracy") {
        throw_data(path.string() + ": unexpected score-table header");
    }
    std::vector<BAScore> scores;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        if (fields.size() != 5) throw_data(where + ": expected 5 fields");
        BAScore s;
        s.dataset = fields[0];
        s.subject_id = fields[1];
        try {
            s.family = family_from_name(fields[2]);
        } catch (const Error&) {
            throw_data(where + ": unknown model family '" + fields[2] + "'");
        }
        s.protocol = protocol_from_name(fields[3]);
        s.balanced_accuracy = csv::parse_double(fields[4], where);
        if (!(s.balanced_accuracy >= 0.0 && s.balanced_accuracy <= 1.0)) {
            throw_data(where + ": balanced accuracy outside [0,1]");
        }
        scores.push_back(std::move(s));
    }
    return scores;
}

void write_skips_csv(const std::filesystem::path& path, const std::vector<SkipEntry>& skips) {
    std::ofstream out(path);
    if (!out) throw_data("cannot write " + path.string());
    out << "dataset,subject_id,family,protocol,reason\n";
    for (const SkipEntry& s : skips) {
        std::string reason = s.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        out << s.dataset << ',' << s.subject_id << ',' << s.family << ','
            << s.protocol << ',' << reason << '\n';
    }
}

} // namespace edastress
