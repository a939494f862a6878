#include "edastress/features.hpp"

#include "edastress/csv.hpp"
#include "edastress/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace edastress {

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "f01_eda_mean", "f02_eda_std", "f03_eda_min", "f04_eda_max", "f05_eda_range",
        "f06_scl_mean", "f07_scl_std", "f08_scl_min", "f09_scl_max", "f10_scl_range",
        "f11_scr_mean", "f12_scr_std", "f13_scr_min", "f14_scr_max", "f15_scr_range",
        "f16_scr_peak_count", "f17_scr_amp_mean", "f18_scr_amp_max", "f19_scr_amp_std",
        "f20_scr_amp_sum", "f21_scr_rise_mean", "f22_scr_rise_sum", "f23_scr_area_pos",
        "f24_d1_mean_abs", "f25_d2_mean_abs",
    };
    return names;
}

namespace {

// Sliding-window median over [i-h, i+h] clamped to the signal, kept in two
// balanced multisets so 700 Hz records stay O(n log w).
class SlidingMedian {
public:
    void insert(double v) {
        if (low_.empty() || v <= *low_.rbegin()) low_.insert(v);
        else high_.insert(v);
        rebalance();
    }

    void erase(double v) {
        auto it = low_.find(v);
        if (it != low_.end()) low_.erase(it);
        else high_.erase(high_.find(v));
        rebalance();
    }

    double median() const {
        if (low_.size() > high_.size()) return *low_.rbegin();
        return 0.5 * (*low_.rbegin() + *high_.begin());
    }

private:
    void rebalance() {
        while (low_.size() > high_.size() + 1) {
            auto it = std::prev(low_.end());
            high_.insert(*it);
            low_.erase(it);
        }
        while (high_.size() > low_.size()) {
            auto it = high_.begin();
            low_.insert(*it);
            high_.erase(it);
        }
    }

    std::multiset<double> low_;  // max side
    std::multiset<double> high_; // min side
};

double global_median(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

struct BasicStats {
    double mean, std, min, max, range;
};

BasicStats basic_stats(std::span<const double> v) {
    double sum = 0.0, mn = v[0], mx = v[0];
    for (double x : v) {
        sum += x;
        mn = std::min(mn, x);
        mx = std::max(mx, x);
    }
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    return {mean, sd, mn, mx, mx - mn};
}

} // namespace

Decomposition decompose(std::span<const double> samples, double sampling_rate_hz) {
    if (samples.empty()) throw_data("decompose: empty signal");
    if (sampling_rate_hz <= 0.0) throw_data("decompose: sampling rate must be positive");
    for (double s : samples) {
        if (!std::isfinite(s)) throw_data("decompose: non-finite sample");
    }

    const std::size_t n = samples.size();
    const auto half = static_cast<std::size_t>(std::llround(4.0 * sampling_rate_hz));

    Decomposition out;
    out.tonic.resize(n);
    out.phasic.resize(n);

    if (half == 0 || n < half) {
        const double med = global_median(samples);
        for (std::size_t i = 0; i < n; ++i) {
            out.tonic[i] = med;
            out.phasic[i] = samples[i] - med;
        }
        return out;
    }

    SlidingMedian sm;
    std::size_t right = 0; // next index to insert
    std::size_t left = 0;  // smallest index currently inside
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t want_right = std::min(n - 1, i + half);
        while (right <= want_right) sm.insert(samples[right++]);
        const std::size_t want_left = i > half ? i - half : 0;
        while (left < want_left) sm.erase(samples[left++]);
        out.tonic[i] = sm.median();
        out.phasic[i] = samples[i] - out.tonic[i];
    }
    return out;
}

std::vector<ScrEvent> detect_scr_events(std::span<const double> phasic,
                                        double sampling_rate_hz) {
    std::vector<ScrEvent> events;
    const std::size_t n = phasic.size();
    if (n < 2) return events;

    const auto diff = [&](std::size_t i) { return phasic[i + 1] - phasic[i]; };

    std::size_t i = 0;
    while (i + 1 < n) {
        const bool rising = diff(i) > 0.0;
        const bool was_falling = i == 0 || diff(i - 1) <= 0.0;
        if (rising && was_falling) {
            // First local max after the onset.
            std::size_t peak = i + 1;
            while (peak + 1 < n && diff(peak) > 0.0) ++peak;
            const double amplitude = phasic[peak] - phasic[i];
            if (amplitude >= kScrAmplitudeThresholdUs) {
                ScrEvent ev;
                ev.onset_index = i;
                ev.peak_index = peak;
                ev.amplitude = amplitude;
                ev.rise_time_s = static_cast<double>(peak - i) / sampling_rate_hz;
                events.push_back(ev);
            }
            i = peak;
        } else {
            ++i;
        }
    }
    return events;
}

std::array<double, kFeatureCount> compute_features(std::span<const double> raw,
                                                   std::span<const double> tonic,
                                                   std::span<const double> phasic,
                                                   double sampling_rate_hz) {
    if (raw.empty() || raw.size() != tonic.size() || raw.size() != phasic.size()) {
        throw_data("compute_features: channel length mismatch");
    }

    std::array<double, kFeatureCount> f{};
    const BasicStats eda = basic_stats(raw);
    const BasicStats scl = basic_stats(tonic);
    const BasicStats scr = basic_stats(phasic);
    f[0] = eda.mean; f[1] = eda.std; f[2] = eda.min; f[3] = eda.max; f[4] = eda.range;
    f[5] = scl.mean; f[6] = scl.std; f[7] = scl.min; f[8] = scl.max; f[9] = scl.range;
    f[10] = scr.mean; f[11] = scr.std; f[12] = scr.min; f[13] = scr.max; f[14] = scr.range;

    const auto events = detect_scr_events(phasic, sampling_rate_hz);
    f[15] = static_cast<double>(events.size());
    if (!events.empty()) {
        double amp_sum = 0.0, amp_max = 0.0, rise_sum = 0.0;
        for (const ScrEvent& ev : events) {
            amp_sum += ev.amplitude;
            amp_max = std::max(amp_max, ev.amplitude);
            rise_sum += ev.rise_time_s;
        }
        const double k = static_cast<double>(events.size());
        const double amp_mean = amp_sum / k;
        double amp_ss = 0.0;
        for (const ScrEvent& ev : events) amp_ss += (ev.amplitude - amp_mean) * (ev.amplitude - amp_mean);
        f[16] = amp_mean;
        f[17] = amp_max;
        f[18] = std::sqrt(amp_ss / k);
        f[19] = amp_sum;
        f[20] = rise_sum / k;
        f[21] = rise_sum;
    }
    double area = 0.0;
    for (double p : phasic) area += std::max(p, 0.0);
    f[22] = area / sampling_rate_hz;

    const std::size_t n = raw.size();
    if (n >= 2) {
        double s1 = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) s1 += std::abs(raw[i + 1] - raw[i]);
        f[23] = s1 / static_cast<double>(n - 1);
    }
    if (n >= 3) {
        double s2 = 0.0;
        for (std::size_t i = 0; i + 2 < n; ++i) s2 += std::abs(raw[i + 2] - 2.0 * raw[i + 1] + raw[i]);
        f[24] = s2 / static_cast<double>(n - 2);
    }
    return f;
}

ExtractResult extract_features(const SignalRecord& record, const ExtractOptions& opts) {
    record.validate();
    ExtractResult result;

    std::vector<double> signal(record.samples.begin(), record.samples.end());
    if (should_filter(record.sampling_rate_hz, opts.filter_cutoff_hz)) {
        const FilterDesign design = design_butterworth_lowpass(
            opts.filter_order, opts.filter_cutoff_hz, record.sampling_rate_hz);
        signal = apply_filter(design, signal);
        result.filtered = true;
    }

    const Decomposition dec = decompose(signal, record.sampling_rate_hz);
    const WindowPlan plan = window_slices(signal.size(), record.sampling_rate_hz,
                                          opts.window_s, opts.shift_s);
    result.record_too_short = plan.record_too_short;

    for (const Window& w : plan.windows) {
        const auto len = w.end - w.start;
        const std::span<const std::uint8_t> labels(record.labels.data() + w.start, len);
        const auto label = window_label(labels);
        if (!label) {
            ++result.windows_dropped_tie;
            continue;
        }
        WindowFeatures row;
        row.subject_id = record.subject_id;
        row.t_start_s = w.start_time_s;
        row.label = *label;
        row.values = compute_features(
            std::span<const double>(signal.data() + w.start, len),
            std::span<const double>(dec.tonic.data() + w.start, len),
            std::span<const double>(dec.phasic.data() + w.start, len),
            record.sampling_rate_hz);
        result.rows.push_back(std::move(row));
    }
    return result;
}

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<WindowFeatures>& rows) {
    std::ofstream out(path);
    if (!out) throw_data("cannot write " + path.string());
    out << "subject_id,t_start_s,label";
    for (const std::string& name : feature_names()) out << ',' << name;
    out << '\n';
    for (const WindowFeatures& row : rows) {
        out << row.subject_id << ',' << csv::format_double(row.t_start_s) << ','
            << static_cast<int>(row.label);
        for (double v : row.values) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

std::vector<WindowFeatures> load_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open " + path.string());

    std::string expected = "subject_id,t_start_s,label";
    for (const std::string& name : feature_names()) expected += "," + name;

    std::string line;
    if (!std::getline(in, line)) throw_data(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) {
        throw_data(path.string() + ": feature header does not match feature-set " +
                   std::string(kFeatureSetVersion));
    }

    std::vector<WindowFeatures> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        if (fields.size() != 3 + kFeatureCount) {
            throw_data(where + ": expected " + std::to_string(3 + kFeatureCount) + " fields");
        }
        WindowFeatures row;
        row.subject_id = fields[0];
        row.t_start_s = csv::parse_double(fields[1], where);
        const long label = csv::parse_long(fields[2], where);
        if (label != 0 && label != 1) throw_data(where + ": label must be 0 or 1");
        row.label = static_cast<std::uint8_t>(label);
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            row.values[i] = csv::parse_double(fields[3 + i], where);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace edastress
