#include "edastress/synthetic.hpp"

#include "edastress/errors.hpp"
#include "edastress/prng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace edastress {

std::vector<Segment> SyntheticConfig::default_plan(int n_segments, double segment_s) {
    std::vector<Segment> plan;
    plan.reserve(static_cast<std::size_t>(n_segments));
    for (int i = 0; i < n_segments; ++i) {
        plan.push_back({segment_s, static_cast<std::uint8_t>(i % 2)});
    }
    return plan;
}

void SyntheticConfig::validate() const {
    if (n_subjects <= 0) throw_data("synthetic config: n_subjects must be positive");
    if (sampling_rate_hz <= 0.0) throw_data("synthetic config: sampling rate must be positive");
    if (!(scr_rate_stress_per_min > scr_rate_nonstress_per_min)) {
        throw_data("synthetic config: stress SCR rate must exceed non-stress rate");
    }
    if (noise_std_us < 0.0) throw_data("synthetic config: noise std must be non-negative");
    for (const auto& [lo, hi] : {baseline_scl_us, amp_stress_us, amp_nonstress_us,
                                 subject_rate_scale, subject_amp_scale}) {
        if (lo > hi || lo < 0.0) throw_data("synthetic config: degenerate range");
    }
    for (const Segment& seg : segment_plan) {
        if (seg.duration_s <= 0.0) throw_data("synthetic config: zero-duration segment");
        if (seg.label > 1) throw_data("synthetic config: segment label must be 0 or 1");
    }
}

namespace {

constexpr double kRiseSigmaS = 1.0 / 3.0; // half-Gaussian rise, ~1 s total
constexpr double kDecayTauS = 3.0;

void add_scr_pulse(std::vector<double>& signal, double fs, double t_event,
                   double amplitude) {
    const double t_max = t_event + 8.0 * kDecayTauS;
    const double t_min = t_event - 4.0 * 3.0 * kRiseSigmaS;
    const auto i_begin = static_cast<std::ptrdiff_t>(std::ceil(std::max(0.0, t_min) * fs));
    const auto i_end = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(signal.size()),
        static_cast<std::ptrdiff_t>(std::floor(t_max * fs)) + 1);
    for (std::ptrdiff_t i = i_begin; i < i_end; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double dt = t - t_event;
        const double v = dt >= 0.0
            ? amplitude * std::exp(-dt / kDecayTauS)
            : amplitude * std::exp(-dt * dt / (2.0 * kRiseSigmaS * kRiseSigmaS));
        signal[static_cast<std::size_t>(i)] += v;
    }
}

} // namespace

std::vector<SignalRecord> generate_synthetic(const SyntheticConfig& config) {
    SyntheticConfig cfg = config;
    if (cfg.segment_plan.empty()) cfg.segment_plan = SyntheticConfig::default_plan();
    cfg.validate();

    double total_s = 0.0;
    for (const Segment& seg : cfg.segment_plan) total_s += seg.duration_s;
    const auto n_samples = static_cast<std::size_t>(std::llround(total_s * cfg.sampling_rate_hz));
    if (n_samples == 0) throw_data("synthetic config: plan too short for sampling rate");

    std::vector<SignalRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.n_subjects));

    for (int subject = 0; subject < cfg.n_subjects; ++subject) {
        // Independent streams per purpose so adding e.g. more noise samples
        // never shifts the event draws.
        Rng rng_base(derive_seed(cfg.rng_seed, fnv1a64("base"), static_cast<std::uint64_t>(subject)));
        Rng rng_events(derive_seed(cfg.rng_seed, fnv1a64("events"), static_cast<std::uint64_t>(subject)));
        Rng rng_noise(derive_seed(cfg.rng_seed, fnv1a64("noise"), static_cast<std::uint64_t>(subject)));

        const double baseline = rng_base.uniform(cfg.baseline_scl_us.first, cfg.baseline_scl_us.second);
        const double rate_scale = rng_base.uniform(cfg.subject_rate_scale.first, cfg.subject_rate_scale.second);
        const double amp_scale = rng_base.uniform(cfg.subject_amp_scale.first, cfg.subject_amp_scale.second);

        SignalRecord rec;
        char name[16];
        std::snprintf(name, sizeof(name), "s%02d", subject + 1);
        rec.subject_id = name;
        rec.device = Device::synthetic;
        rec.sampling_rate_hz = cfg.sampling_rate_hz;
        rec.samples.assign(n_samples, baseline);
        rec.labels.assign(n_samples, 0);

        double seg_start = 0.0;
        for (const Segment& seg : cfg.segment_plan) {
            const double seg_end = seg_start + seg.duration_s;
            const auto i0 = static_cast<std::size_t>(std::llround(seg_start * cfg.sampling_rate_hz));
            const auto i1 = std::min(n_samples, static_cast<std::size_t>(std::llround(seg_end * cfg.sampling_rate_hz)));
            std::fill(rec.labels.begin() + static_cast<std::ptrdiff_t>(i0),
                      rec.labels.begin() + static_cast<std::ptrdiff_t>(i1), seg.label);

            const double rate_per_s = rate_scale / 60.0 *
                (seg.label ? cfg.scr_rate_stress_per_min : cfg.scr_rate_nonstress_per_min);
            const auto& amp_range = seg.label ? cfg.amp_stress_us : cfg.amp_nonstress_us;
            if (rate_per_s > 0.0) {
                double t = seg_start + rng_events.exponential(rate_per_s);
                while (t < seg_end) {
                    const double amp = amp_scale * rng_events.uniform(amp_range.first, amp_range.second);
                    add_scr_pulse(rec.samples, cfg.sampling_rate_hz, t, amp);
                    t += rng_events.exponential(rate_per_s);
                }
            }
            seg_start = seg_end;
        }

        if (cfg.noise_std_us > 0.0) {
            for (double& s : rec.samples) s += rng_noise.normal(0.0, cfg.noise_std_us);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace edastress
