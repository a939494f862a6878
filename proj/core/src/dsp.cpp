#include "edastress/dsp.hpp"

#include "edastress/errors.hpp"

#include <cmath>

namespace edastress {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

bool should_filter(double sampling_rate_hz, double cutoff_hz) {
    if (sampling_rate_hz <= 0.0 || cutoff_hz <= 0.0) {
        throw_data("should_filter: sampling rate and cutoff must be positive");
    }
    const double normalized = cutoff_hz / (sampling_rate_hz / 2.0);
    return normalized > 0.0 && normalized < 1.0;
}

FilterDesign design_butterworth_lowpass(int order, double cutoff_hz,
                                        double sampling_rate_hz) {
    if (order < 2 || order % 2 != 0) {
        throw_data("butterworth design: order must be even and >= 2");
    }
    if (!should_filter(sampling_rate_hz, cutoff_hz)) {
        throw_data("butterworth design: normalized cutoff outside (0,1)");
    }

    FilterDesign design;
    design.order = order;
    design.cutoff_hz = cutoff_hz;
    design.sampling_rate_hz = sampling_rate_hz;

    // Pre-warped analog cutoff for the bilinear map s = 2(1-z^-1)/(1+z^-1).
    const double warped = 2.0 * std::tan(kPi * cutoff_hz / sampling_rate_hz);

    // Prototype poles come in conjugate pairs; each pair produces one biquad
    // with both zeros at z = -1 and gain fixed so the section's DC gain is 1.
    const int n_pairs = order / 2;
    for (int k = 0; k < n_pairs; ++k) {
        const double theta = kPi * (2.0 * (k + 1) + order - 1.0) / (2.0 * order);
        const std::complex<double> pole_analog =
            warped * std::complex<double>(std::cos(theta), std::sin(theta));
        // Bilinear transform of the pole: z = (2 + p) / (2 - p).
        const std::complex<double> pole_z = (2.0 + pole_analog) / (2.0 - pole_analog);

        Biquad s{};
        s.a1 = -2.0 * pole_z.real();
        s.a2 = std::norm(pole_z);
        const double gain = (1.0 + s.a1 + s.a2) / 4.0;
        s.b0 = gain;
        s.b1 = 2.0 * gain;
        s.b2 = gain;
        if (s.a2 >= 1.0) throw_data("butterworth design: unstable section");
        design.sections.push_back(s);
    }
    return design;
}

std::complex<double> frequency_response(const FilterDesign& design, double f_hz) {
    const double w = 2.0 * kPi * f_hz / design.sampling_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h(1.0, 0.0);
    for (const Biquad& s : design.sections) {
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    }
    return h;
}

std::vector<double> apply_filter(const FilterDesign& design,
                                 std::span<const double> samples) {
    if (samples.empty()) throw_data("apply_filter: empty signal");

    std::vector<double> out(samples.begin(), samples.end());
    for (const Biquad& s : design.sections) {
        double z1 = 0.0, z2 = 0.0; // transposed DF2 state
        for (double& x : out) {
            if (std::isnan(x)) throw_data("apply_filter: NaN in input");
            const double y = s.b0 * x + z1;
            z1 = s.b1 * x - s.a1 * y + z2;
            z2 = s.b2 * x - s.a2 * y;
            x = y;
        }
    }
    return out;
}

WindowPlan window_slices(std::size_t n_samples, double sampling_rate_hz,
                         double window_s, double shift_s) {
    if (sampling_rate_hz <= 0.0) throw_data("window_slices: sampling rate must be positive");
    if (window_s <= 0.0 || shift_s <= 0.0) throw_data("window_slices: window and shift must be positive");

    const auto w = static_cast<std::size_t>(std::llround(window_s * sampling_rate_hz));
    const auto s = static_cast<std::size_t>(std::llround(shift_s * sampling_rate_hz));
    if (w == 0 || s == 0) throw_data("window_slices: window shorter than one sample period");

    WindowPlan plan;
    if (n_samples < w) {
        plan.record_too_short = true;
        return plan;
    }
    const std::size_t count = (n_samples - w) / s + 1;
    plan.windows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Window win;
        win.start = i * s;
        win.end = win.start + w;
        win.start_time_s = static_cast<double>(win.start) / sampling_rate_hz;
        plan.windows.push_back(win);
    }
    return plan;
}

std::optional<std::uint8_t> window_label(std::span<const std::uint8_t> labels) {
    std::size_t ones = 0;
    for (std::uint8_t l : labels) ones += l;
    const std::size_t zeros = labels.size() - ones;
    if (ones == zeros) return std::nullopt;
    return ones > zeros ? std::uint8_t{1} : std::uint8_t{0};
}

} // namespace edastress
