#include "portagrad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace portagrad {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void add_noise_and_finalize(std::vector<double>& signal, double amplitude, double snr_db,
                            std::uint64_t seed, SampleBuffer& out) {
    double peak = 0.0;
    for (double v : signal) peak = std::max(peak, std::abs(v));
    const double scale = peak > 0.0 ? amplitude / peak : 0.0;
    for (auto& v : signal) v *= scale;

    if (std::isfinite(snr_db)) {
        double power = 0.0;
        for (double v : signal) power += v * v;
        const double rms = std::sqrt(power / static_cast<double>(signal.size()));
        const double sigma = rms * std::pow(10.0, -snr_db / 20.0);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, sigma);
        for (auto& v : signal) v += dist(rng);
    }

    out.samples.resize(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i)
        out.samples[i] = static_cast<float>(std::clamp(signal[i], -1.0, 1.0));
}

// Harmonic stack phase-locked to one master phase; harmonics that would
// cross 90% of Nyquist anywhere in the sweep are dropped.
template <typename FreqFn, typename GateFn>
std::vector<double> render(std::size_t n, double rate, int n_harmonics, double rolloff_db,
                           double f_peak_hz, FreqFn&& freq_at, GateFn&& audible_at) {
    std::vector<double> amps;
    for (int h = 1; h <= n_harmonics; ++h) {
        if (h * f_peak_hz >= 0.45 * rate) break;
        amps.push_back(std::pow(10.0, -rolloff_db * (h - 1) / 20.0));
    }
    if (amps.empty()) throw std::invalid_argument("synth: fundamental exceeds Nyquist margin");

    std::vector<double> signal(n, 0.0);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        if (audible_at(t)) {
            for (std::size_t h = 0; h < amps.size(); ++h)
                signal[i] += amps[h] * std::sin(static_cast<double>(h + 1) * phase);
        }
        phase += kTwoPi * freq_at(t) / rate;
        if (phase > kTwoPi * 1e6) phase = std::fmod(phase, kTwoPi);
    }
    return signal;
}

}  // namespace

std::pair<SampleBuffer, GlideTruth> synth_glide(const GlideSpec& spec) {
    if (!(spec.f_start_hz > 0.0) || !(spec.f_end_hz > 0.0))
        throw std::invalid_argument("synth_glide: frequencies must be positive");
    if (!(spec.glide_s > 0.0) || spec.pre_hold_s < 0.0 || spec.post_hold_s < 0.0)
        throw std::invalid_argument("synth_glide: bad durations");
    if (spec.n_harmonics < 1) throw std::invalid_argument("synth_glide: need >= 1 harmonic");
    if (!(spec.sample_rate > 0.0)) throw std::invalid_argument("synth_glide: bad sample rate");
    if (!(spec.amplitude > 0.0) || spec.amplitude > 1.0)
        throw std::invalid_argument("synth_glide: amplitude must be in (0, 1]");
    if (spec.vibrato_cents < 0.0 || (spec.vibrato_cents > 0.0 && !(spec.vibrato_rate_hz > 0.0)))
        throw std::invalid_argument("synth_glide: bad vibrato");

    const double total_s = spec.pre_hold_s + spec.glide_s + spec.post_hold_s;
    const auto n = static_cast<std::size_t>(std::llround(total_s * spec.sample_rate));
    if (n == 0) throw std::invalid_argument("synth_glide: zero-length signal");

    const double vib_span = std::exp2(spec.vibrato_cents / 1200.0);
    const double f_peak = std::max(spec.f_start_hz, spec.f_end_hz) * vib_span;

    const auto base_freq = [&](double t) {
        if (t <= spec.pre_hold_s) return spec.f_start_hz;
        if (t >= spec.pre_hold_s + spec.glide_s) return spec.f_end_hz;
        const double u = (t - spec.pre_hold_s) / spec.glide_s;
        if (spec.cents_linear)
            return spec.f_start_hz * std::pow(spec.f_end_hz / spec.f_start_hz, u);
        return spec.f_start_hz + u * (spec.f_end_hz - spec.f_start_hz);
    };
    const auto freq_at = [&](double t) {
        double f = base_freq(t);
        if (spec.vibrato_cents > 0.0)
            f *= std::exp2(spec.vibrato_cents * std::sin(kTwoPi * spec.vibrato_rate_hz * t) /
                           1200.0);
        return f;
    };

    std::vector<double> signal =
        render(n, spec.sample_rate, spec.n_harmonics, spec.harmonic_rolloff_db, f_peak, freq_at,
               [](double) { return true; });

    SampleBuffer buf;
    buf.sample_rate = spec.sample_rate;
    add_noise_and_finalize(signal, spec.amplitude, spec.snr_db, spec.noise_seed, buf);

    GlideTruth truth;
    truth.delta_f_hz = std::abs(spec.f_end_hz - spec.f_start_hz);
    truth.gradient_hz_per_s = truth.delta_f_hz / spec.glide_s;
    truth.onset_s = spec.pre_hold_s;
    truth.termination_s = spec.pre_hold_s + spec.glide_s;
    return {std::move(buf), truth};
}

std::pair<SampleBuffer, StepTruth> synth_step(const StepSpec& spec) {
    if (!(spec.f1_hz > 0.0) || !(spec.f2_hz > 0.0))
        throw std::invalid_argument("synth_step: frequencies must be positive");
    if (!(spec.hold_s > 0.0) || spec.gap_s < 0.0)
        throw std::invalid_argument("synth_step: bad durations");
    if (spec.n_harmonics < 1) throw std::invalid_argument("synth_step: need >= 1 harmonic");
    if (!(spec.sample_rate > 0.0)) throw std::invalid_argument("synth_step: bad sample rate");
    if (!(spec.amplitude > 0.0) || spec.amplitude > 1.0)
        throw std::invalid_argument("synth_step: amplitude must be in (0, 1]");

    const double total_s = 2.0 * spec.hold_s + spec.gap_s;
    const auto n = static_cast<std::size_t>(std::llround(total_s * spec.sample_rate));
    const double t_gap_start = spec.hold_s;
    const double t_gap_end = spec.hold_s + spec.gap_s;

    const auto freq_at = [&](double t) { return t < t_gap_start ? spec.f1_hz : spec.f2_hz; };
    const auto audible_at = [&](double t) { return t < t_gap_start || t >= t_gap_end; };

    std::vector<double> signal =
        render(n, spec.sample_rate, spec.n_harmonics, spec.harmonic_rolloff_db,
               std::max(spec.f1_hz, spec.f2_hz), freq_at, audible_at);

    SampleBuffer buf;
    buf.sample_rate = spec.sample_rate;
    add_noise_and_finalize(signal, spec.amplitude, spec.snr_db, spec.noise_seed, buf);

    StepTruth truth;
    truth.kind = TransitionKind::clean_shift;
    truth.gap_s = spec.gap_s;
    truth.shift_time_s = spec.hold_s;
    return {std::move(buf), truth};
}

}  // namespace portagrad
