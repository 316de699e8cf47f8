#include "portagrad/spectro.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "portagrad/fft.hpp"

namespace portagrad {
namespace {

std::vector<double> make_window(WindowKind kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    // Periodic forms: the implied period is n, not n - 1.
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        switch (kind) {
            case WindowKind::hann:
                w[i] = 0.5 - 0.5 * std::cos(phase);
                break;
            case WindowKind::hamming:
                w[i] = 0.54 - 0.46 * std::cos(phase);
                break;
            case WindowKind::blackman:
                w[i] = 0.42 - 0.5 * std::cos(phase) + 0.08 * std::cos(2.0 * phase);
                break;
            case WindowKind::rect:
                break;
        }
    }
    return w;
}

}  // namespace

const char* window_kind_name(WindowKind kind) {
    switch (kind) {
        case WindowKind::hann: return "hann";
        case WindowKind::hamming: return "hamming";
        case WindowKind::blackman: return "blackman";
        case WindowKind::rect: return "rect";
    }
    return "hann";
}

WindowKind parse_window_kind(const std::string& name) {
    if (name == "hann") return WindowKind::hann;
    if (name == "hamming") return WindowKind::hamming;
    if (name == "blackman") return WindowKind::blackman;
    if (name == "rect") return WindowKind::rect;
    throw std::invalid_argument("unknown window kind: " + name);
}

Spectrogram compute_spectrogram(const SampleBuffer& buffer, const SpectroConfig& config) {
    const std::size_t w = config.window_size;
    if (w == 0 || (w & (w - 1)) != 0)
        throw std::invalid_argument("spectrogram: window_size must be a power of two");
    if (buffer.sample_rate <= 0.0)
        throw std::invalid_argument("spectrogram: sample rate must be positive");

    std::size_t hop = config.hop_size;
    if (config.target_time_res > 0.0) {
        hop = static_cast<std::size_t>(
            std::max<long long>(1, std::llround(config.target_time_res * buffer.sample_rate)));
    }
    if (hop == 0 || hop > w)
        throw std::invalid_argument("spectrogram: hop must be in (0, window_size]");

    const double nyquist = buffer.sample_rate / 2.0;
    if (!(config.freq_min >= 0.0) || !(config.freq_min < config.freq_max) ||
        !(config.freq_max <= nyquist))
        throw std::invalid_argument("spectrogram: need 0 <= freq_min < freq_max <= nyquist");
    if (buffer.samples.size() < w)
        throw std::invalid_argument("spectrogram: buffer shorter than one window");

    const double bin_width = buffer.sample_rate / static_cast<double>(w);
    const auto bin_lo = static_cast<std::size_t>(std::ceil(config.freq_min / bin_width));
    const auto bin_hi_raw = static_cast<std::size_t>(std::floor(config.freq_max / bin_width));
    const std::size_t bin_hi = std::min(bin_hi_raw, w / 2);
    if (bin_lo > bin_hi)
        throw std::invalid_argument("spectrogram: frequency band contains no bins");

    Spectrogram out;
    out.n_frames = 1 + (buffer.samples.size() - w) / hop;
    out.n_bins = bin_hi - bin_lo + 1;
    out.sample_rate = buffer.sample_rate;
    out.window_size = w;
    out.hop_size = hop;
    out.freq_min = config.freq_min;
    out.freq_max = config.freq_max;
    out.window_kind = config.window_kind;
    out.mags.resize(out.n_frames * out.n_bins);

    out.bin_freqs.resize(out.n_bins);
    for (std::size_t b = 0; b < out.n_bins; ++b)
        out.bin_freqs[b] = static_cast<double>(bin_lo + b) * bin_width;

    const double step = static_cast<double>(hop) / buffer.sample_rate;
    const double t0 = static_cast<double>(w) / (2.0 * buffer.sample_rate);
    out.frame_times.resize(out.n_frames);
    for (std::size_t i = 0; i < out.n_frames; ++i)
        out.frame_times[i] = t0 + static_cast<double>(i) * step;

    const std::vector<double> window = make_window(config.window_kind, w);
    double window_sum = 0.0;
    for (double v : window) window_sum += v;
    const double norm = 2.0 / window_sum;  // unit-amplitude sine -> peak ~1.0

    FftPlan plan(w);
    std::vector<std::complex<double>> work(w);
    for (std::size_t f = 0; f < out.n_frames; ++f) {
        const std::size_t start = f * hop;
        for (std::size_t i = 0; i < w; ++i)
            work[i] = {static_cast<double>(buffer.samples[start + i]) * window[i], 0.0};
        plan.forward(work);
        double* row = out.mags.data() + f * out.n_bins;
        for (std::size_t b = 0; b < out.n_bins; ++b) row[b] = std::abs(work[bin_lo + b]) * norm;
    }
    return out;
}

Spectrogram apply_gain(const Spectrogram& spec, double delta_db) {
    Spectrogram out = spec;
    const double factor = std::pow(10.0, delta_db / 20.0);
    for (auto& m : out.mags) m *= factor;
    out.gain_db = spec.gain_db + delta_db;
    return out;
}

void write_pgm(const Spectrogram& spec, const std::string& path, std::size_t height,
               double db_range) {
    if (height == 0 || db_range <= 0.0)
        throw std::invalid_argument("write_pgm: height and db_range must be positive");

    double max_mag = 0.0;
    for (double m : spec.mags) max_mag = std::max(max_mag, m);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("write_pgm: cannot open " + path);
    f << "P5\n" << spec.n_frames << " " << height << "\n255\n";

    const double row_hz = (spec.freq_max - spec.freq_min) / static_cast<double>(height);
    std::vector<std::uint8_t> row_buf(spec.n_frames);
    for (std::size_t r = 0; r < height; ++r) {
        // Row 0 covers the top of the band; lower rows are lower frequencies.
        const double f_hi = spec.freq_max - static_cast<double>(r) * row_hz;
        const double f_lo = f_hi - row_hz;
        auto lo_it = std::lower_bound(spec.bin_freqs.begin(), spec.bin_freqs.end(), f_lo);
        auto hi_it = std::lower_bound(spec.bin_freqs.begin(), spec.bin_freqs.end(), f_hi);
        auto b_lo = static_cast<std::size_t>(lo_it - spec.bin_freqs.begin());
        auto b_hi = static_cast<std::size_t>(hi_it - spec.bin_freqs.begin());
        if (b_lo == b_hi && spec.n_bins > 0) {
            // No bin falls in this row; sample the nearest bin to the row center.
            const double center = 0.5 * (f_lo + f_hi);
            std::size_t near = std::min(b_lo, spec.n_bins - 1);
            if (near > 0 && std::abs(spec.bin_freqs[near - 1] - center) <
                                std::abs(spec.bin_freqs[near] - center))
                --near;
            b_lo = near;
            b_hi = near + 1;
        }
        for (std::size_t c = 0; c < spec.n_frames; ++c) {
            double m = 0.0;
            for (std::size_t b = b_lo; b < b_hi; ++b) m = std::max(m, spec.at(c, b));
            double v = 0.0;
            if (max_mag > 0.0 && m > 0.0) {
                const double rel_db = 20.0 * std::log10(m / max_mag);
                v = std::clamp(1.0 + rel_db / db_range, 0.0, 1.0);
            }
            row_buf[c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
        f.write(reinterpret_cast<const char*>(row_buf.data()),
                static_cast<std::streamsize>(row_buf.size()));
    }
    if (!f) throw Error("write_pgm: write failure: " + path);
}

}  // namespace portagrad
