#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "portagrad/audio.hpp"

namespace portagrad {

enum class WindowKind { hann, hamming, blackman, rect };

const char* window_kind_name(WindowKind kind);
WindowKind parse_window_kind(const std::string& name);  // throws std::invalid_argument

struct SpectroConfig {
    std::size_t window_size = 4096;  // power of two
    std::size_t hop_size = 128;      // 0 < hop <= window
    WindowKind window_kind = WindowKind::hann;
    double freq_min = 60.0;
    double freq_max = 1400.0;
    // Seconds per frame; when > 0 it overrides hop_size via round(res * rate).
    double target_time_res = 0.0;

    // Band wide enough for fundamentals of bowed strings and voice.
    static SpectroConfig fundamental_defaults() { return {}; }

    // Upper-partial display band matching archival spectrogram figures.
    static SpectroConfig overtone_defaults() {
        SpectroConfig c;
        c.freq_min = 3600.0;
        c.freq_max = 11000.0;
        return c;
    }
};

// Linear magnitudes, frame-major. A unit-amplitude sine at a bin center
// yields a peak magnitude of ~1.0 (window-gain normalized).
struct Spectrogram {
    std::size_t n_frames = 0;
    std::size_t n_bins = 0;
    std::vector<double> mags;         // n_frames * n_bins
    std::vector<double> frame_times;  // window-center seconds
    std::vector<double> bin_freqs;    // Hz, ascending
    double sample_rate = 0.0;
    std::size_t window_size = 0;
    std::size_t hop_size = 0;
    double freq_min = 0.0;
    double freq_max = 0.0;
    double gain_db = 0.0;  // cumulative gain applied after analysis
    WindowKind window_kind = WindowKind::hann;  // taper the magnitudes came from

    double at(std::size_t frame, std::size_t bin) const { return mags[frame * n_bins + bin]; }
    double& at(std::size_t frame, std::size_t bin) { return mags[frame * n_bins + bin]; }
    double frame_step_s() const { return sample_rate > 0.0 ? hop_size / sample_rate : 0.0; }
};

// Frames are complete windows only: 1 + floor((n - window) / hop) of them.
// Throws std::invalid_argument on bad config or a buffer shorter than one window.
Spectrogram compute_spectrogram(const SampleBuffer& buffer, const SpectroConfig& config);

// Scales every magnitude by 10^(delta_db/20) and accumulates gain_db.
Spectrogram apply_gain(const Spectrogram& spec, double delta_db);

// 8-bit binary PGM, row 0 = highest frequency, dB mapping over db_range below
// the image peak. height rows; one column per frame.
void write_pgm(const Spectrogram& spec, const std::string& path, std::size_t height = 800,
               double db_range = 60.0);

}  // namespace portagrad
