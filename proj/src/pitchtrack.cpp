#include "portagrad/pitchtrack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "portagrad/strnum.hpp"

namespace portagrad {
namespace {

double row_median(const double* row, std::size_t n, std::vector<double>& scratch) {
    scratch.assign(row, row + n);
    const std::size_t mid = n / 2;
    std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
    double m = scratch[mid];
    if (n % 2 == 0) {
        std::nth_element(scratch.begin(), scratch.begin() + mid - 1, scratch.begin() + mid);
        m = 0.5 * (m + scratch[mid - 1]);
    }
    return m;
}

// Quadratic vertex through log magnitudes, written in ratio form so a uniform
// gain cancels exactly. Returns the sub-bin offset in [-0.5, 0.5].
double parabolic_offset(double left, double center, double right) {
    if (left <= 0.0 || center <= 0.0 || right <= 0.0) return 0.0;
    const double a = std::log(left / center);
    const double c = std::log(right / center);
    const double denom = a + c;
    if (!(denom < 0.0)) return 0.0;  // not concave at the peak
    return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

// Sub-bin peak offset. A Hann mainlobe obeys |X(k+1)|/|X(k)| = (1+d)/(2-d),
// which inverts exactly; the parabola carries a half-bin-periodic bias that
// tilts line fits spanning less than a bin. The neighbor ratio of a true
// Hann peak never drops below ~0.5, so smaller ratios (isolated spikes,
// synthetic test data) and non-Hann tapers use the parabola.
double peak_offset(WindowKind kind, double left, double center, double right) {
    if (kind == WindowKind::hann && center > 0.0) {
        const bool to_right = right >= left;
        const double ratio = (to_right ? right : left) / center;
        if (ratio >= 0.35) {
            const double d = std::clamp((2.0 * ratio - 1.0) / (ratio + 1.0), 0.0, 0.5);
            return to_right ? d : -d;
        }
    }
    return parabolic_offset(left, center, right);
}

}  // namespace

PitchTrack track_pitch(const Spectrogram& spec, const TrackParams& params) {
    if (params.rel_floor < 0.0 || params.abs_floor < 0.0 || params.max_jump_octaves <= 0.0)
        throw std::invalid_argument("track_pitch: floors must be >= 0, max jump > 0");

    PitchTrack out;
    out.times = spec.frame_times;
    out.freqs.assign(spec.n_frames, 0.0);
    out.voiced.assign(spec.n_frames, 0);
    out.confidence.assign(spec.n_frames, 0.0);
    if (spec.n_bins == 0) return out;

    const double bin_width =
        spec.n_bins > 1 ? spec.bin_freqs[1] - spec.bin_freqs[0]
                        : spec.sample_rate / static_cast<double>(spec.window_size);

    std::vector<double> scratch;
    double prev_freq = 0.0;
    bool prev_voiced = false;

    for (std::size_t f = 0; f < spec.n_frames; ++f) {
        const double* row = spec.mags.data() + f * spec.n_bins;
        std::size_t peak = 0;
        for (std::size_t b = 1; b < spec.n_bins; ++b)
            if (row[b] > row[peak]) peak = b;

        const double median = row_median(row, spec.n_bins, scratch);
        const double floor_eff = std::max(params.abs_floor, params.rel_floor * median);
        bool voiced = row[peak] > 0.0 && row[peak] >= floor_eff;

        if (voiced && prev_voiced) {
            const double jump = std::abs(std::log2(spec.bin_freqs[peak] / prev_freq));
            if (jump > params.max_jump_octaves) {
                // Octave-error suppression: prefer a nearby peak at half floor.
                const double span = std::exp2(params.max_jump_octaves);
                const double lo = prev_freq / span;
                const double hi = prev_freq * span;
                std::size_t best = spec.n_bins;
                for (std::size_t b = 0; b < spec.n_bins; ++b) {
                    if (spec.bin_freqs[b] < lo || spec.bin_freqs[b] > hi) continue;
                    if (best == spec.n_bins || row[b] > row[best]) best = b;
                }
                if (best != spec.n_bins && row[best] > 0.0 && row[best] >= 0.5 * floor_eff)
                    peak = best;
                else
                    voiced = false;
            }
        }

        if (voiced) {
            double delta = 0.0;
            if (peak > 0 && peak + 1 < spec.n_bins)
                delta = peak_offset(spec.window_kind, row[peak - 1], row[peak], row[peak + 1]);
            out.freqs[f] = spec.bin_freqs[peak] + delta * bin_width;
            out.voiced[f] = 1;
            out.confidence[f] =
                floor_eff > 0.0 ? std::clamp(1.0 - floor_eff / row[peak], 0.0, 1.0) : 1.0;
            prev_freq = out.freqs[f];
        }
        prev_voiced = voiced;
    }
    return out;
}

void write_track_csv(const PitchTrack& track, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("write_track_csv: cannot open " + path);
    f << "time,freq_hz,voiced,confidence\n";
    for (std::size_t i = 0; i < track.size(); ++i) {
        f << format_double(track.times[i]) << ',' << format_double(track.freqs[i]) << ','
          << static_cast<int>(track.voiced[i]) << ',' << format_double(track.confidence[i])
          << '\n';
    }
    if (!f) throw Error("write_track_csv: write failure: " + path);
}

}  // namespace portagrad
