#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "portagrad/spectro.hpp"

namespace portagrad {

struct TrackParams {
    // Voicing floor is max(abs_floor, rel_floor * frame median magnitude);
    // a frame is voiced only if its peak strictly exceeds zero and meets it.
    double rel_floor = 6.0;
    double abs_floor = 0.0;
    // When the raw peak jumps more than this from the previous voiced frame,
    // re-search near the previous estimate before accepting the jump.
    double max_jump_octaves = 1.0 / 3.0;
};

struct PitchTrack {
    std::vector<double> times;
    std::vector<double> freqs;  // Hz; 0 on unvoiced frames
    std::vector<std::uint8_t> voiced;
    std::vector<double> confidence;  // 0..1, headroom of peak over the floor

    std::size_t size() const { return times.size(); }
    double frame_step_s() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

PitchTrack track_pitch(const Spectrogram& spec, const TrackParams& params = {});

// One row per frame: time,freq_hz,voiced,confidence.
void write_track_csv(const PitchTrack& track, const std::string& path);

}  // namespace portagrad
