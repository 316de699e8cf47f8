#pragma once

#include <cstdint>
#include <limits>
#include <utility>

#include "portagrad/audio.hpp"
#include "portagrad/events.hpp"

namespace portagrad {

struct GlideSpec {
    double f_start_hz = 220.0;
    double f_end_hz = 261.6;
    double pre_hold_s = 0.5;
    double glide_s = 0.2;
    double post_hold_s = 0.5;
    int n_harmonics = 4;                        // >= 1, fundamental included
    double harmonic_rolloff_db = 6.0;           // per partial step
    double vibrato_cents = 0.0;                 // peak deviation
    double vibrato_rate_hz = 5.5;
    double snr_db = std::numeric_limits<double>::infinity();  // inf = no noise
    double sample_rate = 44100.0;
    double amplitude = 0.8;                     // peak of the noiseless signal
    std::uint64_t noise_seed = 1;
    // false: frequency is linear in Hz. true: linear in cents; the ground
    // truth gradient stays the chord slope |f_end - f_start| / glide_s.
    bool cents_linear = false;
};

struct GlideTruth {
    double gradient_hz_per_s = 0.0;
    double onset_s = 0.0;
    double termination_s = 0.0;
    double delta_f_hz = 0.0;
};

std::pair<SampleBuffer, GlideTruth> synth_glide(const GlideSpec& spec);

struct StepSpec {
    double f1_hz = 220.0;
    double f2_hz = 261.6;
    double gap_s = 0.03;  // silent gap between the notes
    double hold_s = 0.5;  // duration of each note
    int n_harmonics = 4;
    double harmonic_rolloff_db = 6.0;
    double snr_db = std::numeric_limits<double>::infinity();
    double sample_rate = 44100.0;
    double amplitude = 0.8;
    std::uint64_t noise_seed = 1;
};

struct StepTruth {
    // Labeled clean_shift for any gap length; whether a long-gap pair is
    // detected as an event at all depends on segmentation parameters.
    TransitionKind kind = TransitionKind::clean_shift;
    double gap_s = 0.0;
    double shift_time_s = 0.0;  // where the first note ends
};

std::pair<SampleBuffer, StepTruth> synth_step(const StepSpec& spec);

}  // namespace portagrad
