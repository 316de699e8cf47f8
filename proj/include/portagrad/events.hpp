#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "portagrad/pitchtrack.hpp"

namespace portagrad {

enum class TransitionKind { sliding, clean_shift };

const char* transition_kind_name(TransitionKind kind);
TransitionKind parse_transition_kind(const std::string& name);  // throws std::invalid_argument

enum class Direction { ascending, descending };

struct TransitionEvent {
    double onset_time = 0.0;
    double termination_time = 0.0;
    double onset_freq = 0.0;        // Hz, median of the preceding plateau
    double termination_freq = 0.0;  // Hz, median of the following plateau
    TransitionKind kind = TransitionKind::sliding;
    double gradient_hz_per_s = 0.0;  // 0 by convention for clean shifts
    double duration_s = 0.0;
    Direction direction = Direction::ascending;
};

struct SegmentationParams {
    double plateau_tol_cents = 35.0;
    double min_plateau_s = 0.08;
    double min_slide_interval_cents = 70.0;
    double clean_shift_max_s = 0.05;
    double vibrato_rate_min_hz = 4.0;  // demodulation median spans one period of this
};

struct PlateauSpan {
    std::size_t first_frame = 0;
    std::size_t last_frame = 0;  // inclusive
    double start_time = 0.0;
    double end_time = 0.0;
    double median_hz = 0.0;
};

struct SegmentationResult {
    std::vector<TransitionEvent> events;
    std::vector<PlateauSpan> plateaus;
    // Coarse frame spans of the gaps that produced events (same order).
    std::vector<std::pair<std::size_t, std::size_t>> transition_spans;
};

struct TransitionCandidate {
    double voiced_span_s = 0.0;
    bool fully_unvoiced = false;
};

// Pure taxonomy rule: fully unvoiced gaps and voiced spans strictly under
// clean_shift_max_s are clean shifts, everything else slides.
TransitionKind classify_event(const TransitionCandidate& candidate,
                              const SegmentationParams& params);

// |f2 - f1| / duration; throws std::invalid_argument when duration <= 0.
double event_gradient(double onset_freq, double termination_freq, double duration_s);

// Sliding median over a window of one vibrato period; flattens periodic
// modulation while passing monotone ramps through unchanged. Unvoiced frames
// keep frequency 0 and never enter a median.
std::vector<double> vibrato_demodulate(const PitchTrack& track, double vibrato_rate_min_hz);

// Full segmentation. refine, when given, is a track at the same hop computed
// with a shorter window; its frames sharpen transition boundaries that the
// main window smears. Events appear in time order.
SegmentationResult segment_track(const PitchTrack& track, const SegmentationParams& params,
                                 const PitchTrack* refine = nullptr);

std::vector<TransitionEvent> segment_events(const PitchTrack& track,
                                            const SegmentationParams& params,
                                            const PitchTrack* refine = nullptr);

}  // namespace portagrad
