#pragma once

#include <cstddef>
#include <vector>

#include "portagrad/events.hpp"
#include "portagrad/spectro.hpp"

namespace portagrad {

struct RecoveryParams {
    double step_db = 3.0;
    double max_gain_db = 15.0;
    // Absolute magnitude a peak must reach to count as voiced while sweeping.
    // Magnitudes are normalized so a full-scale sine peaks near 1.0.
    double visibility_floor = 0.05;
    // Reject a step when more than this fraction of voiced frames falls
    // outside every plateau and transition span (gain is amplifying noise).
    double artefact_ratio_max = 0.25;
};

struct RecoveryStepDiag {
    double gain_db = 0.0;
    double voiced_fraction = 0.0;    // voiced frames / all frames
    double spurious_fraction = 0.0;  // stray voiced frames / voiced frames
    std::size_t events_found = 0;
};

struct RecoveryResult {
    bool recovered = false;
    double gain_used_db = 0.0;  // on failure: the largest step tried
    std::vector<TransitionEvent> events;
    std::vector<RecoveryStepDiag> diagnostics;  // one entry per step tried
};

// Sweeps gain 0, step, 2*step ... max_gain_db until segmentation yields at
// least one event with an acceptable artefact ratio. Tracking uses
// visibility_floor as the absolute voicing floor at every step.
RecoveryResult recover_trace(const Spectrogram& spec, const SegmentationParams& seg,
                             const RecoveryParams& params,
                             const TrackParams& tracking = {},
                             const Spectrogram* refine = nullptr);

}  // namespace portagrad
