#pragma once

#include <optional>

#include "portagrad/audio.hpp"
#include "portagrad/events.hpp"
#include "portagrad/pitchtrack.hpp"
#include "portagrad/recovery.hpp"
#include "portagrad/spectro.hpp"

namespace portagrad {

struct AnalysisParams {
    SpectroConfig spectro;  // defaults: 4096 window, 128 hop, 60-1400 Hz
    TrackParams track;
    SegmentationParams segmentation;
    // A second analysis pass with this window (same hop) sharpens transition
    // boundaries beyond the main window's time resolution. 0 disables it.
    std::size_t refine_window = 1024;
    bool use_recovery = false;
    RecoveryParams recovery;
};

struct AnalysisResult {
    PitchTrack track;
    std::vector<TransitionEvent> events;
    std::vector<PlateauSpan> plateaus;
    std::optional<RecoveryResult> recovery;
};

// Spectrogram -> pitch track -> segmentation, with optional gain recovery.
// With recovery enabled, the reported events are the recovered ones.
AnalysisResult analyze_buffer(const SampleBuffer& buffer, const AnalysisParams& params);

}  // namespace portagrad
