#include "portagrad/recovery.hpp"

#include <stdexcept>

#include "portagrad/pitchtrack.hpp"

namespace portagrad {

RecoveryResult recover_trace(const Spectrogram& spec, const SegmentationParams& seg,
                             const RecoveryParams& params, const TrackParams& tracking,
                             const Spectrogram* refine) {
    if (!(params.step_db > 0.0))
        throw std::invalid_argument("recovery: step_db must be positive");
    if (!(params.max_gain_db >= 0.0))
        throw std::invalid_argument("recovery: max_gain_db must be >= 0");
    if (!(params.visibility_floor > 0.0))
        throw std::invalid_argument("recovery: visibility_floor must be positive");
    if (params.artefact_ratio_max < 0.0 || params.artefact_ratio_max > 1.0)
        throw std::invalid_argument("recovery: artefact_ratio_max must be in [0, 1]");

    TrackParams tp = tracking;
    tp.abs_floor = params.visibility_floor;

    RecoveryResult result;
    for (int k = 0;; ++k) {
        const double gain = params.step_db * k;
        if (gain > params.max_gain_db + 1e-9) break;
        result.gain_used_db = gain;

        const Spectrogram gained = apply_gain(spec, gain);
        const PitchTrack track = track_pitch(gained, tp);

        PitchTrack refine_track;
        const PitchTrack* refine_ptr = nullptr;
        if (refine != nullptr) {
            refine_track = track_pitch(apply_gain(*refine, gain), tp);
            refine_ptr = &refine_track;
        }

        const SegmentationResult segres = segment_track(track, seg, refine_ptr);

        std::vector<bool> structural(track.size(), false);
        for (const auto& p : segres.plateaus)
            for (std::size_t i = p.first_frame; i <= p.last_frame; ++i) structural[i] = true;
        for (const auto& span : segres.transition_spans)
            for (std::size_t i = span.first + 1; i < span.second; ++i) structural[i] = true;

        std::size_t voiced = 0, spurious = 0;
        for (std::size_t i = 0; i < track.size(); ++i) {
            if (!track.voiced[i]) continue;
            ++voiced;
            if (!structural[i]) ++spurious;
        }

        RecoveryStepDiag diag;
        diag.gain_db = gain;
        diag.voiced_fraction =
            track.size() > 0 ? static_cast<double>(voiced) / static_cast<double>(track.size())
                             : 0.0;
        diag.spurious_fraction =
            voiced > 0 ? static_cast<double>(spurious) / static_cast<double>(voiced) : 0.0;
        diag.events_found = segres.events.size();
        result.diagnostics.push_back(diag);

        if (!segres.events.empty() && diag.spurious_fraction <= params.artefact_ratio_max) {
            result.recovered = true;
            result.events = segres.events;
            return result;
        }
    }
    return result;
}

}  // namespace portagrad
