#include "portagrad/analysis.hpp"

namespace portagrad {

AnalysisResult analyze_buffer(const SampleBuffer& buffer, const AnalysisParams& params) {
    const Spectrogram spec = compute_spectrogram(buffer, params.spectro);

    std::optional<Spectrogram> refine_spec;
    if (params.refine_window > 0 && params.refine_window != params.spectro.window_size &&
        buffer.samples.size() >= params.refine_window) {
        SpectroConfig rc = params.spectro;
        rc.window_size = params.refine_window;
        rc.hop_size = std::min(params.spectro.hop_size, params.refine_window);
        refine_spec = compute_spectrogram(buffer, rc);
    }

    AnalysisResult result;
    if (params.use_recovery) {
        RecoveryResult rec =
            recover_trace(spec, params.segmentation, params.recovery, params.track,
                          refine_spec ? &*refine_spec : nullptr);
        // Report the track at the gain the sweep settled on.
        TrackParams tp = params.track;
        tp.abs_floor = params.recovery.visibility_floor;
        result.track = track_pitch(apply_gain(spec, rec.gain_used_db), tp);
        SegmentationResult segres = segment_track(
            result.track, params.segmentation, nullptr);
        result.plateaus = std::move(segres.plateaus);
        result.events = rec.events;
        result.recovery = std::move(rec);
        return result;
    }

    result.track = track_pitch(spec, params.track);
    PitchTrack refine_track;
    const PitchTrack* refine_ptr = nullptr;
    if (refine_spec) {
        refine_track = track_pitch(*refine_spec, params.track);
        refine_ptr = &refine_track;
    }
    SegmentationResult segres = segment_track(result.track, params.segmentation, refine_ptr);
    result.events = std::move(segres.events);
    result.plateaus = std::move(segres.plateaus);
    return result;
}

}  // namespace portagrad
