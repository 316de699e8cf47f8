#include "portagrad/events.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace portagrad {
namespace {

double to_cents(double hz) { return 1200.0 * std::log2(hz); }

void validate(const SegmentationParams& p) {
    if (p.plateau_tol_cents <= 0.0 || p.min_plateau_s <= 0.0 ||
        p.min_slide_interval_cents <= 0.0 || p.clean_shift_max_s <= 0.0 ||
        p.vibrato_rate_min_hz <= 0.0)
        throw std::invalid_argument("segmentation: all parameters must be positive");
    if (p.clean_shift_max_s >= p.min_plateau_s)
        throw std::invalid_argument("segmentation: clean_shift_max_s must be < min_plateau_s");
}

// Multiset with a tracked middle iterator; insert-only running median.
class RunningMedian {
public:
    void clear() {
        values_.clear();
        mid_ = values_.end();
    }

    void insert(double x) {
        if (values_.empty()) {
            values_.insert(x);
            mid_ = values_.begin();
            return;
        }
        const std::size_t n_old = values_.size();
        values_.insert(x);
        // Keep mid_ at index (n - 1) / 2.
        if (x < *mid_) {
            if (n_old % 2 == 1) --mid_;
        } else {
            if (n_old % 2 == 0) ++mid_;
        }
    }

    double median() const {
        if (values_.empty()) return 0.0;
        if (values_.size() % 2 == 1) return *mid_;
        auto next = std::next(mid_);
        return 0.5 * (*mid_ + *next);
    }

    double min() const { return *values_.begin(); }
    double max() const { return *values_.rbegin(); }
    std::size_t size() const { return values_.size(); }

private:
    std::multiset<double> values_;
    std::multiset<double>::iterator mid_;
};

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

struct FitPoint {
    double t = 0.0;  // relative to the coarse onset
    double f = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    bool ok = false;
};

// Theil-Sen: median of pairwise slopes, then median intercept. Robust to
// residual vibrato ripple and stray tracker outliers.
LineFit fit_line(const std::vector<FitPoint>& pts) {
    LineFit fit;
    if (pts.size() < 3) return fit;
    std::vector<double> slopes;
    slopes.reserve(pts.size() * (pts.size() - 1) / 2);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dt = pts[j].t - pts[i].t;
            if (dt > 0.0) slopes.push_back((pts[j].f - pts[i].f) / dt);
        }
    if (slopes.empty()) return fit;
    fit.slope = median_of(std::move(slopes));
    std::vector<double> residuals;
    residuals.reserve(pts.size());
    for (const auto& p : pts) residuals.push_back(p.f - fit.slope * p.t);
    fit.intercept = median_of(std::move(residuals));
    fit.ok = std::isfinite(fit.slope) && std::isfinite(fit.intercept);
    return fit;
}

struct Refined {
    double t_on = 0.0;
    double t_off = 0.0;
    bool ok = false;
};

// Robust local line through [t_i - half, t_i + half], read off at t_i. A
// sliding median passes any monotone span through unchanged, so it cannot
// strip vibrato riding a glide; a local line can, and the pairwise-median
// construction keeps nearby hold frames from bending it as long as in-glide
// pairs hold the majority.
double local_line_value(const PitchTrack& track, std::size_t i, double half) {
    const double t_i = track.times[i];
    std::vector<FitPoint> pts;
    std::size_t lo = i;
    while (lo > 0 && track.times[lo - 1] >= t_i - half) --lo;
    for (std::size_t j = lo; j < track.size() && track.times[j] <= t_i + half; ++j)
        if (track.voiced[j] && track.freqs[j] > 0.0) pts.push_back({track.times[j] - t_i, track.freqs[j]});
    const LineFit fit = fit_line(pts);
    return fit.ok ? fit.intercept : track.freqs[i];
}

// Line through the transition's mid-band frames, intersected with the two
// plateau medians. Sub-frame boundaries; the coarse ones are window-smeared.
// Two passes: a raw fit first, whose residual sign changes give the dominant
// modulation rate, then a fit on frames smoothed over one cycle of that rate.
// An integer-cycle window strips the vibrato; residual-free or noise-only
// tracks push the window under a frame, which turns the smoothing off.
Refined refine_boundaries(const PitchTrack& fit_track, double vibrato_rate_min_hz, double f1,
                          double f2, double coarse_on, double coarse_off) {
    Refined r;
    const double step = fit_track.frame_step_s();
    if (step <= 0.0) return r;
    const double pad = std::max(0.06, 3.0 * step);
    const double delta = f2 - f1;
    const double band_lo = std::min(f1 + 0.3 * delta, f1 + 0.7 * delta);
    const double band_hi = std::max(f1 + 0.3 * delta, f1 + 0.7 * delta);

    std::vector<FitPoint> pts;
    const auto collect = [&](double half) {
        pts.clear();
        for (std::size_t i = 0; i < fit_track.size(); ++i) {
            if (!fit_track.voiced[i] || fit_track.freqs[i] <= 0.0) continue;
            const double t = fit_track.times[i];
            if (t < coarse_on - pad || t > coarse_off + pad) continue;
            const double f = half > 0.0 ? local_line_value(fit_track, i, half)
                                        : fit_track.freqs[i];
            if (f <= band_lo || f >= band_hi) continue;
            pts.push_back({t - coarse_on, f});
        }
    };

    collect(0.0);
    const LineFit fit0 = fit_line(pts);

    // Sign changes of the residual against a hold-glide-hold model, counted
    // over the whole padded window: vibrato crosses twice per cycle.
    const double f_lo = std::min(f1, f2), f_hi = std::max(f1, f2);
    const double width = std::max(coarse_off - coarse_on, step);
    int crossings = 0, prev_sign = 0;
    double t_first = 0.0, t_last = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < fit_track.size(); ++i) {
        if (!fit_track.voiced[i] || fit_track.freqs[i] <= 0.0) continue;
        const double t = fit_track.times[i];
        if (t < coarse_on - pad || t > coarse_off + pad) continue;
        const double on_line = fit0.ok
                                   ? fit0.intercept + fit0.slope * (t - coarse_on)
                                   : f1 + delta * std::clamp((t - coarse_on) / width, 0.0, 1.0);
        const double res = fit_track.freqs[i] - std::clamp(on_line, f_lo, f_hi);
        const int sign = res > 0.0 ? 1 : (res < 0.0 ? -1 : 0);
        if (sign != 0) {
            if (prev_sign != 0 && sign != prev_sign) ++crossings;
            prev_sign = sign;
        }
        if (!any) t_first = t;
        t_last = t;
        any = true;
    }
    const double res_span = any ? t_last - t_first : 0.0;
    const double rate = std::max(
        res_span > 0.0 ? static_cast<double>(crossings) / (2.0 * res_span) : 0.0,
        vibrato_rate_min_hz);
    collect(std::min(0.5 / rate, 0.5 * (coarse_off - coarse_on)));

    const LineFit fit = fit_line(pts);
    if (!fit.ok || fit.slope == 0.0) return r;
    if ((fit.slope > 0.0) != (delta > 0.0)) return r;

    const double t_on = coarse_on + (f1 - fit.intercept) / fit.slope;
    const double t_off = coarse_on + (f2 - fit.intercept) / fit.slope;
    // Reject wild extrapolations; the true corner lies near the coarse one.
    constexpr double kSlack = 0.3;
    if (!(t_on < t_off)) return r;
    if (t_on < coarse_on - kSlack || t_on > coarse_off) return r;
    if (t_off > coarse_off + kSlack || t_off < coarse_on) return r;
    r = {t_on, t_off, true};
    return r;
}

// Vibrato ripple can seal a plateau early and restart it a few frames on, or
// carve a lagging fragment off a hold's edge. A voiced gap shorter than a
// plateau with a sub-threshold pitch change on either side is one note, so
// fold such fragments back together before pairing plateaus into events.
void merge_plateau_fragments(std::vector<PlateauSpan>& plateaus, const PitchTrack& track,
                             const std::vector<double>& demod, const SegmentationParams& params) {
    std::size_t k = 0;
    while (k + 1 < plateaus.size()) {
        PlateauSpan& a = plateaus[k];
        const PlateauSpan& b = plateaus[k + 1];
        const double interval = std::abs(to_cents(b.median_hz) - to_cents(a.median_hz));
        bool gap_voiced = true;
        for (std::size_t i = a.last_frame + 1; i < b.first_frame; ++i)
            if (!track.voiced[i] || demod[i] <= 0.0) gap_voiced = false;
        if (interval < params.min_slide_interval_cents && gap_voiced &&
            track.times[b.first_frame] - track.times[a.last_frame] <= params.min_plateau_s) {
            std::vector<double> hz(demod.begin() + static_cast<std::ptrdiff_t>(a.first_frame),
                                   demod.begin() + static_cast<std::ptrdiff_t>(b.last_frame) + 1);
            a.last_frame = b.last_frame;
            a.end_time = b.end_time;
            a.median_hz = median_of(std::move(hz));
            plateaus.erase(plateaus.begin() + static_cast<std::ptrdiff_t>(k) + 1);
            // Stay at k: the widened plateau may absorb the next fragment too.
        } else {
            ++k;
        }
    }
}

}  // namespace

const char* transition_kind_name(TransitionKind kind) {
    return kind == TransitionKind::sliding ? "sliding" : "clean_shift";
}

TransitionKind parse_transition_kind(const std::string& name) {
    if (name == "sliding") return TransitionKind::sliding;
    if (name == "clean_shift") return TransitionKind::clean_shift;
    throw std::invalid_argument("unknown transition kind: " + name);
}

TransitionKind classify_event(const TransitionCandidate& candidate,
                              const SegmentationParams& params) {
    validate(params);
    if (candidate.fully_unvoiced) return TransitionKind::clean_shift;
    if (candidate.voiced_span_s < params.clean_shift_max_s) return TransitionKind::clean_shift;
    return TransitionKind::sliding;
}

double event_gradient(double onset_freq, double termination_freq, double duration_s) {
    if (!(duration_s > 0.0))
        throw std::invalid_argument("event_gradient: duration must be positive");
    return std::abs(termination_freq - onset_freq) / duration_s;
}

std::vector<double> vibrato_demodulate(const PitchTrack& track, double vibrato_rate_min_hz) {
    if (vibrato_rate_min_hz <= 0.0)
        throw std::invalid_argument("vibrato_demodulate: rate must be positive");

    const std::size_t n = track.size();
    std::vector<double> out(n, 0.0);
    const double half = 0.5 / vibrato_rate_min_hz;

    std::size_t lo = 0, hi = 0;  // window [lo, hi)
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {
        if (!track.voiced[i] || track.freqs[i] <= 0.0) continue;
        while (lo < n && track.times[lo] < track.times[i] - half) ++lo;
        if (hi < lo) hi = lo;
        while (hi < n && track.times[hi] <= track.times[i] + half) ++hi;
        vals.clear();
        for (std::size_t j = lo; j < hi; ++j)
            if (track.voiced[j] && track.freqs[j] > 0.0) vals.push_back(track.freqs[j]);
        out[i] = median_of(vals);
    }
    return out;
}

SegmentationResult segment_track(const PitchTrack& track, const SegmentationParams& params,
                                 const PitchTrack* refine) {
    validate(params);

    SegmentationResult result;
    const std::size_t n = track.size();
    if (n < 2) return result;
    const double step = track.frame_step_s();
    if (step <= 0.0) return result;

    const std::vector<double> demod = vibrato_demodulate(track, params.vibrato_rate_min_hz);
    const auto usable = [&](std::size_t i) { return track.voiced[i] && demod[i] > 0.0; };

    // Greedy plateau growth within each voiced run: extend while every member
    // stays within tolerance of the running median.
    std::size_t run_start = 0;
    RunningMedian rm;
    while (run_start < n) {
        if (!usable(run_start)) {
            ++run_start;
            continue;
        }
        std::size_t run_end = run_start;  // inclusive
        while (run_end + 1 < n && usable(run_end + 1)) ++run_end;

        std::size_t i = run_start;
        while (i <= run_end) {
            rm.clear();
            rm.insert(to_cents(demod[i]));
            std::size_t j = i;
            while (j + 1 <= run_end) {
                rm.insert(to_cents(demod[j + 1]));
                const double med = rm.median();
                if (rm.max() > med + params.plateau_tol_cents ||
                    rm.min() < med - params.plateau_tol_cents)
                    break;
                ++j;
            }
            if (track.times[j] - track.times[i] >= params.min_plateau_s - 1e-9) {
                std::vector<double> hz(demod.begin() + static_cast<std::ptrdiff_t>(i),
                                       demod.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                result.plateaus.push_back(
                    {i, j, track.times[i], track.times[j], median_of(std::move(hz))});
                i = j + 1;
            } else {
                ++i;
            }
        }
        run_start = run_end + 1;
    }

    merge_plateau_fragments(result.plateaus, track, demod, params);

    // One candidate event per consecutive plateau pair far enough apart.
    for (std::size_t k = 0; k + 1 < result.plateaus.size(); ++k) {
        const PlateauSpan& a = result.plateaus[k];
        const PlateauSpan& b = result.plateaus[k + 1];
        const double interval_cents = std::abs(to_cents(b.median_hz) - to_cents(a.median_hz));
        if (interval_cents < params.min_slide_interval_cents) continue;

        std::size_t voiced_between = 0;
        for (std::size_t i = a.last_frame + 1; i < b.first_frame; ++i)
            if (track.voiced[i]) ++voiced_between;

        const double coarse_on = track.times[a.last_frame];
        const double coarse_off = track.times[b.first_frame];

        TransitionCandidate cand;
        cand.fully_unvoiced = voiced_between == 0;
        cand.voiced_span_s = static_cast<double>(voiced_between) * step;

        Refined ref;
        if (!cand.fully_unvoiced) {
            ref = refine_boundaries(refine != nullptr ? *refine : track,
                                    params.vibrato_rate_min_hz, a.median_hz, b.median_hz,
                                    coarse_on, coarse_off);
            if (ref.ok) cand.voiced_span_s = ref.t_off - ref.t_on;
        }

        TransitionEvent ev;
        ev.onset_time = ref.ok ? ref.t_on : coarse_on;
        ev.termination_time = ref.ok ? ref.t_off : coarse_off;
        ev.onset_freq = a.median_hz;
        ev.termination_freq = b.median_hz;
        ev.duration_s = ev.termination_time - ev.onset_time;
        ev.direction = b.median_hz > a.median_hz ? Direction::ascending : Direction::descending;
        ev.kind = classify_event(cand, params);
        ev.gradient_hz_per_s =
            ev.kind == TransitionKind::sliding
                ? event_gradient(ev.onset_freq, ev.termination_freq, ev.duration_s)
                : 0.0;
        result.events.push_back(ev);
        result.transition_spans.emplace_back(a.last_frame, b.first_frame);
    }
    return result;
}

std::vector<TransitionEvent> segment_events(const PitchTrack& track,
                                            const SegmentationParams& params,
                                            const PitchTrack* refine) {
    return segment_track(track, params, refine).events;
}

}  // namespace portagrad
