#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "portagrad/recovery.hpp"
#include "portagrad/spectro.hpp"
#include "portagrad/synth.hpp"

using namespace portagrad;

namespace {

// Pure-tone glide between two bin centers of a 2048 window, fast enough that
// the ramp cannot masquerade as a chain of plateaus (70 cents drift takes
// 0.044 s < the 0.08 s plateau minimum) and slow enough that in-window chirp
// smear stays inside one 3 dB sweep step (peak ratio across frames ~1.18).
constexpr double kF1 = 20.0 * 44100.0 / 2048.0;
constexpr double kF2 = 24.0 * 44100.0 / 2048.0;
constexpr double kGlideS = 0.215;
const double kTrueGradient = (kF2 - kF1) / kGlideS;

SampleBuffer tone_glide(double amplitude) {
    GlideSpec gs;
    gs.f_start_hz = kF1;
    gs.f_end_hz = kF2;
    gs.glide_s = kGlideS;
    gs.n_harmonics = 1;
    gs.amplitude = amplitude;
    return synth_glide(gs).first;
}

Spectrogram main_spec(const SampleBuffer& buf) {
    SpectroConfig cfg;
    cfg.window_size = 2048;
    return compute_spectrogram(buf, cfg);
}

Spectrogram fine_spec(const SampleBuffer& buf) {
    SpectroConfig cfg;
    cfg.window_size = 1024;
    return compute_spectrogram(buf, cfg);
}

// Phase-continuous sine hopping to a far-away frequency every 20 ms: every
// frame is voiced, no run is steady for the 80 ms a plateau needs.
std::vector<float> hop_tone(double seconds, double amplitude, double rate) {
    static const double freqs[] = {300.0, 520.0, 380.0, 700.0, 460.0, 900.0};
    std::vector<float> out(static_cast<std::size_t>(seconds * rate));
    double phase = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto seg = static_cast<std::size_t>(i / (0.02 * rate));
        phase += 2.0 * M_PI * freqs[seg % 6] / rate;
        out[i] = static_cast<float>(amplitude * std::sin(phase));
    }
    return out;
}

}  // namespace

TEST_CASE("a trace below the visibility floor is recovered by gain sweeping") {
    // Peak magnitude 0.0163 at the holds, 0.0138 at the smeared glide: under
    // the 0.05 floor through +9 dB (max 0.046), over it at +12 dB (min 0.055).
    const SampleBuffer buf = tone_glide(0.0163);
    const Spectrogram spec = main_spec(buf);
    const Spectrogram refine = fine_spec(buf);

    const RecoveryResult rec =
        recover_trace(spec, SegmentationParams{}, RecoveryParams{}, {}, &refine);
    CHECK(rec.recovered);
    CHECK(rec.gain_used_db == 12.0);
    REQUIRE(rec.events.size() == 1);
    CHECK(rec.events[0].kind == TransitionKind::sliding);
    CHECK(rec.events[0].gradient_hz_per_s == doctest::Approx(kTrueGradient).epsilon(0.02));
    CHECK(std::abs(rec.events[0].onset_time - 0.5) < 0.010);
    CHECK(std::abs(rec.events[0].termination_time - (0.5 + kGlideS)) < 0.010);

    REQUIRE(rec.diagnostics.size() == 5);
    for (std::size_t k = 0; k < rec.diagnostics.size(); ++k)
        CHECK(rec.diagnostics[k].gain_db == doctest::Approx(3.0 * double(k)));
    for (std::size_t k = 0; k + 1 < rec.diagnostics.size(); ++k) {
        CHECK(rec.diagnostics[k].voiced_fraction == 0.0);
        CHECK(rec.diagnostics[k].events_found == 0);
    }
    CHECK(rec.diagnostics.back().voiced_fraction > 0.99);
    CHECK(rec.diagnostics.back().events_found == 1);
    CHECK(rec.diagnostics.back().spurious_fraction <= 0.25);
}

TEST_CASE("gain leaves the measured gradient where direct analysis puts it") {
    const RecoveryResult faint = recover_trace(main_spec(tone_glide(0.0163)),
                                               SegmentationParams{}, RecoveryParams{});
    const RecoveryResult loud = recover_trace(main_spec(tone_glide(0.5)), SegmentationParams{},
                                              RecoveryParams{});
    REQUIRE(faint.recovered);
    REQUIRE(loud.recovered);
    CHECK(loud.gain_used_db == 0.0);
    REQUIRE(faint.events.size() == 1);
    REQUIRE(loud.events.size() == 1);
    CHECK(faint.events[0].gradient_hz_per_s ==
          doctest::Approx(loud.events[0].gradient_hz_per_s).epsilon(0.02));
}

TEST_CASE("a visible trace is accepted without any gain") {
    const SampleBuffer buf = tone_glide(0.3);
    const RecoveryResult rec = recover_trace(main_spec(buf), SegmentationParams{},
                                             RecoveryParams{}, {}, nullptr);
    CHECK(rec.recovered);
    CHECK(rec.gain_used_db == 0.0);
    CHECK(rec.diagnostics.size() == 1);
    REQUIRE(rec.events.size() == 1);
    CHECK(rec.events[0].gradient_hz_per_s == doctest::Approx(kTrueGradient).epsilon(0.03));
}

TEST_CASE("silence exhausts the sweep without recovering") {
    SampleBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples.assign(44100 * 3 / 2, 0.0f);
    const RecoveryResult rec =
        recover_trace(main_spec(buf), SegmentationParams{}, RecoveryParams{});
    CHECK_FALSE(rec.recovered);
    CHECK(rec.events.empty());
    CHECK(rec.gain_used_db == 15.0);
    REQUIRE(rec.diagnostics.size() == 6);
    for (const auto& d : rec.diagnostics) {
        CHECK(d.voiced_fraction == 0.0);
        CHECK(d.events_found == 0);
    }
}

TEST_CASE("white noise never becomes voiced because the relative floor scales with it") {
    SampleBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples.resize(44100 * 3 / 2);
    std::mt19937_64 rng(7);
    std::normal_distribution<float> dist(0.0f, 0.3f);
    for (auto& s : buf.samples) s = std::clamp(dist(rng), -1.0f, 1.0f);

    const RecoveryResult rec =
        recover_trace(main_spec(buf), SegmentationParams{}, RecoveryParams{});
    CHECK_FALSE(rec.recovered);
    CHECK(rec.events.empty());
    CHECK(rec.gain_used_db == 15.0);
    REQUIRE(rec.diagnostics.size() == 6);
    // A flat spectrum keeps peak/median well under the 6x relative floor, and
    // gain multiplies both sides; no step can light it up.
    for (const auto& d : rec.diagnostics) CHECK(d.voiced_fraction == 0.0);
}

TEST_CASE("voiced but structureless audio is rejected at every step") {
    SampleBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples = hop_tone(1.5, 0.3, buf.sample_rate);

    const RecoveryResult rec =
        recover_trace(main_spec(buf), SegmentationParams{}, RecoveryParams{});
    CHECK_FALSE(rec.recovered);
    CHECK(rec.events.empty());
    CHECK(rec.diagnostics.front().voiced_fraction > 0.5);
    for (const auto& d : rec.diagnostics) CHECK(d.events_found == 0);
}

TEST_CASE("a real event drowning in stray voiced frames fails the artefact gate") {
    const SampleBuffer glide = tone_glide(0.3);
    SampleBuffer buf;
    buf.sample_rate = glide.sample_rate;
    buf.samples = glide.samples;
    buf.samples.insert(buf.samples.end(), static_cast<std::size_t>(0.06 * buf.sample_rate),
                       0.0f);
    const auto tail = hop_tone(1.4, 0.3, buf.sample_rate);
    buf.samples.insert(buf.samples.end(), tail.begin(), tail.end());

    const RecoveryResult rec =
        recover_trace(main_spec(buf), SegmentationParams{}, RecoveryParams{});
    CHECK_FALSE(rec.recovered);
    CHECK(rec.events.empty());
    CHECK(rec.diagnostics.front().events_found >= 1);
    CHECK(rec.diagnostics.front().spurious_fraction > 0.25);
}

TEST_CASE("a zero gain budget still evaluates the unamplified step") {
    SampleBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples.assign(22050, 0.0f);
    RecoveryParams rp;
    rp.max_gain_db = 0.0;
    const RecoveryResult rec = recover_trace(main_spec(buf), SegmentationParams{}, rp);
    CHECK_FALSE(rec.recovered);
    CHECK(rec.gain_used_db == 0.0);
    CHECK(rec.diagnostics.size() == 1);
}

TEST_CASE("invalid recovery parameters throw") {
    SampleBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples.assign(8192, 0.0f);
    const Spectrogram spec = main_spec(buf);

    RecoveryParams rp;
    rp.step_db = 0.0;
    CHECK_THROWS_AS(recover_trace(spec, SegmentationParams{}, rp), std::invalid_argument);
    rp = RecoveryParams{};
    rp.max_gain_db = -1.0;
    CHECK_THROWS_AS(recover_trace(spec, SegmentationParams{}, rp), std::invalid_argument);
    rp = RecoveryParams{};
    rp.visibility_floor = 0.0;
    CHECK_THROWS_AS(recover_trace(spec, SegmentationParams{}, rp), std::invalid_argument);
    rp = RecoveryParams{};
    rp.artefact_ratio_max = 1.5;
    CHECK_THROWS_AS(recover_trace(spec, SegmentationParams{}, rp), std::invalid_argument);
}
