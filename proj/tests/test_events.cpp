#include <cmath>
#include <vector>

#include "doctest.h"
#include "portagrad/events.hpp"

using namespace portagrad;

namespace {

// freqs value 0 marks an unvoiced frame.
PitchTrack make_track(const std::vector<double>& freqs, double step = 0.003) {
    PitchTrack t;
    t.freqs = freqs;
    t.times.resize(freqs.size());
    t.voiced.resize(freqs.size());
    t.confidence.assign(freqs.size(), 1.0);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        t.times[i] = static_cast<double>(i) * step;
        t.voiced[i] = freqs[i] > 0.0 ? 1 : 0;
    }
    return t;
}

void append_hold(std::vector<double>& freqs, double hz, std::size_t n) {
    freqs.insert(freqs.end(), n, hz);
}

void append_ramp(std::vector<double>& freqs, double f1, double f2, std::size_t n) {
    for (std::size_t i = 1; i <= n; ++i)
        freqs.push_back(f1 + (f2 - f1) * static_cast<double>(i) / static_cast<double>(n + 1));
}

}  // namespace

TEST_CASE("classification boundary: strictly under the limit is a clean shift") {
    SegmentationParams p;
    CHECK(classify_event({0.2, false}, p) == TransitionKind::sliding);
    CHECK(classify_event({0.049, false}, p) == TransitionKind::clean_shift);
    CHECK(classify_event({0.05, false}, p) == TransitionKind::sliding);  // not strictly under
    CHECK(classify_event({0.3, true}, p) == TransitionKind::clean_shift);
    CHECK(classify_event({0.0, true}, p) == TransitionKind::clean_shift);
}

TEST_CASE("event gradient is |df| / duration and rejects non-positive durations") {
    CHECK(event_gradient(200.0, 420.0, 0.05) == doctest::Approx(4400.0).epsilon(1e-12));
    CHECK(event_gradient(420.0, 200.0, 0.05) == doctest::Approx(4400.0).epsilon(1e-12));
    CHECK(event_gradient(440.0, 440.0, 1.0) == 0.0);
    CHECK_THROWS_AS(event_gradient(200.0, 420.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(event_gradient(200.0, 420.0, -0.1), std::invalid_argument);
}

TEST_CASE("demodulation passes a linear ramp through unchanged in the interior") {
    std::vector<double> freqs;
    for (int i = 0; i < 200; ++i) freqs.push_back(100.0 + 1.0 * i);
    const auto track = make_track(freqs, 0.01);
    const auto demod = vibrato_demodulate(track, 4.0);  // +-12 frames in the median
    for (std::size_t i = 13; i + 13 < freqs.size(); ++i) REQUIRE(demod[i] == freqs[i]);
}

TEST_CASE("demodulation flattens 50-cent vibrato to under 25 cents of ripple") {
    const double step = 0.0029;
    std::vector<double> freqs;
    for (int i = 0; i < 700; ++i) {
        const double t = i * step;
        freqs.push_back(440.0 * std::exp2(50.0 / 1200.0 * std::sin(2.0 * M_PI * 6.0 * t)));
    }
    const auto demod = vibrato_demodulate(make_track(freqs, step), 4.0);
    for (std::size_t i = 90; i + 90 < freqs.size(); ++i) {
        const double cents = std::abs(1200.0 * std::log2(demod[i] / 440.0));
        REQUIRE(cents < 25.0);
    }
}

TEST_CASE("demodulation ignores unvoiced frames") {
    std::vector<double> freqs(50, 440.0);
    freqs[25] = 0.0;
    const auto demod = vibrato_demodulate(make_track(freqs, 0.01), 4.0);
    CHECK(demod[25] == 0.0);
    CHECK(demod[24] == 440.0);
}

TEST_CASE("single glide yields one sliding event with the chord gradient") {
    std::vector<double> freqs;
    append_hold(freqs, 440.0, 167);         // ~0.5 s at 3 ms frames
    append_ramp(freqs, 440.0, 640.0, 66);   // ~0.2 s
    append_hold(freqs, 640.0, 167);
    const auto track = make_track(freqs);

    const auto res = segment_track(track, SegmentationParams{});
    REQUIRE(res.events.size() == 1);
    REQUIRE(res.plateaus.size() == 2);
    REQUIRE(res.transition_spans.size() == 1);

    const auto& ev = res.events[0];
    CHECK(ev.kind == TransitionKind::sliding);
    CHECK(ev.direction == Direction::ascending);
    CHECK(ev.onset_freq == doctest::Approx(440.0).epsilon(1e-6));
    CHECK(ev.termination_freq == doctest::Approx(640.0).epsilon(1e-6));
    // The ramp's line hits 440 at frame 166 and 640 at frame 233 exactly.
    CHECK(std::abs(ev.onset_time - 166.0 * 0.003) < 0.005);
    CHECK(std::abs(ev.termination_time - 233.0 * 0.003) < 0.005);
    CHECK(ev.gradient_hz_per_s == doctest::Approx(200.0 / 0.201).epsilon(0.02));
    CHECK(ev.duration_s == doctest::Approx(ev.termination_time - ev.onset_time).epsilon(1e-12));
}

TEST_CASE("unvoiced gap between plateaus is a clean shift with zero gradient") {
    std::vector<double> freqs;
    append_hold(freqs, 440.0, 167);
    freqs.insert(freqs.end(), 10, 0.0);  // 30 ms of silence
    append_hold(freqs, 523.25, 167);
    const auto res = segment_track(make_track(freqs), SegmentationParams{});

    REQUIRE(res.events.size() == 1);
    const auto& ev = res.events[0];
    CHECK(ev.kind == TransitionKind::clean_shift);
    CHECK(ev.gradient_hz_per_s == 0.0);
    CHECK(ev.direction == Direction::ascending);
    CHECK(ev.onset_time == doctest::Approx(166.0 * 0.003));
    CHECK(ev.termination_time == doctest::Approx(177.0 * 0.003));
}

TEST_CASE("intervals below the slide threshold produce no event") {
    std::vector<double> freqs;
    append_hold(freqs, 440.0, 167);
    append_ramp(freqs, 440.0, 457.0, 20);  // ~65 cents
    append_hold(freqs, 457.0, 167);
    CHECK(segment_track(make_track(freqs), SegmentationParams{}).events.empty());

    freqs.clear();
    append_hold(freqs, 440.0, 167);
    append_ramp(freqs, 440.0, 458.4, 20);  // ~71 cents
    append_hold(freqs, 458.4, 167);
    CHECK(segment_track(make_track(freqs), SegmentationParams{}).events.size() == 1);
}

TEST_CASE("holds shorter than min_plateau_s never become plateaus") {
    std::vector<double> freqs;
    append_hold(freqs, 440.0, 16);  // ~48 ms < 80 ms
    append_ramp(freqs, 440.0, 640.0, 66);
    append_hold(freqs, 640.0, 16);
    const auto res = segment_track(make_track(freqs), SegmentationParams{});
    CHECK(res.plateaus.empty());
    CHECK(res.events.empty());
}

TEST_CASE("vibrato does not split plateaus or corrupt the gradient") {
    const double step = 0.003;
    std::vector<double> freqs;
    const auto vib = [&](double base, double t) {
        return base * std::exp2(50.0 / 1200.0 * std::sin(2.0 * M_PI * 6.0 * t));
    };
    for (int i = 0; i < 167; ++i) freqs.push_back(vib(440.0, i * step));
    for (int i = 0; i < 66; ++i) {
        const double u = (i + 1) / 67.0;
        const std::size_t idx = freqs.size();
        freqs.push_back(vib(440.0 + 200.0 * u, idx * step));
    }
    for (int i = 0; i < 167; ++i) {
        const std::size_t idx = freqs.size();
        freqs.push_back(vib(640.0, idx * step));
    }

    const auto res = segment_track(make_track(freqs, step), SegmentationParams{});
    REQUIRE(res.events.size() == 1);
    CHECK(res.events[0].kind == TransitionKind::sliding);
    CHECK(res.events[0].gradient_hz_per_s == doctest::Approx(1000.0).epsilon(0.10));
}

TEST_CASE("three plateaus give two events with opposite directions") {
    std::vector<double> freqs;
    append_hold(freqs, 440.0, 167);
    append_ramp(freqs, 440.0, 640.0, 66);
    append_hold(freqs, 640.0, 167);
    append_ramp(freqs, 640.0, 440.0, 33);
    append_hold(freqs, 440.0, 167);
    const auto res = segment_track(make_track(freqs), SegmentationParams{});

    REQUIRE(res.events.size() == 2);
    CHECK(res.events[0].direction == Direction::ascending);
    CHECK(res.events[1].direction == Direction::descending);
    CHECK(res.events[0].onset_time < res.events[1].onset_time);
    CHECK(res.events[1].gradient_hz_per_s >
          res.events[0].gradient_hz_per_s);  // steeper return glide
}

TEST_CASE("parameter validation") {
    const auto track = make_track({440.0, 440.0, 440.0});
    SegmentationParams p;
    p.plateau_tol_cents = 0.0;
    CHECK_THROWS_AS(segment_track(track, p), std::invalid_argument);
    p = SegmentationParams{};
    p.clean_shift_max_s = 0.1;  // >= min_plateau_s
    CHECK_THROWS_AS(segment_track(track, p), std::invalid_argument);
    p = SegmentationParams{};
    p.vibrato_rate_min_hz = -4.0;
    CHECK_THROWS_AS(classify_event({0.1, false}, p), std::invalid_argument);
}
