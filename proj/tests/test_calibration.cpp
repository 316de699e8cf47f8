#include <cmath>

#include "doctest.h"
#include "portagrad/calibration.hpp"
#include "portagrad/spectro.hpp"
#include "portagrad/synth.hpp"
#include "test_helpers.hpp"

using namespace portagrad;

TEST_CASE("reference scales are exact") {
    const auto cal = reference_calibration();
    CHECK(cal.hz_per_px == 9.25);       // 7400 Hz over 800 px
    CHECK(cal.px_per_second == 240.0);  // 1200 px over 5 s
    CHECK(cal.factor == 2220.0);
}

TEST_CASE("worked example: 2 px/px maps to 4440 Hz/s") {
    const auto cal = reference_calibration();
    const double g_px = pixel_gradient({100.0, 300.0}, {110.0, 280.0});
    CHECK(g_px == 2.0);
    CHECK(calibrate_gradient(g_px, cal) == 4440.0);

    const auto m = measure_from_pixels({100.0, 300.0}, {110.0, 280.0}, cal);
    CHECK(m.gradient_px == 2.0);
    CHECK(m.gradient_hz_per_s == 4440.0);
    CHECK(m.delta_f_hz == doctest::Approx(185.0).epsilon(1e-12));
    CHECK(m.duration_s == doctest::Approx(10.0 / 240.0).epsilon(1e-12));
}

TEST_CASE("gradient-to-duration arithmetic for a 200 Hz interval") {
    // Steep vs gentle: the same interval crossed at different gradients.
    CHECK(200.0 / 4440.0 == doctest::Approx(0.045).epsilon(0.01));
    CHECK(200.0 / 600.0 == doctest::Approx(0.33).epsilon(0.02));
}

TEST_CASE("sub-pixel coordinates are accepted") {
    const double g = pixel_gradient({100.5, 300.25}, {110.25, 280.75});
    CHECK(g == doctest::Approx(19.5 / 9.75).epsilon(1e-12));
}

TEST_CASE("rising traces have lower y at later x") {
    // Image convention: y grows downward, so an ascending glide loses y.
    const auto cal = reference_calibration();
    const auto m = measure_from_pixels({50.0, 400.0}, {60.0, 350.0}, cal);
    CHECK(m.gradient_hz_per_s > 0.0);
    CHECK(m.delta_f_hz == doctest::Approx(50.0 * 9.25));
}

TEST_CASE("degenerate inputs throw") {
    CHECK_THROWS_AS(pixel_gradient({10.0, 0.0}, {10.0, 50.0}), std::invalid_argument);
    CHECK_THROWS_AS(pixel_gradient({20.0, 0.0}, {10.0, 50.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_calibration(1000.0, 1000.0, 800.0, 1200.0, 5.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_calibration(3600.0, 11000.0, 0.0, 1200.0, 5.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_calibration(3600.0, 11000.0, 800.0, 1200.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(calibrate_gradient(-1.0, reference_calibration()), std::invalid_argument);
}

TEST_CASE("pixels read off an exported image reproduce a known gradient") {
    GlideSpec gs;
    gs.f_start_hz = 220.0;
    gs.f_end_hz = 420.0;
    gs.pre_hold_s = 0.4;
    gs.glide_s = 0.3;
    gs.post_hold_s = 0.4;
    gs.n_harmonics = 3;
    gs.harmonic_rolloff_db = 8.0;
    const auto [buf, truth] = synth_glide(gs);

    const auto spec = compute_spectrogram(buf, SpectroConfig{});
    const auto path = testutil::temp_path("glide.pgm");
    write_pgm(spec, path, 800, 60.0);
    const auto img = testutil::read_pgm(path);
    REQUIRE(img.width == spec.n_frames);

    // Columns are frames; sample two window-interior points on the ramp.
    const auto col_at = [&](double t) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < spec.n_frames; ++i)
            if (std::abs(spec.frame_times[i] - t) <
                std::abs(spec.frame_times[best] - t))
                best = i;
        return best;
    };
    const std::size_t c1 = col_at(0.48), c2 = col_at(0.62);
    const PixelPoint p1{static_cast<double>(c1),
                        static_cast<double>(img.brightest_row(c1))};
    const PixelPoint p2{static_cast<double>(c2),
                        static_cast<double>(img.brightest_row(c2))};

    const auto cal = make_calibration(
        spec.freq_min, spec.freq_max, 800.0, static_cast<double>(spec.n_frames),
        static_cast<double>(spec.n_frames) * spec.frame_step_s());
    const auto m = measure_from_pixels(p1, p2, cal);
    CHECK(m.gradient_hz_per_s == doctest::Approx(truth.gradient_hz_per_s).epsilon(0.10));
}
