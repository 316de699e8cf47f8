#include "portagrad/calibration.hpp"

#include <cmath>
#include <stdexcept>

namespace portagrad {

CalibrationParams make_calibration(double freq_min_hz, double freq_max_hz,
                                   double image_height_px, double image_width_px,
                                   double window_seconds) {
    if (!(freq_min_hz < freq_max_hz))
        throw std::invalid_argument("calibration: freq_min must be < freq_max");
    if (!(image_height_px > 0.0) || !(image_width_px > 0.0))
        throw std::invalid_argument("calibration: image dimensions must be positive");
    if (!(window_seconds > 0.0))
        throw std::invalid_argument("calibration: window must be positive");

    CalibrationParams cal;
    cal.freq_min_hz = freq_min_hz;
    cal.freq_max_hz = freq_max_hz;
    cal.image_height_px = image_height_px;
    cal.image_width_px = image_width_px;
    cal.window_seconds = window_seconds;
    cal.hz_per_px = (freq_max_hz - freq_min_hz) / image_height_px;
    cal.px_per_second = image_width_px / window_seconds;
    cal.factor = cal.hz_per_px * cal.px_per_second;
    return cal;
}

CalibrationParams reference_calibration() {
    return make_calibration(3600.0, 11000.0, 800.0, 1200.0, 5.0);
}

double pixel_gradient(PixelPoint p1, PixelPoint p2) {
    const double dx = p2.x - p1.x;
    if (!(dx > 0.0))
        throw std::invalid_argument("pixel_gradient: points must advance in time (dx > 0)");
    return std::abs(p2.y - p1.y) / dx;
}

double calibrate_gradient(double gradient_px, const CalibrationParams& cal) {
    if (!(gradient_px >= 0.0))
        throw std::invalid_argument("calibrate_gradient: gradient must be >= 0");
    return gradient_px * cal.factor;
}

PixelMeasurement measure_from_pixels(PixelPoint p1, PixelPoint p2,
                                     const CalibrationParams& cal) {
    PixelMeasurement m;
    m.gradient_px = pixel_gradient(p1, p2);
    m.gradient_hz_per_s = calibrate_gradient(m.gradient_px, cal);
    m.delta_f_hz = std::abs(p2.y - p1.y) * cal.hz_per_px;
    m.duration_s = (p2.x - p1.x) / cal.px_per_second;
    return m;
}

}  // namespace portagrad
