#pragma once

namespace portagrad {

// Image coordinates: x grows rightward (time), y grows downward, so lower y
// means higher frequency.
struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
};

struct CalibrationParams {
    double freq_min_hz = 0.0;
    double freq_max_hz = 0.0;
    double image_height_px = 0.0;
    double image_width_px = 0.0;
    double window_seconds = 0.0;
    double hz_per_px = 0.0;      // (freq_max - freq_min) / height
    double px_per_second = 0.0;  // width / window
    double factor = 0.0;         // hz_per_px * px_per_second
};

// Throws std::invalid_argument unless freq_min < freq_max and the dimensions
// and window are positive.
CalibrationParams make_calibration(double freq_min_hz, double freq_max_hz,
                                   double image_height_px, double image_width_px,
                                   double window_seconds);

// 7,400 Hz over 800 px and 1,200 px over 5 s: factor 2,220.
CalibrationParams reference_calibration();

// |dy| / dx in pixel units; throws std::invalid_argument when p2.x <= p1.x.
double pixel_gradient(PixelPoint p1, PixelPoint p2);

double calibrate_gradient(double gradient_px, const CalibrationParams& cal);

struct PixelMeasurement {
    double gradient_px = 0.0;
    double gradient_hz_per_s = 0.0;
    double delta_f_hz = 0.0;
    double duration_s = 0.0;
};

PixelMeasurement measure_from_pixels(PixelPoint p1, PixelPoint p2,
                                     const CalibrationParams& cal);

}  // namespace portagrad
