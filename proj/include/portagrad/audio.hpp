#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "portagrad/errors.hpp"

namespace portagrad {

// Mono audio, samples normalized to [-1, 1].
struct SampleBuffer {
    std::vector<float> samples;
    double sample_rate = 0.0;

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// Reads a RIFF/WAVE file: PCM 8/16/24/32-bit int or 32-bit float, mono or
// stereo (stereo is averaged down). Anything else raises IngestError.
// If target_rate > 0 and differs from the file rate, the result is resampled.
SampleBuffer load_audio(const std::string& path, double target_rate = 0.0);

// Parses an in-memory WAV image; "path" is used only for error reporting.
SampleBuffer decode_wav(const std::vector<std::uint8_t>& bytes, const std::string& path);

enum class WavEncoding { pcm16, float32 };

void save_wav(const std::string& path, const SampleBuffer& buffer,
              WavEncoding encoding = WavEncoding::pcm16);

// Kaiser-windowed-sinc rate conversion. Output length is round(n * ratio).
SampleBuffer resample(const SampleBuffer& in, double target_rate);

}  // namespace portagrad
