#include "portagrad/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace portagrad {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

float decode_sample(const std::uint8_t* p, std::uint16_t bits, std::uint16_t format) {
    if (format == kFormatFloat) {
        float v;
        std::memcpy(&v, p, 4);
        return v;
    }
    switch (bits) {
        case 8:
            return (static_cast<int>(p[0]) - 128) / 128.0f;
        case 16: {
            auto v = static_cast<std::int16_t>(read_u16(p));
            return static_cast<float>(v) / 32768.0f;
        }
        case 24: {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v |= ~0xFFFFFF;
            return static_cast<float>(v) / 8388608.0f;
        }
        default: {  // 32
            auto v = static_cast<std::int32_t>(read_u32(p));
            return static_cast<float>(static_cast<double>(v) / 2147483648.0);
        }
    }
}

double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double half_sq = 0.25 * x * x;
    for (int k = 1; k < 64; ++k) {
        term *= half_sq / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-14) break;
    }
    return sum;
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = M_PI * x;
    return std::sin(px) / px;
}

}  // namespace

SampleBuffer decode_wav(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw IngestError(IngestError::Kind::unsupported, path, "not a RIFF/WAVE file");
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        std::uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
        std::size_t body = pos + 8;
        std::size_t avail = bytes.size() - body;
        std::size_t usable = std::min<std::size_t>(chunk_size, avail);

        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (usable < 16)
                throw IngestError(IngestError::Kind::unsupported, path, "truncated fmt chunk");
            const std::uint8_t* f = bytes.data() + body;
            format = read_u16(f);
            channels = read_u16(f + 2);
            rate = read_u32(f + 4);
            bits = read_u16(f + 14);
            if (format == kFormatExtensible) {
                if (usable < 40)
                    throw IngestError(IngestError::Kind::unsupported, path,
                                      "truncated extensible fmt chunk");
                format = read_u16(f + 24);  // first two bytes of the SubFormat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = usable;
        }
        pos = body + usable + (usable & 1);
    }

    if (!have_fmt || data == nullptr)
        throw IngestError(IngestError::Kind::unsupported, path, "missing fmt or data chunk");
    if (rate == 0)
        throw IngestError(IngestError::Kind::unsupported, path, "invalid sample rate");
    if (channels == 0)
        throw IngestError(IngestError::Kind::unsupported, path, "zero channels");
    if (channels > 2)
        throw IngestError(IngestError::Kind::channels, path,
                          "more than two channels (" + std::to_string(channels) + ")");
    const bool ok_encoding = (format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 ||
                                                       bits == 32)) ||
                             (format == kFormatFloat && bits == 32);
    if (!ok_encoding)
        throw IngestError(IngestError::Kind::unsupported, path,
                          "unsupported encoding (format " + std::to_string(format) + ", " +
                              std::to_string(bits) + " bits)");

    const std::size_t sample_bytes = bits / 8;
    const std::size_t frame_bytes = sample_bytes * channels;
    const std::size_t n_frames = frame_bytes > 0 ? data_size / frame_bytes : 0;
    if (n_frames == 0)
        throw IngestError(IngestError::Kind::empty, path, "zero-length audio");

    SampleBuffer out;
    out.sample_rate = static_cast<double>(rate);
    out.samples.resize(n_frames);
    float peak = 0.0f;
    for (std::size_t i = 0; i < n_frames; ++i) {
        const std::uint8_t* frame = data + i * frame_bytes;
        float v = decode_sample(frame, bits, format);
        if (channels == 2) v = 0.5f * (v + decode_sample(frame + sample_bytes, bits, format));
        out.samples[i] = v;
        peak = std::max(peak, std::abs(v));
    }
    if (peak > 1.0f) {
        const float inv = 1.0f / peak;
        for (auto& s : out.samples) s *= inv;
    }
    return out;
}

SampleBuffer load_audio(const std::string& path, double target_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestError(IngestError::Kind::unreadable, path, "cannot open file");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof())
        throw IngestError(IngestError::Kind::unreadable, path, "read failure");

    SampleBuffer buf = decode_wav(bytes, path);
    if (target_rate > 0.0 && target_rate != buf.sample_rate) buf = resample(buf, target_rate);
    return buf;
}

void save_wav(const std::string& path, const SampleBuffer& buffer, WavEncoding encoding) {
    const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
    const std::uint16_t format = encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat;
    const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(buffer.sample_rate));
    const std::uint32_t data_size = static_cast<std::uint32_t>(buffer.samples.size() * bits / 8);

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    write_u32(out, 36 + data_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    write_u32(out, 16);
    write_u16(out, format);
    write_u16(out, 1);
    write_u32(out, rate);
    write_u32(out, rate * bits / 8);
    write_u16(out, static_cast<std::uint16_t>(bits / 8));
    write_u16(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    write_u32(out, data_size);

    for (float s : buffer.samples) {
        if (encoding == WavEncoding::pcm16) {
            const float clamped = std::clamp(s, -1.0f, 1.0f);
            auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0f));
            write_u16(out, static_cast<std::uint16_t>(v));
        } else {
            std::uint32_t v;
            std::memcpy(&v, &s, 4);
            write_u32(out, v);
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IngestError(IngestError::Kind::unreadable, path, "cannot open file for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f)
        throw IngestError(IngestError::Kind::unreadable, path, "write failure");
}

SampleBuffer resample(const SampleBuffer& in, double target_rate) {
    if (in.sample_rate <= 0.0 || target_rate <= 0.0)
        throw std::invalid_argument("resample: sample rates must be positive");
    if (target_rate == in.sample_rate) return in;

    SampleBuffer out;
    out.sample_rate = target_rate;
    if (in.samples.empty()) return out;

    const double ratio = target_rate / in.sample_rate;
    const auto out_len = static_cast<std::size_t>(std::llround(
        static_cast<double>(in.samples.size()) * ratio));
    out.samples.resize(out_len);

    // Anti-aliasing cutoff sits at 95% of the narrower Nyquist, expressed in
    // cycles per input sample. Kernel half-width stretches when downsampling
    // so the sinc keeps the same number of lobes under the Kaiser taper.
    constexpr double kBeta = 10.0;
    constexpr int kBaseHalfWidth = 32;
    const double fc = 0.475 * std::min(1.0, ratio);
    const int half_width = static_cast<int>(std::ceil(kBaseHalfWidth * 0.475 / fc));
    const double inv_i0_beta = 1.0 / bessel_i0(kBeta);
    const auto n_in = static_cast<std::ptrdiff_t>(in.samples.size());

    for (std::size_t n = 0; n < out_len; ++n) {
        const double t = static_cast<double>(n) / ratio;
        const auto k_lo = static_cast<std::ptrdiff_t>(std::ceil(t - half_width));
        const auto k_hi = static_cast<std::ptrdiff_t>(std::floor(t + half_width));
        double acc = 0.0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, k_lo);
             k <= std::min(n_in - 1, k_hi); ++k) {
            const double tau = t - static_cast<double>(k);
            const double x = tau / half_width;
            const double win = bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - x * x))) *
                               inv_i0_beta;
            acc += in.samples[static_cast<std::size_t>(k)] *
                   (2.0 * fc * sinc(2.0 * fc * tau) * win);
        }
        out.samples[n] = static_cast<float>(acc);
    }
    return out;
}

}  // namespace portagrad
