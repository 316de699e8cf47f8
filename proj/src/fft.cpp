#include "portagrad/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace portagrad {

FftPlan::FftPlan(std::size_t size) : size_(size) {
    if (size == 0 || (size & (size - 1)) != 0)
        throw std::invalid_argument("FftPlan: size must be a power of two");

    bit_reversed_.resize(size);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < size) ++log2n;
    for (std::size_t i = 0; i < size; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
        bit_reversed_[i] = r;
    }

    twiddles_.resize(size / 2);
    for (std::size_t k = 0; k < size / 2; ++k) {
        const double angle = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(size);
        twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
}

void FftPlan::forward(std::vector<std::complex<double>>& data) const {
    if (data.size() != size_)
        throw std::invalid_argument("FftPlan::forward: size mismatch");

    for (std::size_t i = 0; i < size_; ++i) {
        const std::size_t j = bit_reversed_[i];
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= size_; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t stride = size_ / len;
        for (std::size_t start = 0; start < size_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const std::complex<double> w = twiddles_[k * stride];
                const std::complex<double> u = data[start + k];
                const std::complex<double> v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
    }
}

}  // namespace portagrad
