#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace portagrad {

// Iterative radix-2 transform. Size fixed at construction, power of two.
class FftPlan {
public:
    explicit FftPlan(std::size_t size);

    std::size_t size() const { return size_; }

    // In-place forward DFT (no normalization).
    void forward(std::vector<std::complex<double>>& data) const;

private:
    std::size_t size_;
    std::vector<std::size_t> bit_reversed_;
    std::vector<std::complex<double>> twiddles_;  // exp(-i*pi*k/(size/2)), k in [0, size/2)
};

}  // namespace portagrad
