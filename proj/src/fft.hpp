#pragma once

// Thin RAII wrapper over FFTW. Planning is serialized because the FFTW planner
// is not reentrant; execution is.

#include <complex>
#include <vector>

namespace hrvband::detail {

enum class FftDirection { Forward, Backward };

/// In-place complex DFT of `data` (unnormalized in both directions).
void fft_inplace(std::vector<std::complex<double>>& data, FftDirection direction);

/// Real sequence from a Hermitian half spectrum of size n/2 + 1 (unnormalized).
std::vector<double> inverse_real_fft(const std::vector<std::complex<double>>& half_spectrum, std::size_t n);

std::size_t next_pow2(std::size_t n);

}  // namespace hrvband::detail
