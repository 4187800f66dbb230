#pragma once

#include "hrvband/band_wavelets.hpp"
#include "hrvband/rr_series.hpp"

#include <iosfwd>
#include <vector>

namespace hrvband {

struct TransformOptions {
    /// Spacing of positions b, seconds.
    double b_step = 1.0;
    /// Emit positions whose wavelet window overflows the recording (flagged in edge_mask).
    bool include_edges = false;
    /// Worker threads; 0 lets OpenMP decide. Output does not depend on this.
    int threads = 0;
};

/// Complex coefficients W(b) of one band on the grid b = start + index * b_step.
///
/// Position k of the arrays sits at grid index first_index + k, so indices stay
/// anchored to the recording start even when edge positions are dropped.
struct CoefficientSeries {
    BandSpec band;
    double start_time = 0.0;
    double b_step = 1.0;
    std::size_t first_index = 0;
    std::vector<double> positions;
    std::vector<cplx> coeffs;
    std::vector<double> modulus;
    std::vector<bool> edge_mask;

    std::size_t size() const { return coeffs.size(); }
    /// Longest run of consecutive unmasked positions, as [begin, end).
    std::pair<std::size_t, std::size_t> interior_range() const;
};

/// W(b) = sum_j conj(psi(t_j - b + c)) X(t_j) dt over the wavelet window, where c
/// is the window midpoint, so b marks the centre of the analysed stretch.
/// Throws ConfigError when dt > 0.5 / band.hi or b_step <= 0, InputError when
/// the signal cannot hold one full window.
CoefficientSeries wavelet_coefficients(const UniformSeries& signal, const FittedWavelet& wavelet,
                                       const TransformOptions& options = {});

/// |W(b)|, or |W(b)|^2 when `squared`.
std::vector<double> band_energy(const CoefficientSeries& series, bool squared = false);

/// CSV "b,re,im,modulus,edge": b with 1 decimal, values with 9 significant digits.
void write_coefficients_csv(std::ostream& out, const CoefficientSeries& series);

struct CoefficientRows {
    std::vector<double> b;
    std::vector<cplx> coeffs;
    std::vector<double> modulus;
    std::vector<bool> edge;
};
CoefficientRows read_coefficients_csv(std::istream& in);

}  // namespace hrvband
