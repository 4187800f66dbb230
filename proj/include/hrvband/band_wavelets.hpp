#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hrvband {

using cplx = std::complex<double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double midpoint() const { return 0.5 * (lo + hi); }
};

/// A frequency band in Hz.
struct BandSpec {
    double lo = 0.0;
    double hi = 0.0;
    std::string name;

    double width() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    /// Throws ConfigError unless 0 < lo < hi.
    void validate() const;
};

/// 0.04 to 0.15 Hz.
BandSpec orthosympathetic_band();
/// 0.15 to 0.5 Hz.
BandSpec parasympathetic_band();

enum class WaveletFamily { Gabor, Daubechies };

WaveletFamily parse_wavelet_family(std::string_view name);
std::string to_string(WaveletFamily family);

namespace detail {
class MotherImpl;
}

/// A mother wavelet with a known frequency pseudo support.
///
/// Frequencies are in cycles per time unit. The Fourier convention is
/// spectrum(f) = integral of psi(t) exp(-2 pi i f t) dt, which is the usual
/// angular-frequency transform evaluated at xi = 2 pi f.
class MotherWavelet {
public:
    explicit MotherWavelet(std::shared_ptr<const detail::MotherImpl> impl);

    WaveletFamily family() const;
    cplx evaluate(double t) const;
    cplx spectrum(double f) const;

    /// Exact support for Daubechies, pseudo support [-L, L] for Gabor.
    Interval time_support() const;
    /// Evaluation window outside which the wavelet is treated as zero.
    Interval window() const;
    /// Frequency pseudo support [Lambda1, Lambda2] and the energy fraction it holds.
    Interval freq_support() const;
    double rho() const;
    /// Zero for Gabor.
    int vanishing_moments() const;

private:
    std::shared_ptr<const detail::MotherImpl> impl_;
};

/// Unit-norm Gabor mother: pi^(-1/4) exp(-t^2 / 2), time pseudo support [-L, L]
/// and frequency pseudo support [-L, L] / (2 pi).
MotherWavelet gabor_mother(double half_width = 3.5);

/// Orthonormal Daubechies filter h_0..h_{2p-1} with p vanishing moments (2 <= p <= 10).
std::span<const double> daubechies_filter(int vanishing_moments);

/// Real Daubechies scaling function and wavelet on a dyadic grid of spacing 2^-level,
/// supported on [0, 2p - 1].
struct DaubechiesTable {
    int vanishing_moments = 0;
    int level = 0;
    double spacing = 0.0;
    std::vector<double> phi;
    std::vector<double> psi;
};

/// Cascade refinement of the orthonormal filter.
DaubechiesTable cascade_daubechies(int vanishing_moments, int level);

/// Angular transform of the real Daubechies wavelet in natural units by the
/// infinite-product formula, truncated after `factors` terms.
cplx daubechies_product_spectrum(std::span<const double> filter, double xi, int factors = 40);

struct DaubechiesOptions {
    int level = 10;
    /// Time compression applied to the natural-unit wavelet: psi_mother(t) =
    /// sqrt(c) psi(c t), support [0, (2p - 1) / c].
    double time_scale = 0.5;
    Interval freq_support{0.08, 1.75};
};

/// Analytic (positive-frequency) unit-norm Daubechies mother built from the
/// cascade table. Its real part is the Daubechies wavelet divided by sqrt(2).
/// Throws ConfigError for p outside 2..10 or level < 6.
MotherWavelet daubechies_mother(int vanishing_moments, const DaubechiesOptions& options = {});

/// A mother wavelet scaled and modulated into a band:
/// psi_band(t) = amplitude * exp(2 pi i eta t) * psi(rate * t).
class FittedWavelet {
public:
    FittedWavelet(MotherWavelet mother, BandSpec band, double amplitude, double rate, double modulation_hz,
                  double half_width = 0.0);

    const BandSpec& band() const { return band_; }
    WaveletFamily family() const { return mother_.family(); }
    const MotherWavelet& mother() const { return mother_; }

    double amplitude() const { return amplitude_; }
    /// Dimensionless time rate lambda applied to the mother.
    double rate() const { return rate_; }
    /// Gabor envelope width sigma in seconds (1 / rate for the unit Gabor mother).
    double sigma() const { return 1.0 / rate_; }
    double modulation_hz() const { return modulation_hz_; }
    double modulation_rad() const;

    Interval time_support() const;
    Interval window() const;
    /// Reference time mapped to position b in the transform (window midpoint).
    double center() const { return window().midpoint(); }
    Interval freq_support_hz() const;
    double rho() const { return mother_.rho(); }
    /// Pseudo-support half-width used by fit_gabor, zero otherwise.
    double half_width() const { return half_width_; }

    cplx evaluate(double t) const;
    /// Analytic transform: amplitude / rate * mother.spectrum((f - eta) / rate).
    cplx spectrum(double f_hz) const;

private:
    MotherWavelet mother_;
    BandSpec band_;
    double amplitude_;
    double rate_;
    double modulation_hz_;
    double half_width_;
};

/// Ratio of the energy of g over `interval` to its energy over `window`, both by
/// composite Simpson quadrature with spacing close to `step`. The window must
/// be wide enough that the energy outside it is negligible.
double pseudo_support_ratio(const std::function<cplx(double)>& g, Interval interval, double step, Interval window);

/// Fits the mother's frequency pseudo support exactly onto the band:
/// rate = band width / (Lambda2 - Lambda1), eta = band.lo - rate * Lambda1,
/// amplitude from the unit-norm convention.
FittedWavelet fit_by_scaling_modulation(const MotherWavelet& mother, const BandSpec& band);

/// Gabor wavelet centred on the band midpoint with sigma = 2L / (2 pi width).
FittedWavelet fit_gabor(const BandSpec& band, double half_width = 3.5);

/// Convenience dispatch used by the pipeline.
FittedWavelet fit_band(WaveletFamily family, const BandSpec& band, double half_width = 3.5,
                       int vanishing_moments = 6);

/// Samples the fitted wavelet over its window at spacing dt, takes a zero-padded
/// DFT and returns the fraction of spectral energy whose frequency lies in `band`.
/// Independent of the analytic spectrum formula.
double sampled_band_energy_fraction(const FittedWavelet& wavelet, const BandSpec& band, double dt);

/// L2 norm of the fitted wavelet by trapezoid quadrature over its window.
double l2_norm(const FittedWavelet& wavelet, double dt);

/// "t,re,im" rows over the window.
void write_wavelet_csv(std::ostream& out, const FittedWavelet& wavelet, double dt);
/// "xi_hz,power" rows of |spectrum|^2 over [f_lo, f_hi].
void write_spectrum_csv(std::ostream& out, const FittedWavelet& wavelet, double f_lo, double f_hi, double df);

}  // namespace hrvband
