#pragma once

#include "hrvband/rr_series.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hrvband {

/// One rectangle of a two-sided spectral density: level on lo <= |f| <= hi (Hz).
struct SpectralRectangle {
    double lo = 0.0;
    double hi = 0.0;
    /// Density in signal units^2 per Hz.
    double level = 0.0;
};

struct MeanPiece {
    double start = 0.0;
    double level = 0.0;
};

struct SpectralPiece {
    double start = 0.0;
    std::vector<SpectralRectangle> rectangles;

    /// Integral of the density over the whole real line: 2 * sum level * (hi - lo).
    double variance() const;
};

/// Piecewise-constant mean and piecewise-constant spectral density over [0, duration).
/// The two partitions are independent.
struct PiecewiseSpec {
    double duration = 0.0;
    double sample_step = 0.25;
    std::vector<MeanPiece> mean_pieces;
    std::vector<SpectralPiece> spectral_pieces;

    /// Throws ConfigError on unordered breaks, negative levels or rectangles above Nyquist.
    void validate() const;
};

/// Parses the key = value spec format:
///
///   duration = 7200
///   sample_step = 0.25
///   [mean]
///   start = 0
///   level = 0.8
///   [spectrum]
///   start = 0
///   band = 0.04 0.15 2e-4     # lo_hz hi_hz level
///
/// Sections repeat, one per piece. '#' starts a comment.
PiecewiseSpec parse_piecewise_spec(std::istream& in);
PiecewiseSpec load_piecewise_spec(const std::string& path);
void write_piecewise_spec(std::ostream& out, const PiecewiseSpec& spec);

/// Draws a realisation: each spectral piece is an independent stationary Gaussian
/// sample by spectral synthesis on its own DFT grid, pieces are concatenated and
/// the piecewise mean is added. Deterministic in (spec, seed).
UniformSeries generate(const PiecewiseSpec& spec, std::uint64_t seed);

/// Interior mean and spectral breaks mapped to floor(t / b_step), sorted and unique.
std::vector<std::size_t> planted_truth(const PiecewiseSpec& spec, double b_step);

}  // namespace hrvband
