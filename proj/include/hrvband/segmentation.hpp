#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hrvband {

/// Calibrated so that i.i.d. Gaussian noise selects a single segment in well
/// over 90% of draws while planted regime changes keep their full interval.
inline constexpr double kDefaultStabilityFraction = 0.4;

struct SegmentationOptions {
    std::size_t min_segment_length = 10;
    /// Worker threads for the dynamic programme; 0 lets OpenMP decide.
    int threads = 0;
};

/// Gaussian log-likelihood contrast of a segment with its own mean:
/// n_k * log(max(var_k, floor)) + n_k, answered in O(1) from prefix sums.
class SegmentCost {
public:
    explicit SegmentCost(std::span<const double> series);

    std::size_t size() const { return n_; }
    /// 1e-12 times the series variance, or 1e-12 for a constant series.
    double variance_floor() const { return floor_; }

    double mean(std::size_t lo, std::size_t hi) const;
    /// Biased (1/n_k) variance of [lo, hi), unclamped.
    double variance(std::size_t lo, std::size_t hi) const;
    /// Contrast of [lo, hi). Requires lo < hi <= size().
    double operator()(std::size_t lo, std::size_t hi) const;

private:
    std::size_t n_;
    double offset_;
    double floor_;
    std::vector<long double> s1_;
    std::vector<long double> s2_;
};

/// Contrast of series[lo, hi); throws ConfigError if the segment is shorter than min_length.
double segment_contrast(std::span<const double> series, std::size_t lo, std::size_t hi,
                        std::size_t min_length = 1);

struct SegmentStats {
    std::size_t begin = 0;
    std::size_t end = 0;
    double mean = 0.0;
    /// Clamped to the variance floor.
    double variance = 0.0;

    std::size_t length() const { return end - begin; }
};

/// A partition of [0, n) into K segments at change points 0 < tau_1 < ... < tau_{K-1} < n.
struct Segmentation {
    std::size_t n = 0;
    std::vector<std::size_t> change_points;
    std::vector<SegmentStats> segments;
    /// (1/n) * sum of segment contrasts.
    double contrast = 0.0;

    std::size_t segment_count() const { return segments.size(); }
};

/// Builds per-segment statistics and the contrast for given change points.
Segmentation describe_partition(const SegmentCost& cost, std::vector<std::size_t> change_points);

/// Global minimiser of the contrast with exactly K segments. Among equal optima
/// the lexicographically smallest change-point vector wins.
Segmentation optimal_partition(std::span<const double> series, std::size_t segments,
                               const SegmentationOptions& options = {});

/// Optimal segmentations for every K = 1..K_max from one dynamic programme.
std::vector<Segmentation> optimal_partitions(std::span<const double> series, std::size_t max_segments,
                                             const SegmentationOptions& options = {});

struct PenaltyPathEntry {
    Segmentation segmentation;
    /// On the lower convex hull of (K, J_K).
    bool hull_vertex = false;
    /// K minimises J_K + beta * K for beta in [beta_lo, beta_hi). beta_hi is
    /// +inf for K = 1. Points off the hull keep an empty interval; points lying
    /// on a hull edge get the degenerate interval [slope, slope].
    double beta_lo = 0.0;
    double beta_hi = 0.0;

    std::size_t segments() const { return segmentation.segment_count(); }
    double contrast() const { return segmentation.contrast; }
    double stability() const { return beta_hi - beta_lo; }
};

struct PenaltyPath {
    std::vector<PenaltyPathEntry> entries;  // entries[K - 1]

    std::size_t max_segments() const { return entries.size(); }
};

/// Penalty path from precomputed optimal segmentations ordered by K = 1, 2, ...
PenaltyPath make_penalty_path(std::vector<Segmentation> per_k);

PenaltyPath penalty_path(std::span<const double> series, std::size_t max_segments,
                         const SegmentationOptions& options = {});

/// Picks the hull vertex with 2 <= K < K_max whose beta interval is longest (ties
/// to the smaller K). Falls back to K = 1 when that length is below
/// stability_fraction * beta_lo(K = 1). K_max is never eligible: its interval
/// lower end is an artefact of truncating the path.
Segmentation select_segmentation(const PenaltyPath& path, double stability_fraction = kDefaultStabilityFraction);

/// Time of day in seconds since midnight.
struct ClockTime {
    double seconds = 0.0;
};

/// Accepts "HH:MM:SS" or "HH:MM". Throws ConfigError when malformed or out of range.
ClockTime parse_clock(std::string_view text);
/// "HH:MM:SS", seconds truncated.
std::string format_clock(ClockTime t);

/// recording_start + index * b_step, wrapped modulo 24 h.
ClockTime index_to_clock(std::size_t index, double b_step, ClockTime recording_start);

}  // namespace hrvband
