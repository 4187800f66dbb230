#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hrvband {

/// Physiological RR bounds in seconds: heart rate within [20, 250] bpm.
inline constexpr double kMinPlausibleRR = 60.0 / 250.0;
inline constexpr double kMaxPlausibleRR = 60.0 / 20.0;

enum class RRFormat { PeakTimes, Intervals };

enum class ArtifactPolicy { HoldPrevious, Linear, Reject };

RRFormat parse_rr_format(std::string_view name);
ArtifactPolicy parse_artifact_policy(std::string_view name);
std::string to_string(RRFormat format);
std::string to_string(ArtifactPolicy policy);

/// Beat-to-beat intervals of a recording.
///
/// peak_times are seconds since the recording start and strictly increasing.
/// intervals[i] = peak_times[i + 1] - peak_times[i] and artifact_mask[i]
/// flags intervals outside [kMinPlausibleRR, kMaxPlausibleRR].
class RRSeries {
public:
    /// Builds from peak times. Throws InputError unless strictly increasing
    /// with at least two entries.
    static RRSeries from_peak_times(std::vector<double> peak_times);

    /// Builds from intervals, synthesizing cumulative peak times from `start`.
    static RRSeries from_intervals(std::span<const double> intervals, double start = 0.0);

    const std::vector<double>& peak_times() const { return peak_times_; }
    const std::vector<double>& intervals() const { return intervals_; }
    const std::vector<bool>& artifact_mask() const { return mask_; }

    std::size_t size() const { return intervals_.size(); }
    bool has_artifacts() const;
    double start_time() const { return peak_times_.front(); }
    double end_time() const { return peak_times_.back(); }

private:
    RRSeries() = default;
    void compute_mask();

    std::vector<double> peak_times_;
    std::vector<double> intervals_;
    std::vector<bool> mask_;
};

/// Samples on a regular grid: values[k] is the signal at start_time + k * step.
struct UniformSeries {
    double start_time = 0.0;
    double step = 0.0;
    std::vector<double> values;

    double time_at(std::size_t k) const { return start_time + static_cast<double>(k) * step; }
    double end_time() const;
    std::size_t size() const { return values.size(); }

    /// Throws InputError when step <= 0 or any value is non-finite.
    void validate() const;
};

/// Reads one number per line; '#' starts a comment line, blank lines skipped.
/// Errors carry the 1-based line number.
RRSeries parse_rr(std::istream& input, RRFormat format);
RRSeries load_rr(const std::string& path, RRFormat format);

/// Replaces masked intervals. Peak times are rebuilt cumulatively from the
/// first peak so the cleaned series stays self-consistent.
RRSeries clean_artifacts(const RRSeries& series, ArtifactPolicy policy);

/// Previous-beat hold: X(t) = intervals[i] for t in [peak_times[i], peak_times[i+1]).
/// Grid spans [first peak, last peak]; the final grid point takes the last interval.
UniformSeries resample(const RRSeries& series, double step);

/// CSV with header "t,rr"; t with 3 decimals, rr with 6 decimals.
void write_uniform_csv(std::ostream& out, const UniformSeries& series);
void save_uniform_csv(const std::string& path, const UniformSeries& series);

/// Reads the "t,rr" CSV back. The step is taken from the first two rows and
/// every row must sit on that grid (within 1 ms).
UniformSeries read_uniform_csv(std::istream& input);
UniformSeries load_uniform_csv(const std::string& path);

}  // namespace hrvband
