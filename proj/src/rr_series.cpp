#include "hrvband/rr_series.hpp"

#include "hrvband/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hrvband {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& value) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc{} && ptr == end && std::isfinite(value);
}

std::string line_error(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

RRFormat parse_rr_format(std::string_view name) {
    if (name == "peak-times") return RRFormat::PeakTimes;
    if (name == "intervals") return RRFormat::Intervals;
    throw ConfigError("unknown RR format '" + std::string(name) + "' (expected peak-times or intervals)");
}

ArtifactPolicy parse_artifact_policy(std::string_view name) {
    if (name == "hold-previous") return ArtifactPolicy::HoldPrevious;
    if (name == "linear") return ArtifactPolicy::Linear;
    if (name == "reject") return ArtifactPolicy::Reject;
    throw ConfigError("unknown artifact policy '" + std::string(name) +
                      "' (expected hold-previous, linear or reject)");
}

std::string to_string(RRFormat format) {
    return format == RRFormat::PeakTimes ? "peak-times" : "intervals";
}

std::string to_string(ArtifactPolicy policy) {
    switch (policy) {
        case ArtifactPolicy::HoldPrevious: return "hold-previous";
        case ArtifactPolicy::Linear: return "linear";
        case ArtifactPolicy::Reject: return "reject";
    }
    return "linear";
}

RRSeries RRSeries::from_peak_times(std::vector<double> peak_times) {
    if (peak_times.size() < 2)
        throw InputError("RR input needs at least two peak times, got " + std::to_string(peak_times.size()));
    RRSeries s;
    s.intervals_.reserve(peak_times.size() - 1);
    for (std::size_t i = 1; i < peak_times.size(); ++i) {
        const double d = peak_times[i] - peak_times[i - 1];
        if (!(d > 0.0))
            throw InputError("peak times not strictly increasing at entry " + std::to_string(i + 1));
        s.intervals_.push_back(d);
    }
    s.peak_times_ = std::move(peak_times);
    s.compute_mask();
    return s;
}

RRSeries RRSeries::from_intervals(std::span<const double> intervals, double start) {
    if (intervals.empty()) throw InputError("RR input needs at least one interval");
    RRSeries s;
    s.peak_times_.reserve(intervals.size() + 1);
    s.peak_times_.push_back(start);
    // Kahan-compensated running sum keeps long recordings within the 1 ms round trip.
    double sum = start, carry = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (!(intervals[i] > 0.0) || !std::isfinite(intervals[i]))
            throw InputError("interval " + std::to_string(i + 1) + " is not a positive finite number");
        const double y = intervals[i] - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        s.peak_times_.push_back(sum);
    }
    s.intervals_.assign(intervals.begin(), intervals.end());
    s.compute_mask();
    return s;
}

void RRSeries::compute_mask() {
    mask_.resize(intervals_.size());
    for (std::size_t i = 0; i < intervals_.size(); ++i)
        mask_[i] = intervals_[i] < kMinPlausibleRR || intervals_[i] > kMaxPlausibleRR;
}

bool RRSeries::has_artifacts() const {
    return std::find(mask_.begin(), mask_.end(), true) != mask_.end();
}

double UniformSeries::end_time() const {
    return values.empty() ? start_time : time_at(values.size() - 1);
}

void UniformSeries::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw InputError("uniform series step must be positive");
    if (!std::isfinite(start_time)) throw InputError("uniform series start time is not finite");
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!std::isfinite(values[k]))
            throw InputError("uniform series value " + std::to_string(k) + " is not finite");
}

RRSeries parse_rr(std::istream& input, RRFormat format) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        double v = 0.0;
        if (!parse_double(text, v)) throw InputError(line_error(line_no, "cannot parse '" + std::string(text) + "'"));
        if (format == RRFormat::PeakTimes && !values.empty() && !(v > values.back()))
            throw InputError(line_error(line_no, "peak times must be strictly increasing"));
        if (format == RRFormat::Intervals && !(v > 0.0))
            throw InputError(line_error(line_no, "intervals must be positive"));
        values.push_back(v);
    }
    if (values.empty()) throw InputError("RR input is empty");
    if (format == RRFormat::PeakTimes) {
        if (values.size() < 2) throw InputError("RR input has a single peak time; at least two are needed");
        return RRSeries::from_peak_times(std::move(values));
    }
    if (values.size() < 2) throw InputError("RR input has a single interval; at least two are needed");
    return RRSeries::from_intervals(values);
}

RRSeries load_rr(const std::string& path, RRFormat format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open RR input '" + path + "'");
    try {
        return parse_rr(in, format);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

RRSeries clean_artifacts(const RRSeries& series, ArtifactPolicy policy) {
    if (!series.has_artifacts()) return series;
    const auto& mask = series.artifact_mask();
    std::vector<double> values = series.intervals();
    const std::size_t n = values.size();

    switch (policy) {
        case ArtifactPolicy::Reject: {
            std::string list;
            for (std::size_t i = 0; i < n; ++i)
                if (mask[i]) list += (list.empty() ? "" : ",") + std::to_string(i);
            throw InputError("artifact intervals at indices " + list);
        }
        case ArtifactPolicy::HoldPrevious: {
            if (mask[0]) throw InputError("first interval is an artifact; hold-previous has no prior value");
            for (std::size_t i = 1; i < n; ++i)
                if (mask[i]) values[i] = values[i - 1];
            break;
        }
        case ArtifactPolicy::Linear: {
            std::vector<std::size_t> valid;
            for (std::size_t i = 0; i < n; ++i)
                if (!mask[i]) valid.push_back(i);
            if (valid.empty()) throw InputError("every interval is an artifact");
            std::size_t next = 0;  // index into `valid` of the first valid position > i
            for (std::size_t i = 0; i < n; ++i) {
                while (next < valid.size() && valid[next] <= i) ++next;
                if (!mask[i]) continue;
                // Edge runs without a neighbor on one side take the nearest valid value.
                if (next == 0) {
                    values[i] = values[valid.front()];
                } else if (next == valid.size()) {
                    values[i] = values[valid.back()];
                } else {
                    const std::size_t a = valid[next - 1], b = valid[next];
                    const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
                    values[i] = (1.0 - w) * series.intervals()[a] + w * series.intervals()[b];
                }
            }
            break;
        }
    }
    return RRSeries::from_intervals(values, series.start_time());
}

UniformSeries resample(const RRSeries& series, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("resampling step must be positive");
    if (series.has_artifacts()) throw InputError("resample needs a cleaned series (artifacts present)");
    const auto& peaks = series.peak_times();
    const auto& iv = series.intervals();
    const double start = peaks.front();
    const double span = peaks.back() - start;
    if (span < step) throw InputError("recording is shorter than one resampling step");

    const auto count = static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
    UniformSeries out;
    out.start_time = start;
    out.step = step;
    out.values.resize(count);
    std::size_t beat = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = out.time_at(k);
        while (beat + 1 < iv.size() && t >= peaks[beat + 1]) ++beat;
        out.values[k] = iv[beat];
    }
    return out;
}

void write_uniform_csv(std::ostream& out, const UniformSeries& series) {
    out << "t,rr\n";
    char buf[96];
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.3f,%.6f\n", series.time_at(k), series.values[k]);
        out << buf;
    }
}

void save_uniform_csv(const std::string& path, const UniformSeries& series) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_uniform_csv(out, series);
}

UniformSeries read_uniform_csv(std::istream& input) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> times, values;
    while (std::getline(input, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (line_no == 1 && text.substr(0, 1) == "t") continue;
        const auto comma = text.find(',');
        double t = 0.0, v = 0.0;
        if (comma == std::string_view::npos || !parse_double(text.substr(0, comma), t) ||
            !parse_double(text.substr(comma + 1), v))
            throw InputError(line_error(line_no, "expected 't,rr' row"));
        times.push_back(t);
        values.push_back(v);
    }
    if (values.size() < 2) throw InputError("uniform series needs at least two rows");
    UniformSeries s;
    s.start_time = times.front();
    s.step = times[1] - times[0];
    if (!(s.step > 0.0)) throw InputError("uniform series times must increase");
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - s.time_at(k)) > 1e-3)
            throw InputError("row " + std::to_string(k + 1) + " is off the uniform grid");
    s.values = std::move(values);
    s.validate();
    return s;
}

UniformSeries load_uniform_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return read_uniform_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace hrvband
