#include "hrvband/segmentation.hpp"

#include "hrvband/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hrvband {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SegmentCost::SegmentCost(std::span<const double> series) : n_(series.size()), s1_(n_ + 1, 0.0L), s2_(n_ + 1, 0.0L) {
    if (n_ == 0) throw InputError("cannot segment an empty series");
    long double sum = 0.0L;
    for (double v : series) {
        if (!std::isfinite(v)) throw InputError("series contains a non-finite value");
        sum += v;
    }
    // Prefix sums of the centred series limit cancellation in the variance.
    offset_ = static_cast<double>(sum / static_cast<long double>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
        const long double d = static_cast<long double>(series[i]) - offset_;
        s1_[i + 1] = s1_[i] + d;
        s2_[i + 1] = s2_[i] + d * d;
    }
    const double global_var = variance(0, n_);
    floor_ = 1e-12 * (global_var > 0.0 ? global_var : 1.0);
}

double SegmentCost::mean(std::size_t lo, std::size_t hi) const {
    const auto len = static_cast<long double>(hi - lo);
    return static_cast<double>((s1_[hi] - s1_[lo]) / len) + offset_;
}

double SegmentCost::variance(std::size_t lo, std::size_t hi) const {
    const auto len = static_cast<long double>(hi - lo);
    const long double m = (s1_[hi] - s1_[lo]) / len;
    const long double v = (s2_[hi] - s2_[lo]) / len - m * m;
    return v > 0.0L ? static_cast<double>(v) : 0.0;
}

double SegmentCost::operator()(std::size_t lo, std::size_t hi) const {
    const auto len = static_cast<double>(hi - lo);
    return len * std::log(std::max(variance(lo, hi), floor_)) + len;
}

double segment_contrast(std::span<const double> series, std::size_t lo, std::size_t hi, std::size_t min_length) {
    if (hi > series.size() || lo >= hi) throw ConfigError("segment bounds out of range");
    if (hi - lo < std::max<std::size_t>(min_length, 1))
        throw ConfigError("segment of length " + std::to_string(hi - lo) + " is shorter than the minimum " +
                          std::to_string(min_length));
    return SegmentCost(series)(lo, hi);
}

Segmentation describe_partition(const SegmentCost& cost, std::vector<std::size_t> change_points) {
    Segmentation seg;
    seg.n = cost.size();
    seg.change_points = std::move(change_points);
    std::size_t begin = 0;
    double total = 0.0;
    for (std::size_t i = 0; i <= seg.change_points.size(); ++i) {
        const std::size_t end = i < seg.change_points.size() ? seg.change_points[i] : seg.n;
        if (end <= begin || end > seg.n) throw InvariantError("change points must be increasing inside (0, n)");
        SegmentStats st;
        st.begin = begin;
        st.end = end;
        st.mean = cost.mean(begin, end);
        st.variance = std::max(cost.variance(begin, end), cost.variance_floor());
        seg.segments.push_back(st);
        total += cost(begin, end);
        begin = end;
    }
    seg.contrast = total / static_cast<double>(seg.n);
    return seg;
}

std::vector<Segmentation> optimal_partitions(std::span<const double> series, std::size_t max_segments,
                                             const SegmentationOptions& options) {
    const std::size_t n = series.size();
    const std::size_t m = std::max<std::size_t>(options.min_segment_length, 1);
    if (max_segments < 1) throw ConfigError("segment count must be at least 1");
    if (n < max_segments * m)
        throw ConfigError("series of length " + std::to_string(n) + " cannot hold " + std::to_string(max_segments) +
                          " segments of minimum length " + std::to_string(m));
    const SegmentCost cost(series);
    const std::size_t kmax = max_segments;

    // best[k][s]: minimal summed contrast of [s, n) cut into k + 1 segments.
    // next[k][s]: smallest first cut achieving it, so forward reconstruction
    // yields the lexicographically smallest optimal change-point vector.
    std::vector<std::vector<double>> best(kmax, std::vector<double>(n + 1, kInf));
    std::vector<std::vector<std::uint32_t>> next(kmax, std::vector<std::uint32_t>(n + 1, 0));
    std::vector<double> row(n + 1, kInf);

#ifdef _OPENMP
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#endif
    for (std::size_t s = n - m + 1; s-- > 0;) {
        for (std::size_t t = s + m; t <= n; ++t) row[t] = cost(s, t);
        best[0][s] = row[n];
        const std::size_t width = n - s;
        const auto layers = static_cast<long long>(std::min(kmax, width / m));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (width * static_cast<std::size_t>(layers) > 65536)
#endif
        for (long long kk = 1; kk < layers; ++kk) {
            const auto k = static_cast<std::size_t>(kk);
            const auto& prev = best[k - 1];
            // Every remaining segment needs m samples: the first cut t leaves n - t >= k * m.
            const std::size_t t_end = n - k * m;
            double value = kInf;
            std::size_t arg = 0;
            for (std::size_t t = s + m; t <= t_end; ++t) {
                const double v = row[t] + prev[t];
                if (v < value) {
                    value = v;
                    arg = t;
                }
            }
            best[k][s] = value;
            next[k][s] = static_cast<std::uint32_t>(arg);
        }
    }

    std::vector<Segmentation> out;
    out.reserve(kmax);
    for (std::size_t k = 0; k < kmax; ++k) {
        if (!std::isfinite(best[k][0])) throw InvariantError("dynamic programme left K=" + std::to_string(k + 1) + " infeasible");
        std::vector<std::size_t> cps;
        std::size_t s = 0;
        for (std::size_t layer = k; layer > 0; --layer) {
            s = next[layer][s];
            cps.push_back(s);
        }
        Segmentation seg = describe_partition(cost, std::move(cps));
        // Report the DP optimum itself; describe_partition re-sums the same terms.
        seg.contrast = best[k][0] / static_cast<double>(n);
        out.push_back(std::move(seg));
    }
    return out;
}

Segmentation optimal_partition(std::span<const double> series, std::size_t segments,
                               const SegmentationOptions& options) {
    auto all = optimal_partitions(series, segments, options);
    return std::move(all.back());
}

PenaltyPath make_penalty_path(std::vector<Segmentation> per_k) {
    PenaltyPath path;
    const std::size_t kmax = per_k.size();
    if (kmax == 0) return path;
    path.entries.resize(kmax);
    for (std::size_t i = 0; i < kmax; ++i) path.entries[i].segmentation = std::move(per_k[i]);

    auto J = [&](std::size_t i) { return path.entries[i].segmentation.contrast; };
    // Lower convex hull of (K, J_K); collinear points are dropped from the vertex set.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < kmax; ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2], b = hull.back();
            const double cross = (J(b) - J(a)) * static_cast<double>(i - a) - (J(i) - J(a)) * static_cast<double>(b - a);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    auto slope = [&](std::size_t a, std::size_t b) { return (J(a) - J(b)) / static_cast<double>(b - a); };
    for (std::size_t h = 0; h < hull.size(); ++h) {
        auto& e = path.entries[hull[h]];
        e.hull_vertex = true;
        e.beta_hi = h == 0 ? kInf : slope(hull[h - 1], hull[h]);
        e.beta_lo = h + 1 == hull.size() ? 0.0 : slope(hull[h], hull[h + 1]);
    }
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        const std::size_t a = hull[h], b = hull[h + 1];
        const double s = slope(a, b);
        for (std::size_t i = a + 1; i < b; ++i) {
            const double on_edge = J(a) - s * static_cast<double>(i - a);
            const double scale = std::max({std::abs(J(a)), std::abs(J(b)), 1e-300});
            if (std::abs(J(i) - on_edge) <= 1e-12 * scale) {
                path.entries[i].beta_lo = s;
                path.entries[i].beta_hi = s;
            }
        }
    }
    return path;
}

PenaltyPath penalty_path(std::span<const double> series, std::size_t max_segments, const SegmentationOptions& options) {
    return make_penalty_path(optimal_partitions(series, max_segments, options));
}

Segmentation select_segmentation(const PenaltyPath& path, double stability_fraction) {
    if (path.entries.empty()) throw ConfigError("empty penalty path");
    const auto& single = path.entries.front();
    const std::size_t kmax = path.entries.size();
    const PenaltyPathEntry* best = nullptr;
    for (std::size_t i = 1; i + 1 < kmax; ++i) {
        const auto& e = path.entries[i];
        if (!e.hull_vertex) continue;
        if (best == nullptr || e.stability() > best->stability()) best = &e;
    }
    if (best == nullptr || best->stability() < stability_fraction * single.beta_lo) return single.segmentation;
    return best->segmentation;
}

ClockTime parse_clock(std::string_view text) {
    int h = 0, m = 0, s = 0;
    char tail = 0;
    const std::string str(text);
    const int got = std::sscanf(str.c_str(), "%d:%d:%d%c", &h, &m, &s, &tail);
    if (!(got == 3 || (got == 2 && std::sscanf(str.c_str(), "%d:%d%c", &h, &m, &tail) == 2)))
        throw ConfigError("malformed clock time '" + str + "' (expected HH:MM:SS)");
    if (got == 2) s = 0;
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59)
        throw ConfigError("clock time '" + str + "' out of range");
    return {static_cast<double>(h * 3600 + m * 60 + s)};
}

std::string format_clock(ClockTime t) {
    auto total = static_cast<long long>(std::floor(t.seconds));
    total = ((total % 86400) + 86400) % 86400;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", total / 3600, (total % 3600) / 60, total % 60);
    return buf;
}

ClockTime index_to_clock(std::size_t index, double b_step, ClockTime recording_start) {
    if (!(b_step > 0.0)) throw ConfigError("b_step must be positive");
    const double t = std::fmod(recording_start.seconds + static_cast<double>(index) * b_step, 86400.0);
    return {t < 0.0 ? t + 86400.0 : t};
}

}  // namespace hrvband
