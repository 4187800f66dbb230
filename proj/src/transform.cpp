#include "hrvband/transform.hpp"

#include "hrvband/error.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hrvband {

namespace {
constexpr double kGridEps = 1e-9;
}

std::pair<std::size_t, std::size_t> CoefficientSeries::interior_range() const {
    std::size_t best_begin = 0, best_end = 0, begin = 0;
    for (std::size_t k = 0; k <= edge_mask.size(); ++k) {
        if (k == edge_mask.size() || edge_mask[k]) {
            if (k - begin > best_end - best_begin) {
                best_begin = begin;
                best_end = k;
            }
            begin = k + 1;
        }
    }
    return {best_begin, best_end};
}

CoefficientSeries wavelet_coefficients(const UniformSeries& signal, const FittedWavelet& wavelet,
                                       const TransformOptions& options) {
    signal.validate();
    const BandSpec& band = wavelet.band();
    if (!(options.b_step > 0.0) || !std::isfinite(options.b_step)) throw ConfigError("b_step must be positive");
    const double dt = signal.step;
    if (dt > 0.5 / band.hi * (1.0 + 1e-12))
        throw ConfigError("signal step " + std::to_string(dt) + " s exceeds the Nyquist limit " +
                          std::to_string(0.5 / band.hi) + " s for band " + band.name);

    const Interval w = wavelet.window();
    const double centre = w.midpoint();
    const double half = 0.5 * w.length();
    const double start = signal.start_time;
    const double span = signal.end_time() - start;
    const std::size_t n = signal.size();

    const auto total_positions = static_cast<std::size_t>(std::floor(span / options.b_step + kGridEps)) + 1;
    const double first_interior = std::ceil(half / options.b_step - kGridEps);
    const double last_interior = std::floor((span - half) / options.b_step + kGridEps);
    if (last_interior < first_interior)
        throw InputError("signal of " + std::to_string(span) + " s is shorter than one wavelet window (" +
                         std::to_string(w.length()) + " s)");

    std::size_t k_begin = 0, k_end = total_positions;
    if (!options.include_edges) {
        k_begin = static_cast<std::size_t>(first_interior);
        k_end = static_cast<std::size_t>(last_interior) + 1;
    }
    const std::size_t count = k_end - k_begin;

    CoefficientSeries out;
    out.band = band;
    out.start_time = start;
    out.b_step = options.b_step;
    out.first_index = k_begin;
    out.positions.resize(count);
    out.coeffs.assign(count, cplx{});
    out.modulus.resize(count);
    out.edge_mask.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double k = static_cast<double>(k_begin + i);
        out.positions[i] = start + k * options.b_step;
        out.edge_mask[i] = k < first_interior || k > last_interior;
    }

    const double ratio = options.b_step / dt;
    const bool aligned = std::abs(ratio - std::round(ratio)) < kGridEps * std::max(1.0, ratio);
    const auto m_lo = static_cast<long long>(std::ceil(-half / dt - kGridEps));
    const auto m_hi = static_cast<long long>(std::floor(half / dt + kGridEps));
    std::vector<cplx> kernel;
    if (aligned) {
        kernel.resize(static_cast<std::size_t>(m_hi - m_lo + 1));
        for (long long m = m_lo; m <= m_hi; ++m)
            kernel[static_cast<std::size_t>(m - m_lo)] = std::conj(wavelet.evaluate(static_cast<double>(m) * dt + centre)) * dt;
    }
    const auto stride = static_cast<long long>(std::llround(ratio));
    const auto& x = signal.values;
    const auto last_sample = static_cast<long long>(n) - 1;

#ifdef _OPENMP
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
        const auto k = static_cast<long long>(k_begin) + i;
        cplx acc{};
        if (aligned) {
            const long long base = k * stride;
            const long long lo = std::max(m_lo, -base);
            const long long hi = std::min(m_hi, last_sample - base);
            for (long long m = lo; m <= hi; ++m)
                acc += kernel[static_cast<std::size_t>(m - m_lo)] * x[static_cast<std::size_t>(base + m)];
        } else {
            const double b = out.positions[static_cast<std::size_t>(i)];
            const auto j_lo = std::max(0LL, static_cast<long long>(std::ceil((b - start - half) / dt - kGridEps)));
            const auto j_hi = std::min(last_sample, static_cast<long long>(std::floor((b - start + half) / dt + kGridEps)));
            for (long long j = j_lo; j <= j_hi; ++j) {
                const double t = start + static_cast<double>(j) * dt;
                acc += std::conj(wavelet.evaluate(t - b + centre)) * x[static_cast<std::size_t>(j)] * dt;
            }
        }
        out.coeffs[static_cast<std::size_t>(i)] = acc;
        out.modulus[static_cast<std::size_t>(i)] = std::abs(acc);
    }
    return out;
}

std::vector<double> band_energy(const CoefficientSeries& series, bool squared) {
    std::vector<double> e(series.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double m = std::abs(series.coeffs[i]);
        e[i] = squared ? m * m : m;
    }
    return e;
}

void write_coefficients_csv(std::ostream& out, const CoefficientSeries& series) {
    out << "b,re,im,modulus,edge\n";
    char buf[160];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.1f,%.8e,%.8e,%.8e,%d\n", series.positions[i], series.coeffs[i].real(),
                      series.coeffs[i].imag(), series.modulus[i], series.edge_mask[i] ? 1 : 0);
        out << buf;
    }
}

CoefficientRows read_coefficients_csv(std::istream& in) {
    CoefficientRows rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line[0] == 'b') continue;
        std::istringstream ss(line);
        double b = 0, re = 0, im = 0, mod = 0;
        int edge = 0;
        char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
        if (!(ss >> b >> c1 >> re >> c2 >> im >> c3 >> mod >> c4 >> edge) || c1 != ',' || c2 != ',' || c3 != ',' ||
            c4 != ',')
            throw InputError("coefficient CSV line " + std::to_string(line_no) + " is malformed");
        rows.b.push_back(b);
        rows.coeffs.emplace_back(re, im);
        rows.modulus.push_back(mod);
        rows.edge.push_back(edge != 0);
    }
    return rows;
}

}  // namespace hrvband
