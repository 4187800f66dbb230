#include "hrvband/synth.hpp"

#include "fft.hpp"
#include "hrvband/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace hrvband {

double SpectralPiece::variance() const {
    double v = 0.0;
    for (const auto& r : rectangles) v += 2.0 * r.level * (r.hi - r.lo);
    return v;
}

void PiecewiseSpec::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("spec: duration must be positive");
    if (!(sample_step > 0.0) || !std::isfinite(sample_step)) throw ConfigError("spec: sample_step must be positive");
    if (sample_step > duration) throw ConfigError("spec: sample_step exceeds duration");
    auto check_starts = [&](const auto& pieces, const char* what) {
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const double s = pieces[i].start;
            if (i == 0 && s != 0.0) throw ConfigError(std::string("spec: first ") + what + " piece must start at 0");
            if (i > 0 && !(s > pieces[i - 1].start))
                throw ConfigError(std::string("spec: ") + what + " breaks must be strictly increasing");
            if (!(s < duration)) throw ConfigError(std::string("spec: ") + what + " break lies beyond the duration");
        }
    };
    check_starts(mean_pieces, "mean");
    check_starts(spectral_pieces, "spectrum");
    for (const auto& m : mean_pieces)
        if (!std::isfinite(m.level)) throw ConfigError("spec: mean level must be finite");
    const double nyquist = 0.5 / sample_step;
    for (const auto& p : spectral_pieces)
        for (const auto& r : p.rectangles) {
            if (!(r.lo >= 0.0) || !(r.hi > r.lo)) throw ConfigError("spec: band needs 0 <= lo < hi");
            if (r.hi > nyquist * (1.0 + 1e-12))
                throw ConfigError("spec: band upper edge " + std::to_string(r.hi) + " Hz exceeds Nyquist " +
                                  std::to_string(nyquist) + " Hz");
            if (!(r.level >= 0.0) || !std::isfinite(r.level)) throw ConfigError("spec: band level must be >= 0");
        }
}

PiecewiseSpec parse_piecewise_spec(std::istream& in) {
    PiecewiseSpec spec;
    enum class Section { Global, Mean, Spectrum } section = Section::Global;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) { throw ConfigError("spec line " + std::to_string(line_no) + ": " + what); };
    auto number = [&](const std::string& text) {
        std::istringstream ss(text);
        double v = 0.0;
        std::string rest;
        if (!(ss >> v) || (ss >> rest)) fail("expected a number, got '" + text + "'");
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
        if (line.front() == '[') {
            if (line == "[mean]") {
                section = Section::Mean;
                spec.mean_pieces.emplace_back();
            } else if (line == "[spectrum]") {
                section = Section::Spectrum;
                spec.spectral_pieces.emplace_back();
            } else {
                fail("unknown section " + line);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        auto key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        auto value = line.substr(eq + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        switch (section) {
            case Section::Global:
                if (key == "duration")
                    spec.duration = number(value);
                else if (key == "sample_step")
                    spec.sample_step = number(value);
                else
                    fail("unknown key '" + key + "'");
                break;
            case Section::Mean:
                if (key == "start")
                    spec.mean_pieces.back().start = number(value);
                else if (key == "level")
                    spec.mean_pieces.back().level = number(value);
                else
                    fail("unknown key '" + key + "' in [mean]");
                break;
            case Section::Spectrum:
                if (key == "start") {
                    spec.spectral_pieces.back().start = number(value);
                } else if (key == "band") {
                    std::istringstream ss(value);
                    SpectralRectangle r;
                    std::string rest;
                    if (!(ss >> r.lo >> r.hi >> r.level) || (ss >> rest)) fail("band expects 'lo hi level'");
                    spec.spectral_pieces.back().rectangles.push_back(r);
                } else {
                    fail("unknown key '" + key + "' in [spectrum]");
                }
                break;
        }
    }
    spec.validate();
    return spec;
}

PiecewiseSpec load_piecewise_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file '" + path + "'");
    return parse_piecewise_spec(in);
}

void write_piecewise_spec(std::ostream& out, const PiecewiseSpec& spec) {
    out.precision(17);
    out << "duration = " << spec.duration << "\nsample_step = " << spec.sample_step << "\n";
    for (const auto& m : spec.mean_pieces) out << "[mean]\nstart = " << m.start << "\nlevel = " << m.level << "\n";
    for (const auto& p : spec.spectral_pieces) {
        out << "[spectrum]\nstart = " << p.start << "\n";
        for (const auto& r : p.rectangles) out << "band = " << r.lo << " " << r.hi << " " << r.level << "\n";
    }
}

namespace {

std::size_t sample_index(double t, double step) {
    return static_cast<std::size_t>(std::ceil(t / step - 1e-9));
}

// x_j = sum_m s_m (A_m cos(2 pi m j / n) + B_m sin(2 pi m j / n)) with
// s_m^2 = 2 f(f_m) df, so Var x = sum_m s_m^2 ~ integral of f over the real line.
// DC and Nyquist bins are left empty.
std::vector<double> synthesize_piece(const SpectralPiece& piece, std::size_t n, double step, std::mt19937_64& rng) {
    if (n == 0) return {};
    std::vector<std::complex<double>> half(n / 2 + 1, std::complex<double>{});
    const double df = 1.0 / (static_cast<double>(n) * step);
    std::normal_distribution<double> normal(0.0, 1.0);
    bool any = false;
    for (std::size_t m = 1; 2 * m < n; ++m) {
        const double f = static_cast<double>(m) * df;
        double density = 0.0;
        for (const auto& r : piece.rectangles)
            if (f >= r.lo && f <= r.hi) density += r.level;
        const double a = normal(rng);
        const double b = normal(rng);
        if (density <= 0.0) continue;
        const double s = std::sqrt(2.0 * density * df);
        half[m] = 0.5 * s * std::complex<double>(a, -b);
        any = true;
    }
    if (!any) return std::vector<double>(n, 0.0);
    return detail::inverse_real_fft(half, n);
}

}  // namespace

UniformSeries generate(const PiecewiseSpec& spec, std::uint64_t seed) {
    spec.validate();
    const double step = spec.sample_step;
    const auto n = static_cast<std::size_t>(std::floor(spec.duration / step + 1e-9));
    UniformSeries out;
    out.start_time = 0.0;
    out.step = step;
    out.values.assign(n, 0.0);

    for (std::size_t p = 0; p < spec.spectral_pieces.size(); ++p) {
        const std::size_t begin = std::min(n, sample_index(spec.spectral_pieces[p].start, step));
        const std::size_t end = p + 1 < spec.spectral_pieces.size()
                                    ? std::min(n, sample_index(spec.spectral_pieces[p + 1].start, step))
                                    : n;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(p)};
        std::mt19937_64 rng(seq);
        const auto x = synthesize_piece(spec.spectral_pieces[p], end - begin, step, rng);
        std::copy(x.begin(), x.end(), out.values.begin() + static_cast<std::ptrdiff_t>(begin));
    }
    for (std::size_t p = 0; p < spec.mean_pieces.size(); ++p) {
        const std::size_t begin = std::min(n, sample_index(spec.mean_pieces[p].start, step));
        const std::size_t end =
            p + 1 < spec.mean_pieces.size() ? std::min(n, sample_index(spec.mean_pieces[p + 1].start, step)) : n;
        for (std::size_t j = begin; j < end; ++j) out.values[j] += spec.mean_pieces[p].level;
    }
    return out;
}

std::vector<std::size_t> planted_truth(const PiecewiseSpec& spec, double b_step) {
    if (!(b_step > 0.0)) throw ConfigError("b_step must be positive");
    std::set<std::size_t> idx;
    auto add = [&](double t) {
        if (t > 0.0 && t < spec.duration) idx.insert(static_cast<std::size_t>(std::floor(t / b_step + 1e-9)));
    };
    for (const auto& m : spec.mean_pieces) add(m.start);
    for (const auto& p : spec.spectral_pieces) add(p.start);
    return {idx.begin(), idx.end()};
}

}  // namespace hrvband
