#include "hrvband/error.hpp"
#include "hrvband/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

using namespace hrvband;

namespace {

PiecewiseSpec single_rectangle(double duration, double lo, double hi, double level) {
    PiecewiseSpec spec;
    spec.duration = duration;
    spec.mean_pieces = {{0.0, 0.8}};
    spec.spectral_pieces = {{0.0, {{lo, hi, level}}}};
    return spec;
}

double mean(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    return s / static_cast<double>(hi - lo);
}

double variance(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    const double m = mean(x, lo, hi);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += (x[i] - m) * (x[i] - m);
    return s / static_cast<double>(hi - lo);
}

}  // namespace

TEST_CASE("zero spectral density gives the staircase mean") {
    PiecewiseSpec spec;
    spec.duration = 100.0;
    spec.mean_pieces = {{0.0, 0.8}, {40.0, 1.1}, {70.5, 0.6}};
    spec.spectral_pieces = {{0.0, {{0.1, 0.2, 0.0}}}};
    const auto x = generate(spec, 7);
    REQUIRE(x.size() == 400);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = x.time_at(k);
        CHECK(x.values[k] == (t < 40.0 ? 0.8 : t < 70.5 ? 1.1 : 0.6));
    }
}

TEST_CASE("sample variance equals the spectral mass") {
    const double level = 0.5;
    const auto spec = single_rectangle(1e4, 0.1, 0.2, level);
    const double mass = spec.spectral_pieces[0].variance();
    CHECK(mass == doctest::Approx(2.0 * level * 0.1));
    double avg = 0.0;
    const int seeds = 8;
    for (int seed = 1; seed <= seeds; ++seed) {
        const auto x = generate(spec, static_cast<std::uint64_t>(seed));
        const double v = variance(x.values, 0, x.size());
        CHECK(std::abs(v - mass) <= 0.12 * mass);
        avg += v / seeds;
    }
    CHECK(std::abs(avg - mass) <= 0.05 * mass);
}

TEST_CASE("mean shift between pieces") {
    PiecewiseSpec spec;
    spec.duration = 4000.0;
    spec.mean_pieces = {{0.0, 0.8}, {2000.0, 0.95}};
    spec.spectral_pieces = {{0.0, {{0.04, 0.5, 1e-4}}}};
    const auto x = generate(spec, 3);
    const std::size_t half = x.size() / 2;
    const double se = std::sqrt(variance(x.values, 0, half) / half + variance(x.values, half, x.size()) / half);
    CHECK(std::abs(mean(x.values, half, x.size()) - mean(x.values, 0, half) - 0.15) <= 3.0 * se);
}

TEST_CASE("pieces are stationary") {
    const auto spec = single_rectangle(5000.0, 0.04, 0.5, 1e-3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto x = generate(spec, seed);
        REQUIRE(x.size() == 20000);
        const double a = variance(x.values, 0, 10000), b = variance(x.values, 10000, 20000);
        CAPTURE(seed);
        CHECK(std::abs(a - b) <= 0.1 * std::max(a, b));
    }
}

TEST_CASE("periodogram mass stays inside the rectangle") {
    const auto spec = single_rectangle(2000.0, 0.15, 0.4, 1e-3);
    const auto x = generate(spec, 5);
    const std::size_t n = x.size();
    const double m = mean(x.values, 0, n);
    double inside = 0.0, total = 0.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        std::complex<double> acc{};
        for (std::size_t j = 0; j < n; ++j)
            acc += (x.values[j] - m) * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * j) / static_cast<double>(n));
        const double f = static_cast<double>(k) / (static_cast<double>(n) * x.step);
        total += std::norm(acc);
        if (f >= 0.15 && f <= 0.4) inside += std::norm(acc);
    }
    CHECK(inside / total >= 0.9);
}

TEST_CASE("spectral change doubles the variance") {
    PiecewiseSpec spec;
    spec.duration = 8000.0;
    spec.mean_pieces = {{0.0, 0.8}};
    spec.spectral_pieces = {{0.0, {{0.15, 0.5, 1e-4}}}, {4000.0, {{0.15, 0.5, 4e-4}}}};
    const auto x = generate(spec, 9);
    const double a = variance(x.values, 0, 16000), b = variance(x.values, 16000, 32000);
    CHECK(b / a == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("reproducibility") {
    const auto spec = single_rectangle(600.0, 0.04, 0.5, 1e-3);
    CHECK(generate(spec, 42).values == generate(spec, 42).values);
    CHECK(generate(spec, 42).values != generate(spec, 43).values);
}

TEST_CASE("planted truth") {
    PiecewiseSpec spec;
    spec.duration = 7200.0;
    spec.mean_pieces = {{0.0, 0.8}};
    spec.spectral_pieces = {{0.0, {}}, {3600.0, {}}};
    CHECK(planted_truth(spec, 1.0) == std::vector<std::size_t>{3600});
    spec.spectral_pieces.pop_back();
    CHECK(planted_truth(spec, 1.0).empty());
    spec.mean_pieces.push_back({100.4, 1.0});
    CHECK(planted_truth(spec, 1.0) == std::vector<std::size_t>{100});
    CHECK_THROWS_AS(planted_truth(spec, 0.0), ConfigError);
}

TEST_CASE("spec parsing") {
    const std::string text =
        "duration = 7200\n"
        "sample_step = 0.25   # seconds\n"
        "[mean]\nstart = 0\nlevel = 0.8\n"
        "[spectrum]\nstart = 0\nband = 0.04 0.15 2e-4\nband = 0.15 0.5 1e-4\n"
        "[spectrum]\nstart = 3600\nband = 0.15 0.5 4e-4\n";
    std::istringstream in(text);
    const auto spec = parse_piecewise_spec(in);
    CHECK(spec.duration == 7200.0);
    REQUIRE(spec.spectral_pieces.size() == 2);
    CHECK(spec.spectral_pieces[0].rectangles.size() == 2);
    CHECK(spec.spectral_pieces[1].rectangles[0].level == 4e-4);

    std::ostringstream out;
    write_piecewise_spec(out, spec);
    std::istringstream again(out.str());
    const auto back = parse_piecewise_spec(again);
    CHECK(generate(back, 1).values == generate(spec, 1).values);

    auto error_of = [](const std::string& t) {
        std::istringstream s(t);
        try {
            parse_piecewise_spec(s);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(error_of("duration = 10\n[spectrum]\nstart = 0\nband = 0.1 2.5 1\n").find("Nyquist") != std::string::npos);
    CHECK(error_of("duration = 10\nbogus = 1\n").find("line 2") != std::string::npos);
    CHECK(error_of("duration = abc\n").find("line 1") != std::string::npos);
    CHECK(error_of("duration = 10\n[mean]\nstart = 5\nlevel = 1\n").find("start at 0") != std::string::npos);
    CHECK_FALSE(error_of("duration = 10\n[spectrum]\nstart = 0\nband = 0.1 0.2 -1\n").empty());
    CHECK_FALSE(error_of("duration = 10\n[mean]\nstart = 0\n[mean]\nstart = 0\n").empty());
    CHECK_FALSE(error_of("duration = 10\n[weird]\n").empty());
}
