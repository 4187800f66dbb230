#include "hrvband/error.hpp"
#include "hrvband/rr_series.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace hrvband;

namespace {

RRSeries parse_text(const std::string& text, RRFormat format) {
    std::istringstream in(text);
    return parse_rr(in, format);
}

// Scalar oracle: the interval whose [peak_i, peak_{i+1}) contains t.
double hold_value(const RRSeries& s, double t) {
    const auto& p = s.peak_times();
    auto it = std::upper_bound(p.begin(), p.end(), t);
    auto i = static_cast<std::size_t>(it - p.begin());
    i = i == 0 ? 0 : i - 1;
    return s.intervals()[std::min(i, s.size() - 1)];
}

RRSeries random_beats(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> rr(0.4, 1.3);
    std::vector<double> peaks{0.0};
    for (std::size_t i = 0; i < n; ++i) peaks.push_back(peaks.back() + std::round(rr(rng) * 1000.0) / 1000.0);
    return RRSeries::from_peak_times(peaks);
}

}  // namespace

TEST_CASE("peak times difference into intervals") {
    const auto s = parse_text("0.000\n0.800\n1.650\n", RRFormat::PeakTimes);
    REQUIRE(s.size() == 2);
    CHECK(s.intervals()[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.intervals()[1] == doctest::Approx(0.85).epsilon(1e-12));
    CHECK_FALSE(s.artifact_mask()[0]);
    CHECK_FALSE(s.artifact_mask()[1]);
}

TEST_CASE("implausible interval is masked") {
    const auto s = parse_text("0.8\n4.0\n0.9\n", RRFormat::Intervals);
    CHECK(s.artifact_mask() == std::vector<bool>{false, true, false});
    CHECK(s.peak_times() == std::vector<double>{0.0, 0.8, 4.8, 5.7});
}

TEST_CASE("mask bounds are 60/250 and 60/20 seconds") {
    const auto s = parse_text("0.24\n0.2399\n3.0\n3.0001\n", RRFormat::Intervals);
    CHECK(s.artifact_mask() == std::vector<bool>{false, true, false, true});
}

TEST_CASE("comments and blank lines are skipped") {
    const auto s = parse_text("# header\n\n0.0\n  1.0  \n# mid\n1.9\n", RRFormat::PeakTimes);
    CHECK(s.size() == 2);
}

TEST_CASE("parse errors name the line") {
    auto message = [](const std::string& text, RRFormat f) {
        try {
            parse_text(text, f);
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("0.0\n0.8\n0.7\n", RRFormat::PeakTimes).find("line 3") != std::string::npos);
    CHECK(message("0.0\nabc\n", RRFormat::PeakTimes).find("line 2") != std::string::npos);
    CHECK(message("0.8\n-0.1\n", RRFormat::Intervals).find("line 2") != std::string::npos);
    CHECK_THROWS_AS(parse_text("", RRFormat::PeakTimes), InputError);
    CHECK_THROWS_AS(parse_text("# only\n", RRFormat::Intervals), InputError);
    CHECK_THROWS_AS(parse_text("1.0\n", RRFormat::PeakTimes), InputError);
    CHECK_THROWS_AS(parse_text("1.0\n", RRFormat::Intervals), InputError);
}

TEST_CASE("peak-time round trip through intervals") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = random_beats(rng, 500);
        const auto rebuilt = RRSeries::from_intervals(s.intervals(), s.start_time());
        REQUIRE(rebuilt.peak_times().size() == s.peak_times().size());
        for (std::size_t i = 0; i < s.peak_times().size(); ++i)
            CHECK(std::abs(rebuilt.peak_times()[i] - s.peak_times()[i]) < 1e-3);
    }
}

TEST_CASE("artifact policies") {
    SUBCASE("hold previous") {
        const auto s = clean_artifacts(parse_text("0.8\n4.0\n0.9\n", RRFormat::Intervals), ArtifactPolicy::HoldPrevious);
        CHECK(s.intervals() == std::vector<double>{0.8, 0.8, 0.9});
        CHECK_FALSE(s.has_artifacts());
    }
    SUBCASE("linear") {
        const auto s = clean_artifacts(parse_text("0.8\n4.0\n1.0\n", RRFormat::Intervals), ArtifactPolicy::Linear);
        CHECK(s.intervals()[1] == doctest::Approx(0.9).epsilon(1e-12));
        CHECK_FALSE(s.has_artifacts());
    }
    SUBCASE("linear across a run and at the edges") {
        const auto s =
            clean_artifacts(parse_text("0.1\n0.6\n5\n5\n0.9\n0.1\n", RRFormat::Intervals), ArtifactPolicy::Linear);
        const std::vector<double> expect{0.6, 0.6, 0.7, 0.8, 0.9, 0.9};
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(s.intervals()[i] == doctest::Approx(expect[i]));
    }
    SUBCASE("reject lists indices") {
        try {
            clean_artifacts(parse_text("0.8\n4.0\n0.9\n0.1\n", RRFormat::Intervals), ArtifactPolicy::Reject);
            FAIL("expected an error");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("1,3") != std::string::npos);
        }
    }
    SUBCASE("leading artifact under hold previous") {
        CHECK_THROWS_AS(clean_artifacts(parse_text("4.0\n0.8\n", RRFormat::Intervals), ArtifactPolicy::HoldPrevious),
                        InputError);
    }
    SUBCASE("clean series is unchanged by every policy") {
        const auto s = parse_text("0.8\n0.85\n0.9\n", RRFormat::Intervals);
        for (auto p : {ArtifactPolicy::HoldPrevious, ArtifactPolicy::Linear, ArtifactPolicy::Reject}) {
            const auto c = clean_artifacts(s, p);
            CHECK(c.intervals() == s.intervals());
            CHECK(c.peak_times() == s.peak_times());
        }
    }
}

TEST_CASE("resample holds the previous beat") {
    SUBCASE("constant") {
        const auto u = resample(RRSeries::from_intervals(std::vector<double>(20, 0.8)), 0.25);
        CHECK(u.size() == 65);
        for (double v : u.values) CHECK(v == 0.8);
    }
    SUBCASE("step change at t = 1") {
        const auto u = resample(RRSeries::from_intervals(std::vector<double>{1.0, 0.5}), 0.25);
        for (std::size_t k = 0; k < u.size(); ++k) CHECK(u.values[k] == (u.time_at(k) < 1.0 ? 1.0 : 0.5));
    }
    SUBCASE("matches a binary-search oracle") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            const auto s = random_beats(rng, 300);
            const auto u = resample(s, 0.25);
            const double lo = *std::min_element(s.intervals().begin(), s.intervals().end());
            const double hi = *std::max_element(s.intervals().begin(), s.intervals().end());
            for (std::size_t k = 0; k < u.size(); ++k) {
                CHECK(u.values[k] == hold_value(s, u.time_at(k)));
                CHECK(u.values[k] >= lo);
                CHECK(u.values[k] <= hi);
            }
        }
    }
    SUBCASE("halving the step reproduces the shared grid points") {
        std::mt19937_64 rng(9);
        const auto s = random_beats(rng, 400);
        const auto coarse = resample(s, 0.25);
        const auto fine = resample(s, 0.125);
        REQUIRE(fine.size() >= 2 * coarse.size() - 1);
        for (std::size_t k = 0; k < coarse.size(); ++k) CHECK(fine.values[2 * k] == coarse.values[k]);
    }
    SUBCASE("errors") {
        const auto s = RRSeries::from_intervals(std::vector<double>{0.8, 0.8});
        CHECK_THROWS_AS(resample(s, 0.0), ConfigError);
        CHECK_THROWS_AS(resample(s, -1.0), ConfigError);
        CHECK_THROWS_AS(resample(s, 2.0), InputError);
        CHECK_THROWS_AS(resample(RRSeries::from_intervals(std::vector<double>{0.8, 4.0}), 0.25), InputError);
    }
}

TEST_CASE("uniform CSV round trip") {
    UniformSeries u{12.5, 0.25, {0.8, 0.81, 0.823456, 0.9}};
    std::ostringstream out;
    write_uniform_csv(out, u);
    CHECK(out.str() == "t,rr\n12.500,0.800000\n12.750,0.810000\n13.000,0.823456\n13.250,0.900000\n");
    std::istringstream in(out.str());
    const auto back = read_uniform_csv(in);
    CHECK(back.start_time == doctest::Approx(12.5));
    CHECK(back.step == doctest::Approx(0.25));
    CHECK(back.values == u.values);

    std::istringstream bad("t,rr\n0.0,1\n0.25,1\n0.7,1\n");
    CHECK_THROWS_AS(read_uniform_csv(bad), InputError);
}
