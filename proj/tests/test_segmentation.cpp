#include "hrvband/error.hpp"
#include "hrvband/segmentation.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

using namespace hrvband;

namespace {

double naive_variance(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    double mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) mean += x[i];
    mean /= static_cast<double>(hi - lo);
    double v = 0.0;
    for (std::size_t i = lo; i < hi; ++i) v += (x[i] - mean) * (x[i] - mean);
    return v / static_cast<double>(hi - lo);
}

double naive_contrast(const std::vector<double>& x, std::size_t lo, std::size_t hi, double floor) {
    const double n = static_cast<double>(hi - lo);
    return n * std::log(std::max(naive_variance(x, lo, hi), floor)) + n;
}

struct BruteResult {
    std::vector<std::size_t> tau;
    double J = std::numeric_limits<double>::infinity();
};

// Exhaustive enumeration of partitions with K segments of length >= m.
BruteResult brute_force(const std::vector<double>& x, std::size_t K, std::size_t m) {
    const std::size_t n = x.size();
    const double gv = naive_variance(x, 0, n);
    const double floor = 1e-12 * (gv > 0.0 ? gv : 1.0);
    BruteResult best;
    std::vector<std::size_t> tau;
    std::function<void(std::size_t, double)> rec = [&](std::size_t start, double acc) {
        if (tau.size() + 1 == K) {
            if (n - start < m) return;
            const double J = (acc + naive_contrast(x, start, n, floor)) / static_cast<double>(n);
            if (J < best.J - 1e-12) best = {tau, J};
            return;
        }
        for (std::size_t t = start + m; t + m * (K - tau.size() - 1) <= n; ++t) {
            tau.push_back(t);
            rec(t, acc + naive_contrast(x, start, t, floor));
            tau.pop_back();
        }
    };
    rec(0, 0.0);
    return best;
}

std::vector<double> noise(std::mt19937_64& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

// Both changes move the mean by 3 and the standard deviation by a factor 3.
std::vector<double> planted_two_change(std::mt19937_64& rng, std::size_t n) {
    auto x = noise(rng, n / 3, 0.0, 1.0);
    const auto b = noise(rng, n / 3, 3.0, 3.0);
    const auto c = noise(rng, n - 2 * (n / 3), 0.0, 1.0);
    x.insert(x.end(), b.begin(), b.end());
    x.insert(x.end(), c.begin(), c.end());
    return x;
}

Segmentation with_contrast(double J) {
    Segmentation s;
    s.contrast = J;
    return s;
}

}  // namespace

TEST_CASE("segment contrast examples") {
    const std::vector<double> a{0, 2, 0, 2};
    CHECK(segment_contrast(a, 0, 4) == doctest::Approx(4.0).epsilon(1e-15));
    const std::vector<double> c{5, 5, 5, 5};
    const SegmentCost cost(c);
    CHECK(cost.variance(0, 4) == 0.0);
    CHECK(cost.variance_floor() == 1e-12);
    CHECK(segment_contrast(c, 0, 4) == doctest::Approx(4.0 * std::log(1e-12) + 4.0).epsilon(1e-15));
    CHECK_THROWS_AS(segment_contrast(a, 0, 3, 4), ConfigError);
    CHECK_THROWS_AS(segment_contrast(a, 2, 2), ConfigError);
}

TEST_CASE("prefix-sum contrast matches two-pass computation") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = noise(rng, 400, 1e4, 0.01 + trial);
        const SegmentCost cost(x);
        const double floor = cost.variance_floor();
        std::uniform_int_distribution<std::size_t> pos(0, x.size() - 2);
        for (int q = 0; q < 50; ++q) {
            std::size_t lo = pos(rng), hi = pos(rng) + 2;
            if (lo > hi) std::swap(lo, hi);
            if (hi - lo < 2) continue;
            CHECK(cost(lo, hi) == doctest::Approx(naive_contrast(x, lo, hi, floor)).epsilon(1e-9));
        }
    }
}

TEST_CASE("single segment") {
    std::mt19937_64 rng(2);
    const auto x = noise(rng, 50);
    const auto s = optimal_partition(x, 1);
    CHECK(s.change_points.empty());
    CHECK(s.segment_count() == 1);
    CHECK(s.contrast == doctest::Approx(segment_contrast(x, 0, 50) / 50.0).epsilon(1e-12));
}

TEST_CASE("planted mean shift") {
    std::mt19937_64 rng(3);
    auto x = noise(rng, 20, 0.0);
    const auto y = noise(rng, 20, 5.0);
    x.insert(x.end(), y.begin(), y.end());
    const auto s = optimal_partition(x, 2, {1, 0});
    REQUIRE(s.change_points.size() == 1);
    CHECK(s.change_points[0] == 20);
    CHECK(brute_force(x, 2, 1).tau == s.change_points);
}

TEST_CASE("dynamic programme equals brute force") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> n_dist(8, 30), k_dist(1, 4), m_dist(2, 3);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = n_dist(rng), K = k_dist(rng), m = m_dist(rng);
        if (K * m > n) continue;
        auto x = noise(rng, n);
        if (trial % 3 == 0)
            for (std::size_t i = n / 2; i < n; ++i) x[i] = 2.0 * x[i] + 1.5;
        const auto dp = optimal_partition(x, K, {m, 1});
        const auto bf = brute_force(x, K, m);
        CAPTURE(trial);
        CHECK(dp.change_points == bf.tau);
        CHECK(std::abs(dp.contrast - bf.J) <= 1e-9);
        ++checked;
    }
    CHECK(checked >= 90);
}

TEST_CASE("segmentation invariants") {
    std::mt19937_64 rng(5);
    const auto x = planted_two_change(rng, 600);
    const auto all = optimal_partitions(x, 8, {10, 0});
    REQUIRE(all.size() == 8);
    for (std::size_t k = 0; k < all.size(); ++k) {
        const auto& s = all[k];
        CHECK(s.segment_count() == k + 1);
        std::size_t total = 0;
        for (const auto& seg : s.segments) {
            CHECK(seg.length() >= 10);
            CHECK(seg.variance >= SegmentCost(x).variance_floor());
            total += seg.length();
        }
        CHECK(total == x.size());
        for (std::size_t i = 1; i < s.change_points.size(); ++i) CHECK(s.change_points[i] > s.change_points[i - 1]);
        if (k > 0) CHECK(s.contrast <= all[k - 1].contrast + 1e-12);
    }
}

TEST_CASE("scale equivariance and reversal") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = planted_two_change(rng, 300);
        for (std::size_t K : {2, 3, 5}) {
            const auto base = optimal_partition(x, K);
            auto scaled = x;
            for (auto& v : scaled) v *= 7.25;
            const auto s = optimal_partition(scaled, K);
            CHECK(s.change_points == base.change_points);
            CHECK(s.contrast == doctest::Approx(base.contrast + 2.0 * std::log(7.25)).epsilon(1e-10));

            const std::vector<double> rev(x.rbegin(), x.rend());
            auto r = optimal_partition(rev, K).change_points;
            for (auto& t : r) t = x.size() - t;
            std::reverse(r.begin(), r.end());
            CHECK(r == base.change_points);
        }
    }
}

TEST_CASE("thread count does not change the optimum") {
    std::mt19937_64 rng(7);
    const auto x = planted_two_change(rng, 3000);
    const auto a = optimal_partitions(x, 12, {10, 1});
    const auto b = optimal_partitions(x, 12, {10, 4});
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].change_points == b[k].change_points);
        CHECK(a[k].contrast == b[k].contrast);
    }
}

TEST_CASE("penalty path hull") {
    SUBCASE("strictly convex path") {
        std::vector<Segmentation> per_k;
        for (int k = 1; k <= 6; ++k) per_k.push_back(with_contrast(1.0 / k));
        const auto path = make_penalty_path(per_k);
        for (const auto& e : path.entries) {
            CHECK(e.hull_vertex);
            CHECK(e.stability() > 0.0);
        }
        CHECK(std::isinf(path.entries.front().beta_hi));
        CHECK(path.entries.back().beta_lo == 0.0);
        for (std::size_t i = 1; i < path.entries.size(); ++i)
            CHECK(path.entries[i].beta_hi == path.entries[i - 1].beta_lo);
    }
    SUBCASE("affine path") {
        std::vector<Segmentation> per_k;
        for (int k = 1; k <= 5; ++k) per_k.push_back(with_contrast(10.0 - 0.5 * k));
        const auto path = make_penalty_path(per_k);
        CHECK(path.entries[0].beta_lo == doctest::Approx(0.5));
        for (std::size_t i = 1; i + 1 < path.entries.size(); ++i) {
            CHECK_FALSE(path.entries[i].hull_vertex);
            CHECK(path.entries[i].beta_lo == doctest::Approx(0.5));
            CHECK(path.entries[i].stability() == 0.0);
        }
        CHECK(path.entries.back().beta_hi == doctest::Approx(0.5));
    }
    SUBCASE("off-hull point keeps an empty interval") {
        const auto path = make_penalty_path({with_contrast(10), with_contrast(9.9), with_contrast(5), with_contrast(4.9)});
        CHECK_FALSE(path.entries[1].hull_vertex);
        CHECK(path.entries[1].stability() == 0.0);
        CHECK(path.entries[2].hull_vertex);
    }
    SUBCASE("two-change series favours K = 3 among K >= 2") {
        std::mt19937_64 rng(8);
        const auto path = penalty_path(planted_two_change(rng, 1500), 10);
        std::size_t widest = 1;
        for (std::size_t i = 2; i < path.entries.size(); ++i)
            if (path.entries[i].stability() > path.entries[widest].stability()) widest = i;
        CHECK(path.entries[widest].segments() == 3);
    }
}

TEST_CASE("selection") {
    SUBCASE("dominant single vertex") {
        const auto path =
            make_penalty_path({with_contrast(10), with_contrast(4), with_contrast(3.9), with_contrast(3.85)});
        CHECK(select_segmentation(path, 0.05).contrast == 4);
    }
    SUBCASE("planted two changes") {
        std::mt19937_64 rng(9);
        for (int trial = 0; trial < 10; ++trial) {
            const auto x = planted_two_change(rng, 3000);
            const auto s = select_segmentation(penalty_path(x, 15));
            REQUIRE(s.segment_count() == 3);
            CHECK(std::abs(static_cast<double>(s.change_points[0]) - 1000.0) <= 30.0);
            CHECK(std::abs(static_cast<double>(s.change_points[1]) - 2000.0) <= 30.0);
        }
    }
    SUBCASE("noise") {
        std::mt19937_64 rng(10);
        int single = 0;
        for (int trial = 0; trial < 40; ++trial) single += select_segmentation(penalty_path(noise(rng, 1000), 15)).segment_count() == 1;
        CHECK(single >= 36);
    }
    SUBCASE("K_max = 1") {
        std::mt19937_64 rng(11);
        CHECK(select_segmentation(penalty_path(noise(rng, 100), 1)).segment_count() == 1);
    }
}

TEST_CASE("infeasible requests") {
    const std::vector<double> x(25, 1.0);
    CHECK_THROWS_AS(optimal_partition(x, 3, {10, 0}), ConfigError);
    CHECK_THROWS_AS(optimal_partition(x, 0), ConfigError);
    CHECK_THROWS_AS(optimal_partition(std::vector<double>{}, 1, {1, 0}), ConfigError);
    CHECK_THROWS_AS(optimal_partition(std::vector<double>{1.0, NAN, 2.0}, 1, {1, 0}), InputError);
}

TEST_CASE("clock conversion") {
    const auto start = parse_clock("05:50:30");
    CHECK(format_clock(index_to_clock(28220, 1.0, start)) == "13:40:50");
    CHECK(format_clock(index_to_clock(71048, 1.0, start)) == "01:34:38");
    CHECK(format_clock(index_to_clock(0, 1.0, parse_clock("00:00:00"))) == "00:00:00");
    CHECK(format_clock(index_to_clock(40, 2.0, parse_clock("23:59"))) == "00:00:20");
    CHECK(parse_clock("7:05").seconds == 7 * 3600 + 5 * 60);
    CHECK_THROWS_AS(parse_clock("25:00:00"), ConfigError);
    CHECK_THROWS_AS(parse_clock("12:60:00"), ConfigError);
    CHECK_THROWS_AS(parse_clock("noon"), ConfigError);
    CHECK_THROWS_AS(parse_clock("12:00:00x"), ConfigError);
    CHECK_THROWS_AS(index_to_clock(1, 0.0, start), ConfigError);
}
