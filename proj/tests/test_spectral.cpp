#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kfs/rng.hpp"
#include "kfs/spectral.hpp"
#include "oracles.hpp"

using namespace kfs;
using namespace kfs::spectral;

namespace {

constexpr double kPi = oracle::kPi;

std::vector<double> random_series(int length, Rng& rng, double scale = 1.0) {
    std::vector<double> x(static_cast<size_t>(length));
    for (double& v : x) v = scale * rng.uniform(-1.0, 1.0);
    return x;
}

std::vector<double> tone(int length, int bin, double amplitude, double phase = 0.0) {
    std::vector<double> x(static_cast<size_t>(length));
    for (int t = 0; t < length; ++t) {
        x[static_cast<size_t>(t)] = amplitude * std::cos(2.0 * kPi * bin * t / length + phase);
    }
    return x;
}

std::vector<double> add_series(std::vector<double> a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("rdft hand cases") {
    const double c = 2.5;
    RSpectrum sp = rdft({c, c, c, c});
    CHECK(sp.coeffs[0].real() == doctest::Approx(4 * c).epsilon(1e-12));
    CHECK(sp.coeffs[0].imag() == 0.0);
    for (int k = 1; k < sp.bins(); ++k) CHECK(std::abs(sp.coeffs[static_cast<size_t>(k)]) < 1e-12);

    RSpectrum tone8 = rdft(tone(8, 1, 1.0));
    CHECK(tone8.coeffs[1].real() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::fabs(tone8.coeffs[1].imag()) < 1e-12);
    for (int k = 0; k < tone8.bins(); ++k) {
        if (k != 1) CHECK(std::abs(tone8.coeffs[static_cast<size_t>(k)]) < 1e-12);
    }

    CHECK_THROWS_AS(rdft({1.0}), DataError);
}

TEST_CASE("rdft matches naive trig-sum oracle") {
    Rng rng(2024);
    for (int rep = 0; rep < 5; ++rep) {
        const int length = 17;
        std::vector<double> x = random_series(length, rng);
        RSpectrum got = rdft(x);
        auto want = oracle::naive_dft_onesided(x);
        for (size_t k = 0; k < want.size(); ++k) {
            CHECK(std::abs(got.coeffs[k] - want[k]) < 1e-9);
        }
    }
}

TEST_CASE("irdft hand cases and round trip") {
    RSpectrum zero;
    zero.original_length = 6;
    zero.coeffs.assign(4, {0.0, 0.0});
    for (double v : irdft(zero)) CHECK(v == 0.0);

    const int length = 8;
    const double c = -3.25;
    RSpectrum dc;
    dc.original_length = length;
    dc.coeffs.assign(static_cast<size_t>(length / 2) + 1, {0.0, 0.0});
    dc.coeffs[0] = {length * c, 0.0};
    for (double v : irdft(dc)) CHECK(v == doctest::Approx(c).epsilon(1e-12));

    Rng rng(7);
    std::vector<double> x = random_series(96, rng);
    std::vector<double> back = irdft(rdft(x));
    for (size_t i = 0; i < x.size(); ++i) CHECK(std::fabs(back[i] - x[i]) < 1e-9);

    RSpectrum bad;
    bad.original_length = 10;
    bad.coeffs.assign(3, {0.0, 0.0});
    CHECK_THROWS_AS(irdft(bad), DataError);
}

TEST_CASE("round trip holds across lengths") {
    Rng rng(11);
    for (int length : {2, 3, 4, 5, 7, 8, 16, 17, 31, 64, 96, 255, 256, 511, 1024}) {
        std::vector<double> x = random_series(length, rng);
        std::vector<double> back = irdft(rdft(x));
        double worst = 0.0;
        for (size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::fabs(back[i] - x[i]));
        INFO("L = " << length);
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("bin_energy satisfies the Parseval identity") {
    const double c = 1.5;
    RSpectrum sp = rdft({c, c, c, c});
    std::vector<double> e = bin_energy(sp);
    CHECK(e[0] / 4.0 == doctest::Approx(4 * c * c).epsilon(1e-12));

    RSpectrum tone8 = rdft(tone(8, 1, 1.0));
    std::vector<double> e8 = bin_energy(tone8);
    CHECK(e8[1] / 8.0 == doctest::Approx(4.0).epsilon(1e-12));  // time energy of unit cos over 8 samples

    Rng rng(3);
    for (int length : {5, 8, 33, 96, 128}) {
        std::vector<double> x = random_series(length, rng);
        const double time_energy = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
        std::vector<double> be = bin_energy(rdft(x));
        const double spec_energy = std::accumulate(be.begin(), be.end(), 0.0) / length;
        CHECK(std::fabs(time_energy - spec_energy) / time_energy < 1e-12);
    }
}

TEST_CASE("topk_select hand cases") {
    RSpectrum single = rdft(tone(32, 5, 2.0));
    SpectralSelection s = topk_select(single, 0.9);
    CHECK(s.K == 1);
    CHECK(s.kept_indices == std::vector<int>{5});
    CHECK(s.energy_ratio >= 0.9);

    // amplitudes 3:1 -> energies 9:1, first bin alone reaches 0.9 >= 0.85
    std::vector<double> two = add_series(tone(64, 3, 3.0), tone(64, 11, 1.0));
    SpectralSelection s2 = topk_select(rdft(two), 0.85);
    CHECK(s2.K == 1);
    CHECK(s2.kept_indices == std::vector<int>{3});
    CHECK(s2.energy_ratio == doctest::Approx(0.9).epsilon(1e-9));

    CHECK_THROWS_AS(topk_select(single, 0.0), ConfigError);
    CHECK_THROWS_AS(topk_select(single, 1.5), ConfigError);
}

TEST_CASE("topk_select on the all-zero spectrum") {
    RSpectrum sp = rdft(std::vector<double>(16, 0.0));
    SpectralSelection s = topk_select(sp, 0.5);
    CHECK(s.K == 0);
    CHECK(s.energy_ratio == 1.0);
    auto [recon, sel] = reconstruct_topk(std::vector<double>(16, 0.0), 0.5);
    for (double v : recon) CHECK(v == 0.0);
    CHECK(sel.K == 0);
}

TEST_CASE("delta = 1 keeps every nonzero bin and reconstructs exactly") {
    Rng rng(21);
    std::vector<double> x = random_series(96, rng);
    auto [recon, sel] = reconstruct_topk(x, 1.0);
    CHECK(sel.energy_ratio == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 0; i < x.size(); ++i) CHECK(std::fabs(recon[i] - x[i]) < 1e-9);
}

TEST_CASE("clean sparse signals reconstruct exactly at high delta") {
    std::vector<double> x = add_series(tone(96, 4, 1.2, 0.3), tone(96, 9, 0.8, 1.1));
    auto [recon, sel] = reconstruct_topk(x, 0.99);
    CHECK(sel.K == 2);
    for (size_t i = 0; i < x.size(); ++i) CHECK(std::fabs(recon[i] - x[i]) < 1e-9);

    // single tone: K = 1 at any delta
    auto [rt, st] = reconstruct_topk(tone(96, 7, 1.0), 0.5);
    CHECK(st.K == 1);
}

TEST_CASE("selection laws: monotonicity, minimality, scale invariance") {
    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        const int length = 16 + static_cast<int>(rng.uniform_int(100));
        std::vector<double> x = random_series(length, rng);
        RSpectrum sp = rdft(x);
        std::vector<double> e = bin_energy(sp);
        const double total = std::accumulate(e.begin(), e.end(), 0.0);

        const double d1 = rng.uniform(0.05, 0.95);
        const double d2 = rng.uniform(d1, 1.0);
        SpectralSelection s1 = topk_select(sp, d1);
        SpectralSelection s2 = topk_select(sp, d2);
        CHECK(s1.K <= s2.K);
        CHECK(s1.energy_ratio >= d1);
        CHECK(s2.energy_ratio >= d2);

        // minimality: dropping the weakest kept bin falls below delta
        if (s1.K > 1) {
            double weakest = 1e300;
            for (int idx : s1.kept_indices) weakest = std::min(weakest, e[static_cast<size_t>(idx)]);
            CHECK((s1.energy_ratio * total - weakest) / total < d1);
        }

        // positive scaling leaves the kept set unchanged
        std::vector<double> scaled = x;
        for (double& v : scaled) v *= 37.5;
        CHECK(topk_select(rdft(scaled), d1).kept_indices == s1.kept_indices);
    }
}

TEST_CASE("refiltering keeps a subset; idempotent for balanced sparse signals") {
    // Balanced amplitudes: no prefix of the kept set reaches delta early, so
    // a second pass keeps everything and the filter is a fixed point.
    std::vector<double> x = add_series(add_series(tone(96, 3, 1.0), tone(96, 8, 0.9, 0.5)),
                                       tone(96, 19, 0.8, 1.2));
    Rng rng(5);
    std::vector<double> noise = random_series(96, rng, 0.05);
    auto [xt, sel] = reconstruct_topk(add_series(x, noise), 0.95);
    auto [xt2, sel2] = reconstruct_topk(xt, 0.95);
    CHECK(std::includes(sel.kept_indices.begin(), sel.kept_indices.end(), sel2.kept_indices.begin(),
                        sel2.kept_indices.end()));
    for (size_t i = 0; i < xt.size(); ++i) CHECK(std::fabs(xt2[i] - xt[i]) < 1e-9);
}

TEST_CASE("statistical denoising on a fixed 5-tone signal") {
    // Equal-amplitude tones: delta = 0.95 retains all five bins, so the
    // reconstruction drops essentially pure noise.
    const int length = 96;
    const std::vector<int> bins = {3, 7, 11, 19, 31};
    std::vector<double> clean(length, 0.0);
    for (size_t i = 0; i < bins.size(); ++i) {
        clean = add_series(clean, tone(length, bins[i], 2.0, 0.4 * static_cast<double>(i)));
    }
    for (double sigma : {0.25, 0.5}) {
        Rng rng(777, seed_tag::kTrial);
        int improved = 0;
        std::vector<double> ratios;
        const int trials = 1000;
        for (int trial = 0; trial < trials; ++trial) {
            std::vector<double> noisy = clean;
            for (double& v : noisy) v += rng.normal(0.0, sigma);
            auto [recon, sel] = reconstruct_topk(noisy, 0.95);
            const double err_recon = l2_dist(recon, clean);
            const double err_raw = l2_dist(noisy, clean);
            if (err_recon < err_raw) ++improved;
            ratios.push_back(err_recon / err_raw);
        }
        std::nth_element(ratios.begin(), ratios.begin() + trials / 2, ratios.end());
        INFO("sigma = " << sigma);
        CHECK(improved >= 950);
        CHECK(ratios[trials / 2] < 0.8);
    }
}

TEST_CASE("alt_filter hand cases and oracle comparison") {
    std::vector<double> constant(10, 4.2);
    std::vector<double> ma = alt_filter(constant, FilterKind::kMovingAverage, 5);
    for (double v : ma) CHECK(v == doctest::Approx(4.2).epsilon(1e-12));

    std::vector<double> x = {1, 2, 3, 4, 5};
    CHECK(alt_filter(x, FilterKind::kGaussian, 1) == x);

    std::vector<double> got = alt_filter(x, FilterKind::kMovingAverage, 3);
    std::vector<double> want = oracle::reflect_convolve(x, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    for (size_t i = 0; i < x.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    // gaussian matches direct convolution with the same kernel definition
    std::vector<double> g = alt_filter(x, FilterKind::kGaussian, 5);
    const double s = 1.0;  // radius 2, sigma = 1
    std::vector<double> kernel(5);
    double norm = 0.0;
    for (int j = -2; j <= 2; ++j) {
        kernel[static_cast<size_t>(j + 2)] = std::exp(-0.5 * j * j / (s * s));
        norm += kernel[static_cast<size_t>(j + 2)];
    }
    for (double& v : kernel) v /= norm;
    std::vector<double> gwant = oracle::reflect_convolve(x, kernel);
    for (size_t i = 0; i < x.size(); ++i) CHECK(g[i] == doctest::Approx(gwant[i]).epsilon(1e-12));

    CHECK_THROWS_AS(alt_filter(x, FilterKind::kMovingAverage, 7), ConfigError);
    CHECK_THROWS_AS(alt_filter(x, FilterKind::kMovingAverage, 4), ConfigError);
}
