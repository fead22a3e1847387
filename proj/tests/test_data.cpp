#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kfs/data.hpp"
#include "kfs/spectral.hpp"
#include "kfs/timefeat.hpp"

using namespace kfs;

namespace {

std::filesystem::path temp_csv(const std::string& name, const std::string& content) {
    std::filesystem::path p = std::filesystem::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

RawSeries hourly_series(int rows, int channels, double base = 0.0) {
    RawSeries raw;
    raw.values = Matrix(rows, channels);
    raw.step_seconds = 3600;
    DateTime start = DateTime::parse("2020-01-01 00:00:00");
    const int64_t begin = start.epoch_seconds();
    for (int r = 0; r < rows; ++r) {
        raw.timestamps.push_back(DateTime::from_epoch(begin + r * 3600));
        for (int c = 0; c < channels; ++c) raw.values.at(r, c) = base + r + 100.0 * c;
    }
    for (int c = 0; c < channels; ++c) raw.channel_names.push_back("ch" + std::to_string(c));
    return raw;
}

}  // namespace

TEST_CASE("datetime parse, arithmetic, weekday") {
    DateTime dt = DateTime::parse("2016-07-01 00:00:00");
    CHECK(dt.year == 2016);
    CHECK(dt.month == 7);
    CHECK(dt.to_string() == "2016-07-01 00:00:00");
    CHECK(DateTime::from_epoch(dt.epoch_seconds()) == dt);

    CHECK(DateTime::parse("2024-01-01").day_of_week() == 0);  // a Monday
    CHECK(DateTime::parse("2024-01-07").day_of_week() == 6);  // the following Sunday
    CHECK(DateTime::parse("2024-02-29 13:45").hour == 13);

    CHECK_THROWS_AS(DateTime::parse("01/02/2024"), DataError);
    CHECK_THROWS_AS(DateTime::parse("2024-13-01"), DataError);
    CHECK_THROWS_AS(DateTime::parse("2024-01-01 25:00"), DataError);
}

TEST_CASE("stamp features formula and bounds") {
    std::vector<DateTime> ts = {DateTime::parse("2024-01-01 00:00:00"),
                                DateTime::parse("2024-01-01 01:00:00"),
                                DateTime::parse("2024-01-01 02:00:00")};
    Matrix s = stamp_features(ts);
    CHECK(s.rows == 3);
    CHECK(s.cols == kStampFeatures);
    // Jan 1 00:00 on a Monday
    CHECK(s.at(0, 0) == doctest::Approx(1.0 / 12 - 0.5));
    CHECK(s.at(0, 1) == doctest::Approx(1.0 / 31 - 0.5));
    CHECK(s.at(0, 2) == doctest::Approx(-0.5));
    CHECK(s.at(0, 3) == doctest::Approx(-0.5));
    CHECK(s.at(0, 4) == doctest::Approx(-0.5));
    // hourly steps keep the minute feature pinned
    for (int r = 0; r < 3; ++r) CHECK(s.at(r, 4) == doctest::Approx(-0.5));
    for (double v : s.v) {
        CHECK(v >= -0.5);
        CHECK(v <= 0.5);
    }

    std::vector<DateTime> bad = {ts[1], ts[0]};
    CHECK_THROWS_AS(stamp_features(bad), DataError);
}

TEST_CASE("load_csv parses a toy file") {
    auto p = temp_csv("kfs_toy.csv",
                      "date,a,b\n"
                      "2020-01-01 00:00:00,1.5,2\n"
                      "2020-01-01 01:00:00,-3,4.25\n"
                      "2020-01-01 02:00:00,5,6e-1\n");
    RawSeries raw = load_csv(p.string());
    CHECK(raw.length() == 3);
    CHECK(raw.channels() == 2);
    CHECK(raw.channel_names == std::vector<std::string>{"a", "b"});
    CHECK(raw.step_seconds == 3600);
    CHECK(raw.values.at(1, 0) == -3.0);
    CHECK(raw.values.at(2, 1) == 0.6);
    CHECK(raw.timestamps[2].hour == 2);
    std::filesystem::remove(p);
}

TEST_CASE("load_csv error contracts carry line and column") {
    auto blank = temp_csv("kfs_blank.csv",
                          "date,a,b\n"
                          "2020-01-01 00:00:00,1,2\n"
                          "2020-01-01 01:00:00,,3\n");
    CHECK_THROWS_WITH_AS(load_csv(blank.string()), doctest::Contains("line 3, column 2"), DataError);
    std::filesystem::remove(blank);

    auto irregular = temp_csv("kfs_irregular.csv",
                              "date,a\n"
                              "2020-01-01 00:00:00,1\n"
                              "2020-01-01 01:00:00,2\n"
                              "2020-01-01 03:00:00,3\n");
    CHECK_THROWS_WITH_AS(load_csv(irregular.string()), doctest::Contains("index 2"), DataError);
    std::filesystem::remove(irregular);

    CHECK_THROWS_AS(load_csv("/nonexistent/kfs.csv"), DataError);
}

TEST_CASE("load_csv on an ETT-shaped file detects hourly step and 7 channels") {
    std::string content = "date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT\n";
    DateTime start = DateTime::parse("2016-07-01 00:00:00");
    for (int r = 0; r < 48; ++r) {
        content += DateTime::from_epoch(start.epoch_seconds() + r * 3600).to_string();
        for (int c = 0; c < 7; ++c) content += "," + std::to_string(0.1 * r + c);
        content += "\n";
    }
    auto p = temp_csv("kfs_ett.csv", content);
    RawSeries raw = load_csv(p.string());
    CHECK(raw.channels() == 7);
    CHECK(raw.step_seconds == 3600);
    std::filesystem::remove(p);
}

TEST_CASE("split boundaries follow the ratio with floor rounding") {
    RawSeries raw = hourly_series(100, 1);
    WindowedDataset ds = split_and_scale(raw, {6, 2, 2}, 8, 4);
    CHECK(ds.train_end == 60);
    CHECK(ds.val_end == 80);
    CHECK(ds.total == 100);

    RawSeries ett = hourly_series(14400, 2);
    WindowedDataset big = split_and_scale(ett, {6, 2, 2}, 96, 96);
    CHECK(big.train_end == 8640);
    CHECK(big.val_end - big.train_end == 2880);
    CHECK(big.total - big.val_end == 2880);

    CHECK_THROWS_WITH_AS(split_and_scale(hourly_series(30, 1), {6, 2, 2}, 8, 4),
                         doctest::Contains("val split"), DataError);
}

TEST_CASE("scaler standardizes the train range and round-trips") {
    RawSeries raw = hourly_series(100, 2, 42.0);
    WindowedDataset ds = split_and_scale(raw, {6, 2, 2}, 8, 4);
    for (int c = 0; c < 2; ++c) {
        double mean = 0.0, var = 0.0;
        for (int r = 0; r < ds.train_end; ++r) mean += ds.scaled.at(r, c);
        mean /= ds.train_end;
        for (int r = 0; r < ds.train_end; ++r) {
            var += (ds.scaled.at(r, c) - mean) * (ds.scaled.at(r, c) - mean);
        }
        var /= ds.train_end;
        CHECK(std::fabs(mean) < 1e-9);
        CHECK(std::fabs(var - 1.0) < 1e-9);
    }
    // unscale(scale(x)) == x
    for (int r = 0; r < 100; r += 17) {
        for (int c = 0; c < 2; ++c) {
            CHECK(ds.scaler.unscale(ds.scaled.at(r, c), c) ==
                  doctest::Approx(raw.values.at(r, c)).epsilon(1e-12));
        }
    }
}

TEST_CASE("window counts and contents") {
    const int L = 8, F = 4;
    // sized so the test split has exactly length L+F
    RawSeries raw = hourly_series(60, 1);
    WindowedDataset ds = split_and_scale(raw, {6, 2, 2}, L, F);
    CHECK(ds.window_count(Split::kTest) == 1);
    CHECK(ds.window_count(Split::kVal) == 1);
    CHECK(ds.window_count(Split::kTrain) == 36 - L - F + 1);

    RawSeries raw2 = hourly_series(65, 1);
    WindowedDataset ds2 = split_and_scale(raw2, {6, 2, 2}, L, F);
    CHECK(ds2.window_count(Split::kTest) == 2);
    // consecutive windows shift by one row
    Window w0 = ds2.window(Split::kTest, 0);
    Window w1 = ds2.window(Split::kTest, 1);
    for (int r = 0; r + 1 < L; ++r) CHECK(w1.x.at(r, 0) == w0.x.at(r + 1, 0));

    // direct slice oracle on the scaled matrix
    const int start = ds2.range_begin(Split::kTest);
    for (int r = 0; r < L; ++r) CHECK(w0.x.at(r, 0) == ds2.scaled.at(start + r, 0));
    for (int r = 0; r < F; ++r) CHECK(w0.y.at(r, 0) == ds2.scaled.at(start + L + r, 0));
    for (int r = 0; r < F; ++r) CHECK(w0.stamps_y.at(r, 3) == ds2.stamps.at(start + L + r, 3));

    CHECK_THROWS_AS(ds2.window(Split::kTest, 2), DataError);
}

TEST_CASE("windows never leak across split boundaries") {
    RawSeries raw = hourly_series(200, 1);
    WindowedDataset ds = split_and_scale(raw, {6, 2, 2}, 12, 6);
    for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
        const int n = ds.window_count(s);
        CHECK(n == ds.range_end(s) - ds.range_begin(s) - 12 - 6 + 1);
        // last window's target stays inside the range
        CHECK(ds.range_begin(s) + (n - 1) + 12 + 6 <= ds.range_end(s));
    }
}

TEST_CASE("window construction is deterministic") {
    RawSeries raw = hourly_series(120, 2);
    WindowedDataset a = split_and_scale(raw, {7, 1, 2}, 8, 4);
    WindowedDataset b = split_and_scale(raw, {7, 1, 2}, 8, 4);
    CHECK(a.scaled.v == b.scaled.v);
    for (int i = 0; i < a.window_count(Split::kTrain); ++i) {
        CHECK(a.window(Split::kTrain, i).x.v == b.window(Split::kTrain, i).x.v);
    }
}

TEST_CASE("synth_generate basics") {
    SynthSpec zero;
    zero.length = 16;
    zero.channels = 2;
    auto [clean0, noisy0] = synth_generate(zero);
    for (double v : noisy0.v) CHECK(v == 0.0);

    SynthSpec one;
    one.length = 32;
    one.channels = 1;
    one.tones = {{5, 2.0, 0.3}};
    auto [clean1, noisy1] = synth_generate(one);
    auto sp = spectral::rdft(clean1.column(0));
    for (int k = 0; k < sp.bins(); ++k) {
        if (k == 5) {
            CHECK(std::abs(sp.coeffs[static_cast<size_t>(k)]) > 1.0);
        } else {
            CHECK(std::abs(sp.coeffs[static_cast<size_t>(k)]) < 1e-9);
        }
    }

    SynthSpec bad = one;
    bad.tones = {{17, 1.0, 0.0}};
    CHECK_THROWS_AS(synth_generate(bad), DataError);
}

TEST_CASE("synth noise is seeded and has the requested variance") {
    SynthSpec spec;
    spec.length = 50000;
    spec.channels = 2;
    spec.tones = {{3, 1.0, 0.0}};
    spec.noise_sigma = 0.5;
    spec.seed = 99;
    auto [clean, noisy] = synth_generate(spec);
    auto [clean2, noisy2] = synth_generate(spec);
    CHECK(noisy.v == noisy2.v);  // bitwise reproducible

    double var = 0.0;
    for (size_t i = 0; i < noisy.v.size(); ++i) {
        const double d = noisy.v[i] - clean.v[i];
        var += d * d;
    }
    var /= static_cast<double>(noisy.v.size());
    CHECK(var > 0.225);
    CHECK(var < 0.275);
}

TEST_CASE("synth_series wraps timestamps around the noisy matrix") {
    SynthSpec spec;
    spec.length = 24;
    spec.channels = 3;
    spec.tones = {{2, 1.0, 0.1}};
    spec.noise_sigma = 0.1;
    spec.seed = 7;
    RawSeries raw = synth_series(spec, DateTime::parse("2021-05-01 00:00:00"), 3600);
    CHECK(raw.length() == 24);
    CHECK(raw.channels() == 3);
    CHECK(raw.step_seconds == 3600);
    CHECK(raw.timestamps[23].hour == 23);
}
