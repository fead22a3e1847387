#include "kfs/data.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kfs/rng.hpp"
#include "kfs/timefeat.hpp"

namespace kfs {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

RawSeries load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "': empty file");
    std::vector<std::string> header = split_line(line);
    if (header.size() < 2) throw DataError("'" + path + "': header needs a date column and at least one channel");

    RawSeries raw;
    raw.channel_names.assign(header.begin() + 1, header.end());
    const int channels = static_cast<int>(raw.channel_names.size());

    std::vector<double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw DataError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        }
        try {
            raw.timestamps.push_back(DateTime::parse(trim(cells[0])));
        } catch (const DataError& e) {
            throw DataError("'" + path + "' line " + std::to_string(line_no) + ", column 1: " + e.what());
        }
        for (int c = 0; c < channels; ++c) {
            const std::string cell = trim(cells[static_cast<size_t>(c) + 1]);
            const char* begin = cell.c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (cell.empty() || end != begin + cell.size() || !std::isfinite(v)) {
                throw DataError("'" + path + "' line " + std::to_string(line_no) + ", column " +
                                std::to_string(c + 2) + ": unparseable cell '" + cell + "'");
            }
            values.push_back(v);
        }
    }

    const int rows = static_cast<int>(raw.timestamps.size());
    if (rows < 2) throw DataError("'" + path + "': need at least 2 data rows");
    raw.values = Matrix(rows, channels, std::move(values));

    raw.step_seconds = raw.timestamps[1].epoch_seconds() - raw.timestamps[0].epoch_seconds();
    if (raw.step_seconds <= 0) throw DataError("'" + path + "': non-increasing timestamps at index 1");
    for (int i = 1; i < rows; ++i) {
        const int64_t step = raw.timestamps[static_cast<size_t>(i)].epoch_seconds() -
                             raw.timestamps[static_cast<size_t>(i) - 1].epoch_seconds();
        if (step != raw.step_seconds) {
            throw DataError("'" + path + "': irregular spacing at index " + std::to_string(i));
        }
    }
    return raw;
}

int WindowedDataset::range_begin(Split s) const {
    switch (s) {
        case Split::kTrain: return 0;
        case Split::kVal: return train_end;
        default: return val_end;
    }
}

int WindowedDataset::range_end(Split s) const {
    switch (s) {
        case Split::kTrain: return train_end;
        case Split::kVal: return val_end;
        default: return total;
    }
}

int WindowedDataset::window_count(Split s) const {
    const int n = range_end(s) - range_begin(s) - lookback - horizon + 1;
    return n > 0 ? n : 0;
}

Window WindowedDataset::window(Split s, int index) const {
    if (index < 0 || index >= window_count(s)) {
        throw DataError("window index " + std::to_string(index) + " out of range");
    }
    const int start = range_begin(s) + index;
    const int channels = scaled.cols;
    Window w;
    w.x = Matrix(lookback, channels);
    w.y = Matrix(horizon, channels);
    w.stamps_x = Matrix(lookback, stamps.cols);
    w.stamps_y = Matrix(horizon, stamps.cols);
    for (int r = 0; r < lookback; ++r) {
        for (int c = 0; c < channels; ++c) w.x.at(r, c) = scaled.at(start + r, c);
        for (int c = 0; c < stamps.cols; ++c) w.stamps_x.at(r, c) = stamps.at(start + r, c);
    }
    for (int r = 0; r < horizon; ++r) {
        for (int c = 0; c < channels; ++c) w.y.at(r, c) = scaled.at(start + lookback + r, c);
        for (int c = 0; c < stamps.cols; ++c) w.stamps_y.at(r, c) = stamps.at(start + lookback + r, c);
    }
    return w;
}

WindowedDataset split_and_scale(const RawSeries& raw, const SplitRatio& ratio, int lookback,
                                int horizon) {
    if (lookback < 1 || horizon < 1) throw ConfigError("lookback and horizon must be positive");
    const int total = raw.length();
    const int denom = ratio.train + ratio.val + ratio.test;
    if (denom <= 0 || ratio.train <= 0 || ratio.val < 0 || ratio.test < 0) {
        throw ConfigError("invalid split ratio");
    }
    WindowedDataset ds;
    ds.total = total;
    ds.train_end = static_cast<int>(static_cast<int64_t>(total) * ratio.train / denom);
    ds.val_end = ds.train_end + static_cast<int>(static_cast<int64_t>(total) * ratio.val / denom);
    ds.lookback = lookback;
    ds.horizon = horizon;
    ds.channel_names = raw.channel_names;

    const int need = lookback + horizon;
    if (ds.train_end < need) throw DataError("train split too short for lookback+horizon");
    if (ds.val_end - ds.train_end < need) throw DataError("val split too short for lookback+horizon");
    if (total - ds.val_end < need) throw DataError("test split too short for lookback+horizon");

    const int channels = raw.channels();
    ds.scaler.mean.assign(static_cast<size_t>(channels), 0.0);
    ds.scaler.stddev.assign(static_cast<size_t>(channels), 0.0);
    for (int c = 0; c < channels; ++c) {
        double s = 0.0;
        for (int r = 0; r < ds.train_end; ++r) s += raw.values.at(r, c);
        const double mean = s / ds.train_end;
        double var = 0.0;
        for (int r = 0; r < ds.train_end; ++r) {
            const double d = raw.values.at(r, c) - mean;
            var += d * d;
        }
        ds.scaler.mean[static_cast<size_t>(c)] = mean;
        ds.scaler.stddev[static_cast<size_t>(c)] = std::max(std::sqrt(var / ds.train_end), 1e-12);
    }

    ds.scaled = Matrix(total, channels);
    for (int r = 0; r < total; ++r) {
        for (int c = 0; c < channels; ++c) ds.scaled.at(r, c) = ds.scaler.scale(raw.values.at(r, c), c);
    }
    ds.stamps = stamp_features(raw.timestamps);
    return ds;
}

std::vector<Window> make_windows(const WindowedDataset& ds, Split split) {
    std::vector<Window> out;
    const int n = ds.window_count(split);
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(ds.window(split, i));
    return out;
}

std::pair<Matrix, Matrix> synth_generate(const SynthSpec& spec) {
    if (spec.length < 2) throw DataError("synth_generate: length must be >= 2");
    if (spec.channels < 1) throw DataError("synth_generate: channels must be >= 1");
    const int max_bin = spec.length / 2;
    for (const SynthTone& tone : spec.tones) {
        if (tone.bin < 0 || tone.bin > max_bin) {
            throw DataError("synth_generate: bin " + std::to_string(tone.bin) + " out of range [0, " +
                            std::to_string(max_bin) + "]");
        }
    }
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    Matrix clean(spec.length, spec.channels);
    for (int c = 0; c < spec.channels; ++c) {
        for (const SynthTone& tone : spec.tones) {
            const double phase = tone.phase + c * spec.phase_channel_step;
            for (int t = 0; t < spec.length; ++t) {
                clean.at(t, c) += tone.amplitude * std::cos(kTwoPi * tone.bin * t / spec.length + phase);
            }
        }
    }
    Matrix noisy = clean;
    if (spec.noise_sigma > 0.0) {
        Rng rng(spec.seed, seed_tag::kNoise);
        for (double& v : noisy.v) v += rng.normal(0.0, spec.noise_sigma);
    }
    return {std::move(clean), std::move(noisy)};
}

RawSeries synth_series(const SynthSpec& spec, const DateTime& start, int64_t step_seconds) {
    auto [clean, noisy] = synth_generate(spec);
    RawSeries raw;
    raw.values = std::move(noisy);
    raw.step_seconds = step_seconds;
    raw.timestamps.reserve(static_cast<size_t>(spec.length));
    const int64_t begin = start.epoch_seconds();
    for (int t = 0; t < spec.length; ++t) {
        raw.timestamps.push_back(DateTime::from_epoch(begin + t * step_seconds));
    }
    raw.channel_names.reserve(static_cast<size_t>(spec.channels));
    for (int c = 0; c < spec.channels; ++c) raw.channel_names.push_back("ch" + std::to_string(c));
    return raw;
}

}  // namespace kfs
