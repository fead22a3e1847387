#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kfs/datetime.hpp"
#include "kfs/matrix.hpp"

namespace kfs {

// Multivariate series with validated, equally spaced timestamps.
struct RawSeries {
    std::vector<DateTime> timestamps;
    Matrix values;  // [T x C]
    std::vector<std::string> channel_names;
    int64_t step_seconds = 0;

    int length() const { return values.rows; }
    int channels() const { return values.cols; }
};

// CSV with a header row, first column an ISO-like datetime, remaining
// columns numeric. Errors carry the offending line/column.
RawSeries load_csv(const std::string& path);

struct SplitRatio {
    int train = 7;
    int val = 1;
    int test = 2;
};

// Per-channel z-score statistics fitted on the training range.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    double scale(double v, int channel) const { return (v - mean[static_cast<size_t>(channel)]) / stddev[static_cast<size_t>(channel)]; }
    double unscale(double v, int channel) const { return v * stddev[static_cast<size_t>(channel)] + mean[static_cast<size_t>(channel)]; }
};

enum class Split { kTrain, kVal, kTest };

// One training example: lookback block, horizon block, and the calendar
// features aligned to each, all in scaled units.
struct Window {
    Matrix x;         // [L x C]
    Matrix y;         // [F x C]
    Matrix stamps_x;  // [L x 5]
    Matrix stamps_y;  // [F x 5]
};

// Chronological split plus standardized values and precomputed calendar
// features. Windows are always fully contained in one split range.
struct WindowedDataset {
    Matrix scaled;   // [T x C], standardized by the train-range scaler
    Matrix stamps;   // [T x 5]
    Scaler scaler;
    std::vector<std::string> channel_names;
    int train_end = 0;  // ranges: [0, train_end), [train_end, val_end), [val_end, T)
    int val_end = 0;
    int total = 0;
    int lookback = 0;
    int horizon = 0;

    int range_begin(Split s) const;
    int range_end(Split s) const;
    int window_count(Split s) const;
    Window window(Split s, int index) const;
};

WindowedDataset split_and_scale(const RawSeries& raw, const SplitRatio& ratio, int lookback,
                                int horizon);

// Convenience materialization of every window of a split, in order.
std::vector<Window> make_windows(const WindowedDataset& ds, Split split);

// One additive tone, channel c uses phase + c * phase_channel_step.
struct SynthTone {
    int bin = 1;
    double amplitude = 1.0;
    double phase = 0.0;
};

// Seeded synthetic signal: sum of bin-aligned tones plus Gaussian noise.
struct SynthSpec {
    int length = 96;
    int channels = 1;
    std::vector<SynthTone> tones;
    double phase_channel_step = 0.0;
    double noise_sigma = 0.0;
    uint64_t seed = 0;
};

// (clean, noisy) pair; regeneration with the same spec is bitwise identical.
std::pair<Matrix, Matrix> synth_generate(const SynthSpec& spec);

// Noisy synthetic series wrapped as a RawSeries with generated timestamps.
RawSeries synth_series(const SynthSpec& spec, const DateTime& start, int64_t step_seconds);

}  // namespace kfs
