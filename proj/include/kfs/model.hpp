#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kfs/data.hpp"
#include "kfs/matrix.hpp"
#include "kfs/rational_kan.hpp"
#include "kfs/spectral.hpp"
#include "kfs/tensor.hpp"

namespace kfs {

struct KfsConfig {
    int lookback = 96;
    int horizon = 96;
    int channels = 7;
    int d_model = 128;
    int d_ff = 256;
    int p_dim = 16;        // adaptive token width; 0 disables the concat slot
    int scales = 3;        // pyramid levels beyond the raw series
    int pool_window = 2;
    double delta = 0.9;    // energy threshold of the top-K selection
    int groups = 8;
    int num_order = 5;
    int den_order = 4;
    bool use_kan = true;
    bool use_stamp = true;
    bool use_adaptive = true;
    spectral::FilterKind filter_kind = spectral::FilterKind::kTopK;
    int filter_width = 5;  // kernel width for the ablation filters

    void validate() const;
    int scale_length(int scale) const;  // lookback / pool_window^scale
    int scale_count() const { return scales + 1; }
};

// Per-window, per-channel normalization statistics, replayed to restore the
// prediction to the input's scale.
struct RevinState {
    std::vector<double> mean;
    std::vector<double> stddev;  // clamped at 1e-5
};

std::pair<Matrix, RevinState> revin_normalize(const Matrix& x);
Matrix revin_denormalize(const Matrix& y, const RevinState& state);
Tensor revin_denormalize(const Tensor& y, const RevinState& state);

// Non-overlapping average pooling applied `scales` times; element 0 is the
// input itself. Rows must divide evenly by pool_window^scales.
std::vector<Matrix> downsample_pyramid(const Matrix& x, int pool_window, int scales);

// Per-channel denoising pass selected by the config (top-K spectral
// selection, kernel filters, or pass-through).
Matrix frek_filter(const Matrix& x, const KfsConfig& config);

struct NamedParam {
    std::string name;
    Tensor tensor;
    bool trainable = true;
};

const NamedParam& find_param(const std::vector<NamedParam>& params, const std::string& name);

// Two-unit representation block; KAN or the parameter-matched MLP ablation.
struct Block {
    bool is_kan = true;
    GrKanLayer kan1, kan2;
    MlpLayer mlp1, mlp2;

    Tensor forward(const Tensor& x) const;
    void collect(std::vector<NamedParam>& out) const;
};

// Abstract one-window forecaster mapping scaled inputs to scaled predictions.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual Tensor forward(const Window& window) const = 0;
    virtual std::vector<NamedParam> parameters() const = 0;
};

// The full multi-scale network: per scale an embedding with adaptive token,
// spectral denoising, a representation block, a timestamp embedding, and a
// mixing block; scale outputs are averaged and projected to the horizon.
class KfsModel : public Forecaster {
public:
    KfsModel(const KfsConfig& config, uint64_t seed);

    const KfsConfig& config() const { return config_; }
    std::vector<NamedParam> parameters() const override;

    // x [lookback x C] and stamps [lookback x 5], both in scaled units;
    // returns the [horizon x C] prediction in the same units.
    Tensor forward(const Matrix& x, const Matrix& stamps) const;
    Tensor forward(const Window& window) const override { return forward(window.x, window.stamps_x); }

    // stage outputs, exposed for verification
    Tensor adaptive_embed(const Matrix& x_scale, int scale) const;   // [C x d_model]
    Tensor frek_forward(const Matrix& x_scale, int scale) const;     // [C x d_model]
    Tensor stamp_embed(const Matrix& stamps_scale, int scale) const; // [1 x d_model]
    Tensor feature_mix(const Tensor& e1, const Tensor& e_stamp, int scale) const;

private:
    struct ScaleParams {
        Tensor embed_weight;    // [L_i x (d_model - p_dim)]
        Tensor embed_bias;
        Tensor adaptive_token;  // [p_dim]
        Block frek;
        Tensor stamp_weight;    // [(L_i * 5) x d_model]
        Tensor stamp_bias;
        Block mix;
    };

    KfsConfig config_;
    std::vector<ScaleParams> scales_;
    Tensor out_weight_;  // [d_model x horizon]
    Tensor out_bias_;
};

// Channel-shared affine lookback -> horizon on the scaled window, the
// simplest trainable reference model.
class LinearBaseline : public Forecaster {
public:
    LinearBaseline(int lookback, int horizon, uint64_t seed);
    Tensor forward(const Window& window) const override;
    std::vector<NamedParam> parameters() const override;

private:
    Tensor weight_;  // [lookback x horizon]
    Tensor bias_;
};

}  // namespace kfs
