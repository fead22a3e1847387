#include "kfs/model.hpp"

#include <cmath>

#include "kfs/rng.hpp"
#include "kfs/timefeat.hpp"

namespace kfs {

void KfsConfig::validate() const {
    if (lookback < 2) throw ConfigError("lookback must be >= 2");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (channels < 1) throw ConfigError("channels must be >= 1");
    if (pool_window < 1) throw ConfigError("pool_window must be >= 1");
    if (scales < 0) throw ConfigError("scales must be >= 0");
    int div = 1;
    for (int i = 0; i < scales; ++i) div *= pool_window;
    if (lookback % div != 0) {
        throw ConfigError("lookback " + std::to_string(lookback) + " not divisible by pool_window^scales = " +
                          std::to_string(div));
    }
    if (lookback / div < 2) throw ConfigError("coarsest scale is shorter than 2 steps");
    if (p_dim < 0 || p_dim >= d_model) throw ConfigError("requires d_model > p_dim >= 0");
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must be in (0, 1]");
    if (d_ff < 1) throw ConfigError("d_ff must be >= 1");
    if (num_order < 1) throw ConfigError("numerator order must be >= 1");
    if (den_order < 0) throw ConfigError("denominator order must be >= 0");
    if (use_kan) {
        for (int d_in : {d_model, d_ff, 2 * d_model}) {
            const int g = effective_groups(d_in, groups);
            if (d_in % g != 0) {
                throw ConfigError("width " + std::to_string(d_in) + " not divisible by " +
                                  std::to_string(g) + " groups");
            }
        }
    }
    if (filter_kind == spectral::FilterKind::kMovingAverage ||
        filter_kind == spectral::FilterKind::kGaussian) {
        if (filter_width < 1 || filter_width % 2 == 0 || filter_width > scale_length(scales)) {
            throw ConfigError("filter_width must be odd, >= 1 and fit the coarsest scale");
        }
    }
}

int KfsConfig::scale_length(int scale) const {
    int len = lookback;
    for (int i = 0; i < scale; ++i) len /= pool_window;
    return len;
}

std::pair<Matrix, RevinState> revin_normalize(const Matrix& x) {
    if (x.rows < 2) throw DataError("revin_normalize: need at least 2 rows");
    RevinState state;
    state.mean.resize(static_cast<size_t>(x.cols));
    state.stddev.resize(static_cast<size_t>(x.cols));
    Matrix out(x.rows, x.cols);
    for (int c = 0; c < x.cols; ++c) {
        double mean = 0.0;
        for (int r = 0; r < x.rows; ++r) mean += x.at(r, c);
        mean /= x.rows;
        double var = 0.0;
        for (int r = 0; r < x.rows; ++r) {
            const double d = x.at(r, c) - mean;
            var += d * d;
        }
        var /= x.rows;
        const double stddev = std::max(std::sqrt(var), 1e-5);
        state.mean[static_cast<size_t>(c)] = mean;
        state.stddev[static_cast<size_t>(c)] = stddev;
        for (int r = 0; r < x.rows; ++r) out.at(r, c) = (x.at(r, c) - mean) / stddev;
    }
    return {std::move(out), std::move(state)};
}

Matrix revin_denormalize(const Matrix& y, const RevinState& state) {
    Matrix out(y.rows, y.cols);
    for (int r = 0; r < y.rows; ++r) {
        for (int c = 0; c < y.cols; ++c) {
            out.at(r, c) = y.at(r, c) * state.stddev[static_cast<size_t>(c)] + state.mean[static_cast<size_t>(c)];
        }
    }
    return out;
}

Tensor revin_denormalize(const Tensor& y, const RevinState& state) {
    const int rows = y.dim(0);
    const int cols = y.dim(1);
    Tensor std_row({1, cols}, std::vector<double>(state.stddev.begin(), state.stddev.end()));
    Tensor mean_row({1, cols}, std::vector<double>(state.mean.begin(), state.mean.end()));
    return add(mul(y, broadcast_rows(std_row, rows)), broadcast_rows(mean_row, rows));
}

std::vector<Matrix> downsample_pyramid(const Matrix& x, int pool_window, int scales) {
    int div = 1;
    for (int i = 0; i < scales; ++i) div *= pool_window;
    if (pool_window < 1 || x.rows % div != 0) {
        throw ConfigError("downsample_pyramid: " + std::to_string(x.rows) + " rows not divisible by " +
                          std::to_string(div));
    }
    std::vector<Matrix> pyramid;
    pyramid.reserve(static_cast<size_t>(scales) + 1);
    pyramid.push_back(x);
    for (int s = 1; s <= scales; ++s) {
        const Matrix& prev = pyramid.back();
        Matrix next(prev.rows / pool_window, prev.cols);
        for (int r = 0; r < next.rows; ++r) {
            for (int c = 0; c < next.cols; ++c) {
                double acc = 0.0;
                for (int j = 0; j < pool_window; ++j) acc += prev.at(r * pool_window + j, c);
                next.at(r, c) = acc / pool_window;
            }
        }
        pyramid.push_back(std::move(next));
    }
    return pyramid;
}

Matrix frek_filter(const Matrix& x, const KfsConfig& config) {
    if (config.filter_kind == spectral::FilterKind::kNone) return x;
    Matrix out(x.rows, x.cols);
    for (int c = 0; c < x.cols; ++c) {
        std::vector<double> channel = x.column(c);
        if (config.filter_kind == spectral::FilterKind::kTopK) {
            out.set_column(c, spectral::reconstruct_topk(channel, config.delta).first);
        } else {
            out.set_column(c, spectral::alt_filter(channel, config.filter_kind, config.filter_width));
        }
    }
    return out;
}

const NamedParam& find_param(const std::vector<NamedParam>& params, const std::string& name) {
    for (const NamedParam& p : params) {
        if (p.name == name) return p;
    }
    throw ConfigError("no parameter named '" + name + "'");
}

Tensor Block::forward(const Tensor& x) const {
    return is_kan ? kan_block_forward(x, kan1, kan2) : mlp_block_forward(x, mlp1, mlp2);
}

void Block::collect(std::vector<NamedParam>& out) const {
    if (is_kan) {
        for (const Tensor& t : {kan1.rational.numer, kan1.rational.denom, kan1.weight, kan1.bias,
                                kan2.rational.numer, kan2.rational.denom, kan2.weight, kan2.bias}) {
            out.push_back({t.name(), t, true});
        }
    } else {
        for (const Tensor& t : {mlp1.weight, mlp1.bias, mlp2.weight, mlp2.bias}) {
            out.push_back({t.name(), t, true});
        }
    }
}

namespace {

Block make_block(const KfsConfig& config, int d_in, int d_mid, int d_out, Rng& rng,
                 const std::string& prefix) {
    Block block;
    block.is_kan = config.use_kan;
    if (config.use_kan) {
        block.kan1 = make_grkan_layer(d_in, d_mid, effective_groups(d_in, config.groups),
                                      config.num_order, config.den_order, rng, prefix + ".unit1");
        block.kan2 = make_grkan_layer(d_mid, d_out, effective_groups(d_mid, config.groups),
                                      config.num_order, config.den_order, rng, prefix + ".unit2");
    } else {
        block.mlp1 = make_mlp_layer(d_in, d_mid, rng, prefix + ".mlp1");
        block.mlp2 = make_mlp_layer(d_mid, d_out, rng, prefix + ".mlp2");
    }
    return block;
}

Tensor matrix_tensor(const Matrix& m) {
    return Tensor({m.rows, m.cols}, m.v);
}

Tensor uniform_weight(int d_in, int d_out, Rng& rng, const std::string& name) {
    const double bound = std::sqrt(6.0 / (d_in + d_out));
    std::vector<double> w(static_cast<size_t>(d_in) * d_out);
    for (double& v : w) v = rng.uniform(-bound, bound);
    return Tensor::param({d_in, d_out}, std::move(w), name);
}

Tensor zero_bias(int d, const std::string& name) {
    return Tensor::param({d}, std::vector<double>(static_cast<size_t>(d), 0.0), name);
}

template <typename Fn>
auto with_scale_context(int scale, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("scale " + std::to_string(scale) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("scale " + std::to_string(scale) + ": " + e.what());
    } catch (const ShapeError& e) {
        throw ShapeError("scale " + std::to_string(scale) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("scale " + std::to_string(scale) + ": " + e.what());
    }
}

}  // namespace

KfsModel::KfsModel(const KfsConfig& config, uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed, seed_tag::kInit);
    const int d_model = config_.d_model;
    const int proj_dim = d_model - config_.p_dim;
    scales_.reserve(static_cast<size_t>(config_.scale_count()));
    for (int s = 0; s < config_.scale_count(); ++s) {
        const std::string prefix = "scale" + std::to_string(s);
        const int len = config_.scale_length(s);
        ScaleParams sp;
        sp.embed_weight = uniform_weight(len, proj_dim, rng, prefix + ".embed.weight");
        sp.embed_bias = zero_bias(proj_dim, prefix + ".embed.bias");
        sp.adaptive_token = Tensor::param({config_.p_dim},
                                          std::vector<double>(static_cast<size_t>(config_.p_dim), 0.0),
                                          prefix + ".adaptive.token");
        sp.frek = make_block(config_, d_model, config_.d_ff, d_model, rng, prefix + ".frek");
        sp.stamp_weight = uniform_weight(len * kStampFeatures, d_model, rng, prefix + ".stamp.weight");
        sp.stamp_bias = zero_bias(d_model, prefix + ".stamp.bias");
        sp.mix = make_block(config_, 2 * d_model, config_.d_ff, d_model, rng, prefix + ".mix");
        scales_.push_back(std::move(sp));
    }
    out_weight_ = uniform_weight(d_model, config_.horizon, rng, "output.weight");
    out_bias_ = zero_bias(config_.horizon, "output.bias");
}

std::vector<NamedParam> KfsModel::parameters() const {
    std::vector<NamedParam> out;
    for (const ScaleParams& sp : scales_) {
        out.push_back({sp.embed_weight.name(), sp.embed_weight, true});
        out.push_back({sp.embed_bias.name(), sp.embed_bias, true});
        out.push_back({sp.adaptive_token.name(), sp.adaptive_token, config_.use_adaptive});
        sp.frek.collect(out);
        out.push_back({sp.stamp_weight.name(), sp.stamp_weight, config_.use_stamp});
        out.push_back({sp.stamp_bias.name(), sp.stamp_bias, config_.use_stamp});
        sp.mix.collect(out);
    }
    out.push_back({out_weight_.name(), out_weight_, true});
    out.push_back({out_bias_.name(), out_bias_, true});
    return out;
}

Tensor KfsModel::adaptive_embed(const Matrix& x_scale, int scale) const {
    const ScaleParams& sp = scales_[static_cast<size_t>(scale)];
    if (x_scale.rows != sp.embed_weight.dim(0)) {
        throw ConfigError("adaptive_embed: input length " + std::to_string(x_scale.rows) +
                          " does not match scale width " + std::to_string(sp.embed_weight.dim(0)));
    }
    Tensor channels_major = transpose(matrix_tensor(x_scale));  // [C x L_i]
    Tensor projected = affine(channels_major, sp.embed_weight, sp.embed_bias);
    if (config_.p_dim == 0) return projected;
    Tensor token_rows = broadcast_rows(sp.adaptive_token, x_scale.cols);
    return concat({token_rows, projected}, 1);
}

Tensor KfsModel::frek_forward(const Matrix& x_scale, int scale) const {
    Matrix filtered = frek_filter(x_scale, config_);
    return scales_[static_cast<size_t>(scale)].frek.forward(adaptive_embed(filtered, scale));
}

Tensor KfsModel::stamp_embed(const Matrix& stamps_scale, int scale) const {
    const ScaleParams& sp = scales_[static_cast<size_t>(scale)];
    if (!config_.use_stamp) return Tensor::zeros({1, config_.d_model});
    const int flat = stamps_scale.rows * stamps_scale.cols;
    if (flat != sp.stamp_weight.dim(0)) {
        throw ConfigError("stamp_embed: " + std::to_string(flat) + " features do not match scale width " +
                          std::to_string(sp.stamp_weight.dim(0)));
    }
    Tensor flattened({1, flat}, stamps_scale.v);
    return affine(flattened, sp.stamp_weight, sp.stamp_bias);
}

Tensor KfsModel::feature_mix(const Tensor& e1, const Tensor& e_stamp, int scale) const {
    const int rows = e1.dim(0);
    Tensor stamp_rows = broadcast_rows(e_stamp, rows);
    Tensor mixed = scales_[static_cast<size_t>(scale)].mix.forward(concat({e1, stamp_rows}, 1));
    return add(e1, mixed);
}

Tensor KfsModel::forward(const Matrix& x, const Matrix& stamps) const {
    if (x.rows != config_.lookback) {
        throw DataError("forward: window length " + std::to_string(x.rows) + " != lookback " +
                        std::to_string(config_.lookback));
    }
    if (stamps.rows != x.rows || stamps.cols != kStampFeatures) {
        throw DataError("forward: stamp features must be [lookback x 5]");
    }
    const std::vector<Matrix> series_pyramid = downsample_pyramid(x, config_.pool_window, config_.scales);
    const std::vector<Matrix> stamps_pyramid = downsample_pyramid(stamps, config_.pool_window, config_.scales);

    RevinState state0;
    Tensor mixed_sum;
    for (int s = 0; s < config_.scale_count(); ++s) {
        Tensor mixed = with_scale_context(s, [&] {
            auto [normalized, state] = revin_normalize(series_pyramid[static_cast<size_t>(s)]);
            if (s == 0) state0 = state;
            Tensor representation = frek_forward(normalized, s);
            Tensor stamp_vec = stamp_embed(stamps_pyramid[static_cast<size_t>(s)], s);
            return feature_mix(representation, stamp_vec, s);
        });
        mixed_sum = s == 0 ? mixed : add(mixed_sum, mixed);
    }
    Tensor averaged = mul(mixed_sum, 1.0 / config_.scale_count());
    Tensor projected = affine(averaged, out_weight_, out_bias_);  // [C x F]
    return revin_denormalize(transpose(projected), state0);
}

LinearBaseline::LinearBaseline(int lookback, int horizon, uint64_t seed) {
    Rng rng(seed, seed_tag::kInit);
    weight_ = uniform_weight(lookback, horizon, rng, "linear.weight");
    bias_ = zero_bias(horizon, "linear.bias");
}

Tensor LinearBaseline::forward(const Window& window) const {
    Tensor channels_major = transpose(Tensor({window.x.rows, window.x.cols}, window.x.v));
    return transpose(affine(channels_major, weight_, bias_));
}

std::vector<NamedParam> LinearBaseline::parameters() const {
    return {{weight_.name(), weight_, true}, {bias_.name(), bias_, true}};
}

}  // namespace kfs
