#include "kfs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kfs::spectral {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// exp(-2*pi*i*r/L) for r = 0..L-1. Products k*t are reduced mod L before
// lookup, keeping every angle in [0, 2*pi) regardless of k*t magnitude.
std::vector<std::complex<double>> twiddle_table(int length) {
    std::vector<std::complex<double>> w(static_cast<size_t>(length));
    for (int r = 0; r < length; ++r) {
        const double ang = -kTwoPi * static_cast<double>(r) / static_cast<double>(length);
        w[static_cast<size_t>(r)] = {std::cos(ang), std::sin(ang)};
    }
    return w;
}

}  // namespace

RSpectrum rdft(const std::vector<double>& x) {
    const int length = static_cast<int>(x.size());
    if (length < 2) throw DataError("rdft: series length must be >= 2, got " + std::to_string(length));
    const auto w = twiddle_table(length);
    RSpectrum sp;
    sp.original_length = length;
    sp.coeffs.resize(static_cast<size_t>(length / 2) + 1);
    for (int k = 0; k <= length / 2; ++k) {
        double re = 0.0, im = 0.0;
        int64_t r = 0;
        for (int t = 0; t < length; ++t) {
            const auto& tw = w[static_cast<size_t>(r)];
            re += x[static_cast<size_t>(t)] * tw.real();
            im += x[static_cast<size_t>(t)] * tw.imag();
            r += k;
            if (r >= length) r -= length;
        }
        sp.coeffs[static_cast<size_t>(k)] = {re, im};
    }
    // DC (and Nyquist for even L) are exactly real for real input up to
    // roundoff; pin them so downstream conjugate expansion is consistent.
    sp.coeffs[0] = {sp.coeffs[0].real(), 0.0};
    if (length % 2 == 0) {
        auto& ny = sp.coeffs[static_cast<size_t>(length / 2)];
        ny = {ny.real(), 0.0};
    }
    return sp;
}

std::vector<double> irdft(const RSpectrum& spectrum) {
    const int length = spectrum.original_length;
    if (length < 2 || spectrum.bins() != length / 2 + 1) {
        throw DataError("irdft: inconsistent spectrum, length " + std::to_string(length) + " with " +
                        std::to_string(spectrum.bins()) + " bins");
    }
    // x[t] = (1/L) * sum over the full two-sided spectrum; conjugate symmetry
    // folds the upper half onto bins 1..ceil(L/2)-1 with a factor 2 real part.
    const auto w = twiddle_table(length);  // conjugate gives the +i direction
    std::vector<double> x(static_cast<size_t>(length), 0.0);
    const int half = length / 2;
    const bool even = length % 2 == 0;
    for (int t = 0; t < length; ++t) {
        double acc = spectrum.coeffs[0].real();
        int64_t r = 0;
        for (int k = 1; k <= half; ++k) {
            r += t;
            if (r >= length) r -= length;
            const auto& tw = w[static_cast<size_t>(r)];  // exp(-2*pi*i*k*t/L)
            const double re = spectrum.coeffs[static_cast<size_t>(k)].real();
            const double im = spectrum.coeffs[static_cast<size_t>(k)].imag();
            // Re(Y[k] * exp(+i*ang)) with exp(+i*ang) = conj(tw)
            const double term = re * tw.real() + im * tw.imag();
            if (even && k == half) {
                acc += term;
            } else {
                acc += 2.0 * term;
            }
        }
        x[static_cast<size_t>(t)] = acc / static_cast<double>(length);
    }
    return x;
}

std::vector<double> bin_energy(const RSpectrum& spectrum) {
    const int length = spectrum.original_length;
    const int half = length / 2;
    const bool even = length % 2 == 0;
    std::vector<double> e(spectrum.coeffs.size());
    for (int k = 0; k <= half; ++k) {
        const double m2 = std::norm(spectrum.coeffs[static_cast<size_t>(k)]);
        const bool interior = k != 0 && !(even && k == half);
        e[static_cast<size_t>(k)] = interior ? 2.0 * m2 : m2;
    }
    return e;
}

SpectralSelection topk_select(const RSpectrum& spectrum, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw ConfigError("topk_select: delta must be in (0, 1], got " + std::to_string(delta));
    }
    const std::vector<double> energy = bin_energy(spectrum);
    const double total = std::accumulate(energy.begin(), energy.end(), 0.0);

    SpectralSelection sel;
    sel.delta = delta;
    if (total <= 0.0) {
        // all-zero spectrum: nothing to keep, ratio defined as 1
        sel.K = 0;
        sel.energy_ratio = 1.0;
        return sel;
    }

    std::vector<int> order(energy.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return energy[static_cast<size_t>(a)] > energy[static_cast<size_t>(b)]; });

    double cum = 0.0;
    bool reached = false;
    for (int idx : order) {
        if (energy[static_cast<size_t>(idx)] <= 0.0) break;  // only zero bins remain
        sel.kept_indices.push_back(idx);
        cum += energy[static_cast<size_t>(idx)];
        if (cum / total >= delta) {
            reached = true;
            break;
        }
    }
    sel.K = static_cast<int>(sel.kept_indices.size());
    // Exhausting the nonzero bins means everything with energy was kept; the
    // captured share is exactly 1 regardless of summation roundoff.
    sel.energy_ratio = reached ? cum / total : 1.0;
    std::sort(sel.kept_indices.begin(), sel.kept_indices.end());
    return sel;
}

std::pair<std::vector<double>, SpectralSelection> reconstruct_topk(const std::vector<double>& x,
                                                                   double delta) {
    RSpectrum sp = rdft(x);
    SpectralSelection sel = topk_select(sp, delta);
    RSpectrum kept;
    kept.original_length = sp.original_length;
    kept.coeffs.assign(sp.coeffs.size(), {0.0, 0.0});
    for (int idx : sel.kept_indices) kept.coeffs[static_cast<size_t>(idx)] = sp.coeffs[static_cast<size_t>(idx)];
    return {irdft(kept), std::move(sel)};
}

std::vector<double> alt_filter(const std::vector<double>& x, FilterKind kind, int width) {
    const int length = static_cast<int>(x.size());
    if (kind == FilterKind::kNone) return x;
    if (kind == FilterKind::kTopK) {
        throw ConfigError("alt_filter: top-k selection is not a kernel filter");
    }
    if (width < 1 || width % 2 == 0) {
        throw ConfigError("alt_filter: width must be odd and >= 1, got " + std::to_string(width));
    }
    if (width > length) {
        throw ConfigError("alt_filter: width " + std::to_string(width) + " exceeds series length " +
                          std::to_string(length));
    }
    const int radius = (width - 1) / 2;
    if (radius == 0) return x;

    std::vector<double> kernel(static_cast<size_t>(width));
    if (kind == FilterKind::kMovingAverage) {
        std::fill(kernel.begin(), kernel.end(), 1.0 / width);
    } else {
        const double sigma = static_cast<double>(radius) / 2.0;
        double norm = 0.0;
        for (int j = -radius; j <= radius; ++j) {
            const double v = std::exp(-0.5 * (j / sigma) * (j / sigma));
            kernel[static_cast<size_t>(j + radius)] = v;
            norm += v;
        }
        for (double& v : kernel) v /= norm;
    }

    std::vector<double> out(x.size(), 0.0);
    for (int t = 0; t < length; ++t) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) {
            int idx = t + j;
            if (idx < 0) idx = -idx;                          // mirror, no edge repeat
            if (idx >= length) idx = 2 * (length - 1) - idx;
            acc += kernel[static_cast<size_t>(j + radius)] * x[static_cast<size_t>(idx)];
        }
        out[static_cast<size_t>(t)] = acc;
    }
    return out;
}

}  // namespace kfs::spectral
