#pragma once

#include <complex>
#include <vector>

#include "kfs/errors.hpp"

namespace kfs::spectral {

// One-sided spectrum of a real series of length L: bins 0..floor(L/2).
// DC is real; for even L the Nyquist bin is real as well.
struct RSpectrum {
    std::vector<std::complex<double>> coeffs;
    int original_length = 0;

    int bins() const { return static_cast<int>(coeffs.size()); }
};

// Result of energy-threshold top-K bin selection.
struct SpectralSelection {
    std::vector<int> kept_indices;  // sorted ascending
    int K = 0;
    double energy_ratio = 0.0;      // captured / total, defined as 1 for all-zero input
    double delta = 0.0;
};

enum class FilterKind { kTopK, kMovingAverage, kGaussian, kNone };

// Forward transform, Y[k] = sum_t x[t] * exp(-2*pi*i*k*t/L). Requires L >= 2.
RSpectrum rdft(const std::vector<double>& x);

// Inverse with 1/L normalization; irdft(rdft(x)) == x within 1e-9.
std::vector<double> irdft(const RSpectrum& spectrum);

// Per-bin contribution to the two-sided energy sum: |Y[k]|^2 weighted x2 on
// interior bins so that sum_t x[t]^2 == sum_k bin_energy[k] / L exactly.
std::vector<double> bin_energy(const RSpectrum& spectrum);

// Keeps the minimal prefix of energy-sorted bins whose cumulative share
// reaches delta (ties broken toward the lower bin index). delta in (0, 1].
SpectralSelection topk_select(const RSpectrum& spectrum, double delta);

// Zeroes all non-kept bins and inverse-transforms.
std::pair<std::vector<double>, SpectralSelection> reconstruct_topk(const std::vector<double>& x,
                                                                   double delta);

// Baseline smoothing filters. width must be >= 1, odd, and <= length;
// edges are mirror-padded. The Gaussian kernel is truncated at radius
// (width-1)/2 with sigma = radius/2.
std::vector<double> alt_filter(const std::vector<double>& x, FilterKind kind, int width);

}  // namespace kfs::spectral
