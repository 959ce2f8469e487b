#pragma once

#include <complex>
#include <vector>

namespace halfheat {

// In-place radix-2 complex FFT; n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Periodic Gaussian smoothing on a 1-D or 2-D grid: multiplies Fourier modes
// by exp(-|k|^2 * tau). `dims` is 1 or 2, each axis has n nodes (power of two)
// and physical length L (spacing L/n). Exact for the periodized heat kernel.
std::vector<double> gaussian_convolve_periodic(const std::vector<double>& field,
                                               int dims, int n, double L,
                                               double tau);

}  // namespace halfheat
