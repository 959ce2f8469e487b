#include "halfheat/fft.hpp"

#include <cmath>

#include "halfheat/types.hpp"

namespace halfheat {

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw ConfigError("FFT length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * M_PI / double(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= double(n);
}

std::vector<double> gaussian_convolve_periodic(const std::vector<double>& field,
                                               int dims, int n, double L,
                                               double tau) {
    if (dims != 1 && dims != 2) throw ConfigError("gaussian_convolve: dims must be 1 or 2");
    const std::size_t total = dims == 1 ? std::size_t(n) : std::size_t(n) * n;
    if (field.size() != total) throw ConfigError("gaussian_convolve: size mismatch");
    if (tau <= 0.0) return field;

    std::vector<std::complex<double>> a(field.begin(), field.end());
    auto wavenumber = [&](int idx) {
        const int k = idx <= n / 2 ? idx : idx - n;
        return 2.0 * M_PI * k / L;
    };
    if (dims == 1) {
        fft_inplace(a, false);
        for (int i = 0; i < n; ++i) {
            const double k = wavenumber(i);
            a[i] *= std::exp(-k * k * tau);
        }
        fft_inplace(a, true);
    } else {
        // row-column 2-D transform
        std::vector<std::complex<double>> row(n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) row[c] = a[std::size_t(r) * n + c];
            fft_inplace(row, false);
            for (int c = 0; c < n; ++c) a[std::size_t(r) * n + c] = row[c];
        }
        for (int c = 0; c < n; ++c) {
            for (int r = 0; r < n; ++r) row[r] = a[std::size_t(r) * n + c];
            fft_inplace(row, false);
            for (int r = 0; r < n; ++r) a[std::size_t(r) * n + c] = row[r];
        }
        for (int r = 0; r < n; ++r) {
            const double kr = wavenumber(r);
            for (int c = 0; c < n; ++c) {
                const double kc = wavenumber(c);
                a[std::size_t(r) * n + c] *= std::exp(-(kr * kr + kc * kc) * tau);
            }
        }
        for (int c = 0; c < n; ++c) {
            for (int r = 0; r < n; ++r) row[r] = a[std::size_t(r) * n + c];
            fft_inplace(row, true);
            for (int r = 0; r < n; ++r) a[std::size_t(r) * n + c] = row[r];
        }
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) row[c] = a[std::size_t(r) * n + c];
            fft_inplace(row, true);
            for (int c = 0; c < n; ++c) a[std::size_t(r) * n + c] = row[c];
        }
    }
    std::vector<double> out(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = a[i].real();
    return out;
}

}  // namespace halfheat
