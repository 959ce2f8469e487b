#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace halfheat {

// Point in R^N, N in {1,2,3}. The last coordinate is the normal direction;
// points "in D" have xn() >= 0.
struct Point {
    int dim = 1;
    std::array<double, 3> c{0.0, 0.0, 0.0};

    Point() = default;
    Point(int n, std::array<double, 3> coords) : dim(n), c(coords) {}
    static Point make1(double x) { return Point(1, {x, 0, 0}); }
    static Point make2(double x1, double xn) { return Point(2, {x1, xn, 0}); }
    static Point make3(double x1, double x2, double xn) { return Point(3, {x1, x2, xn}); }

    double xn() const { return c[dim - 1]; }
    double& xn() { return c[dim - 1]; }

    double dist2(const Point& o) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) {
            double d = c[i] - o.c[i];
            s += d * d;
        }
        return s;
    }
    double norm2() const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += c[i] * c[i];
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }

    // reflection across the boundary, (x', -x_N)
    Point reflected() const {
        Point r = *this;
        r.xn() = -r.xn();
        return r;
    }
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

// Integral diverges (value is +infinity), e.g. Gaussian-growth data past the
// 4*lambda*t < 1 window.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& m) : std::runtime_error(m) {}
};

// Quadrature did not meet the requested tolerance; carries the achieved
// absolute error estimate.
struct AccuracyError : std::runtime_error {
    double achieved_error;
    AccuracyError(const std::string& m, double err)
        : std::runtime_error(m), achieved_error(err) {}
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};

// volume of the full N-ball of radius sigma
inline double ball_volume(int N, double sigma) {
    switch (N) {
        case 1: return 2.0 * sigma;
        case 2: return M_PI * sigma * sigma;
        case 3: return 4.0 / 3.0 * M_PI * sigma * sigma * sigma;
        default: throw ConfigError("unsupported dimension " + std::to_string(N));
    }
}

inline double critical_exponent(int N) { return 1.0 + 1.0 / N; }

}  // namespace halfheat
