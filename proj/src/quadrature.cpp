#include "halfheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "halfheat/types.hpp"

namespace halfheat {

namespace {

// Kronrod-15 abscissae/weights and the embedded Gauss-7 weights (QUADPACK).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double fsum = f(c - x) + f(c + x);
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = resk * h;
    const double diff = (resk - resg) * h;
    p.err = std::pow(200.0 * std::abs(diff), 1.5);
    p.err = std::min(std::abs(diff) * 200.0, std::max(p.err, std::abs(diff)));
    if (!std::isfinite(p.err)) p.err = std::abs(diff);
    return p;
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double rel_tol, double abs_tol,
                              int max_panels) {
    QuadResult res;
    if (a >= b) return res;
    std::priority_queue<Panel> heap;
    heap.push(gk15(f, a, b));
    double total = heap.top().value;
    double total_err = heap.top().err;
    int n = 1;
    while (n < max_panels) {
        const double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (total_err <= tol) break;
        Panel worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b) {
            heap.push(worst);  // interval exhausted at double precision
            break;
        }
        Panel left = gk15(f, worst.a, m);
        Panel right = gk15(f, m, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    res.value = total;
    res.abs_err = std::max(total_err, 0.0);
    res.converged =
        res.abs_err <= std::max(abs_tol, rel_tol * std::abs(total)) * 4.0;
    return res;
}

double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double abs_tol,
                          int max_panels) {
    QuadResult r = integrate_adaptive(f, a, b, rel_tol, abs_tol, max_panels);
    if (!r.converged)
        throw AccuracyError("quadrature did not converge on [" +
                                std::to_string(a) + "," + std::to_string(b) + "]",
                            r.abs_err);
    return r.value;
}

}  // namespace halfheat
