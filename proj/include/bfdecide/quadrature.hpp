#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature over interval unions.
//
// Finite pieces are integrated directly. Half-lines are mapped onto [0, 1)
// with x = a + s t / (1 - t), where s is a caller-supplied length scale so the
// mapped integrand is not squeezed against t = 0. Breakpoints split the
// initial panels; callers pass the locations where the integrand peaks or
// jumps (likelihood modes, hypothesis borders, prior support ends).
//
// Refinement always bisects the panel with the largest error estimate and the
// final sum is taken in left-to-right panel order, so results are
// deterministic for a given input.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bfdecide/errors.hpp"
#include "bfdecide/interval.hpp"

namespace bfd {

struct QuadratureOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    // A result whose error estimate exceeds both limits is a NumericalError.
    double fail_abs = 1e-8;
    double fail_rel = 1e-10;
    int max_panels = 6000;
    double tail_scale = 1.0;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
    int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Piece of the integration domain in its own coordinate.
//   kind 0: finite x in [a, b]
//   kind 1: x = origin + scale * t / (1 - t),  t in [a, b] subset of [0, 1)
//   kind 2: x = origin - scale * t / (1 - t),  t in [a, b] subset of [0, 1)
struct Panel {
    int kind = 0;
    double origin = 0.0;
    double scale = 1.0;
    double a = 0.0;
    double b = 0.0;
    double result = 0.0;
    double error = 0.0;
};

template <class F>
double mapped_value(F& f, const Panel& p, double u) {
    double x = u;
    double jac = 1.0;
    if (p.kind != 0) {
        const double om = 1.0 - u;
        const double r = u / om;
        x = p.kind == 1 ? p.origin + p.scale * r : p.origin - p.scale * r;
        jac = p.scale / (om * om);
    }
    if (!std::isfinite(x)) return 0.0;
    if (p.kind == 0 && (x <= p.a || x >= p.b)) {
        // Node rounded onto the panel border (tiny panels next to an integrable pole).
        const double lo = std::nextafter(p.a, p.b), hi = std::nextafter(p.b, p.a);
        if (!(lo <= hi)) return 0.0;
        x = std::clamp(x, lo, hi);
    }
    const double v = f(x);
    if (v == 0.0) return 0.0;
    if (!std::isfinite(v)) throw NumericalError("integrand is not finite at x = " + format_bound(x), kInf);
    return v * jac;
}

template <class F>
void gauss_kronrod(F& f, Panel& p, int& evals) {
    constexpr double epmach = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();
    const double centr = 0.5 * (p.a + p.b);
    const double hlgth = 0.5 * (p.b - p.a);
    const double dhlgth = std::abs(hlgth);

    std::array<double, 7> fv1{}, fv2{};
    const double fc = mapped_value(f, p, centr);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double absc = hlgth * kXgk[jtw];
        const double f1 = mapped_value(f, p, centr - absc);
        const double f2 = mapped_value(f, p, centr + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += kWg[j] * (f1 + f2);
        resk += kWgk[jtw] * (f1 + f2);
        resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double absc = hlgth * kXgk[jtwm1];
        const double f1 = mapped_value(f, p, centr - absc);
        const double f2 = mapped_value(f, p, centr + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += kWgk[jtwm1] * (f1 + f2);
        resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }
    evals += 15;
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    p.result = resk * hlgth;
    resabs *= dhlgth;
    resasc *= dhlgth;
    double abserr = std::abs((resk - resg) * hlgth);
    if (resasc != 0.0 && abserr != 0.0) abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
    if (resabs > uflow / (50.0 * epmach)) abserr = std::max(epmach * 50.0 * resabs, abserr);
    p.error = abserr;
}

// Initial panels for one interval, split at the breakpoints inside it.
inline void seed_panels(const Interval& iv, std::span<const double> breakpoints, double scale,
                        std::vector<Panel>& out) {
    if (iv.lo >= iv.hi) return;  // points carry no Lebesgue mass
    std::vector<double> cuts;
    for (double b : breakpoints)
        if (std::isfinite(b) && b > iv.lo && b < iv.hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double lo = iv.lo;
    double hi = iv.hi;
    if (!std::isfinite(lo) && !std::isfinite(hi) && cuts.empty()) cuts.push_back(0.0);

    std::vector<double> pts;
    if (std::isfinite(lo)) pts.push_back(lo);
    pts.insert(pts.end(), cuts.begin(), cuts.end());
    if (std::isfinite(hi)) pts.push_back(hi);

    if (!std::isfinite(lo)) out.push_back(Panel{2, pts.front(), scale, 0.0, 1.0});
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back(Panel{0, 0.0, 1.0, pts[i], pts[i + 1]});
    if (!std::isfinite(hi)) out.push_back(Panel{1, pts.back(), scale, 0.0, 1.0});
}

} // namespace detail

template <class F>
QuadratureResult integrate(F&& f, const IntervalUnion& domain, std::span<const double> breakpoints = {},
                           const QuadratureOptions& opt = {}) {
    QuadratureResult res;
    std::vector<detail::Panel> panels;
    const double scale = opt.tail_scale > 0.0 && std::isfinite(opt.tail_scale) ? opt.tail_scale : 1.0;
    for (const auto& iv : domain.intervals()) detail::seed_panels(iv, breakpoints, scale, panels);
    if (panels.empty()) return res;

    for (auto& p : panels) detail::gauss_kronrod(f, p, res.evaluations);

    auto totals = [&panels] {
        double v = 0.0, e = 0.0;
        for (const auto& p : panels) {
            v += p.result;
            e += p.error;
        }
        return std::pair{v, e};
    };

    auto [value, error] = totals();
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) &&
           static_cast<int>(panels.size()) < opt.max_panels) {
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const auto& x, const auto& y) { return x.error < y.error; });
        const double mid = 0.5 * (worst->a + worst->b);
        if (!(mid > worst->a && mid < worst->b)) break;  // cannot subdivide further
        detail::Panel right = *worst;
        worst->b = mid;
        right.a = mid;
        detail::gauss_kronrod(f, *worst, res.evaluations);
        detail::gauss_kronrod(f, right, res.evaluations);
        panels.push_back(right);
        std::tie(value, error) = totals();
    }

    std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) {
        if (x.kind != y.kind) return x.kind < y.kind;
        if (x.origin != y.origin) return x.origin < y.origin;
        return x.a < y.a;
    });
    std::tie(res.value, res.error) = totals();
    res.panels = static_cast<int>(panels.size());
    if (res.error > opt.fail_abs && res.error > opt.fail_rel * std::abs(res.value))
        throw NumericalError("adaptive quadrature did not converge", res.error);
    return res;
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b, std::span<const double> breakpoints = {},
                           const QuadratureOptions& opt = {}) {
    if (!(a <= b)) throw DomainError("integration bounds must satisfy a <= b");
    return integrate(std::forward<F>(f), IntervalUnion{Interval::closed(a, b)}, breakpoints, opt);
}

} // namespace bfd
