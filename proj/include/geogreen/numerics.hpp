#pragma once

// Double-precision analytic toolbox: complex log-gamma, completed gamma
// factors, incomplete gamma / Bessel / exponential-integral wrappers,
// Hurwitz zeta with complex exponent, Dirichlet L for real characters,
// compensated summation, and the quadrature rules the transform code uses.

#include <geogreen/rational.hpp>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_expint.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_psi.h>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace geogreen {

using cplx = std::complex<double>;

inline constexpr double PI = 3.141592653589793238462643383279502884;
inline constexpr double TWO_PI = 2.0 * PI;
inline constexpr double EULER_GAMMA = 0.577215664901532860606512090082402431;

// GSL must not abort the process on domain errors; wrappers check codes.
inline void disable_gsl_abort() {
    static bool done = [] { gsl_set_error_handler_off(); return true; }();
    (void)done;
}

inline cplx e2pi(double x) {
    double t = TWO_PI * x;
    return {std::cos(t), std::sin(t)};
}

// e(r) for exact rational r; reduces mod 1 first so huge numerators stay exact.
inline cplx e2pi(const Rat& r);

// ---------------------------------------------------------------------------
// Compensated summation (Neumaier variant).

class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class KahanSumC {
public:
    void add(const cplx& z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_, im_;
};

// ---------------------------------------------------------------------------
// Gamma family.

// Principal-branch log-gamma, Lanczos approximation (g = 7, 9 terms),
// reflection for Re z < 0.5.  Accurate to ~1e-13 relative over our range.
inline cplx clgamma(cplx z) {
    static const double g = 7.0;
    static const double c[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
        return std::log(PI / std::sin(PI * z)) - clgamma(1.0 - z);
    }
    z -= 1.0;
    cplx x = c[0];
    for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
    cplx t = z + g + 0.5;
    return 0.5 * std::log(TWO_PI) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline cplx cgamma(cplx z) { return std::exp(clgamma(z)); }

// Completed archimedean factors.
inline cplx gamma_R(cplx s) { return std::pow(PI, -s / 2.0) * cgamma(s / 2.0); }
inline cplx gamma_C(cplx s) { return 2.0 * std::pow(TWO_PI, -s) * cgamma(s); }

inline double digamma(double x) {
    disable_gsl_abort();
    gsl_sf_result r;
    if (gsl_sf_psi_e(x, &r) != GSL_SUCCESS)
        throw std::runtime_error("digamma: domain error");
    return r.val;
}

// Upper incomplete gamma Gamma(a, x), unnormalized, any real a, x > 0.
inline double upper_gamma(double a, double x) {
    disable_gsl_abort();
    gsl_sf_result r;
    if (gsl_sf_gamma_inc_e(a, x, &r) != GSL_SUCCESS)
        throw std::runtime_error("upper_gamma: domain error");
    return r.val;
}

inline double expint_E1(double x) {
    disable_gsl_abort();
    gsl_sf_result r;
    if (gsl_sf_expint_E1_e(x, &r) != GSL_SUCCESS)
        throw std::runtime_error("expint_E1: domain error");
    return r.val;
}

inline double bessel_K(double nu, double x) {
    disable_gsl_abort();
    gsl_sf_result r;
    nu = std::abs(nu);
    if (gsl_sf_bessel_Knu_e(nu, x, &r) != GSL_SUCCESS)
        throw std::runtime_error("bessel_K: domain error");
    return r.val;
}

// ---------------------------------------------------------------------------
// Hurwitz zeta with complex exponent, Euler-Maclaurin.  Pole at s = 1.

inline cplx hurwitz_zeta(cplx s, double a) {
    if (a <= 0.0) throw std::runtime_error("hurwitz_zeta: a must be positive");
    if (std::abs(s - 1.0) < 1e-14) throw std::runtime_error("hurwitz_zeta: pole at s = 1");
    static const double bern[12] = {
        1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0,
        -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0,
        -174611.0 / 330.0, 854513.0 / 138.0, -236364091.0 / 2730.0};
    const int K = 12;
    int N = 18 + static_cast<int>(std::abs(s) * 1.3);
    KahanSumC head;
    for (int n = 0; n < N; ++n)
        head.add(std::pow(cplx(n + a, 0.0), -s));
    double M = N + a;
    cplx tail = std::pow(cplx(M, 0.0), 1.0 - s) / (s - 1.0)
              + 0.5 * std::pow(cplx(M, 0.0), -s);
    cplx poch = s;                        // (s)_{2k-1} built incrementally
    double fact = 2.0;                    // (2k)!
    cplx mpow = std::pow(cplx(M, 0.0), -s - 1.0);
    cplx corr = 0.0;
    for (int k = 1; k <= K; ++k) {
        corr += bern[k - 1] / fact * poch * mpow;
        // advance: (s)_{2k+1} = (s)_{2k-1} (s+2k-1)(s+2k), (2k+2)!
        poch *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
        mpow /= M * M;
    }
    return head.value() + tail + corr;
}

inline cplx riemann_zeta(cplx s) { return hurwitz_zeta(s, 1.0); }

// L(s, chi_D) for the real character chi_D = kronecker(D, .) of modulus |D|.
// Valid away from s = 1 by character-sum cancellation of the zeta poles,
// which we realize by pairing residues against the mean.
inline cplx dirichlet_L_kronecker(i128 D, cplx s) {
    i128 q = abs128(D);
    if (q == 1) return riemann_zeta(s);
    double qd = static_cast<double>(q);
    KahanSumC acc;
    // sum chi(r) zeta(s, r/q); chi is non-principal so sum chi(r) = 0 and the
    // pole terms cancel exactly.  Compute zeta(s, r/q) - pole and add pole
    // back times (sum chi) = 0: equivalently just sum the regular parts.
    for (i128 r = 1; r <= q; ++r) {
        int ch = kronecker(D, r);
        if (ch == 0) continue;
        cplx z;
        if (std::abs(s - 1.0) < 1e-12) {
            // At s = 1 use the finite part: lim (zeta(s,a) - 1/(s-1)) = -psi(a).
            z = -digamma(static_cast<double>(r) / qd);
        } else {
            z = hurwitz_zeta(s, static_cast<double>(r) / qd);
        }
        acc.add(static_cast<double>(ch) * z);
    }
    return std::pow(cplx(qd, 0.0), -s) * acc.value();
}

// ---------------------------------------------------------------------------
// Quadrature.

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by
// Newton iteration on the Legendre recurrence.
struct GaussLegendre {
    std::vector<double> x, w;
};

inline const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussLegendre gl;
    gl.x.resize(n);
    gl.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        gl.x[i] = x;
        gl.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    auto [pos, ok] = cache.emplace(n, std::move(gl));
    (void)ok;
    return pos->second;
}

// Fixed-order Gauss-Legendre on [a, b].
template <typename F>
auto integrate_gl(F&& f, double a, double b, int order = 32) {
    const auto& gl = gauss_legendre(order);
    using R = decltype(f(a));
    R acc{};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i)
        acc += gl.w[i] * f(mid + half * gl.x[i]);
    return half * acc;
}

// Composite Gauss-Legendre with npanels equal panels.
template <typename F>
auto integrate_gl_panels(F&& f, double a, double b, int npanels, int order = 16) {
    using R = decltype(f(a));
    R acc{};
    double h = (b - a) / npanels;
    for (int p = 0; p < npanels; ++p)
        acc += integrate_gl(f, a + p * h, a + (p + 1) * h, order);
    return acc;
}

namespace detail {
template <typename F, typename R>
R adaptive_simpson_rec(F& f, double a, double b, R fa, R fm, R fb, R whole,
                       double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    R flm = f(lm), frm = f(rm);
    R left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    R right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    R delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
         + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
} // namespace detail

template <typename F>
auto adaptive_simpson(F&& f, double a, double b, double tol = 1e-10, int depth = 24) {
    using R = decltype(f(a));
    R fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    R whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Mean-value rule for smooth periodic integrands (spectral accuracy).
template <typename F>
auto integrate_periodic(F&& f, double t0, double period, int samples) {
    using R = decltype(f(t0));
    R acc{};
    for (int k = 0; k < samples; ++k)
        acc += f(t0 + period * (k + 0.5) / samples);
    return acc * (period / samples);
}

inline double rel_gap(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-30});
    return std::abs(a - b) / scale;
}

inline double rel_gap(const cplx& a, const cplx& b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-30});
    return std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------

inline cplx e2pi(const Rat& r) {
    Rat m = r.mod1();
    return e2pi(static_cast<double>(m.num()) / static_cast<double>(m.den()));
}

} // namespace geogreen
