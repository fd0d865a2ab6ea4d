#pragma once
// Vector-valued real-analytic Eisenstein series on the Weil representation of
// an even lattice.  The module provides:
//
//   * the absolutely convergent coset sum over Gamma_infinity \ SL2(Z) with a
//     rigorous truncation-tail estimate (eval_eisenstein),
//   * numerically sampled Fourier modes at a fixed height (fourier_coeffs),
//   * a coefficient engine that continues every Fourier coefficient into the
//     central strip.  Each coefficient is a Dirichlet series in the cusp
//     width whose exact finite Gauss-vector sums are computed once per
//     lattice; convolving against the real character attached to the lattice
//     discriminant collapses the series to a finite head plus an
//     "n times periodic" tail that is summed in closed form through Hurwitz
//     zeta values.  The collapse is validated numerically on a held-out
//     window and failures are reported, never patched (EisEngine),
//   * functional-equation and weight-lowering residuals of the continued
//     series (completed_fe_residual, lowering_residual),
//   * numerical s-derivatives with Richardson control (derivative_in_s),
//   * the table of large-height limits of the s-derivative's Fourier
//     coefficients together with the holomorphic expansion they assemble
//     into (kappa_table), and
//   * the geodesic-average comparison of a class theta function against the
//     central Eisenstein value, fitted through one global constant
//     (siegel_weil_residual).

#include <geogreen/theta.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace geogreen {

// ---------------------------------------------------------------------------
// Options.

// Parity of the archimedean factor used to complete the Dirichlet L-function
// of the lattice character in the functional equation.
enum class CompletionParity { even_gamma, odd_gamma };

struct EisOptions {
    int trunc_c = 2000;        // depth of the exact Gauss-vector sweep
    int mode_envelope = 12;    // stored modes cover |m| <= mode_envelope
    double collapse_tol = 2e-9;  // acceptance threshold for tail patterns
    CompletionParity completion = CompletionParity::even_gamma;
};

// ---------------------------------------------------------------------------
// Confluent second-kind hypergeometric function U(a, b, z) for real
// parameters and z > 0.  Positive a uses the Laplace integral on an
// exponential grid (trapezoid sums converge geometrically in the step);
// a <= 0 is reached by the three-term contiguous recurrence in a.

namespace eisdetail {

inline double hyperg_U_pos(double a, double b, double z) {
    if (!(a > 0.0) || !(z > 0.0))
        throw validation_error("hyperg_U_pos: needs a > 0 and z > 0");
    const double p = b - a - 1.0;
    // Integrand exp(-z e^xi + a xi + p log(1+e^xi)); locate the support.
    auto log_f = [&](double xi) {
        const double e = std::exp(xi);
        const double l1p = (xi > 30.0) ? xi : std::log1p(e);
        return -z * e + a * xi + p * l1p;
    };
    double lo = -(46.0 / a) - 4.0;
    double hi = std::max(2.0, std::log(90.0 / z));
    while (log_f(hi) > -48.0) hi += 0.5;
    double prev = 0.0, val = 0.0;
    double h = 0.5;
    for (int pass = 0; pass < 8; ++pass) {
        KahanSum acc;
        const long long steps = static_cast<long long>(std::ceil((hi - lo) / h));
        for (long long j = 0; j <= steps; ++j) {
            const double lf = log_f(lo + h * static_cast<double>(j));
            if (lf > -746.0) acc.add(std::exp(lf));
        }
        val = h * acc.value();
        if (pass > 0 && std::abs(val - prev) <= 1e-13 * std::abs(val)) break;
        prev = val;
        h *= 0.5;
    }
    return val / std::tgamma(a);
}

inline double hyperg_U(double a, double b, double z) {
    if (a > 1e-14) return hyperg_U_pos(a, b, z);
    if (std::abs(a) <= 1e-14) return 1.0;  // U(0, b, z) = 1
    // Shift a into (0, 1] and recurse down:
    // U(x-1, b, z) = (z + 2x - b) U(x, b, z) - x (x - b + 1) U(x+1, b, z).
    const int k = static_cast<int>(std::ceil(-a - 1e-14));
    const double a0 = a + static_cast<double>(k);  // in (0, 1] up to roundoff
    double u1 = (a0 > 1e-14) ? hyperg_U_pos(a0, b, z) : 1.0;
    double u2 = hyperg_U_pos(a0 + 1.0, b, z);
    for (int j = 0; j < k; ++j) {
        const double x = a0 - static_cast<double>(j);
        const double u0 = (z + 2.0 * x - b) * u1 - x * (x - b + 1.0) * u2;
        u2 = u1;
        u1 = u0;
    }
    return u1;
}

}  // namespace eisdetail

// ---------------------------------------------------------------------------
// Archimedean factor of a Fourier coefficient: the line integral
//
//   J(s, l, w) = \int_R (t+i)^{-(s+1+l)/2} (t-i)^{-(s+1-l)/2} e^{-2 pi i w t} dt
//
// in closed form through U.  The returned value carries its natural decay
// e^{-2 pi |w|}; no exponential is split off, so it never overflows.

inline cplx arch_factor(double s, int l, double w) {
    const double alpha = 0.5 * (s + 1.0 + l);
    const double beta = 0.5 * (s + 1.0 - l);
    // exp(-i pi l / 2) for integer weight.
    static const cplx phase_table[4] = {cplx(1, 0), cplx(0, -1), cplx(-1, 0), cplx(0, 1)};
    const cplx phase = phase_table[((l % 4) + 4) % 4];
    if (w == 0.0) {
        if (std::abs(s) < 1e-12)
            throw accuracy_error("arch_factor: pole of the zero-mode factor at s = 0");
        return phase * PI * std::pow(2.0, 1.0 - s) * std::tgamma(s) /
               (std::tgamma(alpha) * std::tgamma(beta));
    }
    const double x = TWO_PI * std::abs(w);
    const double body = 2.0 * PI * std::pow(x, s) * std::exp(-x);
    if (body == 0.0) return cplx(0.0, 0.0);
    if (w > 0.0) return phase * body * eisdetail::hyperg_U(beta, s + 1.0, 2.0 * x) / std::tgamma(alpha);
    return phase * body * eisdetail::hyperg_U(alpha, s + 1.0, 2.0 * x) / std::tgamma(beta);
}

// ---------------------------------------------------------------------------
// Truncated coset sum.

struct EisensteinEval {
    LatticeModel lattice;
    std::shared_ptr<const DiscriminantGroup> disc;
    int weight = 0;
    cplx s;
    cplx tau;
    CVec value;
    int trunc_C = 0;
    double est_error = 0.0;  // rigorous bound on the dropped tail (sup norm)
};

namespace eisdetail {

// Coset representative with bottom row (c, d), gcd(c, d) = 1.
inline std::array<i64, 4> gamma_for_pair(i64 c, i64 d) {
    i128 x = 0, y = 0;
    const i128 g = xgcd128(c, d, x, y);  // c x + d y = g
    if (g != 1) throw validation_error("gamma_for_pair: bottom row not coprime");
    return {static_cast<i64>(y), static_cast<i64>(-x), c, d};
}

// One slash term of the even-weight-l series at the coset with bottom row
// (c, d); rows are normalized to c > 0 or (0, 1), which is harmless at even
// weight where (c, d) and (-c, -d) give the same term.
inline CVec coset_term(const WeilRep& W, cplx tau, cplx s, int l, i64 c, i64 d) {
    if (l % 2 != 0) throw validation_error("coset_term: weight must be even");
    if (c < 0 || (c == 0 && d < 0)) {
        c = -c;
        d = -d;
    }
    if (c == 0 && d != 1)
        throw validation_error("coset_term: bottom row (0, d) needs d = +-1");
    const double v = tau.imag();
    const cplx ypow = std::pow(cplx(v, 0.0), 0.5 * (s + 1.0 - static_cast<double>(l)));
    const std::size_t n = static_cast<std::size_t>(W.disc->order);
    if (c == 0 && d == 1) {
        CVec t = CVec::Zero(static_cast<Eigen::Index>(n));
        t(0) = ypow;
        return t;
    }
    const std::array<i64, 4> g = gamma_for_pair(c, d);
    const std::array<i64, 4> ginv = {g[3], -g[1], -g[2], g[0]};
    CVec e0 = CVec::Zero(static_cast<Eigen::Index>(n));
    e0(0) = 1.0;
    CVec w = rho_apply(W, ginv, e0);
    const cplx cs = cplx(static_cast<double>(c), 0.0) * tau + cplx(static_cast<double>(d), 0.0);
    const double m2 = std::norm(cs);
    cplx f = ypow * std::exp(-(s + 1.0 - static_cast<double>(l)) * 0.5 * std::log(m2));
    for (int j = 0; j < l; ++j) f /= cs;
    for (int j = 0; j < -l; ++j) f *= cs;
    return f * w;
}

// Tail of sum_{(c,d) outside the box |c|,|d| <= C} |c tau + d|^{-(sigma+1)},
// valid for sigma > 1, with cosets counted as c >= 1, d in Z plus (0, 1).
inline double box_tail_bound(cplx tau, double sigma, int l, i64 C) {
    if (C < 1) return std::numeric_limits<double>::infinity();
    const double u = tau.real(), v = tau.imag();
    const double Cr = static_cast<double>(C);
    const double Bs = std::sqrt(PI) * std::tgamma(0.5 * sigma) / std::tgamma(0.5 * (sigma + 1.0));
    auto ztail = [&](double x) { return std::pow(Cr, 1.0 - x) / (x - 1.0) + std::pow(Cr, -x); };
    // Rows with c > C: full sum over d.
    double tail = std::pow(v, -(sigma + 1.0)) * ztail(sigma + 1.0) +
                  Bs * std::pow(v, -sigma) * ztail(sigma);
    // Rows with 1 <= c <= C, |d| > C.
    for (i64 c = 1; c <= C; ++c) {
        const double cv = static_cast<double>(c) * v;
        const double W = Cr - static_cast<double>(c) * std::abs(u);
        if (W > 1.0) {
            tail += 2.0 * (std::pow(W, -sigma) / sigma + std::pow(W, -(sigma + 1.0)));
        } else {
            tail += std::pow(cv, -(sigma + 1.0)) + Bs * std::pow(cv, -sigma);
        }
    }
    return std::pow(v, 0.5 * (sigma + 1.0 - static_cast<double>(l))) * tail;
}

}  // namespace eisdetail

// Sum of slash terms over an explicit list of bottom rows.  Exposed so that
// transformation identities can be tested on exactly matched index sets.
inline CVec eval_gamma_terms(const WeilRep& W, cplx tau, cplx s, int l,
                             const std::vector<std::pair<i64, i64>>& rows) {
    const std::size_t n = static_cast<std::size_t>(W.disc->order);
    CVec out = CVec::Zero(static_cast<Eigen::Index>(n));
    for (const auto& [c, d] : rows) out += eisdetail::coset_term(W, tau, s, l, c, d);
    return out;
}

// Weight-l series at the standard cusp: the sum over coset representatives
// with bottom rows (0,1) and (c, d), 1 <= c <= trunc_C, |d| <= trunc_C,
// gcd(c, d) = 1.  Requires Re(s) > 1; the continued region is served by the
// coefficient engine below.
inline EisensteinEval eval_eisenstein(const LatticeModel& L, cplx tau, cplx s, int l,
                                      int trunc_C, const WeilRep* rep = nullptr) {
    if (!(tau.imag() > 0)) throw validation_error("eval_eisenstein: tau must have Im > 0");
    if (!(s.real() > 1.0 + 1e-12))
        throw validation_error(
            "eval_eisenstein: coset sum diverges for Re(s) <= 1; "
            "the continued strip is served by EisEngine");
    std::shared_ptr<const DiscriminantGroup> D;
    std::optional<WeilRep> own;
    if (rep == nullptr) {
        D = std::make_shared<const DiscriminantGroup>(dual_and_discriminant(L));
        own.emplace(weil_from_lattice(L, D));
        rep = &*own;
    } else {
        D = rep->disc;
    }
    EisensteinEval out;
    out.lattice = L;
    out.disc = D;
    out.weight = l;
    out.s = s;
    out.tau = tau;
    out.trunc_C = trunc_C;
    std::vector<std::pair<i64, i64>> rows;
    rows.emplace_back(0, 1);
    for (i64 c = 1; c <= trunc_C; ++c)
        for (i64 d = -trunc_C; d <= trunc_C; ++d)
            if (std::gcd(c, std::abs(d)) == 1) rows.emplace_back(c, d);
    out.value = eval_gamma_terms(*rep, tau, s, l, rows);
    out.est_error = eisdetail::box_tail_bound(tau, s.real(), l, trunc_C);
    return out;
}

// ---------------------------------------------------------------------------
// Sampled Fourier modes at a fixed height.

struct FourierModes {
    std::shared_ptr<const DiscriminantGroup> disc;
    i64 denom = 1;      // modes are m = k / denom
    double v = 0.0;
    cplx s;
    int weight = 0;
    int m_samples = 0;
    int trunc_C = 0;
    std::vector<i64> mode_num;  // signed numerators, aligned with bin columns
    CMat bins;                  // (coset, mode) -> coefficient of e(m u)
    double aliasing_gap = -1.0;

    cplx bin_for(int mu, i64 k) const {
        for (std::size_t j = 0; j < mode_num.size(); ++j)
            if (mode_num[j] == k) return bins(mu, static_cast<Eigen::Index>(j));
        throw validation_error("FourierModes: mode not sampled");
    }
};

// Discrete Fourier analysis in u over one period of the coset functions.
// With M_modes samples the numerators k with |k| <= M_modes/2 are resolved;
// check_alias doubles the sample count and records the worst drift.
inline FourierModes fourier_coeffs(const LatticeModel& L, cplx s, int l, double v,
                                   int M_modes, int trunc_C, bool check_alias = false,
                                   const WeilRep* rep = nullptr) {
    if (M_modes < 2) throw validation_error("fourier_coeffs: need at least two samples");
    std::shared_ptr<const DiscriminantGroup> D;
    std::optional<WeilRep> own;
    if (rep == nullptr) {
        D = std::make_shared<const DiscriminantGroup>(dual_and_discriminant(L));
        own.emplace(weil_from_lattice(L, D));
        rep = &*own;
    } else {
        D = rep->disc;
    }
    const int n = static_cast<int>(D->order);
    const i64 denom = static_cast<i64>(D->level);
    FourierModes out;
    out.disc = D;
    out.denom = denom;
    out.v = v;
    out.s = s;
    out.weight = l;
    out.m_samples = M_modes;
    out.trunc_C = trunc_C;
    CMat samples(n, M_modes);
    for (int j = 0; j < M_modes; ++j) {
        const double u = static_cast<double>(denom) * j / M_modes;
        samples.col(j) = eval_eisenstein(L, cplx(u, v), s, l, trunc_C, rep).value;
    }
    out.bins = CMat::Zero(n, M_modes);
    out.mode_num.resize(static_cast<std::size_t>(M_modes));
    for (int jm = 0; jm < M_modes; ++jm) {
        out.mode_num[static_cast<std::size_t>(jm)] =
            (jm <= M_modes / 2) ? jm : jm - M_modes;
        for (int j = 0; j < M_modes; ++j) {
            const cplx ph = e2pi(-static_cast<double>(jm) * j / M_modes);
            for (int mu = 0; mu < n; ++mu) out.bins(mu, jm) += samples(mu, j) * ph;
        }
    }
    out.bins /= static_cast<double>(M_modes);
    if (check_alias) {
        FourierModes fine = fourier_coeffs(L, s, l, v, 2 * M_modes, trunc_C, false, rep);
        double gap = 0.0;
        for (int mu = 0; mu < n; ++mu)
            for (std::size_t j = 0; j < out.mode_num.size(); ++j)
                gap = std::max(gap, std::abs(out.bins(mu, static_cast<Eigen::Index>(j)) -
                                             fine.bin_for(mu, out.mode_num[j])));
        out.aliasing_gap = gap;
        const double scale = out.bins.cwiseAbs().maxCoeff() + 1e-300;
        if (gap > 1e-3 * scale)
            throw accuracy_error("fourier_coeffs: aliasing check failed; increase M_modes");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coefficient engine: analytic continuation of every Fourier coefficient.

enum class TailPattern { zero, periodic };

// Exact closed form of one coefficient's Dirichlet numerator after
// convolution with the lattice character: a finite head plus, for the zero
// modes, a tail T_n = n * weight(n mod period).
struct CollapsedSeries {
    std::vector<std::pair<i64, cplx>> head;
    TailPattern pattern = TailPattern::zero;
    i64 period = 0;
    std::vector<cplx> tail_weight;  // index r in [0, period): weight of n === r
    i64 head_support = 0;
    double resid = 0.0;  // worst relative misfit on the held-out window
    double scale = 0.0;  // max |T_n| over the sweep
};

namespace eisdetail {

// Hurwitz-zeta sum  sum_r w(r) P^{-s} zeta_H(s, r/P)  for r in [1, P], with
// the mean of w removed analytically so the pole of each term at s = 1
// cancels exactly; a nonzero mean contributes mean * zeta(s).
inline cplx periodic_dirichlet_sum(double s, i64 P, const std::vector<cplx>& w) {
    cplx mean = 0.0;
    for (const cplx& x : w) mean += x;
    mean /= static_cast<double>(P);
    double wscale = 1e-300;
    for (const cplx& x : w) wscale = std::max(wscale, std::abs(x));
    const double Ps = std::pow(static_cast<double>(P), -s);
    cplx acc = 0.0;
    if (std::abs(s - 1.0) < 1e-9) {
        // Exact limit of the mean-free part at the pole.
        for (i64 r = 1; r <= P; ++r) {
            const double a = static_cast<double>(r) / static_cast<double>(P);
            const cplx wr = w[static_cast<std::size_t>(r % P)] - mean;
            acc += wr * (-EULER_GAMMA - digamma(a));
        }
        acc *= Ps;
        if (std::abs(mean) > 1e-8 * wscale)
            throw accuracy_error("periodic_dirichlet_sum: nonzero mean at the pole s = 1");
        return acc;
    }
    for (i64 r = 1; r <= P; ++r) {
        const cplx wr = w[static_cast<std::size_t>(r % P)] - mean;
        if (std::abs(wr) < 1e-300) continue;
        acc += wr * hurwitz_zeta(cplx(s, 0.0), static_cast<double>(r) / static_cast<double>(P));
    }
    acc *= Ps;
    if (std::abs(mean) > 1e-14 * wscale) acc += mean * riemann_zeta(cplx(s, 0.0));
    return acc;
}

// Detect the closed tail of a convolved coefficient sequence T_1..T_N.
inline CollapsedSeries collapse_sequence(const std::vector<cplx>& T, double tol) {
    const i64 N = static_cast<i64>(T.size()) - 1;
    CollapsedSeries out;
    double scale = 0.0;
    for (i64 n = 1; n <= N; ++n) scale = std::max(scale, std::abs(T[static_cast<std::size_t>(n)]));
    out.scale = scale;
    if (scale == 0.0) return out;  // identically zero
    const double drop = 50.0 * tol * scale;
    // Zero tail: all terms beyond the head are negligible.
    i64 n0 = 0;
    for (i64 n = N; n >= 1; --n)
        if (std::abs(T[static_cast<std::size_t>(n)]) > drop) {
            n0 = n;
            break;
        }
    if (n0 <= N / 2) {
        out.pattern = TailPattern::zero;
        out.head_support = n0;
        double resid = 1e-15;
        for (i64 n = n0 + 1; n <= N; ++n)
            resid = std::max(resid, std::abs(T[static_cast<std::size_t>(n)]) / scale);
        out.resid = resid;
        for (i64 n = 1; n <= n0; ++n)
            if (std::abs(T[static_cast<std::size_t>(n)]) > 1e-16 * scale)
                out.head.emplace_back(n, T[static_cast<std::size_t>(n)]);
        return out;
    }
    // Linear-periodic tail T_n = n * w(n mod P): fit on one window, validate
    // on a held-out window, and require the head to die off early.
    const i64 fit_lo = N / 2, fit_hi = (3 * N) / 4;
    double best_resid = std::numeric_limits<double>::infinity();
    for (i64 P = 1; P <= N / 8; ++P) {
        std::vector<cplx> w(static_cast<std::size_t>(P), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(P), 0);
        for (i64 n = fit_lo; n <= fit_hi; ++n) {
            const std::size_t r = static_cast<std::size_t>(n % P);
            w[r] += T[static_cast<std::size_t>(n)] / static_cast<double>(n);
            ++cnt[r];
        }
        bool full = true;
        for (i64 r = 0; r < P; ++r) {
            if (cnt[static_cast<std::size_t>(r)] == 0) {
                full = false;
                break;
            }
            w[static_cast<std::size_t>(r)] /= static_cast<double>(cnt[static_cast<std::size_t>(r)]);
        }
        if (!full) break;
        double vscale = 1e-300, resid = 0.0;
        for (i64 n = fit_hi + 1; n <= N; ++n)
            vscale = std::max(vscale, std::abs(T[static_cast<std::size_t>(n)]));
        for (i64 n = fit_hi + 1; n <= N; ++n) {
            const cplx fitv = static_cast<double>(n) * w[static_cast<std::size_t>(n % P)];
            resid = std::max(resid, std::abs(T[static_cast<std::size_t>(n)] - fitv) / vscale);
        }
        best_resid = std::min(best_resid, resid);
        if (resid >= 100.0 * tol) continue;
        // Head: what remains after subtracting the tail everywhere.
        std::vector<cplx> head(static_cast<std::size_t>(N + 1), 0.0);
        i64 support = 0;
        for (i64 n = 1; n <= N; ++n) {
            head[static_cast<std::size_t>(n)] =
                T[static_cast<std::size_t>(n)] -
                static_cast<double>(n) * w[static_cast<std::size_t>(n % P)];
            if (std::abs(head[static_cast<std::size_t>(n)]) > drop) support = n;
        }
        if (support > N / 4) continue;  // pattern starts too late to trust
        out.pattern = TailPattern::periodic;
        out.period = P;
        out.tail_weight = std::move(w);
        out.head_support = support;
        out.resid = std::max(resid, 1e-15);
        for (i64 n = 1; n <= support; ++n)
            if (std::abs(head[static_cast<std::size_t>(n)]) > 1e-16 * scale)
                out.head.emplace_back(n, head[static_cast<std::size_t>(n)]);
        return out;
    }
    std::ostringstream msg;
    msg << "collapse_sequence: no closed tail pattern within depth " << N
        << " (best held-out residual " << best_resid << ")";
    throw accuracy_error(msg.str());
}

}  // namespace eisdetail

// Continuation engine for one even lattice of signature (1,1).  Construction
// runs the exact coset sweep and the collapse; afterwards every coefficient
// and every value in the strip is a closed-form evaluation.
class EisEngine {
  public:
    explicit EisEngine(const LatticeModel& L, EisOptions opt = {}) : L_(L), opt_(opt) {
        build_();
    }

    const LatticeModel& lattice() const { return L_; }
    const DiscriminantGroup& disc() const { return *D_; }
    std::shared_ptr<const DiscriminantGroup> disc_ptr() const { return D_; }
    const WeilRep& weil() const { return W_; }
    const EisOptions& options() const { return opt_; }
    i64 denom() const { return denom_; }
    i128 char_disc() const { return charD_; }
    double worst_collapse_residual() const { return worst_resid_; }

    bool pair_valid(int mu, i64 k) const {
        return pair_slot_.count({mu, k}) != 0;
    }
    const std::vector<std::pair<int, i64>>& pairs() const { return pairs_; }
    const CollapsedSeries& series(int mu, i64 k) const {
        return collapsed_[static_cast<std::size_t>(slot_(mu, k))];
    }

    // D(s; mu, m): the coefficient's Dirichlet factor, continued to real s.
    cplx dirichlet_value(int mu, i64 k, double s) const {
        const int slot = slot_(mu, k);
        std::vector<cplx>& cache = dcache_[key_bits_(s)];
        if (cache.empty())
            cache.assign(pairs_.size(), cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
        cplx& c = cache[static_cast<std::size_t>(slot)];
        if (std::isnan(c.real())) c = dirichlet_value_(slot, s);
        return c;
    }

    // Coefficient of e(m u) at height v (m = k/denom): the absolutely
    // normalized Fourier coefficient, safe for all stored modes.
    cplx coefficient(int mu, i64 k, double s, int l, double v) const {
        if (l % 2 != 0) throw validation_error("EisEngine: weight must be even");
        const double m = static_cast<double>(k) / static_cast<double>(denom_);
        cplx c = 0.0;
        if (mu == 0 && k == 0) c += std::pow(v, 0.5 * (s + 1.0 - static_cast<double>(l)));
        const cplx Dv = dirichlet_value(mu, k, s);
        if (Dv != cplx(0.0, 0.0)) {
            const cplx J = arch_factor(s, l, m * v);
            c += std::pow(v, 0.5 * (1.0 - s - static_cast<double>(l))) * Dv * J;
        }
        return c;
    }

    // Coefficient of e(m tau): the e(mu)-coefficient rescaled by e^{2 pi m v}.
    cplx coefficient_rel(int mu, i64 k, double s, int l, double v) const {
        const double m = static_cast<double>(k) / static_cast<double>(denom_);
        const double ex = TWO_PI * m * v;
        if (ex > 600.0)
            throw validation_error("coefficient_rel: e(m tau) normalization overflows at this height");
        return coefficient(mu, k, s, l, v) * std::exp(ex);
    }

    // Value of the continued series.  Near the central point the zero-mode
    // archimedean factor has a pole of the gamma function; the value there is
    // the symmetric limit, computed by two-sided averaging with Richardson
    // extrapolation in the offset.
    CVec value(cplx tau, double s, int l) const {
        if (std::abs(s) >= 1e-6) return value_raw(tau, s, l);
        const double eps = 1e-3;
        const CVec a1 = 0.5 * (value_raw(tau, s + eps, l) + value_raw(tau, s - eps, l));
        const CVec a2 = 0.5 * (value_raw(tau, s + eps / 2, l) + value_raw(tau, s - eps / 2, l));
        return (4.0 * a2 - a1) / 3.0;
    }

    CVec value_raw(cplx tau, double s, int l) const {
        return assemble_(tau, s, l, false);
    }

    // Exact partial derivative in u of value_raw (each mode picks up 2 pi i m).
    CVec du_value(cplx tau, double s, int l) const {
        return assemble_(tau, s, l, true);
    }

    int negative_coset(int mu) const { return neg_index_[static_cast<std::size_t>(mu)]; }

  private:
    LatticeModel L_;
    EisOptions opt_;
    std::shared_ptr<const DiscriminantGroup> D_;
    WeilRep W_;
    int n_ = 0;
    i64 denom_ = 1;
    i128 charD_ = 1;
    std::vector<i64> kq_;  // denom * q(mu) mod denom
    std::vector<int> neg_index_;
    std::vector<std::pair<int, i64>> pairs_;
    std::map<std::pair<int, i64>, int> pair_slot_;
    std::vector<CollapsedSeries> collapsed_;
    double worst_resid_ = 0.0;
    mutable std::map<std::uint64_t, std::vector<cplx>> dcache_;

    static std::uint64_t key_bits_(double s) {
        std::uint64_t b;
        std::memcpy(&b, &s, sizeof(b));
        return b;
    }

    int slot_(int mu, i64 k) const {
        auto it = pair_slot_.find({mu, k});
        if (it == pair_slot_.end())
            throw validation_error("EisEngine: mode outside the stored envelope");
        return it->second;
    }

    void build_() {
        if (L_.ambient.rank != 2)
            throw validation_error("EisEngine: continuation engine expects a rank-2 lattice");
        D_ = std::make_shared<const DiscriminantGroup>(dual_and_discriminant(L_));
        W_ = weil_from_lattice(L_, D_);
        n_ = static_cast<int>(D_->order);
        denom_ = static_cast<i64>(D_->level);

        // Real character of the lattice: kronecker symbol of the fundamental
        // discriminant carried by -det of the even Gram matrix.
        const IMat& S = D_->scaled_gram;
        i128 dd = checked_sub(checked_mul(S(0, 0), S(1, 1)), checked_mul(S(0, 1), S(1, 0)));
        dd = -dd;
        if (dd <= 0)
            throw validation_error("EisEngine: expected an indefinite rank-2 lattice");
        i128 d0 = dd;
        for (i128 p = 2; p * p <= d0; ++p)
            while (d0 % (p * p) == 0) d0 /= p * p;
        charD_ = (mod128(d0, 4) == 1) ? d0 : 4 * d0;

        kq_.resize(static_cast<std::size_t>(n_));
        neg_index_.resize(static_cast<std::size_t>(n_));
        for (int mu = 0; mu < n_; ++mu) {
            const Rat qn = D_->q_values[static_cast<std::size_t>(mu)] * Rat(i128{denom_});
            if (qn.den() != 1)
                throw accuracy_error("EisEngine: level does not clear the coset norms");
            kq_[static_cast<std::size_t>(mu)] =
                static_cast<i64>(mod128(qn.num(), i128{denom_}));
            std::vector<Rat> neg = D_->coset_reps[static_cast<std::size_t>(mu)];
            for (Rat& x : neg) x = (Rat(0) - x).mod1();
            neg_index_[static_cast<std::size_t>(mu)] = D_->index_of(neg);
        }

        // Stored modes: k === denom q(mu) (mod denom), |k| <= envelope*denom.
        const i64 kmax = static_cast<i64>(opt_.mode_envelope) * denom_;
        for (int mu = 0; mu < n_; ++mu) {
            for (i64 k = kq_[static_cast<std::size_t>(mu)] - (kmax / denom_ + 1) * denom_;
                 k <= kmax; k += denom_) {
                if (k < -kmax) continue;
                pair_slot_[{mu, k}] = static_cast<int>(pairs_.size());
                pairs_.emplace_back(mu, k);
            }
        }

        sweep_and_collapse_();
    }

    void sweep_and_collapse_() {
        const i64 cmax = opt_.trunc_c;
        const std::size_t np = pairs_.size();
        std::vector<std::vector<cplx>> SC(np, std::vector<cplx>(static_cast<std::size_t>(cmax) + 1, 0.0));

        // Per-coset lists of (k, slot) and exact root tables.
        std::vector<std::vector<std::pair<i64, int>>> by_coset(static_cast<std::size_t>(n_));
        for (std::size_t sl = 0; sl < np; ++sl)
            by_coset[static_cast<std::size_t>(pairs_[sl].first)].emplace_back(pairs_[sl].second,
                                                                              static_cast<int>(sl));
        std::vector<cplx> omega_q(static_cast<std::size_t>(denom_));
        for (i64 j = 0; j < denom_; ++j) omega_q[static_cast<std::size_t>(j)] = e2pi(Rat(j, denom_));

        const CMat& rhoS = W_.rhoS;
        CVec w(n_), tmp(n_);
        std::vector<cplx> omega_c;
        for (i64 c = 1; c <= cmax; ++c) {
            const i64 Np = c * denom_;
            omega_c.resize(static_cast<std::size_t>(Np));
            // Incremental roots of unity with periodic exact resync.
            const cplx step = e2pi(1.0 / static_cast<double>(Np));
            cplx cur(1.0, 0.0);
            for (i64 j = 0; j < Np; ++j) {
                if ((j & 255) == 0) cur = e2pi(static_cast<double>(j) / static_cast<double>(Np));
                omega_c[static_cast<std::size_t>(j)] = cur;
                cur *= step;
            }
            for (i64 d0 = 0; d0 < c; ++d0) {
                if (std::gcd(c, d0) != 1) continue;
                i128 x = 0, y = 0;
                xgcd128(c, d0, x, y);  // c x + d0 y = 1
                const std::array<i64, 4> ginv = {d0, static_cast<i64>(x), -c,
                                                 static_cast<i64>(y)};
                const auto word = sl2_word(ginv);
                // rho(word) e0 with exact T-phases from the level-order table.
                w.setZero();
                w(0) = 1.0;
                for (auto it = word.rbegin(); it != word.rend(); ++it) {
                    const auto [op, kk] = *it;
                    if (op == 'T') {
                        const i64 km = ((kk % denom_) + denom_) % denom_;
                        if (km == 0) continue;
                        for (int i = 0; i < n_; ++i) {
                            const i64 j = (km * kq_[static_cast<std::size_t>(i)]) % denom_;
                            w(i) *= omega_q[static_cast<std::size_t>(j)];
                        }
                    } else {
                        tmp.noalias() = rhoS * w;
                        w.swap(tmp);
                    }
                }
                for (int mu = 0; mu < n_; ++mu) {
                    const cplx wi = w(mu);
                    if (std::abs(wi) < 1e-18) continue;
                    for (const auto& [k, sl] : by_coset[static_cast<std::size_t>(mu)]) {
                        i64 j = ((k % Np) * d0) % Np;
                        if (j < 0) j += Np;
                        SC[static_cast<std::size_t>(sl)][static_cast<std::size_t>(c)] +=
                            wi * omega_c[static_cast<std::size_t>(j)];
                    }
                }
            }
        }

        // Character values for the convolution.
        std::vector<int> eta(static_cast<std::size_t>(cmax) + 1, 0);
        for (i64 b = 1; b <= cmax; ++b) eta[static_cast<std::size_t>(b)] = kronecker(charD_, b);

        collapsed_.resize(np);
        std::vector<cplx> T(static_cast<std::size_t>(cmax) + 1);
        for (std::size_t sl = 0; sl < np; ++sl) {
            std::fill(T.begin(), T.end(), cplx(0.0, 0.0));
            for (i64 c = 1; c <= cmax; ++c) {
                const cplx sc = SC[sl][static_cast<std::size_t>(c)];
                if (std::abs(sc) < 1e-300) continue;
                for (i64 b = 1; c * b <= cmax; ++b) {
                    const int ch = eta[static_cast<std::size_t>(b)];
                    if (ch != 0)
                        T[static_cast<std::size_t>(c * b)] += sc * static_cast<double>(ch);
                }
            }
            try {
                collapsed_[sl] = eisdetail::collapse_sequence(T, opt_.collapse_tol);
            } catch (const accuracy_error& e) {
                std::ostringstream msg;
                msg << e.what() << " [coset " << pairs_[sl].first << ", mode " << pairs_[sl].second
                    << "/" << denom_ << "]";
                throw accuracy_error(msg.str());
            }
            worst_resid_ = std::max(worst_resid_, collapsed_[sl].resid);
        }
    }

    cplx dirichlet_value_(int slot, double s) const {
        const CollapsedSeries& C = collapsed_[static_cast<std::size_t>(slot)];
        cplx num = 0.0;
        for (const auto& [n, t] : C.head) num += t * std::pow(static_cast<double>(n), -(s + 1.0));
        if (C.pattern == TailPattern::periodic)
            num += eisdetail::periodic_dirichlet_sum(s, C.period, C.tail_weight);
        if (num == cplx(0.0, 0.0)) return num;
        // Divide by L(s+1, chi).  A trivial character makes the denominator
        // zeta(s+1), whose pole at s = 0 is handled by the callers' symmetric
        // averaging; refuse the exact pole.
        if (charD_ == 1 && std::abs(s) < 1e-12)
            throw accuracy_error("EisEngine: denominator zeta(s+1) has a pole at s = 0");
        const cplx Lden = dirichlet_L_kronecker(charD_, cplx(s + 1.0, 0.0));
        return num / Lden;
    }

    CVec assemble_(cplx tau, double s, int l, bool d_du) const {
        const double u = tau.real(), v = tau.imag();
        if (!(v > 0)) throw validation_error("EisEngine: tau must have Im > 0");
        const int need = static_cast<int>(std::ceil((36.0 + std::log1p(static_cast<double>(n_))) /
                                                    (TWO_PI * v)));
        const int mcut = std::min(opt_.mode_envelope, std::max(1, need));
        if (need > opt_.mode_envelope)
            throw validation_error("EisEngine: height too low for the stored mode envelope");
        CVec out = CVec::Zero(n_);
        for (const auto& [mu, k] : pairs_) {
            if (std::abs(k) > static_cast<i64>(mcut) * denom_) continue;
            const double m = static_cast<double>(k) / static_cast<double>(denom_);
            cplx c = coefficient(mu, k, s, l, v);
            if (d_du) c *= cplx(0.0, TWO_PI * m);
            out(mu) += c * e2pi(m * u);
        }
        return out;
    }
};

// Shared engines keyed by the lattice's even Gram data and the options.
inline std::string lattice_signature_key(const LatticeModel& L) {
    const DiscriminantGroup D = dual_and_discriminant(L);
    std::ostringstream os;
    os << "rk" << L.ambient.rank << "|sg";
    for (std::size_t i = 0; i < D.scaled_gram.rows(); ++i)
        for (std::size_t j = 0; j < D.scaled_gram.cols(); ++j)
            os << to_string_i128(D.scaled_gram(i, j)) << (j + 1 < D.scaled_gram.cols() ? "," : ";");
    os << "|lvl" << to_string_i128(D.level);
    return os.str();
}

inline const EisEngine& eis_engine_for(const LatticeModel& L, EisOptions opt = {}) {
    static std::map<std::string, std::unique_ptr<EisEngine>> cache;
    std::ostringstream key;
    key << lattice_signature_key(L) << "|c" << opt.trunc_c << "|e" << opt.mode_envelope << "|t"
        << opt.collapse_tol;
    auto it = cache.find(key.str());
    if (it == cache.end())
        it = cache.emplace(key.str(), std::make_unique<EisEngine>(L, opt)).first;
    return *it->second;
}

// ---------------------------------------------------------------------------
// Completed functional equation of the weight-0 series.

// Lambda(x, chi_D) = |D|^{x/2} Gamma_R(x + delta) L(x, chi_D) with delta the
// configured archimedean parity shift.
inline cplx completed_dirichlet_L(i128 Dchar, double x,
                                  CompletionParity par = CompletionParity::even_gamma) {
    const double ad = static_cast<double>(Dchar < 0 ? -Dchar : Dchar);
    const double shift = (par == CompletionParity::odd_gamma) ? 1.0 : 0.0;
    return std::pow(ad, 0.5 * x) * gamma_R(cplx(x + shift, 0.0)) *
           dirichlet_L_kronecker(Dchar, cplx(x, 0.0));
}

// Relative sup-norm residual of Lambda(s+1) E(tau, s; 0) = Lambda(1-s) E(tau, -s; 0).
inline double completed_fe_residual(const LatticeModel& L2, cplx tau, double s,
                                    EisOptions opt = {}) {
    if (!(std::abs(s) < 1.0 - 1e-9))
        throw validation_error("completed_fe_residual: s must lie in the open strip |s| < 1");
    const EisEngine& eng = eis_engine_for(L2, opt);
    if (eng.char_disc() == 1)
        throw validation_error("completed_fe_residual: needs a nontrivial lattice character");
    const CVec lhs = completed_dirichlet_L(eng.char_disc(), 1.0 + s, opt.completion) *
                     eng.value(tau, s, 0);
    const CVec rhs = completed_dirichlet_L(eng.char_disc(), 1.0 - s, opt.completion) *
                     eng.value(tau, -s, 0);
    const double scale = std::max(lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff());
    if (scale == 0.0) return 0.0;
    return (lhs - rhs).cwiseAbs().maxCoeff() / scale;
}

// ---------------------------------------------------------------------------
// s-derivatives with Richardson control.

// Central difference at steps h and h/2 combined to fourth order; the error
// estimate is the gap between the two levels.
template <typename Fn>
inline std::pair<CVec, double> richardson_derivative(Fn&& f, double s0, double h) {
    const CVec d1 = (f(s0 + h) - f(s0 - h)) / (2.0 * h);
    const CVec d2 = (f(s0 + h / 2) - f(s0 - h / 2)) / h;
    const CVec r = (4.0 * d2 - d1) / 3.0;
    const double err = (d2 - d1).cwiseAbs().maxCoeff() / 3.0;
    return {r, err};
}

// Multiplying the series by Lambda(1+s)/Lambda(1) makes its functional
// equation even in s without changing the central value, so the central
// s-derivative is taken on this symmetric family.  (For a trivial character
// the factor has a pole at s = 0 and no symmetric family exists; such
// lattices are differentiated plainly.)
inline double scattering_normalizer(i128 Dchar, double s, CompletionParity par) {
    const double num = completed_dirichlet_L(Dchar, 1.0 + s, par).real();
    const double den = completed_dirichlet_L(Dchar, 1.0, par).real();
    return num / den;
}

inline std::pair<CVec, double> derivative_in_s(const LatticeModel& L, cplx tau, int l,
                                               double s0, double step, EisOptions opt = {}) {
    const EisEngine& eng = eis_engine_for(L, opt);
    const bool symmetric = eng.char_disc() != 1;
    auto f = [&](double s) -> CVec {
        const double lam =
            symmetric ? scattering_normalizer(eng.char_disc(), s, opt.completion) : 1.0;
        return lam * eng.value_raw(tau, s, l);
    };
    return richardson_derivative(f, s0, step);
}

// ---------------------------------------------------------------------------
// Weight lowering: || L E(tau, s; 2) - (s-1)/2 E(tau, s; 0) ||_inf with
// L = -2 i v^2 d/d(conj tau), evaluated with an exact u-derivative and a
// Richardson-controlled v-derivative.

inline double lowering_residual(const LatticeModel& L2, cplx tau, double s,
                                EisOptions opt = {}) {
    const EisEngine& eng = eis_engine_for(L2, opt);
    const double u = tau.real(), v = tau.imag();
    // The residual vector is analytic in s across the central point (the
    // Dirichlet factor's zero cancels the gamma pole of the zero mode), so at
    // s = 0 it is evaluated as the symmetric two-sided limit.
    auto resid_vec = [&](double ss) -> CVec {
        const CVec du = eng.du_value(tau, ss, 2);
        auto at_v = [&](double vv) { return eng.value_raw(cplx(u, vv), ss, 2); };
        const double d = 1e-3 * v;
        const CVec g1 = (at_v(v + d) - at_v(v - d)) / (2.0 * d);
        const CVec g2 = (at_v(v + d / 2) - at_v(v - d / 2)) / d;
        const CVec dv = (4.0 * g2 - g1) / 3.0;
        const CVec lhs = cplx(0.0, -1.0) * v * v * (du + cplx(0.0, 1.0) * dv);
        const CVec rhs = 0.5 * (ss - 1.0) * eng.value_raw(tau, ss, 0);
        return lhs - rhs;
    };
    CVec r;
    if (std::abs(s) >= 1e-6) {
        r = resid_vec(s);
    } else {
        const double eps = 1e-3;
        const CVec a1 = 0.5 * (resid_vec(s + eps) + resid_vec(s - eps));
        const CVec a2 = 0.5 * (resid_vec(s + eps / 2) + resid_vec(s - eps / 2));
        r = (4.0 * a2 - a1) / 3.0;
    }
    return r.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Large-height limits of the s-derivative's Fourier coefficients.

struct KappaTable {
    std::string lattice_key;
    i64 denom = 1;
    std::vector<double> v_grid;
    std::map<std::pair<int, i64>, double> kappa;       // (coset, numerator) -> limit
    std::map<std::pair<int, i64>, double> extrap_gap;  // |b(v_N) - b(v_{N-1})|
    std::map<std::pair<int, i64>, bool> gap_grew;      // residual failed to shrink
};

// For each requested (coset, numerator) pair the weight-2 s-derivative of the
// Fourier coefficient is evaluated at the heights of v_grid and the last
// value is reported with the gap to the previous height.  Entries use the
// normalization with a finite large-height limit: nonzero modes are taken
// relative to e(m tau); zero modes are first multiplied by v^{1/2}, and the
// (0,0) entry additionally has log(v) removed.  The holomorphic expansion
// collects the surviving nonnegative modes at weight 2.
inline std::pair<KappaTable, VectorQExpansion> kappa_table(
    const LatticeModel& L2, const std::vector<std::pair<int, i64>>& entries,
    const std::vector<double>& v_grid, EisOptions opt = {}) {
    if (v_grid.size() < 2)
        throw validation_error("kappa_table: need at least two heights");
    const EisEngine& eng = eis_engine_for(L2, opt);
    KappaTable tab;
    tab.lattice_key = lattice_signature_key(L2);
    tab.denom = eng.denom();
    tab.v_grid = v_grid;
    const double h = 0.05;
    for (const auto& [mu, k] : entries) {
        std::vector<double> b;
        b.reserve(v_grid.size());
        for (const double v : v_grid) {
            const bool symmetric = eng.char_disc() != 1;
            auto coeff = [&](double s) -> cplx {
                const double lam =
                    symmetric ? scattering_normalizer(eng.char_disc(), s, opt.completion)
                              : 1.0;
                if (k != 0) return lam * eng.coefficient_rel(mu, k, s, 2, v);
                return lam * std::sqrt(v) * eng.coefficient(mu, 0, s, 2, v);
            };
            const cplx d1 = (coeff(h) - coeff(-h)) / (2.0 * h);
            const cplx d2 = (coeff(h / 2) - coeff(-h / 2)) / h;
            cplx der = (4.0 * d2 - d1) / 3.0;
            if (mu == 0 && k == 0) der -= std::log(v);
            b.push_back(der.real());
        }
        const std::size_t N = b.size();
        tab.kappa[{mu, k}] = b[N - 1];
        tab.extrap_gap[{mu, k}] = std::abs(b[N - 1] - b[N - 2]);
        // Flag entries whose height-to-height gap is significant and fails
        // to shrink: the extrapolation did not converge on this grid.
        tab.gap_grew[{mu, k}] =
            (N >= 3) && tab.extrap_gap[{mu, k}] > 1e-6 &&
            tab.extrap_gap[{mu, k}] > 0.9 * std::abs(b[N - 2] - b[N - 3]);
    }
    VectorQExpansion hol;
    hol.disc = eng.disc_ptr();
    hol.weight = Rat(2);
    hol.denom = eng.denom();
    for (const auto& [key, kap] : tab.kappa) {
        const double drop = std::max(1e-10, 5.0 * tab.extrap_gap.at(key));
        if (key.second >= 0 && (std::abs(kap) > drop || (key.first == 0 && key.second == 0)))
            hol.coeffs[key] = kap;
    }
    return {tab, hol};
}

inline nlohmann::json kappa_to_json(const KappaTable& tab) {
    nlohmann::json j;
    j["lattice_key"] = tab.lattice_key;
    j["v_grid"] = tab.v_grid;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, kap] : tab.kappa) {
        const i64 g = std::gcd(std::abs(key.second), tab.denom);
        nlohmann::json e;
        e["mu"] = key.first;
        e["m_num"] = (g > 0) ? key.second / g : key.second;
        e["m_den"] = (g > 0) ? tab.denom / g : tab.denom;
        e["kappa"] = kap;
        entries.push_back(e);
    }
    j["entries"] = entries;
    return j;
}

inline KappaTable kappa_from_json(const nlohmann::json& j, i64 denom) {
    KappaTable tab;
    tab.lattice_key = j.at("lattice_key").get<std::string>();
    tab.denom = denom;
    tab.v_grid = j.at("v_grid").get<std::vector<double>>();
    for (const auto& e : j.at("entries")) {
        const i64 num = e.at("m_num").get<i64>();
        const i64 den = e.at("m_den").get<i64>();
        if (den <= 0 || denom % den != 0)
            throw validation_error("kappa_from_json: mode denominator does not divide the level");
        tab.kappa[{e.at("mu").get<int>(), num * (denom / den)}] = e.at("kappa").get<double>();
    }
    return tab;
}

// ---------------------------------------------------------------------------
// Geodesic-average comparison against the central value.

struct SiegelWeilReport {
    cplx fitted_constant;
    double max_residual = 0.0;        // worst relative sup-norm gap off the fit point
    double fit_point_residual = 0.0;  // gap at the point used for the fit
    std::vector<double> per_tau_residual;
};

// Averages the height-normalized rank-2 theta function of a narrow class
// along its closed geodesic (uniform trapezoid over one period, total mass
// one) and compares against the central value of the class lattice's
// weight-0 series.  One complex constant is fitted at the first tau by least
// squares; the residual is reported at every other tau.
inline SiegelWeilReport siegel_weil_residual(const RealQuadraticField& F,
                                             const RingClassGroup& G, int cls,
                                             const std::vector<cplx>& taus, int quad_points,
                                             EisOptions opt = {},
                                             const cplx* reuse_constant = nullptr) {
    if (taus.empty()) throw validation_error("siegel_weil_residual: need at least one tau");
    if (quad_points < 4) throw validation_error("siegel_weil_residual: too few quadrature points");
    const std::vector<NarrowClassIdeal> reps = narrow_class_ideals(F, G);
    if (cls < 0 || static_cast<std::size_t>(cls) >= reps.size())
        throw validation_error("siegel_weil_residual: class index out of range");
    const FractionalIdeal& a = reps[static_cast<std::size_t>(cls)].ideal;
    const GeodesicSet gs = geodesic_set(F, G, cls);
    const LevelLattices LL = lattice_from_level(F, a, 1);
    const EisEngine& eng = eis_engine_for(LL.two, opt);

    SiegelWeilReport rep;
    std::vector<CVec> theta_avg, eis_val;
    for (const cplx& tau : taus) {
        const double v = tau.imag();
        CVec acc = CVec::Zero(static_cast<Eigen::Index>(eng.disc().order));
        for (int j = 0; j < quad_points; ++j) {
            const double t = gs.period * j / quad_points;
            acc += theta_11(F, a, LL.two, eng.disc(), tau, t);
        }
        acc *= std::sqrt(v) / static_cast<double>(quad_points);
        theta_avg.push_back(acc);
        eis_val.push_back(eng.value(tau, 0.0, 0));
    }
    cplx cst;
    if (reuse_constant != nullptr) {
        cst = *reuse_constant;
    } else {
        cplx num = 0.0;
        double den = 0.0;
        for (Eigen::Index i = 0; i < eis_val[0].size(); ++i) {
            num += theta_avg[0](i) * std::conj(eis_val[0](i));
            den += std::norm(eis_val[0](i));
        }
        if (den == 0.0) throw accuracy_error("siegel_weil_residual: central value vanished");
        cst = num / den;
    }
    rep.fitted_constant = cst;
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const CVec ref = cst * eis_val[t];
        const double scale = ref.cwiseAbs().maxCoeff();
        const double r = (theta_avg[t] - ref).cwiseAbs().maxCoeff() / (scale + 1e-300);
        rep.per_tau_residual.push_back(r);
        if (t == 0)
            rep.fit_point_residual = r;
        else
            rep.max_residual = std::max(rep.max_residual, r);
    }
    if (taus.size() == 1) rep.max_residual = rep.fit_point_residual;
    return rep;
}

}  // namespace geogreen
