#pragma once
// Theta series attached to ideal classes of a real quadratic order:
//
//   * exact representation counts on unit orbits of an ideal (one count per
//     orbit of the totally positive unit, enumerated through a fundamental
//     wedge on the totally positive cone),
//   * the scalar class theta series and their character combinations (class
//     sums run over narrow classes, which index integral ideals under the
//     totally positive orbit counting),
//   * Gaussian majorant sums over the split rank-4 lattice model, evaluated
//     at tube-domain points, and over rank-2 factors along a negative line,
//   * the closed geodesic attached to a narrow ideal class: exact endpoints
//     on the real axis and its hyperbolic length.
//
// All arithmetic predicates (norm windows, total positivity, wedge
// membership) are exact rational computations; floating point only brackets
// the enumeration boxes and evaluates the analytic sums.

#include <geogreen/weilrep.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace geogreen {

// ---------------------------------------------------------------------------
// Representation counts.

struct RepCountTable {
    std::string label;  // norm-form label "a_b_c" of the class
    i64 cutoff = 0;     // counts are complete for 0 < m <= cutoff
    // Norm value m = N(lambda)/N(a) as a reduced fraction -> orbit count.
    std::map<std::pair<i128, i128>, i64> entries;

    static std::pair<i128, i128> key(const Rat& m) { return {m.num(), m.den()}; }

    i64 count(const Rat& m) const {
        auto it = entries.find(key(m));
        return it == entries.end() ? 0 : it->second;
    }
    i64 count(i64 m) const { return count(Rat(i128{m})); }
};

namespace detail {

inline int sign_rat(const Rat& r) { return r.num() < 0 ? -1 : (r.num() == 0 ? 0 : 1); }

// Exact sign of x + y*sqrt(d_K).  Mixed-sign coordinates are resolved by
// cross-squaring; equality x^2 = d_K y^2 cannot occur for y != 0 because
// d_K is not a square.
inline int qe_sign(const RealQuadraticField& F, const QuadElt& a) {
    int sx = sign_rat(a.x), sy = sign_rat(a.y);
    if (sy == 0) return sx;
    if (sx == 0) return sy;
    if (sx == sy) return sx;
    Rat lhs = a.x * a.x, rhs = Rat(F.d_K) * a.y * a.y;
    if (lhs == rhs) throw accuracy_error("qe_sign: discriminant is a square");
    return rhs < lhs ? sx : sy;
}

inline QuadElt qe_sub(const QuadElt& a, const QuadElt& b) { return {a.x - b.x, a.y - b.y}; }

inline QuadElt unit_elt(const OrderUnit& u) { return {Rat(u.x, 2), Rat(u.y, 2)}; }

inline std::string form_label(const BQF& f) {
    return to_string_i128(f.a) + "_" + to_string_i128(f.b) + "_" + to_string_i128(f.c);
}

// Exact count of lattice points of mu + a (mu in ideal-basis coordinates)
// that are totally positive, have 0 < N(lambda)/N(a) <= cutoff, and lie in
// the wedge 1 <= |lambda/lambda'|^(1/2) < eps1 for the totally positive
// fundamental unit eps1 of the order.  The wedge picks one point per
// <eps1>-orbit on the totally positive cone.
inline RepCountTable rep_counts_enumerate(const RealQuadraticField& F,
                                          const FractionalIdeal& a,
                                          const std::vector<Rat>& mu, i64 cutoff) {
    if (cutoff < 1) throw validation_error("rep_counts: cutoff must be positive");
    if (mu.size() != 2)
        throw validation_error("rep_counts: coset offset needs two coordinates");
    if (a.alpha.y != Rat(0) || !(Rat(0) < a.alpha.x))
        throw validation_error("rep_counts: ideal basis not normalized (alpha not rational positive)");
    if (a.z.y == Rat(0)) throw validation_error("rep_counts: degenerate ideal basis");
    if (!(Rat(0) < a.norm)) throw validation_error("rep_counts: ideal norm must be positive");

    const OrderUnit eu = totally_positive_order_unit(F, fundamental_unit(F), a.conductor);
    const QuadElt e1 = unit_elt(eu);
    const QuadElt e1sq = qe_mul(F, e1, e1);
    const double e1d = qe_embed(F, e1, 0);

    const double root = std::sqrt(static_cast<double>(cutoff) * a.norm.to_double());
    const double U1 = e1d * root * (1.0 + 1e-9);  // bound on the first embedding
    const double U2 = root * (1.0 + 1e-9);        // bound on the second embedding

    const double A = a.alpha.x.to_double();
    const double z1 = qe_embed(F, a.z, 0), z2 = qe_embed(F, a.z, 1);
    const double dz = z1 - z2;
    const double mu1d = mu[0].to_double(), mu2d = mu[1].to_double();
    const Rat bound(i128{cutoff});

    RepCountTable tab;
    tab.cutoff = cutoff;

    // The difference of embeddings is n_eff * (z1 - z2); box it first.
    double nb0 = (-U2) / dz, nb1 = U1 / dz;
    if (nb1 < nb0) std::swap(nb0, nb1);
    const i64 nlo = static_cast<i64>(std::floor(nb0 - mu2d)) - 2;
    const i64 nhi = static_cast<i64>(std::ceil(nb1 - mu2d)) + 2;

    for (i64 n = nlo; n <= nhi; ++n) {
        const double ne_d = static_cast<double>(n) + mu2d;
        const double w1 = ne_d * z1, w2 = ne_d * z2;
        const double tlo = std::max(-w1, -w2);
        const double thi = std::min(U1 - w1, U2 - w2);
        if (thi < tlo) continue;
        const i64 mlo = static_cast<i64>(std::floor(tlo / A - mu1d)) - 2;
        const i64 mhi = static_cast<i64>(std::ceil(thi / A - mu1d)) + 2;
        const Rat ne = Rat(i128{n}) + mu[1];
        for (i64 m = mlo; m <= mhi; ++m) {
            const Rat me = Rat(i128{m}) + mu[0];
            QuadElt lam{me * a.alpha.x + ne * a.z.x, ne * a.z.y};
            if (lam.x == Rat(0) && lam.y == Rat(0)) continue;
            Rat Q = qe_norm(F, lam) / a.norm;
            if (!(Rat(0) < Q) || bound < Q) continue;
            // Positive norm + positive first embedding = totally positive.
            if (qe_sign(F, lam) <= 0) continue;
            // |lambda/lambda'| >= 1, i.e. the sqrt(d_K)-coordinate is >= 0.
            if (sign_rat(lam.y) < 0) continue;
            // |lambda/lambda'|^(1/2) < eps1, i.e. lambda < eps1^2 * lambda'.
            if (qe_sign(F, qe_sub(lam, qe_mul(F, e1sq, qe_conj(lam)))) >= 0) continue;
            tab.entries[RepCountTable::key(Q)] += 1;
        }
    }
    return tab;
}

inline std::string rep_cache_path(const std::string& dir, const RealQuadraticField& F,
                                  const FractionalIdeal& a, const std::string& label) {
    std::ostringstream os;
    os << dir << "/repcounts_d" << to_string_i128(F.d_K) << "_c"
       << to_string_i128(a.conductor) << "_" << label << ".csv";
    return os.str();
}

inline bool rep_cache_read(const std::string& path, i64 want, RepCountTable& out) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    long long have = 0;
    if (std::sscanf(line.c_str(), "# cutoff=%lld", &have) != 1 || have < want) return false;
    out.entries.clear();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f0, f1, f2;
        if (!std::getline(ls, f0, ',') || !std::getline(ls, f1, ',') ||
            !std::getline(ls, f2, ','))
            return false;
        i128 num, den;
        i64 cnt;
        try {
            num = parse_i128(f0);
            den = parse_i128(f1);
            cnt = static_cast<i64>(parse_i128(f2));
        } catch (const std::exception&) {
            return false;
        }
        if (den < 1 || cnt < 0) return false;
        Rat mval(num, den);
        if (mval.num() != num || mval.den() != den) return false;  // not reduced
        if (Rat(i128{want}) < mval) continue;                      // beyond request
        out.entries[{num, den}] = cnt;
    }
    out.cutoff = want;
    return true;
}

inline void rep_cache_write(const std::string& path, const RepCountTable& tab) {
    std::ofstream outf(path, std::ios::trunc);
    if (!outf) return;  // caching is best-effort
    outf << "# cutoff=" << tab.cutoff << "\n";
    for (const auto& [k, c] : tab.entries)
        outf << to_string_i128(k.first) << "," << to_string_i128(k.second) << "," << c
             << "\n";
}

}  // namespace detail

// Tables larger than this are recomputed on demand instead of being written
// to the on-disk cache.
inline constexpr i64 kRepCountCacheBound = 4096;

// Representation counts of the coset mu + a (mu in ideal-basis coordinates;
// std::nullopt means the ideal itself).  With a cache directory, tables for
// the ideal itself up to the cache bound are stored as CSV rows
// "m_num,m_den,count" and healed when the file is malformed or too short.
inline RepCountTable rep_counts(const RealQuadraticField& F, const FractionalIdeal& a,
                                const std::optional<std::vector<Rat>>& mu, i64 cutoff,
                                const std::string& cache_dir = "") {
    const std::string label = detail::form_label(ideal_norm_form(F, a));
    if (mu) {
        RepCountTable t = detail::rep_counts_enumerate(F, a, *mu, cutoff);
        t.label = label;
        return t;
    }
    const bool use_cache = !cache_dir.empty() && cutoff <= kRepCountCacheBound;
    const std::string path =
        use_cache ? detail::rep_cache_path(cache_dir, F, a, label) : std::string();
    if (use_cache) {
        RepCountTable cached;
        if (detail::rep_cache_read(path, cutoff, cached)) {
            cached.label = label;
            return cached;
        }
    }
    RepCountTable t =
        detail::rep_counts_enumerate(F, a, std::vector<Rat>{Rat(0), Rat(0)}, cutoff);
    t.label = label;
    if (use_cache) {
        std::error_code ec;
        std::filesystem::create_directories(cache_dir, ec);
        detail::rep_cache_write(path, t);
    }
    return t;
}

// Sum of the field character over the divisors of m: the number of integral
// ideals of the maximal order with norm m.
inline i64 eta_divisor_sum(const RealQuadraticField& F, i64 m) {
    if (m < 1) throw validation_error("eta_divisor_sum: m must be positive");
    i64 s = 0;
    for (i64 d = 1; d * d <= m; ++d) {
        if (m % d != 0) continue;
        s += field_character(F, i128{d});
        const i64 q = m / d;
        if (q != d) s += field_character(F, i128{q});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Narrow class representatives.
//
// Counting totally positive orbits enumerates integral ideals per *narrow*
// class: an ideal b of norm m with b*a = (lambda) determines lambda only up
// to totally positive units, so each integral ideal is seen by exactly one
// narrow class.  When the fundamental unit has norm -1 the narrow and wide
// groups coincide; when it has norm +1 each wide class splits into two
// narrow classes, and summing counts over wide representatives alone would
// drop every ideal whose generator relation has mixed signs.  Class sums of
// theta data therefore run over one ideal per narrow class.

struct NarrowClassIdeal {
    FractionalIdeal ideal;  // representative with positive leading coefficient
    std::string label;      // canonical narrow label "a_b_c"
    int wide_index = 0;     // image in the wide group, for character weights
};

inline std::vector<NarrowClassIdeal> narrow_class_ideals(const RealQuadraticField& F,
                                                         const RingClassGroup& G) {
    const i128 D = checked_mul(checked_mul(G.conductor, G.conductor), F.d_K);
    const i128 copr = checked_mul(G.conductor, F.d_K);
    std::vector<NarrowClassIdeal> out;
    out.reserve(G.narrow_labels.size());
    for (const BQF& nl : G.narrow_labels) {
        // Pick a properly equivalent form whose leading coefficient is
        // positive (so the ideal lattice sits in the same narrow class) and
        // coprime to c * d_K (so the ideal is invertible and prime to the
        // conductor).  Try the rho-cycle first; otherwise search primitive
        // vectors for a positive represented value coprime to c * d_K, which
        // exists because a primitive indefinite form represents infinitely
        // many positive primes.
        BQF pick{0, 0, 0};
        bool found = false;
        for (const BQF& g : bqf_cycle(bqf_reduce(nl, D), D))
            if (g.a > 0 && gcd128(g.a, copr) == 1) {
                pick = g;
                found = true;
                break;
            }
        for (i128 bound = 1; !found && bound <= 64; ++bound) {
            for (i128 x = -bound; x <= bound && !found; ++x) {
                for (i128 y = -bound; y <= bound && !found; ++y) {
                    if (std::max(abs128(x), abs128(y)) != bound && bound != 1) continue;
                    if (gcd128(x, y) != 1) continue;
                    const i128 v = bqf_eval(nl, x, y);
                    if (v <= 0 || gcd128(v, copr) != 1) continue;
                    i128 p, q;
                    xgcd128(x, y, p, q);  // x p + y q = 1
                    pick = bqf_transform(nl, x, y, checked_neg(q), p);
                    found = true;
                }
            }
        }
        if (!found)
            throw accuracy_error("narrow_class_ideals: no admissible representative found");
        NarrowClassIdeal n;
        n.ideal = ideal_from_form(F, pick, G.conductor);
        n.label = detail::form_label(nl);
        n.wide_index = class_index(G, nl);
        out.push_back(std::move(n));
    }
    return out;
}

// q-expansion of the class theta series: coefficient vector r with r[0] = 1
// (the empty orbit at m = 0) and r[m] the representation count.
inline std::vector<i64> partial_theta(const RealQuadraticField& F, const FractionalIdeal& a,
                                      i64 M, const std::string& cache_dir = "") {
    RepCountTable t = rep_counts(F, a, std::nullopt, M, cache_dir);
    std::vector<i64> r(static_cast<std::size_t>(M) + 1, 0);
    r[0] = 1;
    for (const auto& [k, c] : t.entries) {
        if (k.second != 1)
            throw accuracy_error("partial_theta: non-integral norm value on an ideal lattice");
        if (k.first < 1 || i128{M} < k.first) continue;
        r[static_cast<std::size_t>(static_cast<i64>(k.first))] = c;
    }
    return r;
}

// Character combination of the class theta series over a ring class group.
// The sum runs over narrow classes; a character of the wide group acts
// through its pullback along the narrow-to-wide surjection.
inline std::vector<cplx> hecke_theta(const RealQuadraticField& F, const RingClassGroup& G,
                                     const RingClassCharacter& chi, i64 M,
                                     const std::string& cache_dir = "") {
    std::vector<cplx> out(static_cast<std::size_t>(M) + 1, cplx(0.0));
    for (const NarrowClassIdeal& nc : narrow_class_ideals(F, G)) {
        std::vector<i64> r = partial_theta(F, nc.ideal, M, cache_dir);
        const cplx w = chi(nc.wide_index);
        for (std::size_t m = 0; m < r.size(); ++m)
            out[m] += w * static_cast<double>(r[m]);
    }
    return out;
}

// Value of a q-series sum_m c[m] e(m tau) at a point of the upper half plane.
inline cplx q_series_value(const std::vector<cplx>& c, cplx tau) {
    if (!(tau.imag() > 0)) throw validation_error("q_series_value: Im(tau) must be positive");
    KahanSumC s;
    for (std::size_t m = 0; m < c.size(); ++m)
        s.add(c[m] * std::exp(cplx(0.0, TWO_PI) * tau * static_cast<double>(m)));
    return s.value();
}

inline cplx q_series_value(const std::vector<i64>& c, cplx tau) {
    std::vector<cplx> cc(c.size());
    for (std::size_t m = 0; m < c.size(); ++m) cc[m] = static_cast<double>(c[m]);
    return q_series_value(cc, tau);
}

// ---------------------------------------------------------------------------
// Tube-domain points and the closed geodesic of an ideal class.

struct TubePoint {
    cplx z1, z2;
};

inline TubePoint make_tube_point(cplx z1, cplx z2) {
    if (!(z1.imag() > 0) || !(z2.imag() > 0))
        throw validation_error("make_tube_point: both coordinates must have positive imaginary part");
    return {z1, z2};
}

// The diagonal geodesic of the split model: the tube point whose negative
// plane is spanned by the norm-positive line at parameter t and the base
// line of the negative factor.  At t = 0 this is (i, i).
inline TubePoint tube_point_on_geodesic(double t) {
    const double s = std::exp(0.5 * t);
    return {cplx(0.0, s), cplx(0.0, s)};
}

struct GeodesicSet {
    BQF form;                 // norm form of the class representative
    QuadElt z_plus, z_minus;  // exact endpoints on the real axis
    double period = 0.0;      // hyperbolic length: 2 log eps1
    std::vector<std::string> class_labels;
};

// Endpoints and period of the closed geodesic attached to a narrow class of
// the ring class group (one closed geodesic per orientation and narrow
// class).  The endpoints are the exact roots (-b +- c sqrt(d_K)) / (2a) of
// the norm form (c the conductor); they are Galois conjugates.
inline GeodesicSet geodesic_set(const RealQuadraticField& F, const RingClassGroup& G,
                                int cls) {
    if (cls < 0 || i64{cls} >= G.h_narrow)
        throw validation_error("geodesic_set: class index out of range");
    const std::vector<NarrowClassIdeal> reps = narrow_class_ideals(F, G);
    const FractionalIdeal& a = reps[static_cast<std::size_t>(cls)].ideal;
    const BQF f = ideal_norm_form(F, a);
    if (f.a <= 0) throw validation_error("geodesic_set: norm form must have positive leading coefficient");

    GeodesicSet gs;
    gs.form = f;
    const i128 two_a = checked_mul(2, f.a);
    gs.z_plus = {Rat(checked_neg(f.b), two_a), Rat(a.conductor, two_a)};
    gs.z_minus = qe_conj(gs.z_plus);
    for (const QuadElt* z : {&gs.z_plus, &gs.z_minus}) {
        const QuadElt sq = qe_mul(F, *z, *z);
        const Rat rx = Rat(f.a) * sq.x + Rat(f.b) * z->x + Rat(f.c);
        const Rat ry = Rat(f.a) * sq.y + Rat(f.b) * z->y;
        if (rx != Rat(0) || ry != Rat(0))
            throw accuracy_error("geodesic_set: endpoints fail the root equation");
    }
    const OrderUnit eu = totally_positive_order_unit(F, fundamental_unit(F), G.conductor);
    gs.period = 2.0 * eu.log_val;
    gs.class_labels.reserve(reps.size());
    for (const NarrowClassIdeal& n : reps) gs.class_labels.push_back(n.label);
    return gs;
}

// ---------------------------------------------------------------------------
// Gaussian majorant sums.

struct ThetaEvalStats {
    double radius_sq = 0.0;   // enumeration bound on the majorant form
    double tail_bound = 0.0;  // estimated dropped tail, worst coset
    long long points = 0;     // lattice points evaluated across all cosets
};

namespace detail {

inline constexpr long long kThetaPointBudget = 30'000'000;

using DMat = std::vector<std::vector<double>>;

inline DMat cholesky_lower(const DMat& A) {
    const std::size_t n = A.size();
    DMat L(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double d = A[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= L[j][k] * L[j][k];
        if (!(d > 0.0))
            throw accuracy_error("theta majorant: matrix is not positive definite");
        L[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = A[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            L[i][j] = s / L[j][j];
        }
    }
    return L;
}

// Radius (squared, in majorant units) at which the Gaussian tail beyond the
// ellipsoid is below the tolerance, with a margin for the point count
// estimated from the ellipsoid volume.
inline double auto_radius_sq(double v, double tol, const DMat& L) {
    const std::size_t n = L.size();
    double logdet_half = 0.0;
    for (std::size_t i = 0; i < n; ++i) logdet_half += std::log(L[i][i]);
    const double Lt = std::log(1.0 / tol);
    double R2 = (Lt + 6.0) / (PI * v);
    for (int it = 0; it < 3; ++it) {
        const double logvol = 0.5 * static_cast<double>(n) * std::log(PI * std::max(R2, 1e-30)) -
                              std::lgamma(0.5 * static_cast<double>(n) + 1.0) - logdet_half;
        R2 = (Lt + 6.0 + std::max(logvol, 0.0)) / (PI * v);
    }
    return R2;
}

struct GaussianSumSpec {
    DMat S;    // scaled even Gram (phase form q = x^T S x / 2)
    DMat maj;  // positive definite majorant
    DMat L;    // lower Cholesky factor of maj
    double u = 0.0, v = 0.0;
};

// sum over x in off + Z^n with maj(x) <= R2 of e(u q(x)) exp(-pi v maj(x)),
// in a fixed traversal order with compensated accumulation.  band_abs
// collects the absolute terms with maj(x) in the outermost 20% of the
// ellipsoid, which calibrates the tail estimate.
inline cplx gaussian_coset_sum(const GaussianSumSpec& g, const std::vector<double>& off,
                               double R2, double& band_abs, long long& points) {
    const std::size_t n = g.maj.size();
    KahanSumC acc;
    KahanSum band;
    std::vector<double> x(n, 0.0);
    const double edge = R2 * (1.0 + 1e-12) + 1e-12;

    std::function<void(std::size_t, double)> rec = [&](std::size_t lvl, double used) {
        const std::size_t i = lvl - 1;
        double c = 0.0;
        for (std::size_t j = lvl; j < n; ++j) c += g.L[j][i] * x[j];
        const double rem = R2 - used;
        if (rem < 0.0) return;
        const double s = std::sqrt(rem);
        const double lo = (-c - s) / g.L[i][i] - off[i];
        const double hi = (-c + s) / g.L[i][i] - off[i];
        const i64 klo = static_cast<i64>(std::ceil(lo - 1e-9));
        const i64 khi = static_cast<i64>(std::floor(hi + 1e-9));
        for (i64 k = klo; k <= khi; ++k) {
            x[i] = static_cast<double>(k) + off[i];
            const double t = g.L[i][i] * x[i] + c;
            const double used2 = used + t * t;
            if (used2 > edge) continue;
            if (i == 0) {
                if (++points > kThetaPointBudget)
                    throw accuracy_error("theta enumeration exceeded the point budget");
                double q = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    double row = 0.0;
                    for (std::size_t cc = 0; cc < n; ++cc) row += g.S[r][cc] * x[cc];
                    q += x[r] * row;
                }
                q *= 0.5;
                const double w = std::exp(-PI * g.v * used2);
                if (used2 > 0.8 * R2) band.add(w);
                acc.add(w * e2pi(g.u * q));
            } else {
                rec(i, used2);
            }
        }
    };
    if (n == 0) throw validation_error("gaussian_coset_sum: empty lattice");
    rec(n, 0.0);
    band_abs = band.value();
    return acc.value();
}

inline DMat gram_to_double(const IMat& S) {
    const std::size_t n = S.rows();
    DMat out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i][j] = static_cast<double>(S(i, j));
    return out;
}

// Solve a small real linear system with complex right-hand side.
inline std::vector<cplx> solve_linear(DMat A, std::vector<cplx> b) {
    const std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-14)
            throw accuracy_error("theta: singular basis matrix");
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (std::size_t cc = col; cc < n; ++cc) A[r][cc] -= f * A[col][cc];
            b[r] -= f * b[col];
        }
    }
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i] / A[i][i];
    return out;
}

// Embedding matrix of the ideal basis: row i = (embedding_i(alpha), embedding_i(z)).
inline DMat embedding_matrix(const RealQuadraticField& F, const FractionalIdeal& a) {
    return {{qe_embed(F, a.alpha, 0), qe_embed(F, a.z, 0)},
            {qe_embed(F, a.alpha, 1), qe_embed(F, a.z, 1)}};
}

// Coordinates of an ambient vector in the lattice basis.
inline std::vector<cplx> to_lattice_coords(const LatticeModel& Lm,
                                           const std::vector<cplx>& ambient) {
    const std::size_t n = ambient.size();
    DMat B(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) B[i][j] = Lm.basis_matrix(i, j).to_double();
    return solve_linear(std::move(B), ambient);
}

// Shared evaluation per coset of the discriminant group.
inline CVec majorant_theta(const LatticeModel& Lm, const DiscriminantGroup& D, cplx tau,
                           const DMat& maj, double radius_sq, double tol,
                           ThetaEvalStats* stats) {
    if (!(tau.imag() > 0))
        throw validation_error("theta: Im(tau) must be positive");
    GaussianSumSpec g;
    g.S = gram_to_double(Lm.scaled_gram);
    g.maj = maj;
    g.L = cholesky_lower(maj);
    g.u = tau.real();
    g.v = tau.imag();

    const bool explicit_radius = radius_sq > 0.0;
    const double R2 = explicit_radius ? radius_sq : auto_radius_sq(g.v, tol, g.L);

    const std::size_t ncos = D.coset_reps.size();
    CVec out(static_cast<Eigen::Index>(ncos));
    double worst_tail = 0.0;
    long long points = 0;
    for (std::size_t idx = 0; idx < ncos; ++idx) {
        std::vector<double> off(D.coset_reps[idx].size());
        for (std::size_t k = 0; k < off.size(); ++k) off[k] = D.coset_reps[idx][k].to_double();
        double band = 0.0;
        out(static_cast<Eigen::Index>(idx)) = gaussian_coset_sum(g, off, R2, band, points);
        const double sig = std::exp(-0.16 * PI * g.v * R2);
        const double tail = band * sig / std::max(1.0 - sig, 1e-3) + std::exp(-PI * g.v * R2);
        worst_tail = std::max(worst_tail, tail);
    }
    if (stats) {
        stats->radius_sq = R2;
        stats->tail_bound = worst_tail;
        stats->points = points;
    }
    if (explicit_radius && worst_tail > tol) {
        const double need = std::max(auto_radius_sq(g.v, tol, g.L), 2.0 * R2);
        std::ostringstream os;
        os << "theta truncation: tail estimate " << worst_tail << " exceeds tolerance " << tol
           << "; required radius-squared is about " << need;
        throw accuracy_error(os.str());
    }
    return out;
}

}  // namespace detail

// Component vector, over the discriminant group, of the Gaussian majorant
// sum of the split rank-4 model at a tube-domain point:
//   component mu = sum over x in mu + L of e(u q(x)) exp(-pi v (x, x)_z),
// where q is the scaled even form and (x, x)_z = (x, x) + 2 R(x, z) is the
// attached majorant.  Normalisations carrying powers of v belong to the
// caller.  The ideal must be the one the lattice model was built from.
// radius_sq = 0 selects the radius automatically from the Gaussian tail; an
// explicit radius raises a truncation error when its estimated tail exceeds
// the tolerance.
inline CVec siegel_theta_22(const RealQuadraticField& F, const FractionalIdeal& a,
                            const LatticeModel& Lm, const DiscriminantGroup& D, cplx tau,
                            const TubePoint& z, double radius_sq = 0.0, double tol = 1e-12,
                            ThetaEvalStats* stats = nullptr) {
    if (Lm.ambient.rank != 4 || Lm.ambient.sig_pos != 2 || Lm.ambient.sig_neg != 2)
        throw validation_error("siegel_theta_22: ambient must be the split rank-4 model");
    if (!(z.z1.imag() > 0) || !(z.z2.imag() > 0))
        throw validation_error("siegel_theta_22: tube point must have positive imaginary parts");

    // Negative plane through the tube point: the positive factor carries the
    // section (z1 z2, 1), the negative factor the section (z1, z2), both in
    // embedding coordinates of the ideal basis.
    const detail::DMat E = detail::embedding_matrix(F, a);
    const std::vector<cplx> cpos = detail::solve_linear(E, {z.z1 * z.z2, cplx(1.0)});
    const std::vector<cplx> cneg = detail::solve_linear(E, {z.z1, z.z2});
    std::vector<cplx> w_l = detail::to_lattice_coords(
        Lm, {cpos[0], cpos[1], cneg[0], cneg[1]});

    const detail::DMat S = detail::gram_to_double(Lm.scaled_gram);
    const std::size_t n = 4;
    std::vector<cplx> Sw(n, cplx(0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Sw[i] += S[i][j] * w_l[j];
    cplx qw(0.0);
    cplx gpair(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        qw += w_l[i] * Sw[i];
        gpair += std::conj(w_l[i]) * Sw[i];
    }
    qw *= 0.5;
    const double g = -0.5 * gpair.real();
    const double scale_ref = std::abs(gpair) + 1.0;
    if (std::abs(qw) > 1e-8 * scale_ref)
        throw accuracy_error("siegel_theta_22: tube section is not isotropic");
    if (!(g > 0.0))
        throw validation_error("siegel_theta_22: tube point does not span a negative plane");

    detail::DMat maj = S;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            maj[i][j] += (2.0 / g) * (Sw[i].real() * Sw[j].real() + Sw[i].imag() * Sw[j].imag());

    return detail::majorant_theta(Lm, D, tau, maj, radius_sq, tol, stats);
}

// Component vector of the Gaussian sum of a rank-2 factor along its negative
// line at parameter t (hyperbolic arc length along the geodesic; the unit
// translates t by the period).  A positive definite input is the degenerate
// case: the sum is the bare holomorphic theta series and t is ignored.
inline CVec theta_11(const RealQuadraticField& F, const FractionalIdeal& a,
                     const LatticeModel& Lm, const DiscriminantGroup& D, cplx tau, double t,
                     double radius_sq = 0.0, double tol = 1e-12,
                     ThetaEvalStats* stats = nullptr) {
    if (Lm.ambient.sig_neg == 0) {
        // positive definite: the majorant is the form itself
        return detail::majorant_theta(Lm, D, tau, detail::gram_to_double(Lm.scaled_gram),
                                      radius_sq, tol, stats);
    }
    if (Lm.ambient.rank != 2 || Lm.ambient.sig_pos != 1 || Lm.ambient.sig_neg != 1)
        throw validation_error("theta_11: ambient must be a rank-2 line model or positive definite");

    const detail::DMat E = detail::embedding_matrix(F, a);
    const double e1 = std::exp(0.5 * t), e2 = std::exp(-0.5 * t);
    const detail::DMat S = detail::gram_to_double(Lm.scaled_gram);

    std::vector<double> w_l;
    double g = 0.0;
    for (const double sgn : {-1.0, +1.0}) {
        const std::vector<cplx> c = detail::solve_linear(E, {cplx(e1), cplx(sgn * e2)});
        const std::vector<cplx> wl = detail::to_lattice_coords(Lm, c);
        std::vector<double> cand{wl[0].real(), wl[1].real()};
        double q = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) q += cand[i] * S[i][j] * cand[j];
        if (q < 0.0) {
            w_l = std::move(cand);
            g = -q;
            break;
        }
    }
    if (w_l.empty())
        throw accuracy_error("theta_11: no negative section found on the line");

    std::vector<double> Sw(2, 0.0);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) Sw[i] += S[i][j] * w_l[j];
    detail::DMat maj = S;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) maj[i][j] += (2.0 / g) * Sw[i] * Sw[j];

    return detail::majorant_theta(Lm, D, tau, maj, radius_sq, tol, stats);
}

}  // namespace geogreen
