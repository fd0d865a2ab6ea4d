#pragma once

// Real quadratic fields K = Q(sqrt(d)), orders O_c = Z + c O_K, fundamental
// units by continued fractions, the quadratic character attached to d_K,
// ring class groups Pic(O_c) computed through reduction cycles of indefinite
// binary quadratic forms and Gauss composition, and their characters.
//
// Class group conventions: form cycles give the narrow group; the wide group
// Pic(O_c) is the quotient by the class of the negative principal form
// (trivial exactly when the order has a unit of norm -1, which is asserted).
// Classes are labeled by the lexicographically least reduced form of the
// cycle; all other modules key on these labels.

#include <geogreen/numerics.hpp>
#include <geogreen/rational.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace geogreen {

struct RealQuadraticField {
    i128 d = 0;          // squarefree part
    i128 d_K = 0;        // fundamental discriminant
    double sqrt_dK = 0.0;
};

inline RealQuadraticField make_field(i128 d) {
    if (d <= 1) throw validation_error("make_field: d must exceed 1");
    if (!is_squarefree(d)) throw validation_error("make_field: d must be squarefree");
    RealQuadraticField f;
    f.d = d;
    f.d_K = (mod128(d, 4) == 1) ? d : checked_mul(4, d);
    f.sqrt_dK = std::sqrt(static_cast<double>(f.d_K));
    return f;
}

// eta(n) = (d_K / n), the quadratic character cutting out K.
inline int field_character(const RealQuadraticField& F, i128 n) {
    if (n == 0) throw validation_error("field_character: n must be nonzero");
    return kronecker(F.d_K, n);
}

// ---------------------------------------------------------------------------
// Field elements and units.

// x + y * sqrt(d_K), exact.
struct QuadElt {
    Rat x, y;

    bool operator==(const QuadElt&) const = default;
};

inline QuadElt qe_add(const QuadElt& a, const QuadElt& b) {
    return {a.x + b.x, a.y + b.y};
}
inline QuadElt qe_mul(const RealQuadraticField& F, const QuadElt& a, const QuadElt& b) {
    return {a.x * b.x + Rat(F.d_K) * a.y * b.y, a.x * b.y + a.y * b.x};
}
inline QuadElt qe_conj(const QuadElt& a) { return {a.x, -a.y}; }
inline Rat qe_norm(const RealQuadraticField& F, const QuadElt& a) {
    return a.x * a.x - Rat(F.d_K) * a.y * a.y;
}
inline Rat qe_trace(const QuadElt& a) { return Rat(2) * a.x; }
inline double qe_embed(const RealQuadraticField& F, const QuadElt& a, int place) {
    // place 0: sqrt(d_K) > 0; place 1: the conjugate embedding.
    double s = (place == 0) ? F.sqrt_dK : -F.sqrt_dK;
    return a.x.to_double() + a.y.to_double() * s;
}

struct UnitData {
    i128 t = 0, u = 0;       // minimal solution of t^2 - d_K u^2 = 4
    double eps0_log = 0.0;   // log of the fundamental unit eps0 > 1
    int eps0_norm = 0;       // +1 or -1
    double epsK_log = 0.0;   // log of (t + u sqrt(d_K))/2
    i128 x0 = 0, y0 = 0;     // eps0 = (x0 + y0 sqrt(d_K))/2, exact
};

// Fundamental unit by the continued-fraction expansion of sqrt(d_K/4) or
// (1 + sqrt(d_K))/2.  Every unit > 1 of the maximal order is p - q*conj(alpha)
// for a convergent p/q of alpha, increasing with q, so the first convergent
// of norm +-1 is fundamental.
inline UnitData fundamental_unit(const RealQuadraticField& F) {
    const i128 D = F.d_K;
    const bool odd_disc = (mod128(D, 4) == 1);
    // Continued fraction state for alpha = (P + sqrt(D)) / Q.
    i128 P = odd_disc ? 1 : 0;
    i128 Q = 2;  // even case: sqrt(D)/2 = (0 + sqrt(D))/2
    const i128 sD = isqrt128(D);
    i128 p_prev = 1, q_prev = 0;  // convergents of alpha
    i128 p_cur = 0, q_cur = 0;
    bool first = true;

    UnitData res;
    for (int iter = 0; iter < 20000; ++iter) {
        if (Q <= 0) throw accuracy_error("fundamental_unit: continued fraction left its domain");
        i128 a = (P + sD) / Q;  // floor((P + sqrt(D))/Q); P + sD >= 0 throughout
        if (first) {
            p_cur = a;
            q_cur = 1;
            first = false;
        } else {
            i128 p_next = checked_add(checked_mul(a, p_cur), p_prev);
            i128 q_next = checked_add(checked_mul(a, q_cur), q_prev);
            p_prev = p_cur; q_prev = q_cur;
            p_cur = p_next; q_cur = q_next;
        }
        // Candidate unit xi = p - q*conj(alpha) from convergent (p, q):
        //   odd D:  conj = (1-sqrt(D))/2, coords x = 2p - q, y = q
        //   even D: conj = -sqrt(D)/2,    coords x = 2p,     y = q
        i128 x = odd_disc ? checked_sub(checked_mul(2, p_cur), q_cur)
                          : checked_mul(2, p_cur);
        i128 y = q_cur;
        // Norm of (x + y sqrt(D))/2 is (x^2 - D y^2)/4.
        i128 n4 = checked_sub(checked_mul(x, x), checked_mul(D, checked_mul(y, y)));
        if (y > 0 && x > 0 && (n4 == 4 || n4 == -4)) {
            res.eps0_norm = (n4 == 4) ? +1 : -1;
            res.x0 = x;
            res.y0 = y;
            res.eps0_log = std::log((static_cast<double>(x)
                                     + static_cast<double>(y) * F.sqrt_dK) / 2.0);
            break;
        }
        // Advance the CF state.
        P = checked_sub(checked_mul(a, Q), P);
        Q = checked_div(checked_sub(D, checked_mul(P, P)), Q);
        if (Q == 0) throw validation_error("fundamental_unit: discriminant is a square");
    }
    if (res.eps0_norm == 0) throw accuracy_error("fundamental_unit: no unit found");

    // Pell-4 minimal solution: the smallest norm +1 unit, i.e. eps0 or eps0^2.
    if (res.eps0_norm == +1) {
        res.t = res.x0;
        res.u = res.y0;
        res.epsK_log = res.eps0_log;
    } else {
        // eps0^2: ((x + y sqrt D)/2)^2 = ((x^2 + D y^2)/2 + x y sqrt D)/2
        res.t = checked_div(checked_add(checked_mul(res.x0, res.x0),
                                        checked_mul(D, checked_mul(res.y0, res.y0))), 2);
        res.u = checked_mul(res.x0, res.y0);
        res.epsK_log = 2.0 * res.eps0_log;
    }
    i128 pell = checked_sub(checked_mul(res.t, res.t),
                            checked_mul(D, checked_mul(res.u, res.u)));
    if (pell != 4) throw accuracy_error("fundamental_unit: Pell-4 identity failed");
    return res;
}

// Smallest power of eps0 lying in O_c, with its exact coordinates and norm.
struct OrderUnit {
    i128 x = 0, y = 0;   // (x + y sqrt(d_K))/2
    int k = 0;           // eps0^k
    int norm = 0;
    double log_val = 0.0;
};

inline OrderUnit order_unit(const RealQuadraticField& F, const UnitData& U, i128 c) {
    if (c <= 0) throw validation_error("order_unit: conductor must be positive");
    i128 x = U.x0, y = U.y0;
    for (int k = 1; k <= 4096; ++k) {
        if (mod128(y, c) == 0) {
            OrderUnit r;
            r.x = x;
            r.y = y;
            r.k = k;
            r.norm = (U.eps0_norm == -1 && (k % 2) == 1) ? -1 : +1;
            r.log_val = k * U.eps0_log;
            return r;
        }
        i128 nx = checked_div(checked_add(checked_mul(x, U.x0),
                                          checked_mul(F.d_K, checked_mul(y, U.y0))), 2);
        i128 ny = checked_div(checked_add(checked_mul(x, U.y0),
                                          checked_mul(y, U.x0)), 2);
        x = nx;
        y = ny;
    }
    throw accuracy_error("order_unit: no power of eps0 lies in the order");
}

// Smallest totally positive unit > 1 of O_c.
inline OrderUnit totally_positive_order_unit(const RealQuadraticField& F,
                                             const UnitData& U, i128 c) {
    OrderUnit w = order_unit(F, U, c);
    if (w.norm == +1) return w;
    OrderUnit r;
    r.x = checked_div(checked_add(checked_mul(w.x, w.x),
                                  checked_mul(F.d_K, checked_mul(w.y, w.y))), 2);
    r.y = checked_mul(w.x, w.y);
    r.k = 2 * w.k;
    r.norm = +1;
    r.log_val = 2.0 * w.log_val;
    return r;
}

// ---------------------------------------------------------------------------
// Binary quadratic forms of positive non-square discriminant.

struct BQF {
    i128 a = 0, b = 0, c = 0;

    friend bool operator==(const BQF& f, const BQF& g) {
        return f.a == g.a && f.b == g.b && f.c == g.c;
    }
    friend bool operator<(const BQF& f, const BQF& g) {
        if (f.a != g.a) return f.a < g.a;
        if (f.b != g.b) return f.b < g.b;
        return f.c < g.c;
    }
};

inline i128 bqf_disc(const BQF& f) {
    return checked_sub(checked_mul(f.b, f.b), checked_mul(4, checked_mul(f.a, f.c)));
}

inline i128 bqf_eval(const BQF& f, i128 x, i128 y) {
    return checked_add(checked_add(checked_mul(f.a, checked_mul(x, x)),
                                   checked_mul(f.b, checked_mul(x, y))),
                       checked_mul(f.c, checked_mul(y, y)));
}

inline bool bqf_primitive(const BQF& f) {
    return gcd128(gcd128(f.a, f.b), f.c) == 1;
}

// Reduced indefinite form: 0 < b < sqrt(D) and |sqrt(D) - 2|a|| < b.
inline bool bqf_reduced(const BQF& f, i128 D) {
    if (f.b <= 0) return false;
    if (checked_mul(f.b, f.b) >= D) return false;
    i128 twoa = checked_mul(2, abs128(f.a));
    i128 lo = checked_sub(twoa, f.b);   // need 2|a| - b < sqrt(D)
    if (lo >= 0 && checked_mul(lo, lo) >= D) return false;
    i128 hi = checked_add(twoa, f.b);   // need sqrt(D) < 2|a| + b
    if (checked_mul(hi, hi) <= D) return false;
    return true;
}

// Reduction/neighbor step on indefinite forms.
inline BQF bqf_rho(const BQF& f, i128 D) {
    i128 cabs = abs128(f.c);
    if (cabs == 0) throw validation_error("bqf_rho: degenerate form");
    i128 s = isqrt128(D);
    i128 r;
    if (cabs > s) {
        // r = -b mod 2|c| in (-|c|, |c|]
        i128 r0 = mod128(checked_neg(f.b), checked_mul(2, cabs));
        r = (r0 > cabs) ? checked_sub(r0, checked_mul(2, cabs)) : r0;
    } else {
        // largest r <= floor(sqrt(D)) with r = -b mod 2|c|
        i128 m = checked_mul(2, cabs);
        i128 r0 = mod128(checked_neg(f.b), m);
        r = checked_add(r0, checked_mul(m, checked_div(checked_sub(s, r0), m)));
        if (r > s) r = checked_sub(r, m);
    }
    i128 cnew = checked_div(checked_sub(checked_mul(r, r), D), checked_mul(4, f.c));
    return {f.c, r, cnew};
}

inline BQF bqf_reduce(BQF f, i128 D) {
    for (int i = 0; i < 512; ++i) {
        if (bqf_reduced(f, D)) return f;
        f = bqf_rho(f, D);
    }
    throw accuracy_error("bqf_reduce: no reduced form reached");
}

// The full rho-cycle through a reduced form.
inline std::vector<BQF> bqf_cycle(const BQF& start, i128 D) {
    std::vector<BQF> cyc;
    BQF f = start;
    for (int i = 0; i < 4096; ++i) {
        cyc.push_back(f);
        f = bqf_rho(f, D);
        if (f == start) return cyc;
    }
    throw accuracy_error("bqf_cycle: cycle did not close");
}

// All reduced forms of discriminant D > 0, D not a square.
inline std::vector<BQF> reduced_forms(i128 D) {
    std::vector<BQF> out;
    i128 s = isqrt128(D);
    for (i128 b = 1; b <= s; ++b) {
        if (mod128(checked_sub(D, checked_mul(b, b)), 4) != 0) continue;
        i128 mabs = checked_div(checked_sub(D, checked_mul(b, b)), 4);  // = |a*c|, a*c < 0
        for (i128 da = 1; checked_mul(da, da) <= mabs; ++da) {
            if (mabs % da != 0) continue;
            for (i128 aa : {da, mabs / da}) {
                i128 cc = mabs / aa;
                BQF f1{aa, b, checked_neg(cc)};
                if (bqf_primitive(f1) && bqf_reduced(f1, D)) out.push_back(f1);
                BQF f2{checked_neg(aa), b, cc};
                if (bqf_primitive(f2) && bqf_reduced(f2, D)) out.push_back(f2);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// GL2 change of variables x -> m11 x + m12 y, y -> m21 x + m22 y (det +-1).
inline BQF bqf_transform(const BQF& f, i128 m11, i128 m21, i128 m12, i128 m22) {
    i128 A = bqf_eval(f, m11, m21);
    i128 C = bqf_eval(f, m12, m22);
    i128 B = checked_add(
        checked_mul(2, checked_add(checked_mul(f.a, checked_mul(m11, m12)),
                                   checked_mul(f.c, checked_mul(m21, m22)))),
        checked_mul(f.b, checked_add(checked_mul(m11, m22), checked_mul(m12, m21))));
    return {A, B, C};
}

// Properly equivalent form whose leading coefficient is nonzero and coprime
// to m; bounded search over primitive vectors.
inline BQF bqf_represent_coprime(const BQF& f, i128 m) {
    for (i128 bound = 1; bound <= 64; ++bound) {
        for (i128 x = -bound; x <= bound; ++x) {
            for (i128 y = -bound; y <= bound; ++y) {
                if (std::max(abs128(x), abs128(y)) != bound && bound != 1) continue;
                if (gcd128(x, y) != 1) continue;
                i128 v = bqf_eval(f, x, y);
                if (v == 0 || gcd128(v, m) != 1) continue;
                i128 p, q;
                xgcd128(x, y, p, q);  // x p + y q = 1
                // columns (x, y) and (-q, p): det = x p + y q = 1
                return bqf_transform(f, x, y, checked_neg(q), p);
            }
        }
    }
    throw accuracy_error("bqf_represent_coprime: bounded search exhausted");
}

// Gauss composition on proper classes (concordant-form method).
inline BQF bqf_compose(BQF f1, BQF f2, i128 D) {
    if (gcd128(f1.a, f2.a) != 1) {
        f2 = bqf_represent_coprime(f2, f1.a);
        if (gcd128(f1.a, f2.a) != 1)
            throw accuracy_error("bqf_compose: could not make leading coefficients coprime");
    }
    // CRT: B = b1 mod 2a1, B = b2 mod 2a2 (consistent mod 2 by parity of D).
    i128 m1 = checked_mul(2, abs128(f1.a));
    i128 m2 = checked_mul(2, abs128(f2.a));
    i128 g, p, q;
    g = xgcd128(m1, m2, p, q);  // g = 2
    i128 diff = checked_sub(f2.b, f1.b);
    if (mod128(diff, g) != 0) throw accuracy_error("bqf_compose: CRT inconsistency");
    i128 lcm = checked_div(checked_mul(m1, m2), g);
    i128 B = mod128(checked_add(f1.b, checked_mul(m1, mulmod128(checked_div(diff, g), p,
                                                                checked_div(m2, g)))),
                    lcm);
    i128 A = checked_mul(f1.a, f2.a);
    i128 num = checked_sub(checked_mul(B, B), D);
    i128 den = checked_mul(4, A);
    if (mod128(num, abs128(den)) != 0) throw accuracy_error("bqf_compose: non-integral tail");
    return {A, B, checked_div(num, den)};
}

// ---------------------------------------------------------------------------
// Ideals.

struct FractionalIdeal {
    QuadElt alpha;   // first basis vector
    QuadElt z;       // second basis vector
    Rat norm;        // module index relative to O_c
    i128 conductor = 1;
};

// O_c itself: basis [1, c*omega], omega = (s + sqrt(d_K))/2, s = d_K mod 2.
inline FractionalIdeal unit_ideal(const RealQuadraticField& F, i128 c) {
    i128 s = mod128(F.d_K, 2);
    FractionalIdeal a;
    a.alpha = {Rat(1), Rat(0)};
    a.z = {Rat(checked_mul(c, s), 2), Rat(c, 2)};
    a.norm = Rat(1);
    a.conductor = c;
    return a;
}

// Integral ideal attached to a form: [ |a|, (b + c sqrt(d_K))/2 ].
inline FractionalIdeal ideal_from_form(const RealQuadraticField& F, const BQF& f, i128 c) {
    (void)F;
    FractionalIdeal a;
    a.alpha = {Rat(abs128(f.a)), Rat(0)};
    a.z = {Rat(f.b, 2), Rat(c, 2)};
    a.norm = Rat(abs128(f.a));
    a.conductor = c;
    return a;
}

// N(x*alpha + y*z) / N(ideal) as an integral binary quadratic form.
inline BQF ideal_norm_form(const RealQuadraticField& F, const FractionalIdeal& id) {
    Rat A = qe_norm(F, id.alpha) / id.norm;
    Rat C = qe_norm(F, id.z) / id.norm;
    // Tr(alpha * conj(z))
    QuadElt cross = qe_mul(F, id.alpha, qe_conj(id.z));
    Rat B = qe_trace(cross) / id.norm;
    if (!A.is_integer() || !B.is_integer() || !C.is_integer())
        throw validation_error("ideal_norm_form: non-integral form after clearing denominators");
    BQF f{A.num(), B.num(), C.num()};
    i128 want = checked_mul(checked_mul(id.conductor, id.conductor), F.d_K);
    if (bqf_disc(f) != want)
        throw validation_error("ideal_norm_form: discriminant mismatch");
    if (!bqf_primitive(f))
        throw validation_error("ideal_norm_form: form is imprimitive");
    return f;
}

// ---------------------------------------------------------------------------
// Ring class group.

struct RingClassGroup {
    RealQuadraticField field;
    i128 conductor = 1;
    i64 h = 0;                                  // order of the wide group
    std::vector<BQF> labels;                    // canonical label per class
    std::vector<FractionalIdeal> reps;          // one ideal per class
    std::vector<std::vector<int>> table;        // composition, table[i][j]
    int identity = 0;
    // Narrow-to-wide bookkeeping.
    i64 h_narrow = 0;
    std::vector<BQF> narrow_labels;

    int mul(int i, int j) const { return table[i][j]; }
    int inverse_of(int i) const {
        for (int j = 0; j < h; ++j)
            if (table[i][j] == identity) return j;
        throw accuracy_error("RingClassGroup: no inverse");
    }
};

namespace detail {

// Map reduced form -> narrow class index, by cycle membership.
struct CycleIndex {
    std::map<std::tuple<i64, i64, i64>, int> index;
    static std::tuple<i64, i64, i64> key(const BQF& f) {
        return {static_cast<i64>(f.a), static_cast<i64>(f.b), static_cast<i64>(f.c)};
    }
};

} // namespace detail

inline RingClassGroup ring_class_group(const RealQuadraticField& F, i128 c,
                                       i128 avoid = 1) {
    if (c <= 0) throw validation_error("ring_class_group: conductor must be positive");
    if (gcd128(c, F.d_K) != 1 && c != 1)
        throw validation_error("ring_class_group: conductor must be coprime to d_K");
    if (avoid != 1 && gcd128(c, avoid) != 1)
        throw validation_error("ring_class_group: conductor meets the avoidance set");

    const i128 D = checked_mul(checked_mul(c, c), F.d_K);
    std::vector<BQF> reduced = reduced_forms(D);

    // Partition reduced forms into rho-cycles: narrow classes.
    detail::CycleIndex ci;
    std::vector<std::vector<BQF>> cycles;
    for (const BQF& f : reduced) {
        if (ci.index.count(detail::CycleIndex::key(f))) continue;
        std::vector<BQF> cyc = bqf_cycle(f, D);
        int idx = static_cast<int>(cycles.size());
        for (const BQF& g : cyc) ci.index[detail::CycleIndex::key(g)] = idx;
        cycles.push_back(std::move(cyc));
    }
    const int hn = static_cast<int>(cycles.size());

    auto narrow_class_of = [&](const BQF& f) -> int {
        BQF r = bqf_reduce(f, D);
        auto it = ci.index.find(detail::CycleIndex::key(r));
        if (it == ci.index.end()) throw accuracy_error("ring_class_group: unindexed reduced form");
        return it->second;
    };

    // Principal form: identity of the narrow group.
    i128 b0 = mod128(D, 2);
    BQF principal{1, b0, checked_div(checked_sub(checked_mul(b0, b0), D), 4)};
    int narrow_id = narrow_class_of(principal);

    // Negative principal form: its class generates the narrow-to-wide kernel.
    BQF neg_principal{-1, b0, checked_div(checked_sub(D, checked_mul(b0, b0)), 4)};
    int neg_id = narrow_class_of(neg_principal);

    // Consistency with the unit-norm criterion: the kernel is trivial exactly
    // when O_c contains a unit of norm -1.
    UnitData U = fundamental_unit(F);
    OrderUnit w = order_unit(F, U, c);
    if ((w.norm == -1) != (neg_id == narrow_id))
        throw accuracy_error("ring_class_group: unit-norm vs form-class fusion mismatch");

    // Narrow composition table.
    std::vector<std::vector<int>> ntable(hn, std::vector<int>(hn, -1));
    // Representative (first cycle member) per narrow class.
    for (int i = 0; i < hn; ++i)
        for (int j = 0; j < hn; ++j)
            ntable[i][j] = narrow_class_of(bqf_compose(cycles[i][0], cycles[j][0], D));

    // Wide classes: orbits under multiplication by the negative principal class.
    std::vector<int> wide_of(hn, -1);
    std::vector<std::vector<int>> orbit_members;
    for (int i = 0; i < hn; ++i) {
        if (wide_of[i] >= 0) continue;
        int j = ntable[i][neg_id];
        int widx = static_cast<int>(orbit_members.size());
        wide_of[i] = widx;
        std::vector<int> mem{i};
        if (j != i) {
            wide_of[j] = widx;
            mem.push_back(j);
        }
        orbit_members.push_back(std::move(mem));
    }
    const int h = static_cast<int>(orbit_members.size());

    RingClassGroup G;
    G.field = F;
    G.conductor = c;
    G.h = h;
    G.h_narrow = hn;
    for (int i = 0; i < hn; ++i) {
        std::vector<BQF> sorted = cycles[i];
        std::sort(sorted.begin(), sorted.end());
        G.narrow_labels.push_back(sorted.front());
    }

    // Canonical wide label: lexicographically least reduced form across the orbit.
    std::vector<BQF> wlabels(h);
    for (int wdx = 0; wdx < h; ++wdx) {
        std::vector<BQF> all;
        for (int ncls : orbit_members[wdx])
            for (const BQF& g : cycles[ncls]) all.push_back(g);
        wlabels[wdx] = *std::min_element(all.begin(), all.end());
    }

    // Reorder so the identity is class 0, then by label order.
    std::vector<int> order(h);
    for (int i = 0; i < h; ++i) order[i] = i;
    int wid = wide_of[narrow_id];
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if ((a == wid) != (b == wid)) return a == wid;
        return wlabels[a] < wlabels[b];
    });
    std::vector<int> pos(h);
    for (int i = 0; i < h; ++i) pos[order[i]] = i;

    G.labels.resize(h);
    for (int i = 0; i < h; ++i) G.labels[pos[i]] = wlabels[i];
    G.identity = 0;

    G.table.assign(h, std::vector<int>(h, -1));
    for (int i = 0; i < hn; ++i)
        for (int j = 0; j < hn; ++j)
            G.table[pos[wide_of[i]]][pos[wide_of[j]]] = pos[wide_of[ntable[i][j]]];

    // Ideal representatives: the identity is O_c itself; other classes get the
    // ideal of a class form re-selected coprime to c * d_K * avoid.
    i128 copr = checked_mul(checked_mul(c, F.d_K), avoid);
    for (int i = 0; i < h; ++i) {
        if (i == G.identity) {
            G.reps.push_back(unit_ideal(F, c));
            continue;
        }
        BQF f = G.labels[i];
        if (gcd128(f.a, copr) != 1) f = bqf_represent_coprime(f, copr);
        G.reps.push_back(ideal_from_form(F, f, c));
    }
    return G;
}

// Narrow-or-wide class index of an arbitrary form of the right discriminant.
inline int class_index(const RingClassGroup& G, const BQF& f) {
    const i128 D = checked_mul(checked_mul(G.conductor, G.conductor), G.field.d_K);
    if (bqf_disc(f) != D) throw validation_error("class_index: wrong discriminant");
    BQF r = bqf_reduce(f, D);
    // Walk the cycle of r and compare against wide labels' cycles.
    for (int i = 0; i < G.h; ++i) {
        for (const BQF& g : bqf_cycle(bqf_reduce(G.labels[i], D), D))
            if (g == r) return i;
        // Also the fused partner cycle (negated leading sign).
        BQF fused{checked_neg(G.labels[i].a), G.labels[i].b, checked_neg(G.labels[i].c)};
        for (const BQF& g : bqf_cycle(bqf_reduce(fused, D), D))
            if (g == r) return i;
    }
    throw accuracy_error("class_index: form not located");
}

// ---------------------------------------------------------------------------
// Characters.

struct RingClassCharacter {
    std::vector<cplx> values;  // one per class index

    cplx operator()(int cls) const { return values[cls]; }
};

namespace detail {

// Decompose a finite abelian group (given by its table) into cyclic direct
// factors: generators with exact orders (g^order = identity in G, not merely
// in the subgroup built so far), so exponent vectors define characters.
inline void abelian_basis(const std::vector<std::vector<int>>& table, int identity,
                          std::vector<int>& gens, std::vector<int>& orders) {
    const int n = static_cast<int>(table.size());
    auto power = [&](int g, int e) {
        int x = identity;
        for (int i = 0; i < e; ++i) x = table[x][g];
        return x;
    };
    auto inverse = [&](int g) {
        for (int x = 0; x < n; ++x)
            if (table[g][x] == identity) return x;
        throw accuracy_error("abelian_basis: no inverse");
    };
    std::vector<int> sub{identity};
    std::set<int> in_sub{identity};
    gens.clear();
    orders.clear();
    while (static_cast<int>(sub.size()) < n) {
        // Element whose image in the quotient G/sub has maximal order.
        int best = -1, best_ord = 0;
        for (int g = 0; g < n; ++g) {
            if (in_sub.count(g)) continue;
            int x = g, k = 1;
            while (!in_sub.count(x)) {
                x = table[x][g];
                ++k;
            }
            if (k > best_ord) {
                best_ord = k;
                best = g;
            }
        }
        // Adjust the lift so best^best_ord = identity exactly: best^d lands in
        // sub; replace best by best * h with h in sub, h^d = (best^d)^{-1}.
        int d = best_ord;
        int excess = power(best, d);
        if (excess != identity) {
            int target = inverse(excess);
            int fixed = -1;
            for (int h : sub)
                if (power(h, d) == target) {
                    fixed = table[best][h];
                    break;
                }
            if (fixed < 0) throw accuracy_error("abelian_basis: lift adjustment failed");
            best = fixed;
        }
        gens.push_back(best);
        orders.push_back(best_ord);
        // Extend the subgroup by <best>.
        std::vector<int> next = sub;
        std::set<int> next_in = in_sub;
        int p = best;
        for (int e = 1; e < best_ord; ++e) {
            for (int s : sub) {
                int v = table[s][p];
                if (next_in.insert(v).second) next.push_back(v);
            }
            p = table[p][best];
        }
        sub = std::move(next);
        in_sub = std::move(next_in);
    }
}

} // namespace detail

// All h characters; the first is trivial.  Verified multiplicative.
inline std::vector<RingClassCharacter> characters(const RingClassGroup& G) {
    const int n = static_cast<int>(G.h);
    std::vector<int> gens, orders;
    detail::abelian_basis(G.table, G.identity, gens, orders);

    // Exponent vector of every element with respect to the generators.
    const int k = static_cast<int>(gens.size());
    std::map<int, std::vector<int>> expo;
    std::vector<int> e(k, 0);
    std::function<void(int, int)> walk = [&](int depth, int elem) {
        if (depth == k) {
            expo.emplace(elem, e);
            return;
        }
        int cur = elem;
        for (int i = 0; i < orders[depth]; ++i) {
            e[depth] = i;
            walk(depth + 1, cur);
            cur = G.table[cur][gens[depth]];
        }
        e[depth] = 0;
    };
    walk(0, G.identity);
    if (static_cast<int>(expo.size()) != n)
        throw accuracy_error("characters: generator decomposition is not a bijection");

    std::vector<RingClassCharacter> out;
    std::vector<int> m(k, 0);
    auto emit = [&]() {
        RingClassCharacter chi;
        chi.values.resize(n);
        for (const auto& [elem, ev] : expo) {
            double phase = 0.0;
            for (int i = 0; i < k; ++i)
                phase += static_cast<double>(m[i]) * ev[i] / orders[i];
            chi.values[elem] = e2pi(phase);
        }
        out.push_back(std::move(chi));
    };
    std::function<void(int)> genchi = [&](int depth) {
        if (depth == k) {
            emit();
            return;
        }
        for (int i = 0; i < orders[depth]; ++i) {
            m[depth] = i;
            genchi(depth + 1);
        }
        m[depth] = 0;
    };
    if (k == 0) {
        emit();
    } else {
        genchi(0);
    }

    // Trivial character first; stable order otherwise.
    std::stable_sort(out.begin(), out.end(),
                     [&](const RingClassCharacter& A, const RingClassCharacter& B) {
                         auto triv = [&](const RingClassCharacter& C) {
                             for (const cplx& v : C.values)
                                 if (std::abs(v - 1.0) > 1e-9) return 1;
                             return 0;
                         };
                         return triv(A) < triv(B);
                     });

    // Multiplicativity check on the full table.
    for (const auto& chi : out)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (std::abs(chi.values[G.table[i][j]] - chi.values[i] * chi.values[j]) > 1e-9)
                    throw accuracy_error("characters: multiplicativity failed");
    return out;
}

} // namespace geogreen
