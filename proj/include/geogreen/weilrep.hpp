#pragma once

// The Weil representation of SL2(Z) on the group algebra of a finite
// quadratic module: generator matrices, words in S and T for arbitrary
// unimodular gamma, vector-valued q-expansions, the canonical weight-2 lift
// of a newform onto a hyperbolic level module, harmonic Maass containers
// with their xi-image at coefficient level, and pullback of expansions to
// finite-index sublattices.

#include <geogreen/newform.hpp>
#include <geogreen/numerics.hpp>
#include <geogreen/qspace.hpp>

#include <Eigen/Dense>

#include <array>
#include <map>
#include <memory>
#include <utility>
#include <vector>

namespace geogreen {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct WeilRep {
    std::shared_ptr<const DiscriminantGroup> disc;
    int sig_mod8 = 0;  // p - q mod 8
    CMat rhoT, rhoS;
};

// The same group with the quadratic form negated; coset indexing unchanged.
inline DiscriminantGroup negated_group(const DiscriminantGroup& D) {
    DiscriminantGroup N = D;
    for (Rat& q : N.q_values) q = (-q).mod1();
    for (std::size_t i = 0; i < N.scaled_gram.rows(); ++i)
        for (std::size_t j = 0; j < N.scaled_gram.cols(); ++j)
            N.scaled_gram(i, j) = -N.scaled_gram(i, j);
    return N;
}

namespace detail {

// Integer model of the cosets: mu = n_mu / LV componentwise, so that
// (mu, nu) = n_mu^T S n_nu / LV^2 needs one exact modular reduction.
struct CosetInts {
    i128 LV = 1;
    std::vector<std::vector<i128>> n;
};

inline CosetInts coset_ints(const DiscriminantGroup& D) {
    CosetInts C;
    for (const auto& rep : D.coset_reps)
        for (const Rat& v : rep) C.LV = lcm128(C.LV, v.den());
    for (const auto& rep : D.coset_reps) {
        std::vector<i128> row;
        for (const Rat& v : rep) row.push_back(v.num() * (C.LV / v.den()));
        C.n.push_back(std::move(row));
    }
    return C;
}

inline Rat bilinear_fast(const DiscriminantGroup& D, const CosetInts& C,
                         std::size_t i, std::size_t j) {
    i128 acc = 0;
    std::size_t n = C.n[i].size();
    for (std::size_t r = 0; r < n; ++r) {
        if (C.n[i][r] == 0) continue;
        i128 partial = 0;
        for (std::size_t c = 0; c < n; ++c)
            partial += D.scaled_gram(r, c) * C.n[j][c];
        acc += C.n[i][r] * partial;
    }
    i128 m = C.LV * C.LV;
    return Rat(mod128(acc, m), m);
}

} // namespace detail

// Generator matrices: rhoT diagonal e(q(mu)); rhoS the normalized Gauss-sum
// matrix with phase e((q-p)/8).  The defining relations are verified to
// 1e-9 (exhaustively for small groups, on spread sample columns for large
// ones) together with the Milgram sum; failure signals inconsistent
// discriminant data and aborts.
inline WeilRep weil_generators(std::shared_ptr<const DiscriminantGroup> D,
                               std::pair<int, int> signature) {
    const DiscriminantGroup& G = *D;
    std::size_t n = static_cast<std::size_t>(G.order);
    WeilRep W;
    W.disc = D;
    W.sig_mod8 = ((signature.first - signature.second) % 8 + 8) % 8;

    W.rhoT = CMat::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) W.rhoT(i, i) = e2pi(G.q_values[i]);

    detail::CosetInts C = detail::coset_ints(G);
    cplx phase = e2pi(Rat(signature.second - signature.first, 8));
    double norm = 1.0 / std::sqrt(static_cast<double>(G.order));
    W.rhoS = CMat(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            cplx v = phase * norm * e2pi(-detail::bilinear_fast(G, C, i, j));
            W.rhoS(i, j) = v;
            W.rhoS(j, i) = v;
        }

    // Milgram: sum e(q(mu)) = sqrt|D| e(sig/8).
    KahanSumC mil;
    for (std::size_t i = 0; i < n; ++i) mil.add(e2pi(G.q_values[i]));
    cplx expect = std::sqrt(static_cast<double>(G.order)) * e2pi(Rat(W.sig_mod8, 8));
    if (std::abs(mil.value() - expect) > 1e-9 * std::sqrt(static_cast<double>(G.order)))
        throw accuracy_error("weil_generators: Milgram sum violated (signature/group mismatch)");

    // Relations on sample columns: unitarity, (ST)^3 = S^2, and
    // S^2 = e(-sig/4) * (mu -> -mu).
    std::vector<std::size_t> cols;
    if (n <= 128)
        for (std::size_t j = 0; j < n; ++j) cols.push_back(j);
    else
        for (std::size_t k = 0; k < 64; ++k) cols.push_back((k * n) / 64);
    cplx s2phase = e2pi(Rat(-W.sig_mod8, 4));
    for (std::size_t j : cols) {
        CVec ej = CVec::Zero(n);
        ej(j) = 1.0;
        CVec u = W.rhoS * (W.rhoS.conjugate() * ej);
        if ((u - ej).lpNorm<Eigen::Infinity>() > 1e-9)
            throw accuracy_error("weil_generators: rhoS not unitary");
        CVec s2 = W.rhoS * (W.rhoS * ej);
        CVec st3 = ej;
        for (int r = 0; r < 3; ++r) st3 = W.rhoS * (W.rhoT * st3);
        if ((st3 - s2).lpNorm<Eigen::Infinity>() > 1e-9)
            throw accuracy_error("weil_generators: (ST)^3 != S^2");
        CVec perm = CVec::Zero(n);
        perm(G.neg_index(j)) = s2phase;
        if ((s2 - perm).lpNorm<Eigen::Infinity>() > 1e-9)
            throw accuracy_error("weil_generators: S^2 != e(-sig/4) * negation");
    }
    return W;
}

inline WeilRep weil_from_lattice(const LatticeModel& L,
                                 std::shared_ptr<const DiscriminantGroup> D) {
    return weil_generators(std::move(D), {L.ambient.sig_pos, L.ambient.sig_neg});
}

// gamma in SL2(Z) as a word in S and T, leftmost factor first.
inline std::vector<std::pair<char, i64>> sl2_word(std::array<i64, 4> g) {
    auto [a, b, c, d] = g;
    if (checked_sub(checked_mul(i128{a}, d), checked_mul(i128{b}, c)) != 1)
        throw validation_error("sl2_word: matrix not in SL2(Z)");
    std::vector<std::pair<char, i64>> word;
    while (c != 0) {
        i64 q = a / c;
        if ((a % c != 0) && ((a < 0) != (c < 0))) --q;  // floor division
        word.push_back({'T', q});
        a -= q * c;
        b -= q * d;
        // Multiply by S^{-1} on the left and record S.
        word.push_back({'S', 1});
        std::swap(a, c);
        std::swap(b, d);
        c = -c;
        d = -d;
    }
    word.push_back({'T', a * b});
    if (a == -1) {
        word.push_back({'S', 1});
        word.push_back({'S', 1});
    }
    // Exact reassembly guard: left-multiply factors from the rightmost end.
    i128 ra = 1, rb = 0, rc = 0, rd = 1;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        auto [op, k] = *it;
        if (op == 'T') {
            ra = checked_add(ra, checked_mul(i128{k}, rc));
            rb = checked_add(rb, checked_mul(i128{k}, rd));
        } else {
            std::swap(ra, rc);
            std::swap(rb, rd);
            ra = -ra;
            rb = -rb;
        }
    }
    if (ra != g[0] || rb != g[1] || rc != g[2] || rd != g[3])
        throw accuracy_error("sl2_word: reassembly mismatch");
    return word;
}

inline CVec rho_apply(const WeilRep& W, const std::vector<std::pair<char, i64>>& word,
                      CVec v) {
    const DiscriminantGroup& G = *W.disc;
    std::size_t n = static_cast<std::size_t>(G.order);
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        auto [op, k] = *it;
        if (op == 'T') {
            for (std::size_t i = 0; i < n; ++i)
                v(i) *= e2pi((Rat(i128{k}) * G.q_values[i]).mod1());
        } else {
            v = W.rhoS * v;
        }
    }
    return v;
}

inline CVec rho_apply(const WeilRep& W, std::array<i64, 4> gamma, const CVec& v) {
    return rho_apply(W, sl2_word(gamma), v);
}

inline CMat rho_of_gamma(const WeilRep& W, std::array<i64, 4> gamma) {
    auto word = sl2_word(gamma);
    std::size_t n = static_cast<std::size_t>(W.disc->order);
    CMat out(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        CVec ej = CVec::Zero(n);
        ej(j) = 1.0;
        out.col(j) = rho_apply(W, word, ej);
    }
    return out;
}

// ----------------------------------------------------------------------------
// Vector-valued q-expansions.

struct VectorQExpansion {
    std::shared_ptr<const DiscriminantGroup> disc;
    Rat weight;
    i64 denom = 1;
    // (coset index, exponent numerator n) -> coefficient of e((n/denom) tau).
    std::map<std::pair<int, i64>, cplx> coeffs;
};

inline void validate_expansion(const VectorQExpansion& f) {
    if (f.denom < 1) throw validation_error("VectorQExpansion: denom must be positive");
    for (const auto& [key, c] : f.coeffs) {
        auto [mu, n] = key;
        if (mu < 0 || mu >= static_cast<int>(f.disc->order))
            throw validation_error("VectorQExpansion: coset index out of range");
        if ((Rat(n, f.denom) - f.disc->q_values[mu]).mod1() != Rat(0))
            throw validation_error("VectorQExpansion: exponent violates coset congruence");
        (void)c;
    }
}

inline CVec evaluate_expansion(const VectorQExpansion& f, cplx tau) {
    std::size_t n = static_cast<std::size_t>(f.disc->order);
    CVec out = CVec::Zero(n);
    for (const auto& [key, c] : f.coeffs) {
        auto [mu, m] = key;
        out(mu) += c * std::exp(cplx(0, 2 * PI) * (static_cast<double>(m) / f.denom) * tau);
    }
    return out;
}

// <<f, g>> = sum_mu f_mu g_mu; the natural scalar pairing of a form with one
// in the dual (negated-form) representation.
inline cplx pair_eval(const VectorQExpansion& f, const VectorQExpansion& g, cplx tau) {
    if (f.disc->order != g.disc->order)
        throw validation_error("pair_eval: component count mismatch");
    CVec a = evaluate_expansion(f, tau), b = evaluate_expansion(g, tau);
    KahanSumC s;
    for (Eigen::Index i = 0; i < a.size(); ++i) s.add(a(i) * b(i));
    return s.value();
}

// ----------------------------------------------------------------------------
// The hyperbolic level module and the canonical weight-2 lift.

// Direct sum of one hyperbolic plane scaled by each prime of N plus one
// unimodular hyperbolic plane.  The unimodular summand pins the content of
// the Gram to 1, so the minimal even rescale is 1 and the discriminant group
// is (Z/N)^2 with q((r,s)) = rs/N, level N, for N squarefree.
inline LatticeModel lift_lattice(i64 N) {
    if (N < 1) throw validation_error("lift_lattice: N must be positive");
    if (!is_squarefree(N)) throw validation_error("lift_lattice: N must be squarefree");
    std::vector<i64> blocks;
    for (const auto& [p, e] : factorize(N)) blocks.push_back(static_cast<i64>(p));
    blocks.push_back(1);
    std::size_t n = 2 * blocks.size();
    QuadraticSpaceModel amb;
    amb.rank = static_cast<int>(n);
    amb.gram = QMat(n, n);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        amb.gram(2 * k, 2 * k + 1) = amb.gram(2 * k + 1, 2 * k) = Rat(i128{blocks[k]});
        amb.basis_tags.push_back("e" + std::to_string(blocks[k]));
        amb.basis_tags.push_back("f" + std::to_string(blocks[k]));
    }
    auto [p, q] = exact_signature(amb.gram);
    amb.sig_pos = p;
    amb.sig_neg = q;
    return make_lattice(amb, QMat::identity(n));
}

enum class SConvention { prime_divisors, all_divisors };

// Weight-2 lift of a newform coefficient table onto the level module:
// g_mu = sum over m > 0 with m = N q(mu) mod N of c_f(m) s(m) e(m tau / N),
// where s(m) counts 2^{#primes | gcd(m,N)} under the default convention.
inline VectorQExpansion lift_newform(const CoeffTable& T,
                                     const LatticeModel& L,
                                     std::shared_ptr<const DiscriminantGroup> D,
                                     SConvention conv = SConvention::prime_divisors) {
    i64 N = T.level;
    if (N < 1) throw validation_error("lift_newform: coefficient table has no level");
    if (!is_squarefree(N)) throw validation_error("lift_newform: level must be squarefree");
    if (!(D->scaled_gram == L.scaled_gram))
        throw validation_error("lift_newform: discriminant group does not match lattice");
    VectorQExpansion g;
    g.disc = std::move(D);
    g.weight = Rat(2);
    g.denom = N;
    std::vector<i64> residue(g.disc->order);
    for (std::size_t mu = 0; mu < static_cast<std::size_t>(g.disc->order); ++mu) {
        Rat r = Rat(i128{N}) * g.disc->q_values[mu];
        if (r.den() != 1)
            throw validation_error(
                "lift_newform: congruence class N*q(mu) non-integral (scaling mismatch)");
        residue[mu] = static_cast<i64>(mod128(r.num(), N));
    }
    for (std::size_t mu = 0; mu < residue.size(); ++mu) {
        for (i64 m = residue[mu] == 0 ? N : residue[mu]; m <= T.M; m += N) {
            i64 g_mn = static_cast<i64>(gcd128(m, N));
            i64 s;
            if (conv == SConvention::prime_divisors)
                s = i64{1} << count_distinct_prime_divisors(g_mn);
            else
                s = i64{1} << sigma0(g_mn);
            i64 c = T.c(m) * s;
            if (c != 0) g.coeffs[{static_cast<int>(mu), m}] = static_cast<double>(c);
        }
    }
    validate_expansion(g);
    return g;
}

inline VectorQExpansion lift_newform(const CoeffTable& T, const LatticeModel& L,
                                     SConvention conv = SConvention::prime_divisors) {
    auto D = std::make_shared<const DiscriminantGroup>(dual_and_discriminant(L));
    return lift_newform(T, L, std::move(D), conv);
}

// Second route to a weight-2 vector on the level module, built so that
// modularity is automatic: average f over the cosets of the level subgroup,
// seeded at the zero coset.  Unfolding the average gives unit multipliers on
// every congruence class plus an echo of f itself on the zero coset, scaled
// by N times the Fricke eigenvalue lambda = -c_f(N).  Prime level only: the
// coset unfolding for composite level needs one Atkin-Lehner constant per
// divisor and is out of scope.
inline VectorQExpansion induced_lift(const CoeffTable& T, const LatticeModel& L,
                                     std::shared_ptr<const DiscriminantGroup> D) {
    i64 N = T.level;
    if (N < 2 || factorize(N).size() != 1 || !is_squarefree(N))
        throw validation_error("induced_lift: level must be prime");
    if (!(D->scaled_gram == L.scaled_gram))
        throw validation_error("induced_lift: discriminant group does not match lattice");
    i64 fricke = -T.c(N);
    if (fricke != 1 && fricke != -1)
        throw accuracy_error("induced_lift: coefficient at the level is not a unit");
    VectorQExpansion g;
    g.disc = std::move(D);
    g.weight = Rat(2);
    g.denom = N;
    for (std::size_t mu = 0; mu < static_cast<std::size_t>(g.disc->order); ++mu) {
        Rat r = Rat(i128{N}) * g.disc->q_values[mu];
        if (r.den() != 1)
            throw validation_error(
                "induced_lift: congruence class N*q(mu) non-integral (scaling mismatch)");
        i64 res = static_cast<i64>(mod128(r.num(), N));
        for (i64 m = res == 0 ? N : res; m <= T.M; m += N) {
            i64 c = T.c(m);
            if (mu == 0 && m % N == 0) c += N * fricke * T.c(m / N);
            if (c != 0) g.coeffs[{static_cast<int>(mu), m}] = static_cast<double>(c);
        }
    }
    validate_expansion(g);
    return g;
}

// ----------------------------------------------------------------------------
// Harmonic Maass containers and the xi-operator at coefficient level.

struct MinusTerm {
    int mu = 0;
    Rat m;   // strictly negative exponent
    cplx c;
};

struct HarmonicMaassInput {
    VectorQExpansion plus;
    std::vector<MinusTerm> minus;
};

inline void validate_maass(const HarmonicMaassInput& H) {
    validate_expansion(H.plus);
    for (const auto& t : H.minus) {
        if (!(t.m < Rat(0)))
            throw validation_error("HarmonicMaassInput: minus exponent must be negative");
        if (t.mu < 0 || t.mu >= static_cast<int>(H.plus.disc->order))
            throw validation_error("HarmonicMaassInput: coset index out of range");
        if ((t.m - H.plus.disc->q_values[t.mu]).mod1() != Rat(0))
            throw validation_error("HarmonicMaassInput: minus exponent violates congruence");
    }
}

// Whittaker profile of the non-holomorphic part at weight l:
// W_l(y) = Gamma(1 - l, 2|y|) for y < 0.
inline double whittaker_profile(double l, double y) {
    return upper_gamma(1.0 - l, 2.0 * std::abs(y));
}

inline CVec evaluate_maass(const HarmonicMaassInput& H, cplx tau) {
    CVec out = evaluate_expansion(H.plus, tau);
    double l = H.plus.weight.to_double();
    double v = tau.imag();
    for (const auto& t : H.minus) {
        double m = t.m.to_double();
        out(t.mu) += t.c * whittaker_profile(l, 2 * PI * m * v) *
                     std::exp(cplx(0, 2 * PI) * m * tau);
    }
    return out;
}

namespace detail {

// Differential-operator oracle for the xi closed form: xi_l f equals
// 2 i v^l conj(d f / d tau-bar), approximated by central differences on the
// truncated series.  Runs once per process before the first xi_image call.
inline void xi_selftest() {
    QuadraticSpaceModel amb;
    amb.rank = 1;
    amb.basis_tags = {"e"};
    amb.gram = QMat(1, 1);
    amb.gram(0, 0) = Rat(2);
    amb.sig_pos = 1;
    amb.sig_neg = 0;
    LatticeModel L = make_lattice(amb, QMat::identity(1));
    auto D = std::make_shared<const DiscriminantGroup>(dual_and_discriminant(L));

    HarmonicMaassInput H;
    H.plus.disc = D;
    H.plus.weight = Rat(0);
    H.plus.denom = 4;
    // A holomorphic term must not contribute to the tau-bar derivative.
    H.plus.coeffs[{0, 4}] = cplx(0.5, -0.4);
    H.minus.push_back({0, Rat(-1), cplx(0.7, 0.3)});
    H.minus.push_back({1, Rat(-3, 4), cplx(-0.2, 1.1)});
    validate_maass(H);

    const double h = 1e-5;
    for (cplx tau : {cplx(0.3, 0.8), cplx(-0.2, 1.3), cplx(0.05, 0.6)}) {
        CVec fu_p = evaluate_maass(H, tau + h);
        CVec fu_m = evaluate_maass(H, tau - h);
        CVec fv_p = evaluate_maass(H, tau + cplx(0, h));
        CVec fv_m = evaluate_maass(H, tau - cplx(0, h));
        for (const auto& t : H.minus) {
            cplx dtb = ((fu_p(t.mu) - fu_m(t.mu)) + cplx(0, 1) * (fv_p(t.mu) - fv_m(t.mu))) /
                       (2.0 * (2.0 * h));
            cplx xi_num = cplx(0, 2) * std::conj(dtb);  // weight l = 0
            // Closed form evaluated at tau.
            double n = -t.m.to_double();
            cplx b = -(4 * PI * n) * std::conj(t.c);
            cplx xi_closed = b * std::exp(cplx(0, 2 * PI) * n * tau);
            if (std::abs(xi_num - xi_closed) > 1e-6 * (1.0 + std::abs(xi_closed)))
                throw accuracy_error("xi_image: closed form disagrees with operator oracle");
        }
    }
}

} // namespace detail

// Coefficient-level xi: b(mu, n) = -(4 pi n)^{1-l} conj(c^-(mu, -n)) for
// n > 0, landing in weight 2 - l for the negated-form representation.
inline VectorQExpansion xi_image(const HarmonicMaassInput& H) {
    if (H.plus.weight != Rat(0))
        throw validation_error("xi_image: only weight 0 inputs supported");
    validate_maass(H);
    static bool checked = false;
    if (!checked) {
        detail::xi_selftest();
        checked = true;
    }
    VectorQExpansion out;
    out.disc = std::make_shared<const DiscriminantGroup>(negated_group(*H.plus.disc));
    out.weight = Rat(2);
    out.denom = H.plus.denom;
    for (const auto& t : H.minus) {
        Rat n = -t.m;
        Rat num = n * Rat(i128{H.plus.denom});
        if (num.den() != 1)
            throw validation_error("xi_image: exponent not representable at stored denom");
        cplx b = -(4 * PI * n.to_double()) * std::conj(t.c);
        out.coeffs[{t.mu, static_cast<i64>(num.num())}] += b;
    }
    validate_expansion(out);
    return out;
}

// ----------------------------------------------------------------------------
// Sublattice restriction.

struct SublatticeMap {
    std::shared_ptr<const DiscriminantGroup> sub;  // M^v/M at the scale of L
    std::vector<int> image;                        // M-coset -> L-coset, or -1
};

// M given in the same ambient space as L, contained in L with finite index.
inline SublatticeMap sublattice_map(const DiscriminantGroup& DL,
                                    const LatticeModel& L, const LatticeModel& M) {
    if (L.ambient.gram.rows() != M.ambient.gram.rows() ||
        !(L.ambient.gram == M.ambient.gram))
        throw validation_error("sublattice_map: ambient spaces differ");
    QMat C = inverse(L.basis_matrix) * M.basis_matrix;
    std::size_t n = C.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (C(i, j).den() != 1)
                throw validation_error("sublattice_map: M is not a sublattice of L");

    // M's Gram at L's scale must stay even integral.
    IMat SM(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Rat v = L.scale * M.gen_gram(i, j);
            if (v.den() != 1 || (i == j && mod128(v.num(), 2) != 0))
                throw accuracy_error("sublattice_map: sublattice not even at common scale");
            SM(i, j) = v.num();
        }

    SublatticeMap out;
    out.sub = std::make_shared<const DiscriminantGroup>(discriminant_group_of(SM));
    const IMat& SL = DL.scaled_gram;
    for (const auto& x : out.sub->coset_reps) {
        // Coordinates of the coset in L's basis.
        std::vector<Rat> y(n, Rat(0));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) y[r] += C(r, c) * x[c];
        // In L^v iff SL * y is integral.
        bool in_dual = true;
        for (std::size_t r = 0; r < n && in_dual; ++r) {
            Rat s;
            for (std::size_t c = 0; c < n; ++c) s += Rat(SL(r, c)) * y[c];
            if (s.den() != 1) in_dual = false;
        }
        out.image.push_back(in_dual ? DL.index_of(y) : -1);
    }
    return out;
}

inline VectorQExpansion restrict_to_sublattice(const VectorQExpansion& f,
                                               const LatticeModel& L,
                                               const LatticeModel& M) {
    if (!(f.disc->scaled_gram == L.scaled_gram))
        throw validation_error("restrict_to_sublattice: expansion does not live on L");
    SublatticeMap map = sublattice_map(*f.disc, L, M);
    VectorQExpansion out;
    out.disc = map.sub;
    out.weight = f.weight;
    out.denom = f.denom;
    for (std::size_t x = 0; x < map.image.size(); ++x) {
        if (map.image[x] < 0) continue;
        for (const auto& [key, c] : f.coeffs)
            if (key.first == map.image[x])
                out.coeffs[{static_cast<int>(x), key.second}] = c;
    }
    validate_expansion(out);
    return out;
}

// Trace in the other direction: component at nu sums the M-components over
// the fiber; thetas of sublattices push forward to thetas this way.
inline VectorQExpansion expansion_pushforward(const VectorQExpansion& g,
                                              std::shared_ptr<const DiscriminantGroup> DL,
                                              const SublatticeMap& map) {
    VectorQExpansion out;
    out.disc = std::move(DL);
    out.weight = g.weight;
    out.denom = g.denom;
    for (const auto& [key, c] : g.coeffs) {
        int nu = map.image.at(key.first);
        if (nu < 0) continue;
        out.coeffs[{nu, key.second}] += c;
    }
    validate_expansion(out);
    return out;
}

// ----------------------------------------------------------------------------
// JSON formats.

inline nlohmann::json expansion_json(const VectorQExpansion& f) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, c] : f.coeffs)
        entries.push_back({{"mu_index", key.first},
                           {"n", key.second},
                           {"re", c.real()},
                           {"im", c.imag()}});
    return {{"denom", f.denom},
            {"weight", rat_json(f.weight)},
            {"entries", entries}};
}

inline VectorQExpansion expansion_from_json(const nlohmann::json& j,
                                            std::shared_ptr<const DiscriminantGroup> D) {
    VectorQExpansion f;
    f.disc = std::move(D);
    f.denom = j.at("denom").get<i64>();
    const auto& w = j.at("weight");
    f.weight = Rat(parse_i128(w.at(0).get<std::string>()),
                   parse_i128(w.at(1).get<std::string>()));
    for (const auto& e : j.at("entries"))
        f.coeffs[{e.at("mu_index").get<int>(), e.at("n").get<i64>()}] =
            cplx(e.at("re").get<double>(), e.at("im").get<double>());
    validate_expansion(f);
    return f;
}

inline HarmonicMaassInput maass_from_json(const nlohmann::json& j,
                                          std::shared_ptr<const DiscriminantGroup> D) {
    HarmonicMaassInput H;
    H.plus.disc = D;
    H.plus.denom = j.at("denom").get<i64>();
    const auto& w = j.at("weight");
    H.plus.weight = Rat(parse_i128(w.at(0).get<std::string>()),
                        parse_i128(w.at(1).get<std::string>()));
    for (const auto& e : j.at("plus"))
        H.plus.coeffs[{e.at("mu_index").get<int>(), e.at("n").get<i64>()}] =
            cplx(e.at("re").get<double>(), e.at("im").get<double>());
    for (const auto& e : j.at("minus")) {
        MinusTerm t;
        t.mu = e.at("mu_index").get<int>();
        t.m = Rat(e.at("n").get<i64>(), H.plus.denom);
        t.c = cplx(e.at("re").get<double>(), e.at("im").get<double>());
        H.minus.push_back(t);
    }
    validate_maass(H);
    return H;
}

} // namespace geogreen
