#pragma once

// Rational quadratic spaces attached to an ideal: the rank-4 models built
// from the norm form (one with hyperbolic xy-part, one split as a difference
// of two norm forms), their rank-2 one-factor pieces, exact signatures by
// Descartes counting on the characteristic polynomial, Clifford invariants
// (discriminant square class, centre type), even integral lattice models
// with minimal rescale, dual lattices, and finite discriminant groups with
// exact q-values mod 1.
//
// The hyperbolic xy-block of the first model is stored in rationalized form:
// the radical coordinate is measured against the primitive radical vector of
// the ideal, which scales the two formal entries -2*alpha*z and +2*alpha*z
// by the irrational unit; every invariant computed here (signature, square
// class, centre) is insensitive to that scale.

#include <geogreen/quadorder.hpp>

#include <json.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace geogreen {

enum class SpaceVariant { qA, QA, V1, V2 };
enum class CentreType { split, field };

struct QuadraticSpaceModel {
    int rank = 0;
    std::vector<std::string> basis_tags;
    QMat gram;
    int sig_pos = 0, sig_neg = 0;
};

// Characteristic polynomial by Faddeev-LeVerrier in exact arithmetic;
// returns coefficients [1, c1, ..., cn] of lambda^n + c1 lambda^{n-1} + ...
inline std::vector<Rat> char_poly(const QMat& G) {
    std::size_t n = G.rows();
    if (G.cols() != n) throw validation_error("char_poly: matrix not square");
    std::vector<Rat> c(n + 1);
    c[0] = Rat(1);
    QMat M = G;
    for (std::size_t k = 1; k <= n; ++k) {
        Rat tr;
        for (std::size_t i = 0; i < n; ++i) tr += M(i, i);
        c[k] = -tr / Rat(static_cast<i128>(k));
        if (k == n) break;
        for (std::size_t i = 0; i < n; ++i) M(i, i) += c[k];
        M = G * M;
    }
    return c;
}

// Exact signature of a symmetric rational matrix: all eigenvalues are real,
// so Descartes' sign-change count on the characteristic polynomial is exact.
// Throws on a degenerate (singular) form.
inline std::pair<int, int> exact_signature(const QMat& G) {
    for (std::size_t i = 0; i < G.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (G(i, j) != G(j, i))
                throw validation_error("exact_signature: matrix not symmetric");
    std::vector<Rat> c = char_poly(G);
    if (c.back() == Rat(0))
        throw validation_error("exact_signature: degenerate Gram matrix");
    auto changes = [&](bool flip) {
        int cnt = 0, last = 0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            Rat v = c[k];
            if (flip && (c.size() - 1 - k) % 2 == 1) v = -v;
            if (v == Rat(0)) continue;
            int s = v < Rat(0) ? -1 : 1;
            if (last != 0 && s != last) ++cnt;
            last = s;
        }
        return cnt;
    };
    return {changes(false), changes(true)};
}

namespace detail {

// Gram matrix of the one-factor norm form in the ideal basis [alpha, z]:
// [[2 N(alpha), Tr(alpha z^tau)], [Tr(alpha z^tau), 2 N(z)]] / N(a).
inline QMat ideal_gram(const RealQuadraticField& F, const FractionalIdeal& id) {
    QMat B(2, 2);
    B(0, 0) = Rat(2) * qe_norm(F, id.alpha) / id.norm;
    B(1, 1) = Rat(2) * qe_norm(F, id.z) / id.norm;
    B(0, 1) = B(1, 0) = qe_trace(qe_mul(F, id.alpha, qe_conj(id.z))) / id.norm;
    return B;
}

// Radical coefficient of the primitive vector of the rank-1 sublattice
// {v in [alpha, z] : Tr-free part only}, i.e. the smallest positive gamma
// with gamma * sqrt(d_K) in the ideal lattice.
inline Rat primitive_radical_coefficient(const FractionalIdeal& id) {
    if (id.alpha.y != Rat(0))
        throw validation_error("qspace: ideal basis not normalized (alpha not rational)");
    if (id.z.y == Rat(0))
        throw validation_error("qspace: degenerate ideal basis (z rational)");
    // Solve m * alpha.x + n * z.x = 0 in coprime integers with n minimal > 0.
    Rat a = id.alpha.x, zx = id.z.x;
    if (zx == Rat(0)) return id.z.y < Rat(0) ? -id.z.y : id.z.y;
    i128 ps = checked_mul(a.num(), zx.den());
    i128 rq = checked_mul(zx.num(), a.den());
    i128 g = gcd128(ps, rq);
    i128 n = abs128(ps / g);
    Rat gamma = Rat(n) * id.z.y;
    return gamma < Rat(0) ? -gamma : gamma;
}

} // namespace detail

// The four space variants, all with exact rational Gram matrices:
//   qA: hyperbolic xy-block (rationalized) plus the norm-form block,
//       the model whose even Clifford algebra has centre K;
//   QA: norm-form block plus its negative, the split (2,2) model;
//   V1: rank 2, negative norm form;  V2: rank 2, norm form.
inline QuadraticSpaceModel build_space(const RealQuadraticField& F,
                                       const FractionalIdeal& id,
                                       SpaceVariant variant) {
    QMat B = detail::ideal_gram(F, id);
    QuadraticSpaceModel V;
    switch (variant) {
        case SpaceVariant::qA: {
            Rat s = Rat(detail::primitive_radical_coefficient(id)) *
                    (id.alpha.x < Rat(0) ? -id.alpha.x : id.alpha.x);
            V.rank = 4;
            V.basis_tags = {"v1", "v2", "v3", "v4"};
            V.gram = QMat(4, 4);
            V.gram(0, 0) = Rat(-2) * s;
            V.gram(1, 1) = Rat(2) * s;
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j)
                    V.gram(2 + i, 2 + j) = B(i, j);
            break;
        }
        case SpaceVariant::QA: {
            V.rank = 4;
            V.basis_tags = {"w1", "w2", "w3", "w4"};
            V.gram = QMat(4, 4);
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j) {
                    V.gram(i, j) = B(i, j);
                    V.gram(2 + i, 2 + j) = -B(i, j);
                }
            break;
        }
        case SpaceVariant::V1:
        case SpaceVariant::V2: {
            V.rank = 2;
            V.basis_tags = {"u1", "u2"};
            V.gram = QMat(2, 2);
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j)
                    V.gram(i, j) = variant == SpaceVariant::V2 ? B(i, j) : -B(i, j);
            break;
        }
    }
    auto [p, q] = exact_signature(V.gram);
    V.sig_pos = p;
    V.sig_neg = q;
    int want_p = V.rank == 4 ? 2 : 1, want_q = V.rank == 4 ? 2 : 1;
    if (p != want_p || q != want_q)
        throw accuracy_error("build_space: signature mismatch");
    return V;
}

inline i128 squarefree_part(i128 n) {
    if (n == 0) throw validation_error("squarefree_part: zero input");
    i128 sign = n < 0 ? -1 : 1;
    i128 out = sign;
    for (const auto& [p, e] : factorize(abs128(n)))
        if (e % 2 == 1) out = checked_mul(out, p);
    return out;
}

struct SpaceInvariants {
    i128 square_class;  // squarefree integer representing det mod squares
    Rat delta_sq;       // det / 16
    CentreType centre;
};

inline Rat det_rat(const QMat& G) {
    std::vector<Rat> c = char_poly(G);
    Rat d = c.back();
    if (G.rows() % 2 == 1) d = -d;
    return d;
}

inline SpaceInvariants space_invariants(const QuadraticSpaceModel& V) {
    if (V.rank != 4) throw validation_error("space_invariants: rank must be 4");
    Rat d = det_rat(V.gram);
    SpaceInvariants out;
    out.square_class = squarefree_part(checked_mul(d.num(), d.den()));
    out.delta_sq = d / Rat(16);
    out.centre = out.square_class == 1 ? CentreType::split : CentreType::field;
    return out;
}

// Minimal positive rational s such that s*G is integral with even diagonal.
inline Rat minimal_even_scale(const QMat& G) {
    i128 num_gcd = 0, den_lcm = 1;
    auto fold = [&](const Rat& v) {
        if (v == Rat(0)) return;
        num_gcd = gcd128(num_gcd, abs128(v.num()));
        den_lcm = lcm128(den_lcm, v.den());
    };
    for (std::size_t i = 0; i < G.rows(); ++i)
        for (std::size_t j = 0; j < G.cols(); ++j)
            fold(i == j ? G(i, j) / Rat(2) : G(i, j));
    if (num_gcd == 0) throw validation_error("minimal_even_scale: zero matrix");
    return Rat(den_lcm, num_gcd);
}

struct LatticeModel {
    QuadraticSpaceModel ambient;
    QMat basis_matrix;  // columns are lattice generators in the ambient basis
    QMat gen_gram;      // Gram of the generators under the ambient form
    Rat scale;          // minimal even-integral rescale
    IMat scaled_gram;   // scale * gen_gram, even integral
};

inline LatticeModel make_lattice(QuadraticSpaceModel ambient, QMat basis) {
    LatticeModel L;
    L.gen_gram = basis.transpose() * ambient.gram * basis;
    L.ambient = std::move(ambient);
    L.basis_matrix = std::move(basis);
    L.scale = minimal_even_scale(L.gen_gram);
    std::size_t n = L.gen_gram.rows();
    L.scaled_gram = IMat(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Rat v = L.scale * L.gen_gram(i, j);
            if (v.den() != 1)
                throw accuracy_error("make_lattice: scaled Gram not integral");
            if (i == j && mod128(v.num(), 2) != 0)
                throw accuracy_error("make_lattice: scaled diagonal not even");
            L.scaled_gram(i, j) = v.num();
        }
    return L;
}

inline LatticeModel make_lattice(QuadraticSpaceModel ambient, QMat basis, Rat scale) {
    LatticeModel L = make_lattice(std::move(ambient), std::move(basis));
    if (scale != L.scale)
        throw validation_error("make_lattice: declared scale is not minimal");
    return L;
}

struct LevelLattices {
    LatticeModel full;  // both factors, ambient QA
    LatticeModel one;   // single factor, ambient V1 (negative form)
    LatticeModel two;   // single factor, ambient V2 (norm form)
};

// Lattice (1/N) a in each factor.
inline LevelLattices lattice_from_level(const RealQuadraticField& F,
                                        const FractionalIdeal& id, i64 N) {
    if (N < 1) throw validation_error("lattice_from_level: N must be positive");
    Rat invN(1, N);
    QMat b4 = QMat::identity(4), b2 = QMat::identity(2);
    for (std::size_t i = 0; i < 4; ++i) b4(i, i) = invN;
    for (std::size_t i = 0; i < 2; ++i) b2(i, i) = invN;
    LevelLattices out{
        make_lattice(build_space(F, id, SpaceVariant::QA), b4),
        make_lattice(build_space(F, id, SpaceVariant::V1), b2),
        make_lattice(build_space(F, id, SpaceVariant::V2), b2)};
    return out;
}

struct DiscriminantGroup {
    std::vector<i128> invariant_factors;       // the factors > 1
    std::vector<std::vector<Rat>> coset_reps;  // lattice-basis coords in [0,1)
    std::vector<Rat> q_values;                 // Q(mu) mod 1
    IMat scaled_gram;
    i128 order = 1;
    i128 level = 1;       // of the scaled even model
    Rat model_level;      // of the unscaled Gram, recorded as metadata

    std::map<std::string, int> rep_index;

    static std::string key(const std::vector<Rat>& mu) {
        std::string s;
        for (const Rat& v : mu) {
            s += to_string_i128(v.num());
            s += '/';
            s += to_string_i128(v.den());
            s += ',';
        }
        return s;
    }

    int index_of(std::vector<Rat> mu) const {
        for (Rat& v : mu) v = v.mod1();
        auto it = rep_index.find(key(mu));
        if (it == rep_index.end())
            throw validation_error("DiscriminantGroup: vector is not a coset representative");
        return it->second;
    }

    int neg_index(std::size_t i) const {
        std::vector<Rat> m = coset_reps.at(i);
        for (Rat& v : m) v = (-v).mod1();
        return index_of(m);
    }

    int add_index(std::size_t i, std::size_t j) const {
        std::vector<Rat> m = coset_reps.at(i);
        for (std::size_t k = 0; k < m.size(); ++k) m[k] = (m[k] + coset_reps.at(j)[k]).mod1();
        return index_of(m);
    }

    Rat bilinear(std::size_t i, std::size_t j) const {
        const auto& mu = coset_reps.at(i);
        const auto& nu = coset_reps.at(j);
        Rat s;
        for (std::size_t r = 0; r < mu.size(); ++r)
            for (std::size_t c = 0; c < nu.size(); ++c)
                s += mu[r] * Rat(scaled_gram(r, c)) * nu[c];
        return s.mod1();
    }
};

// Discriminant group of an even integral Gram matrix, through its Smith
// normal form.  Shared by the minimal-scale path and by sublattice
// restriction, which must key both lattices on one common scale.
inline DiscriminantGroup discriminant_group_of(const IMat& S, i128 order_bound = 1000000) {
    std::size_t n = S.rows();
    i128 det = det_i128(S);
    if (det == 0) throw validation_error("dual_and_discriminant: singular lattice");
    i128 order = abs128(det);
    if (order > order_bound)
        throw validation_error("dual_and_discriminant: discriminant group too large");

    SmithResult snf = smith_normal_form(S);
    DiscriminantGroup D;
    D.scaled_gram = S;
    D.order = order;
    for (i128 d : snf.invariants) D.invariant_factors.push_back(d);

    // Cosets: mu = V * diag(1/d_i) * t for t in prod Z/d_i, coordinates mod 1.
    std::vector<i128> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = snf.d(i, i);
    std::vector<i128> t(n, 0);
    while (true) {
        std::vector<Rat> mu(n, Rat(0));
        for (std::size_t i = 0; i < n; ++i) {
            if (t[i] == 0) continue;
            Rat f(t[i], diag[i]);
            for (std::size_t r = 0; r < n; ++r) mu[r] += Rat(snf.v(r, i)) * f;
        }
        for (Rat& v : mu) v = v.mod1();
        Rat q;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                q += mu[r] * Rat(S(r, c)) * mu[c];
        q = (q / Rat(2)).mod1();
        D.coset_reps.push_back(mu);
        D.q_values.push_back(q);
        // Odometer over the invariant-factor boxes.
        std::size_t k = 0;
        while (k < n) {
            if (++t[k] < diag[k]) break;
            t[k] = 0;
            ++k;
        }
        if (k == n) break;
    }
    if (static_cast<i128>(D.coset_reps.size()) != order)
        throw accuracy_error("dual_and_discriminant: coset count mismatch");
    for (std::size_t i = 0; i < D.coset_reps.size(); ++i) {
        auto [it, fresh] = D.rep_index.emplace(DiscriminantGroup::key(D.coset_reps[i]),
                                               static_cast<int>(i));
        (void)it;
        if (!fresh) throw accuracy_error("dual_and_discriminant: duplicate coset");
    }
    if (D.q_values[0] != Rat(0))
        throw accuracy_error("dual_and_discriminant: q(0) nonzero");

    // Level of the scaled model: lcm of q-value denominators.
    for (const Rat& q : D.q_values) D.level = lcm128(D.level, q.den());
    return D;
}

inline DiscriminantGroup dual_and_discriminant(const LatticeModel& L,
                                               i128 order_bound = 1000000) {
    DiscriminantGroup D = discriminant_group_of(L.scaled_gram, order_bound);
    // Level of the unscaled model, recorded for comparison only.
    D.model_level = minimal_even_scale(inverse(L.gen_gram));
    return D;
}

inline nlohmann::json rat_json(const Rat& r) {
    return nlohmann::json::array({to_string_i128(r.num()), to_string_i128(r.den())});
}

inline nlohmann::json lattice_json(const LatticeModel& L, const DiscriminantGroup& D) {
    nlohmann::json gram = nlohmann::json::array();
    for (std::size_t i = 0; i < L.gen_gram.rows(); ++i)
        for (std::size_t j = 0; j < L.gen_gram.cols(); ++j)
            gram.push_back(rat_json(L.gen_gram(i, j)));
    nlohmann::json factors = nlohmann::json::array();
    for (i128 f : D.invariant_factors) factors.push_back(to_string_i128(f));
    nlohmann::json cosets = nlohmann::json::array();
    for (std::size_t i = 0; i < D.coset_reps.size(); ++i) {
        nlohmann::json mu = nlohmann::json::array();
        for (const Rat& v : D.coset_reps[i]) mu.push_back(rat_json(v));
        cosets.push_back({{"mu", mu}, {"q", rat_json(D.q_values[i])}});
    }
    return {{"gram", gram},
            {"scale", rat_json(L.scale)},
            {"disc_group", {{"factors", factors}, {"cosets", cosets}}}};
}

} // namespace geogreen
