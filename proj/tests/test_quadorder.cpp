#include <catch2/catch_amalgamated.hpp>

#include <geogreen/quadorder.hpp>

#include <cmath>
#include <set>

using namespace geogreen;

namespace {

// Oracle: minimal u >= 1 with d_K u^2 + 4 a perfect square (Pell-4 by brute
// force), independent of the continued-fraction implementation.
std::pair<i128, i128> pell4_brute(i128 dK) {
    for (i128 u = 1; u < 3000000; ++u) {
        i128 v = dK * u * u + 4;
        if (is_square128(v)) return {isqrt128(v), u};
    }
    throw std::runtime_error("pell4_brute: not found");
}

// Oracle: smallest unit > 1 of the maximal order, brute force over y.
// Returns (x, y, norm sign) with unit (x + y sqrt(d_K))/2, x^2 - d_K y^2 = +-4.
std::tuple<i128, i128, int> unit_brute(i128 dK) {
    for (i128 y = 1; y < 3000000; ++y) {
        i128 base = dK * y * y;
        for (i128 n4 : {i128{-4}, i128{4}}) {
            i128 v = base + n4;
            if (v > 0 && is_square128(v))
                return {isqrt128(v), y, n4 == 4 ? +1 : -1};
        }
    }
    throw std::runtime_error("unit_brute: not found");
}

void check_group_axioms(const RingClassGroup& G) {
    const int n = static_cast<int>(G.h);
    // Identity.
    for (int i = 0; i < n; ++i) {
        REQUIRE(G.table[G.identity][i] == i);
        REQUIRE(G.table[i][G.identity] == i);
    }
    // Commutativity and associativity (exhaustive; n is small).
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            REQUIRE(G.table[i][j] == G.table[j][i]);
            for (int k = 0; k < n; ++k)
                REQUIRE(G.table[G.table[i][j]][k] == G.table[i][G.table[j][k]]);
        }
    // Inverses: each row is a permutation hitting the identity.
    for (int i = 0; i < n; ++i) {
        std::set<int> seen(G.table[i].begin(), G.table[i].end());
        REQUIRE(static_cast<int>(seen.size()) == n);
        REQUIRE(seen.count(G.identity) == 1);
    }
}

} // namespace

TEST_CASE("make_field fundamental discriminants", "[quadorder]") {
    REQUIRE(make_field(5).d_K == 5);
    REQUIRE(make_field(2).d_K == 8);
    REQUIRE(make_field(10).d_K == 40);
    REQUIRE(make_field(3).d_K == 12);
    REQUIRE(make_field(229).d_K == 229);
    REQUIRE(make_field(5).sqrt_dK == Catch::Approx(std::sqrt(5.0)));
    REQUIRE_THROWS_AS(make_field(1), validation_error);
    REQUIRE_THROWS_AS(make_field(12), validation_error);   // 12 = 4*3 not squarefree
    REQUIRE_THROWS_AS(make_field(-5), validation_error);
}

TEST_CASE("fundamental units match the brute-force oracle", "[quadorder]") {
    struct Case {
        i128 d;
        i128 t, u;
        int norm;
        double eps0;
    };
    // Frozen values; eps0 written in closed form.
    const Case cases[] = {
        {5, 3, 1, -1, (1.0 + std::sqrt(5.0)) / 2.0},
        {2, 6, 2, -1, 1.0 + std::sqrt(2.0)},
        {3, 4, 1, +1, 2.0 + std::sqrt(3.0)},
    };
    for (const Case& c : cases) {
        RealQuadraticField F = make_field(c.d);
        UnitData U = fundamental_unit(F);
        REQUIRE(U.t == c.t);
        REQUIRE(U.u == c.u);
        REQUIRE(U.eps0_norm == c.norm);
        REQUIRE(U.eps0_log == Catch::Approx(std::log(c.eps0)).epsilon(1e-12));
        double epsK = (static_cast<double>(U.t) + static_cast<double>(U.u) * F.sqrt_dK) / 2.0;
        REQUIRE(U.epsK_log == Catch::Approx(std::log(epsK)).epsilon(1e-12));
        if (U.eps0_norm == -1)
            REQUIRE(U.epsK_log == Catch::Approx(2.0 * U.eps0_log).epsilon(1e-12));
        else
            REQUIRE(U.epsK_log == Catch::Approx(U.eps0_log).epsilon(1e-12));
    }
    // Wider sweep against both oracles.
    for (i128 d : {i128{5}, i128{2}, i128{3}, i128{13}, i128{6}, i128{7}, i128{10},
                   i128{229}, i128{11}, i128{94}}) {
        RealQuadraticField F = make_field(d);
        UnitData U = fundamental_unit(F);
        auto [t, u] = pell4_brute(F.d_K);
        REQUIRE(U.t == t);
        REQUIRE(U.u == u);
        auto [x, y, nrm] = unit_brute(F.d_K);
        REQUIRE(U.x0 == x);
        REQUIRE(U.y0 == y);
        REQUIRE(U.eps0_norm == nrm);
        // Exact norm identity.
        REQUIRE(U.x0 * U.x0 - F.d_K * U.y0 * U.y0 == (U.eps0_norm == 1 ? 4 : -4));
    }
}

TEST_CASE("field character values", "[quadorder]") {
    RealQuadraticField F5 = make_field(5);
    REQUIRE(field_character(F5, 2) == -1);
    REQUIRE(field_character(F5, 5) == 0);
    RealQuadraticField F2 = make_field(2);
    REQUIRE(field_character(F2, 7) == 1);
    REQUIRE_THROWS_AS(field_character(F5, 0), validation_error);
    // eta is multiplicative and trivial on squares prime to d_K.
    for (i128 n = 1; n <= 60; ++n) {
        if (gcd128(n, 5) != 1) continue;
        REQUIRE(field_character(F5, n * n) == 1);
    }
}

TEST_CASE("quadratic field elements", "[quadorder]") {
    RealQuadraticField F = make_field(5);
    QuadElt phi{Rat(1, 2), Rat(1, 2)};  // (1 + sqrt5)/2
    REQUIRE(qe_norm(F, phi) == Rat(-1));
    REQUIRE(qe_trace(phi) == Rat(1));
    QuadElt sq = qe_mul(F, phi, phi);   // phi^2 = phi + 1
    REQUIRE(sq == qe_add(phi, QuadElt{Rat(1), Rat(0)}));
    REQUIRE(qe_embed(F, phi, 0) == Catch::Approx((1 + std::sqrt(5.0)) / 2));
    REQUIRE(qe_embed(F, phi, 1) == Catch::Approx((1 - std::sqrt(5.0)) / 2));
}

TEST_CASE("ring class groups: orders and axioms", "[quadorder]") {
    struct Case {
        i128 d, c;
        i64 h;
    };
    const Case cases[] = {
        {5, 1, 1}, {10, 1, 2}, {229, 1, 3},
        {3, 1, 1},             // narrow order 2, fused by the norm +1 unit
        {5, 3, 1},             // conductor 3: unit index 4, h = 1
        {5, 2, 1},             // conductor 2: unit index 3 (odd), no fusion
    };
    for (const Case& c : cases) {
        RingClassGroup G = ring_class_group(make_field(c.d), c.c);
        INFO("d=" << static_cast<long>(c.d) << " c=" << static_cast<long>(c.c));
        REQUIRE(G.h == c.h);
        check_group_axioms(G);
        REQUIRE(static_cast<i64>(G.labels.size()) == c.h);
        REQUIRE(static_cast<i64>(G.reps.size()) == c.h);
    }
    // d = 3 (d_K = 12): narrow group has order 2, wide is trivial.
    RingClassGroup G12 = ring_class_group(make_field(3), 1);
    REQUIRE(G12.h_narrow == 2);
    REQUIRE(G12.h == 1);
    // d = 10: norm -1 unit is absent... the fundamental unit 3+sqrt(10) has
    // norm -1, so narrow = wide = 2.
    RingClassGroup G40 = ring_class_group(make_field(10), 1);
    REQUIRE(G40.h_narrow == 2);
    REQUIRE(G40.h == 2);
}

TEST_CASE("class group of discriminant 229 is cyclic of order 3", "[quadorder]") {
    RingClassGroup G = ring_class_group(make_field(229), 1);
    REQUIRE(G.h == 3);
    int g = (G.identity + 1) % 3;
    int g2 = G.table[g][g];
    REQUIRE(g2 != G.identity);
    REQUIRE(g2 != g);
    REQUIRE(G.table[g2][g] == G.identity);
}

TEST_CASE("conductor validation", "[quadorder]") {
    REQUIRE_THROWS_AS(ring_class_group(make_field(5), 0), validation_error);
    REQUIRE_THROWS_AS(ring_class_group(make_field(5), 5), validation_error);
    REQUIRE_THROWS_AS(ring_class_group(make_field(5), 3, 6), validation_error);
}

TEST_CASE("order units", "[quadorder]") {
    RealQuadraticField F = make_field(5);
    UnitData U = fundamental_unit(F);
    // O_1: eps0 itself.
    OrderUnit w1 = order_unit(F, U, 1);
    REQUIRE(w1.k == 1);
    REQUIRE(w1.norm == -1);
    // O_2: phi^3 = 2 + sqrt5 is the first power with even sqrt-coefficient... y
    // coordinates of phi^k are Fibonacci, first divisible by 2 at k = 3.
    OrderUnit w2 = order_unit(F, U, 2);
    REQUIRE(w2.k == 3);
    REQUIRE(w2.norm == -1);
    REQUIRE(w2.x == 4);
    REQUIRE(w2.y == 2);
    // O_3: first Fibonacci divisible by 3 is F(4) = 3, so k = 4, norm +1.
    OrderUnit w3 = order_unit(F, U, 3);
    REQUIRE(w3.k == 4);
    REQUIRE(w3.norm == +1);
    // Totally positive generator of O_1 is phi^2.
    OrderUnit tp = totally_positive_order_unit(F, U, 1);
    REQUIRE(tp.k == 2);
    REQUIRE(tp.log_val == Catch::Approx(2.0 * U.eps0_log));
    REQUIRE(tp.x == 3);
    REQUIRE(tp.y == 1);
}

TEST_CASE("characters: orthogonality and multiplicativity", "[quadorder]") {
    // Trivial group.
    auto chis1 = characters(ring_class_group(make_field(5), 1));
    REQUIRE(chis1.size() == 1);
    REQUIRE(std::abs(chis1[0].values[0] - 1.0) < 1e-14);
    // Cyclic of order 2.
    auto G2 = ring_class_group(make_field(10), 1);
    auto chis2 = characters(G2);
    REQUIRE(chis2.size() == 2);
    for (int i = 0; i < 2; ++i) REQUIRE(std::abs(chis2[0].values[i] - 1.0) < 1e-14);
    REQUIRE(std::abs(chis2[1].values[G2.identity] - 1.0) < 1e-14);
    REQUIRE(std::abs(chis2[1].values[1 - G2.identity] + 1.0) < 1e-14);
    // Cyclic of order 3: nontrivial characters take cube-root values.
    auto G3 = ring_class_group(make_field(229), 1);
    auto chis3 = characters(G3);
    REQUIRE(chis3.size() == 3);
    for (const auto& chi : chis3) {
        for (const cplx& v : chi.values) {
            REQUIRE(std::abs(std::abs(v) - 1.0) < 1e-14);
            REQUIRE(std::abs(std::pow(v, 3) - 1.0) < 1e-13);
        }
    }
    // Character sums: h for the trivial character, 0 otherwise.
    for (const auto* G : {&G2, &G3}) {
        auto chis = characters(*G);
        for (std::size_t t = 0; t < chis.size(); ++t) {
            cplx sum = 0;
            for (int a = 0; a < G->h; ++a) sum += chis[t].values[a];
            if (t == 0)
                REQUIRE(std::abs(sum - static_cast<double>(G->h)) < 1e-13);
            else
                REQUIRE(std::abs(sum) < 1e-13);
        }
    }
}

TEST_CASE("ideal norm forms", "[quadorder]") {
    // O_K for d = 5: x^2 + xy - y^2.
    RealQuadraticField F5 = make_field(5);
    BQF f5 = ideal_norm_form(F5, unit_ideal(F5, 1));
    REQUIRE(f5.a == 1);
    REQUIRE(f5.b == 1);
    REQUIRE(f5.c == -1);
    // O_K for d = 2: x^2 - 2 y^2.
    RealQuadraticField F2 = make_field(2);
    BQF f2 = ideal_norm_form(F2, unit_ideal(F2, 1));
    REQUIRE(f2.a == 1);
    REQUIRE(f2.b == 0);
    REQUIRE(f2.c == -2);
    // Discriminant identity on every class representative of several groups.
    for (auto [d, c] : {std::pair<i128, i128>{5, 1}, {10, 1}, {229, 1}, {5, 3}, {5, 2}}) {
        RealQuadraticField F = make_field(d);
        RingClassGroup G = ring_class_group(F, c);
        for (const auto& rep : G.reps) {
            BQF f = ideal_norm_form(F, rep);
            REQUIRE(bqf_disc(f) == c * c * F.d_K);
            REQUIRE(bqf_primitive(f));
        }
    }
    // Error path: basis that does not clear denominators.
    FractionalIdeal bad;
    bad.alpha = {Rat(1, 3), Rat(0)};
    bad.z = {Rat(0), Rat(1)};
    bad.norm = Rat(1);
    bad.conductor = 1;
    REQUIRE_THROWS_AS(ideal_norm_form(F5, bad), validation_error);
}

TEST_CASE("class representatives avoid a requested modulus", "[quadorder]") {
    RealQuadraticField F = make_field(10);
    RingClassGroup G = ring_class_group(F, 1, 37 * 11);
    for (int i = 0; i < G.h; ++i) {
        // Every representative ideal has norm coprime to the avoidance set.
        Rat n = G.reps[i].norm;
        REQUIRE(n.is_integer());
        REQUIRE(gcd128(n.num(), 37 * 11) == 1);
        REQUIRE(gcd128(n.num(), F.d_K) == 1);
    }
}

TEST_CASE("class_index locates forms and respects composition", "[quadorder]") {
    RealQuadraticField F = make_field(10);
    RingClassGroup G = ring_class_group(F, 1);
    // The norm form of each representative lies in its own class.
    for (int i = 0; i < G.h; ++i) {
        BQF f = ideal_norm_form(F, G.reps[i]);
        REQUIRE(class_index(G, f) == i);
    }
    // Composition of label forms matches the table.
    i128 D = F.d_K;
    for (int i = 0; i < G.h; ++i)
        for (int j = 0; j < G.h; ++j) {
            BQF prod = bqf_compose(G.labels[i], G.labels[j], D);
            REQUIRE(class_index(G, prod) == G.table[i][j]);
        }
}
