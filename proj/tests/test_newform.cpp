#include <catch2/catch_amalgamated.hpp>

#include <geogreen/newform.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace geogreen;

namespace {

// Independent oracle: count affine points by a full (x, y) grid scan, no
// character sums.
i64 grid_affine_count(const CurveSpec& E, i64 p) {
    i64 n = 0;
    for (i64 x = 0; x < p; ++x)
        for (i64 y = 0; y < p; ++y) {
            i128 lhs = i128{y} * y + i128{E.a1} * x * y + i128{E.a3} * y;
            i128 rhs = i128{x} * x * x + i128{E.a2} * x * x + i128{E.a4} * x + E.a6;
            if (mod128(lhs - rhs, p) == 0) ++n;
        }
    return n;
}

i64 grid_ap(const CurveSpec& E, i64 p) {
    return p + 1 - (grid_affine_count(E, p) + 1);
}

std::vector<i64> small_primes(i64 bound) {
    std::vector<i64> out;
    for (i64 n = 2; n <= bound; ++n) {
        bool prime = true;
        for (i64 d = 2; d * d <= n; ++d)
            if (n % d == 0) { prime = false; break; }
        if (prime) out.push_back(n);
    }
    return out;
}

} // namespace

TEST_CASE("curve validation", "[newform]") {
    CurveSpec cusp{"cusp", 0, 0, 0, 0, 0, 1};
    CHECK_THROWS_AS(validate_curve(cusp), validation_error);
    CHECK_NOTHROW(validate_curve(curve_37a()));
    CHECK_NOTHROW(validate_curve(curve_11a()));
    CHECK_NOTHROW(validate_curve(curve_14a()));

    WeierstrassData w37 = weierstrass_data(curve_37a());
    CHECK(w37.disc == 37);
    CHECK(w37.c6 == -216);
    WeierstrassData w11 = weierstrass_data(curve_11a());
    CHECK(w11.disc == -161051);  // -11^5
    CHECK(w11.c4 == 496);
    CHECK(w11.c6 == 20008);
    WeierstrassData w14 = weierstrass_data(curve_14a());
    CHECK(w14.disc == -21952);  // -2^6 * 7^3
}

TEST_CASE("good-prime traces pinned", "[newform]") {
    CurveSpec E37 = curve_37a();
    CHECK(ap_point_count(E37, 2) == -2);
    CHECK(ap_point_count(E37, 3) == -3);
    CHECK(ap_point_count(E37, 5) == -2);
    CHECK(ap_point_count(E37, 7) == -1);

    CurveSpec E11 = curve_11a();
    CHECK(ap_point_count(E11, 2) == -2);
    CHECK(ap_point_count(E11, 3) == -1);
    CHECK(ap_point_count(E11, 5) == 1);
    CHECK(ap_point_count(E11, 7) == -2);
}

TEST_CASE("character-sum counter matches grid oracle", "[newform]") {
    for (const CurveSpec& E : {curve_37a(), curve_11a(), curve_14a()}) {
        for (i64 p : small_primes(97)) {
            INFO("curve " << E.label << " p " << p);
            CHECK(grid_affine_count(E, p) ==
                  detail::affine_point_count(E, p));
            if (E.conductor % p != 0)
                CHECK(ap_point_count(E, p) == grid_ap(E, p));
        }
    }
}

TEST_CASE("Hasse bound at good primes", "[newform]") {
    CurveSpec E = curve_37a();
    for (i64 p : small_primes(2000)) {
        if (p == 37) continue;
        i64 ap = ap_point_count(E, p);
        CHECK(i128{ap} * ap <= 4 * i128{p});
    }
}

TEST_CASE("bad-prime reduction types", "[newform]") {
    // 37a at 37: nonsplit multiplicative, smooth count p+1.
    CHECK(grid_affine_count(curve_37a(), 37) == 38);
    CHECK(ap_point_count(curve_37a(), 37) == -1);
    // 11a at 11: split multiplicative, smooth count p-1.
    CHECK(grid_affine_count(curve_11a(), 11) == 10);
    CHECK(ap_point_count(curve_11a(), 11) == 1);
    // 14a: nonsplit at 2, split at 7.
    CHECK(ap_point_count(curve_14a(), 2) == -1);
    CHECK(ap_point_count(curve_14a(), 7) == 1);
}

TEST_CASE("counter input validation", "[newform]") {
    CHECK_THROWS_AS(ap_point_count(curve_37a(), i64{1} << 20), validation_error);
    CHECK_THROWS_AS(ap_point_count(curve_37a(), 1), validation_error);
    // Non-minimal model: 37a scaled by u = 2 keeps conductor 37 but picks up
    // 2 in the discriminant.
    CurveSpec scaled{"37a-scaled", 0, 0, 8, -16, 0, 37};
    CHECK_THROWS_AS(ap_point_count(scaled, 2), validation_error);
}

TEST_CASE("Hecke recursion and multiplicativity", "[newform]") {
    CoeffTable T = coefficients(curve_37a(), 10000);
    CHECK(T.source == CoeffSource::point_count);
    CHECK(T.M == 10000);
    CHECK(T.c(1) == 1);
    CHECK(T.c(4) == 2);
    CHECK(T.c(6) == 6);
    CHECK(T.c(8) == 0);
    CHECK(T.c(9) == 6);
    CHECK(T.c(10) == 4);
    // Level prime: c(37^k) = c(37)^k.
    CHECK(T.c(37) == -1);
    CHECK(T.c(37 * 37) == 1);
    // Exhaustive multiplicativity on coprime pairs.
    for (i64 m = 2; m * 2 <= 10000; ++m)
        for (i64 n = m + 1; m * n <= 10000; ++n) {
            if (gcd128(m, n) != 1) continue;
            if (T.c(m * n) != T.c(m) * T.c(n)) {
                INFO("m " << m << " n " << n);
                REQUIRE(T.c(m * n) == T.c(m) * T.c(n));
            }
        }
    // Good-prime recursion c(p^2) = c(p)^2 - p.
    for (i64 p : {i64{2}, i64{3}, i64{5}, i64{7}, i64{11}})
        CHECK(T.c(p * p) == T.c(p) * T.c(p) - p);

    CoeffTable T11 = coefficients(curve_11a(), 20);
    CHECK(T11.c(9) == -2);
    CHECK(T11.c(10) == -2);
    CHECK(T11.c(11) == 1);
}

TEST_CASE("coefficient twisting", "[newform]") {
    RealQuadraticField F5 = make_field(5);
    CoeffTable T = coefficients(curve_37a(), 60);
    CoeffTable W = twist_coefficients(T, F5);
    CHECK(W.twisted);
    CHECK(W.c(1) == 1);
    CHECK(W.c(2) == 2);   // eta(2) = -1 flips -2
    CHECK(W.c(3) == 3);
    CHECK(W.c(4) == 2);   // eta(4) = +1
    CHECK(W.c(5) == 0);   // gcd with d_K
    CHECK(W.c(10) == 0);
    CHECK(W.c(11) == -5); // eta(11) = +1 keeps -5
    // Twisted table stays multiplicative.
    for (i64 m = 2; m * 2 <= 60; ++m)
        for (i64 n = m + 1; m * n <= 60; ++n) {
            if (gcd128(m, n) != 1) continue;
            CHECK(W.c(m * n) == W.c(m) * W.c(n));
        }
    // Level sharing a factor with d_K is rejected.
    CoeffTable fake = T;
    fake.level = 15;
    CHECK_THROWS_AS(twist_coefficients(fake, F5), validation_error);
}

TEST_CASE("level factorization by eta", "[newform]") {
    RealQuadraticField F5 = make_field(5);
    RealQuadraticField F2 = make_field(2);

    LevelSplit a = level_split(37, F5);
    CHECK(a.n_plus == 1);
    CHECK(a.n_minus == 37);
    CHECK(a.ehh_holds);
    CHECK(a.sign == -1);

    LevelSplit b = level_split(11, F2);
    CHECK(b.n_plus == 1);
    CHECK(b.n_minus == 11);
    CHECK(b.ehh_holds);
    CHECK(b.sign == -1);

    LevelSplit c = level_split(14, F5);
    CHECK(c.n_plus == 1);
    CHECK(c.n_minus == 14);
    CHECK_FALSE(c.ehh_holds);  // two inert primes
    CHECK(c.sign == 1);

    // Split primes land in n_plus: 11 splits in Q(sqrt 5).
    LevelSplit d = level_split(11 * 37, F5);
    CHECK(d.n_plus == 11);
    CHECK(d.n_minus == 37);
    CHECK(d.ehh_holds);
    CHECK(d.sign == -1);

    // Square inert part: hypothesis fails but the sign product still checks.
    LevelSplit e = level_split(45, F2);
    CHECK(e.n_plus == 1);
    CHECK(e.n_minus == 45);
    CHECK_FALSE(e.ehh_holds);
    CHECK(e.sign == -1);

    CHECK_THROWS_AS(level_split(10, F5), validation_error);
    CHECK_THROWS_AS(level_split(0, F5), validation_error);
}

TEST_CASE("coefficient CSV cache", "[newform]") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "geogreen_coeff_cache_test";
    fs::remove_all(dir);

    CoeffTable fresh = coefficients(curve_37a(), 50, dir.string());
    fs::path file = dir / "coeffs_37a_N37_M50.csv";
    REQUIRE(fs::exists(file));

    CoeffTable loaded = read_coeff_csv(file.string());
    CHECK(loaded.source == CoeffSource::file);
    CHECK(loaded.M == 50);
    for (i64 m = 1; m <= 50; ++m) CHECK(loaded.c(m) == fresh.c(m));

    // Cached run returns identical values.
    CoeffTable cached = coefficients(curve_37a(), 50, dir.string());
    for (i64 m = 1; m <= 50; ++m) CHECK(cached.c(m) == fresh.c(m));

    // Corrupt one entry so that multiplicativity fails; the next call must
    // recompute and heal the file.
    {
        CoeffTable bad = fresh;
        bad.coeffs[6] = 7;
        write_coeff_csv(bad, file.string());
    }
    CoeffTable healed = coefficients(curve_37a(), 50, dir.string());
    CHECK(healed.c(6) == 6);
    CoeffTable reread = read_coeff_csv(file.string());
    CHECK(reread.c(6) == 6);

    // Structural damage is rejected by the reader.
    {
        std::ofstream out(file.string(), std::ios::trunc);
        out << "m,c\n1,1\n3,5\n";
    }
    CHECK_THROWS_AS(read_coeff_csv(file.string()), validation_error);
    {
        std::ofstream out(file.string(), std::ios::trunc);
        out << "wrong,header\n1,1\n";
    }
    CHECK_THROWS_AS(read_coeff_csv(file.string()), validation_error);
    // coefficients() shrugs the damage off.
    CoeffTable again = coefficients(curve_37a(), 50, dir.string());
    CHECK(again.c(6) == 6);

    fs::remove_all(dir);
}
