#pragma once

// Fourier coefficients of the weight-2 newform attached to a rational
// elliptic curve, by point counting on a user-supplied minimal model:
// character-sum counting at good primes, singular-point counting at bad
// primes, Hecke recursion to prime powers, multiplicative fill-in.  Also
// quadratic twists by the field character and the level factorization
// N = N+ * N- by the sign of eta on primes.

#include <geogreen/int128.hpp>
#include <geogreen/quadorder.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace geogreen {

struct CurveSpec {
    std::string label;
    i64 a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;
    i64 conductor = 0;
};

struct WeierstrassData {
    i128 b2, b4, b6, b8, disc, c4, c6;
};

inline WeierstrassData weierstrass_data(const CurveSpec& E) {
    WeierstrassData w;
    i128 a1 = E.a1, a2 = E.a2, a3 = E.a3, a4 = E.a4, a6 = E.a6;
    w.b2 = checked_add(checked_mul(a1, a1), checked_mul(4, a2));
    w.b4 = checked_add(checked_mul(2, a4), checked_mul(a1, a3));
    w.b6 = checked_add(checked_mul(a3, a3), checked_mul(4, a6));
    w.b8 = checked_sub(
        checked_add(checked_add(checked_mul(checked_mul(a1, a1), a6),
                                checked_mul(4, checked_mul(a2, a6))),
                    checked_mul(a2, checked_mul(a3, a3))),
        checked_add(checked_mul(a1, checked_mul(a3, a4)), checked_mul(a4, a4)));
    w.c4 = checked_sub(checked_mul(w.b2, w.b2), checked_mul(24, w.b4));
    w.c6 = checked_add(checked_sub(checked_mul(36, checked_mul(w.b2, w.b4)),
                                   checked_mul(w.b2, checked_mul(w.b2, w.b2))),
                       checked_mul(-216, w.b6));
    w.disc = checked_add(
        checked_sub(checked_sub(checked_neg(checked_mul(checked_mul(w.b2, w.b2), w.b8)),
                                checked_mul(8, checked_mul(w.b4, checked_mul(w.b4, w.b4)))),
                    checked_mul(27, checked_mul(w.b6, w.b6))),
        checked_mul(9, checked_mul(w.b2, checked_mul(w.b4, w.b6))));
    return w;
}

inline void validate_curve(const CurveSpec& E) {
    if (E.conductor < 1) throw validation_error("curve: conductor must be positive");
    if (weierstrass_data(E).disc == 0)
        throw validation_error("curve: Weierstrass discriminant vanishes");
}

namespace detail {

// Number of affine F_p points of the (possibly singular) reduction.
inline i64 affine_point_count(const CurveSpec& E, i64 p) {
    if (p == 2) {
        i64 n = 0;
        for (i64 x = 0; x < 2; ++x)
            for (i64 y = 0; y < 2; ++y) {
                i64 lhs = (y * y + E.a1 * x * y + E.a3 * y) % 2;
                i64 rhs = (x * x * x + E.a2 * x * x + E.a4 * x + E.a6) % 2;
                if (mod128(lhs - rhs, 2) == 0) ++n;
            }
        return n;
    }
    // Odd p: complete the square; affine count = sum_x (1 + chi(g(x))) with
    // g = 4x^3 + b2 x^2 + 2 b4 x + b6.
    WeierstrassData w = weierstrass_data(E);
    i64 b2 = static_cast<i64>(mod128(w.b2, p));
    i64 b4 = static_cast<i64>(mod128(w.b4, p));
    i64 b6 = static_cast<i64>(mod128(w.b6, p));
    // Quadratic-residue table.
    std::vector<signed char> chi(p, -1);
    chi[0] = 0;
    for (i64 i = 1; i <= (p - 1) / 2; ++i) chi[(i * i) % p] = 1;
    i64 n = 0;
    for (i64 x = 0; x < p; ++x) {
        i64 g = (((4 * x + b2) % p) * x % p + 2 * b4) % p;
        g = (g * x + b6) % p;
        n += 1 + chi[g];
    }
    return n;
}

} // namespace detail

// a_p = p + 1 - #E(F_p) at good primes; at bad primes the reduction type is
// read off the smooth-point count of the singular fiber: p-1 smooth points
// means split multiplicative (a_p = 1), p+1 nonsplit (a_p = -1), p additive
// (a_p = 0).  The model is trusted to be minimal.
inline i64 ap_point_count(const CurveSpec& E, i64 p) {
    if (p < 2) throw validation_error("ap_point_count: p must be prime");
    if (p >= (i64{1} << 20))
        throw validation_error("ap_point_count: prime too large for the naive counter");
    WeierstrassData w = weierstrass_data(E);
    bool bad = (mod128(i128{E.conductor}, p) == 0);
    if (!bad && mod128(w.disc, p) == 0)
        throw validation_error("ap_point_count: model not minimal at a good prime");
    i64 affine = detail::affine_point_count(E, p);
    if (!bad) return p + 1 - (affine + 1);
    // Smooth locus of the singular reduction: total points minus the (unique,
    // rational) singular point; the point at infinity is smooth.
    i64 smooth = affine;  // (affine - 1 singular) + 1 at infinity
    if (smooth == p - 1) return +1;
    if (smooth == p + 1) return -1;
    if (smooth == p) return 0;
    throw accuracy_error("ap_point_count: singular fiber count inconsistent");
}

enum class CoeffSource { point_count, file };

struct CoeffTable {
    CoeffSource source = CoeffSource::point_count;
    std::vector<i64> coeffs;  // coeffs[m] = c_f(m) for 1 <= m <= M; coeffs[0] unused
    i64 M = 0;
    i64 level = 0;            // conductor bookkeeping for twists and L-factors
    bool twisted = false;
    i128 twist_dK = 0;

    i64 c(i64 m) const {
        if (m < 1 || m > M) throw validation_error("CoeffTable: index out of range");
        return coeffs[m];
    }
};

namespace detail {

inline bool verify_multiplicative_sample(const CoeffTable& T) {
    if (T.M < 1 || T.coeffs.size() != static_cast<std::size_t>(T.M) + 1) return false;
    if (T.coeffs[1] != 1) return false;
    i64 bound = std::min<i64>(T.M, 400);
    for (i64 m = 2; m * 2 <= bound; ++m)
        for (i64 n = m + 1; m * n <= bound; ++n) {
            if (gcd128(m, n) != 1) continue;
            if (T.coeffs[m * n] != T.coeffs[m] * T.coeffs[n]) return false;
        }
    return true;
}

inline std::vector<i64> primes_up_to(i64 M) {
    std::vector<bool> sieve(M + 1, true);
    std::vector<i64> out;
    for (i64 i = 2; i <= M; ++i) {
        if (!sieve[i]) continue;
        out.push_back(i);
        for (i64 j = i * i; j <= M; j += i) sieve[j] = false;
    }
    return out;
}

} // namespace detail

// Coefficient file / cache format: CSV, header "m,c", rows sorted, no gaps.
inline void write_coeff_csv(const CoeffTable& T, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw validation_error("write_coeff_csv: cannot open " + path);
    out << "m,c\n";
    for (i64 m = 1; m <= T.M; ++m) out << m << "," << T.coeffs[m] << "\n";
}

inline CoeffTable read_coeff_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("read_coeff_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "m,c")
        throw validation_error("read_coeff_csv: bad header in " + path);
    CoeffTable T;
    T.source = CoeffSource::file;
    T.coeffs.push_back(0);
    i64 expect = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string ms, cs;
        if (!std::getline(ss, ms, ',') || !std::getline(ss, cs))
            throw validation_error("read_coeff_csv: bad row in " + path);
        i64 m = std::stoll(ms);
        if (m != expect) throw validation_error("read_coeff_csv: gap at m=" + ms);
        T.coeffs.push_back(std::stoll(cs));
        ++expect;
    }
    T.M = expect - 1;
    if (T.M < 1) throw validation_error("read_coeff_csv: empty table");
    return T;
}

// c_f(m) for m <= M.  Prime powers by the Hecke recursion
// c(p^{k+1}) = c(p) c(p^k) - p c(p^{k-1}) at good p, c(p^k) = c(p)^k at p | N;
// composite m multiplicatively.  If cache_dir is nonempty the table is read
// from / written to <cache_dir>/coeffs_<label>_N<N>_M<M>.csv, re-verified on
// load, and recomputed on verification failure.
inline CoeffTable coefficients(const CurveSpec& E, i64 M, const std::string& cache_dir = "") {
    validate_curve(E);
    if (M < 1) throw validation_error("coefficients: M must be positive");

    std::string cache_path;
    if (!cache_dir.empty()) {
        std::ostringstream name;
        name << "coeffs_" << (E.label.empty() ? "curve" : E.label)
             << "_N" << E.conductor << "_M" << M << ".csv";
        cache_path = (std::filesystem::path(cache_dir) / name.str()).string();
        if (std::filesystem::exists(cache_path)) {
            try {
                CoeffTable T = read_coeff_csv(cache_path);
                T.level = E.conductor;
                if (T.M == M && detail::verify_multiplicative_sample(T)) return T;
            } catch (const std::exception&) {
                // fall through to recompute
            }
        }
    }

    CoeffTable T;
    T.source = CoeffSource::point_count;
    T.level = E.conductor;
    T.M = M;
    T.coeffs.assign(M + 1, 0);
    T.coeffs[1] = 1;
    std::vector<i64> spf(M + 1, 0);  // smallest prime factor
    for (i64 p : detail::primes_up_to(M))
        for (i64 j = p; j <= M; j += p)
            if (spf[j] == 0) spf[j] = p;

    for (i64 p : detail::primes_up_to(M)) {
        i64 ap = ap_point_count(E, p);
        if (E.conductor % p != 0) {
            // Hasse bound at good primes.
            if (i128{ap} * ap > 4 * i128{p})
                throw accuracy_error("coefficients: Hasse bound violated");
        }
        if (p <= M) T.coeffs[p] = ap;
        // Prime powers.
        i64 pk = p;
        i64 c_prev = 1, c_cur = ap;
        while (pk <= M / p) {
            i64 pk_next = pk * p;
            i64 c_next;
            if (E.conductor % p == 0)
                c_next = c_cur * ap;
            else
                c_next = ap * c_cur - p * c_prev;
            T.coeffs[pk_next] = c_next;
            pk = pk_next;
            c_prev = c_cur; c_cur = c_next;
        }
    }
    // Multiplicative fill.
    for (i64 m = 2; m <= M; ++m) {
        i64 p = spf[m];
        i64 q = 1;
        i64 rest = m;
        while (rest % p == 0) {
            q *= p;
            rest /= p;
        }
        if (rest > 1) T.coeffs[m] = T.coeffs[q] * T.coeffs[rest];
    }

    if (!cache_path.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cache_dir, ec);
        write_coeff_csv(T, cache_path);
    }
    return T;
}

// Twist by eta: c_{f x eta}(m) = eta(m) c_f(m), zero when gcd(m, d_K) > 1.
inline CoeffTable twist_coefficients(const CoeffTable& T, const RealQuadraticField& F) {
    if (T.level > 0 && gcd128(i128{T.level}, F.d_K) != 1)
        throw validation_error("twist_coefficients: level must be coprime to d_K");
    CoeffTable out = T;
    out.twisted = true;
    out.twist_dK = F.d_K;
    for (i64 m = 1; m <= T.M; ++m)
        out.coeffs[m] = field_character(F, m) * T.coeffs[m];
    return out;
}

struct LevelSplit {
    i64 n_plus = 1, n_minus = 1;
    bool ehh_holds = false;
    int sign = 0;
};

// Factor N by the sign of eta on its primes; the ersatz hypothesis asks the
// inert part to be squarefree with an odd number of prime factors, which
// forces sign = eta(N) = -1.
inline LevelSplit level_split(i64 N, const RealQuadraticField& F) {
    if (N < 1) throw validation_error("level_split: N must be positive");
    if (gcd128(i128{N}, F.d_K) != 1)
        throw validation_error("level_split: N must be coprime to d_K");
    LevelSplit L;
    int minus_primes = 0;
    bool minus_squarefree = true;
    for (const auto& [p, e] : factorize(N)) {
        int eta = field_character(F, p);
        if (eta == -1) {
            for (int i = 0; i < e; ++i) L.n_minus *= static_cast<i64>(p);
            ++minus_primes;
            if (e > 1) minus_squarefree = false;
        } else {
            for (int i = 0; i < e; ++i) L.n_plus *= static_cast<i64>(p);
        }
    }
    L.ehh_holds = minus_squarefree && (minus_primes % 2 == 1);
    L.sign = field_character(F, N);
    // Independent recomputation of the sign from the factorization.
    int check = 1;
    for (const auto& [p, e] : factorize(N))
        for (int i = 0; i < e; ++i) check *= field_character(F, p);
    if (check != L.sign) throw accuracy_error("level_split: sign recomputation mismatch");
    return L;
}

// Standard curves used throughout the tests and examples.
inline CurveSpec curve_37a() { return {"37a", 0, 0, 1, -1, 0, 37}; }
inline CurveSpec curve_11a() { return {"11a", 0, -1, 1, -10, -20, 11}; }
inline CurveSpec curve_14a() { return {"14a", 1, 0, 1, 4, -6, 14}; }

} // namespace geogreen
