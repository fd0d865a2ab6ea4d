#pragma once

// Overflow-checked 128-bit integer arithmetic and the handful of exact
// integer algorithms (gcd, isqrt, Kronecker symbol, CRT) the rest of the
// library builds on.  Every helper throws geogreen::overflow_error instead
// of wrapping silently; the class-group and lattice code relies on that.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace geogreen {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

class overflow_error : public std::runtime_error {
public:
    explicit overflow_error(const std::string& what) : std::runtime_error(what) {}
};

// Rejected input (precondition violation a caller could have checked).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A bounded numerical procedure failed to reach its target accuracy.
class accuracy_error : public std::runtime_error {
public:
    explicit accuracy_error(const std::string& what) : std::runtime_error(what) {}
};

inline i128 checked_add(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw overflow_error("i128 add overflow");
    return r;
}

inline i128 checked_sub(i128 a, i128 b) {
    i128 r;
    if (__builtin_sub_overflow(a, b, &r)) throw overflow_error("i128 sub overflow");
    return r;
}

inline i128 checked_mul(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("i128 mul overflow");
    return r;
}

inline i128 checked_neg(i128 a) {
    return checked_sub(i128{0}, a);
}

// Division is exact-range safe except for INT128_MIN / -1.
inline i128 checked_div(i128 a, i128 b) {
    if (b == 0) throw overflow_error("i128 division by zero");
    if (b == -1) return checked_neg(a);
    return a / b;
}

inline i128 abs128(i128 a) {
    return a < 0 ? checked_neg(a) : a;
}

inline int sign128(i128 a) {
    return a > 0 ? 1 : (a < 0 ? -1 : 0);
}

inline i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline i128 lcm128(i128 a, i128 b) {
    if (a == 0 || b == 0) return 0;
    return checked_mul(checked_div(abs128(a), gcd128(a, b)), abs128(b));
}

// Extended gcd: returns g and fills x, y with a*x + b*y = g, g >= 0.
inline i128 xgcd128(i128 a, i128 b, i128& x, i128& y) {
    i128 old_r = a, r = b;
    i128 old_x = 1, cur_x = 0;
    i128 old_y = 0, cur_y = 1;
    while (r != 0) {
        i128 q = old_r / r;
        i128 t;
        t = checked_sub(old_r, checked_mul(q, r)); old_r = r; r = t;
        t = checked_sub(old_x, checked_mul(q, cur_x)); old_x = cur_x; cur_x = t;
        t = checked_sub(old_y, checked_mul(q, cur_y)); old_y = cur_y; cur_y = t;
    }
    if (old_r < 0) { old_r = checked_neg(old_r); old_x = checked_neg(old_x); old_y = checked_neg(old_y); }
    x = old_x;
    y = old_y;
    return old_r;
}

// Floor square root of a non-negative integer.
inline i128 isqrt128(i128 n) {
    if (n < 0) throw overflow_error("isqrt of negative value");
    if (n < 2) return n;
    // Newton iteration from a double seed; converges in a few steps.
    i128 x = static_cast<i128>(__builtin_sqrt(static_cast<double>(n))) + 2;
    while (true) {
        i128 y = (x + n / x) / 2;
        if (y >= x) break;
        x = y;
    }
    while (x * x > n) --x;
    while ((x + 1) * (x + 1) <= n) ++x;
    return x;
}

inline bool is_square128(i128 n) {
    if (n < 0) return false;
    i128 r = isqrt128(n);
    return r * r == n;
}

// Kronecker symbol (a|n), full extension: n may be zero, negative, or even.
inline int kronecker(i128 a, i128 n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    if ((a & 1) == 0 && (n & 1) == 0) return 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    // Pull out the even part of n: (a|2) = 0, 1, -1 for a mod 8.
    int v2 = 0;
    while ((n & 1) == 0) { n >>= 1; ++v2; }
    if (v2 & 1) {
        i128 am8 = ((a % 8) + 8) % 8;
        if (am8 == 3 || am8 == 5) result = -result;
    }
    a %= n;
    if (a < 0) a += n;
    while (a != 0) {
        int v = 0;
        while ((a & 1) == 0) { a >>= 1; ++v; }
        if (v & 1) {
            i128 nm8 = n % 8;
            if (nm8 == 3 || nm8 == 5) result = -result;
        }
        // Quadratic reciprocity for odd positive a, n.
        if ((a % 4) == 3 && (n % 4) == 3) result = -result;
        i128 t = n % a;
        n = a;
        a = t;
    }
    return n == 1 ? result : 0;
}

// Modular arithmetic with non-negative representatives.
inline i128 mod128(i128 a, i128 m) {
    if (m <= 0) throw overflow_error("mod with non-positive modulus");
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

inline i128 mulmod128(i128 a, i128 b, i128 m) {
    return mod128(checked_mul(mod128(a, m), mod128(b, m)), m);
}

inline i128 powmod128(i128 base, i128 exp, i128 m) {
    if (exp < 0) throw overflow_error("negative exponent in powmod");
    i128 result = 1 % m;
    base = mod128(base, m);
    while (exp > 0) {
        if (exp & 1) result = mulmod128(result, base, m);
        base = mulmod128(base, base, m);
        exp >>= 1;
    }
    return result;
}

// Inverse of a mod m; throws if gcd(a, m) != 1.
inline i128 invmod128(i128 a, i128 m) {
    i128 x, y;
    i128 g = xgcd128(mod128(a, m), m, x, y);
    if (g != 1) throw overflow_error("invmod of non-unit");
    return mod128(x, m);
}

inline std::string to_string_i128(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
    std::string s;
    while (u != 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

inline i128 parse_i128(const std::string& s) {
    if (s.empty()) throw overflow_error("parse_i128: empty string");
    size_t i = 0;
    bool neg = false;
    if (s[0] == '+' || s[0] == '-') { neg = (s[0] == '-'); i = 1; }
    if (i == s.size()) throw overflow_error("parse_i128: no digits");
    i128 v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw overflow_error("parse_i128: bad digit");
        v = checked_add(checked_mul(v, 10), s[i] - '0');
    }
    return neg ? checked_neg(v) : v;
}

// Trial-division factorization; inputs in this library stay far below 2^64.
inline std::vector<std::pair<i128, int>> factorize(i128 n) {
    n = abs128(n);
    std::vector<std::pair<i128, int>> out;
    if (n <= 1) return out;
    for (i128 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            out.emplace_back(p, e);
        }
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline bool is_squarefree(i128 n) {
    for (const auto& [p, e] : factorize(n))
        if (e > 1) return false;
    return true;
}

inline int count_distinct_prime_divisors(i128 n) {
    return static_cast<int>(factorize(n).size());
}

// Number of positive divisors.
inline i64 sigma0(i128 n) {
    i64 d = 1;
    for (const auto& [p, e] : factorize(n)) d *= (e + 1);
    return d;
}

} // namespace geogreen
