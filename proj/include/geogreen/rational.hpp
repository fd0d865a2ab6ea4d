#pragma once

// Exact rational numbers over checked 128-bit integers, small dense exact
// matrices, and Smith normal form.  These are the backbone of the class
// group, discriminant module, and lattice level computations, which must
// not round.

#include <geogreen/int128.hpp>

#include <cstddef>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

namespace geogreen {

class Rat {
public:
    Rat() : num_(0), den_(1) {}
    Rat(i128 n) : num_(n), den_(1) {}  // NOLINT: implicit by design
    Rat(int n) : num_(n), den_(1) {}   // NOLINT
    Rat(i128 n, i128 d) : num_(n), den_(d) { normalize(); }

    i128 num() const { return num_; }
    i128 den() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return sign128(num_); }

    Rat operator-() const { return Rat(checked_neg(num_), den_, already_normalized{}); }

    friend Rat operator+(const Rat& a, const Rat& b) {
        i128 g = gcd128(a.den_, b.den_);
        i128 da = a.den_ / g;
        i128 db = b.den_ / g;
        i128 n = checked_add(checked_mul(a.num_, db), checked_mul(b.num_, da));
        i128 d = checked_mul(a.den_, db);
        return Rat(n, d);
    }
    friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }
    friend Rat operator*(const Rat& a, const Rat& b) {
        i128 g1 = gcd128(a.num_, b.den_);
        i128 g2 = gcd128(b.num_, a.den_);
        i128 n = checked_mul(a.num_ / g1, b.num_ / g2);
        i128 d = checked_mul(a.den_ / g2, b.den_ / g1);
        return Rat(n, d, already_normalized{});
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw overflow_error("Rat division by zero");
        return a * Rat(b.den_, b.num_);
    }

    Rat& operator+=(const Rat& o) { *this = *this + o; return *this; }
    Rat& operator-=(const Rat& o) { *this = *this - o; return *this; }
    Rat& operator*=(const Rat& o) { *this = *this * o; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return checked_mul(a.num_, b.den_) < checked_mul(b.num_, a.den_);
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    // Representative in [0, 1) modulo Z; the quadratic form on a
    // discriminant module is valued here.
    Rat mod1() const {
        i128 q = num_ % den_;
        if (q < 0) q += den_;
        return Rat(q, den_, already_normalized{});
    }

    std::string to_string() const {
        std::string s = to_string_i128(num_);
        if (den_ != 1) s += "/" + to_string_i128(den_);
        return s;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rat& r) {
        return os << r.to_string();
    }

private:
    struct already_normalized {};
    Rat(i128 n, i128 d, already_normalized) : num_(n), den_(d) {}

    void normalize() {
        if (den_ == 0) throw overflow_error("Rat with zero denominator");
        if (den_ < 0) { num_ = checked_neg(num_); den_ = checked_neg(den_); }
        i128 g = gcd128(num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
        if (num_ == 0) den_ = 1;
    }

    i128 num_;
    i128 den_;
};

// Dense exact matrix, row-major.  Sizes here are tiny (<= 8), clarity wins.
template <typename T>
class Mat {
public:
    Mat() : rows_(0), cols_(0) {}
    Mat(std::size_t r, std::size_t c) : rows_(r), cols_(c), a_(r * c, T(0)) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    friend Mat operator*(const Mat& x, const Mat& y) {
        if (x.cols_ != y.rows_) throw overflow_error("matrix shape mismatch");
        Mat z(x.rows_, y.cols_);
        for (std::size_t i = 0; i < x.rows_; ++i)
            for (std::size_t k = 0; k < x.cols_; ++k) {
                const T& v = x(i, k);
                if (v == T(0)) continue;
                for (std::size_t j = 0; j < y.cols_; ++j)
                    z(i, j) = add(z(i, j), mul(v, y(k, j)));
            }
        return z;
    }

    friend bool operator==(const Mat& x, const Mat& y) {
        return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
    }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    void swap_rows(std::size_t i, std::size_t j) {
        for (std::size_t k = 0; k < cols_; ++k) std::swap((*this)(i, k), (*this)(j, k));
    }
    void swap_cols(std::size_t i, std::size_t j) {
        for (std::size_t k = 0; k < rows_; ++k) std::swap((*this)(k, i), (*this)(k, j));
    }
    // row i -= q * row j
    void row_axpy(std::size_t i, std::size_t j, const T& q) {
        for (std::size_t k = 0; k < cols_; ++k)
            (*this)(i, k) = sub((*this)(i, k), mul(q, (*this)(j, k)));
    }
    void col_axpy(std::size_t i, std::size_t j, const T& q) {
        for (std::size_t k = 0; k < rows_; ++k)
            (*this)(k, i) = sub((*this)(k, i), mul(q, (*this)(k, j)));
    }
    void negate_row(std::size_t i) {
        for (std::size_t k = 0; k < cols_; ++k) (*this)(i, k) = sub(T(0), (*this)(i, k));
    }
    void negate_col(std::size_t j) {
        for (std::size_t k = 0; k < rows_; ++k) (*this)(k, j) = sub(T(0), (*this)(k, j));
    }

private:
    static T add(const T& x, const T& y) {
        if constexpr (std::is_same_v<T, i128>) return checked_add(x, y);
        else return x + y;
    }
    static T sub(const T& x, const T& y) {
        if constexpr (std::is_same_v<T, i128>) return checked_sub(x, y);
        else return x - y;
    }
    static T mul(const T& x, const T& y) {
        if constexpr (std::is_same_v<T, i128>) return checked_mul(x, y);
        else return x * y;
    }

    std::size_t rows_, cols_;
    std::vector<T> a_;
};

using IMat = Mat<i128>;
using QMat = Mat<Rat>;

// Exact determinant by fraction-free expansion; fine for the tiny sizes here.
inline i128 det_i128(const IMat& m) {
    if (m.rows() != m.cols()) throw overflow_error("det of non-square matrix");
    std::size_t n = m.rows();
    if (n == 0) return 1;
    if (n == 1) return m(0, 0);
    i128 acc = 0;
    // Laplace expansion along the first row.
    for (std::size_t j = 0; j < n; ++j) {
        if (m(0, j) == 0) continue;
        IMat sub(n - 1, n - 1);
        for (std::size_t r = 1; r < n; ++r) {
            std::size_t cc = 0;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == j) continue;
                sub(r - 1, cc++) = m(r, c);
            }
        }
        i128 term = checked_mul(m(0, j), det_i128(sub));
        acc = (j % 2 == 0) ? checked_add(acc, term) : checked_sub(acc, term);
    }
    return acc;
}

inline QMat to_qmat(const IMat& m) {
    QMat q(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) q(i, j) = Rat(m(i, j));
    return q;
}

// Exact inverse via Gauss-Jordan; throws if singular.
inline QMat inverse(const QMat& m) {
    if (m.rows() != m.cols()) throw overflow_error("inverse of non-square matrix");
    std::size_t n = m.rows();
    QMat a = m;
    QMat inv = QMat::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col).is_zero()) ++piv;
        if (piv == n) throw overflow_error("singular matrix");
        a.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        Rat p = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a(r, col).is_zero()) continue;
            Rat f = a(r, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

struct SmithResult {
    IMat d;          // diagonal with d(i,i) >= 0, d(i,i) | d(i+1,i+1)
    IMat u;          // unimodular, u * a * v == d
    IMat v;
    std::vector<i128> invariants;  // nonzero diagonal entries > 1 kept in order
};

// Smith normal form over Z with transform tracking.
inline SmithResult smith_normal_form(const IMat& input) {
    SmithResult res;
    IMat a = input;
    std::size_t rows = a.rows(), cols = a.cols();
    IMat u = IMat::identity(rows);
    IMat v = IMat::identity(cols);

    std::size_t t = 0;
    while (t < rows && t < cols) {
        // Find a nonzero pivot of minimal absolute value in the remaining block.
        std::size_t pi = t, pj = t;
        i128 best = 0;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j) {
                i128 w = abs128(a(i, j));
                if (w != 0 && (best == 0 || w < best)) { best = w; pi = i; pj = j; }
            }
        if (best == 0) break;
        a.swap_rows(t, pi); u.swap_rows(t, pi);
        a.swap_cols(t, pj); v.swap_cols(t, pj);

        bool clean = false;
        while (!clean) {
            clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (a(i, t) == 0) continue;
                i128 q = a(i, t) / a(t, t);
                a.row_axpy(i, t, q);
                u.row_axpy(i, t, q);
                if (a(i, t) != 0) {  // remainder smaller than pivot: swap up
                    a.swap_rows(t, i); u.swap_rows(t, i);
                    clean = false;
                }
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (a(t, j) == 0) continue;
                i128 q = a(t, j) / a(t, t);
                a.col_axpy(j, t, q);
                v.col_axpy(j, t, q);
                if (a(t, j) != 0) {
                    a.swap_cols(t, j); v.swap_cols(t, j);
                    clean = false;
                }
            }
        }
        // Divisibility: pivot must divide everything below-right.
        bool divides_all = true;
        for (std::size_t i = t + 1; i < rows && divides_all; ++i)
            for (std::size_t j = t + 1; j < cols; ++j)
                if (a(i, j) % a(t, t) != 0) {
                    // Fold row i into row t and restart elimination at t.
                    a.row_axpy(t, i, i128{-1});
                    u.row_axpy(t, i, i128{-1});
                    divides_all = false;
                    break;
                }
        if (!divides_all) continue;
        if (a(t, t) < 0) { a.negate_row(t); u.negate_row(t); }
        ++t;
    }

    res.d = a;
    res.u = u;
    res.v = v;
    for (std::size_t i = 0; i < std::min(rows, cols); ++i)
        if (a(i, i) > 1) res.invariants.push_back(a(i, i));
    return res;
}

} // namespace geogreen
