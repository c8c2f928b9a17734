#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitscope/error.hpp"
#include "orbitscope/rational.hpp"

namespace orbitscope {

using RationalVector = std::vector<Rational>;

/// Dense row-major matrix over the rationals.
class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

    static RationalMatrix identity(std::size_t n) {
        RationalMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    static RationalMatrix from_rows(const std::vector<RationalVector>& rows) {
        if (rows.empty()) return {};
        RationalMatrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw Error(Errc::DimensionMismatch, "ragged matrix rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    RationalVector row(std::size_t i) const {
        return RationalVector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                              data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    RationalMatrix transpose() const {
        RationalMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
        if (a.cols_ != b.rows_) throw Error(Errc::DimensionMismatch, "matrix product shape");
        RationalMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Rational& aik = a(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    if (b(k, j) != 0) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend RationalVector operator*(const RationalMatrix& a, const RationalVector& x) {
        if (a.cols_ != x.size()) throw Error(Errc::DimensionMismatch, "matrix-vector shape");
        RationalVector y(a.rows_, Rational(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j)
                if (a(i, j) != 0 && x[j] != 0) y[i] += a(i, j) * x[j];
        return y;
    }

    friend RationalMatrix operator+(RationalMatrix a, const RationalMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(Errc::DimensionMismatch, "matrix sum shape");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
        return a;
    }

    friend RationalMatrix operator-(RationalMatrix a, const RationalMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(Errc::DimensionMismatch, "matrix difference shape");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
        return a;
    }

    RationalMatrix scaled(const Rational& s) const {
        RationalMatrix m = *this;
        for (auto& v : m.data_) v *= s;
        return m;
    }

    friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    /// Lexicographic over (shape, entries); used only as a map key order.
    friend bool operator<(const RationalMatrix& a, const RationalMatrix& b) {
        if (a.rows_ != b.rows_) return a.rows_ < b.rows_;
        if (a.cols_ != b.cols_) return a.cols_ < b.cols_;
        for (std::size_t i = 0; i < a.data_.size(); ++i) {
            int c = cmp(a.data_[i], b.data_[i]);
            if (c != 0) return c < 0;
        }
        return false;
    }

    bool is_identity() const {
        if (!square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if ((*this)(i, j) != (i == j ? 1 : 0)) return false;
        return true;
    }

    const std::vector<Rational>& data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

namespace detail {

/// In-place reduced row echelon form; returns pivot columns.
inline std::vector<std::size_t> rref(RationalMatrix& m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && m(p, c) == 0) ++p;
        if (p == m.rows()) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
        Rational inv = 1 / m(r, c);
        for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || m(i, c) == 0) continue;
            Rational f = m(i, c);
            for (std::size_t j = 0; j < m.cols(); ++j)
                if (m(r, j) != 0) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

} // namespace detail

inline std::size_t rank(RationalMatrix m) { return detail::rref(m).size(); }

inline Rational determinant(RationalMatrix m) {
    if (!m.square()) throw Error(Errc::DimensionMismatch, "determinant of non-square matrix");
    const std::size_t n = m.rows();
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m(p, c) == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
            det = -det;
        }
        det *= m(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m(i, c) == 0) continue;
            Rational f = m(i, c) / m(c, c);
            for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
        }
    }
    return det;
}

inline std::optional<RationalMatrix> inverse(const RationalMatrix& a) {
    if (!a.square()) throw Error(Errc::DimensionMismatch, "inverse of non-square matrix");
    const std::size_t n = a.rows();
    RationalMatrix aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n + i) = 1;
    }
    auto pivots = detail::rref(aug);
    if (pivots.size() < n || pivots[n - 1] != n - 1) return std::nullopt;
    RationalMatrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

/// Basis of {x : m x = 0}, one vector per free column, in column order.
inline std::vector<RationalVector> nullspace(RationalMatrix m) {
    auto pivots = detail::rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<RationalVector> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        RationalVector v(m.cols(), Rational(0));
        v[free] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Coefficients c_1..c_n of det(I - t A) = 1 + c_1 t + ... + c_n t^n (Faddeev-LeVerrier).
inline RationalVector det_one_minus_t(const RationalMatrix& a) {
    const std::size_t n = a.rows();
    // characteristic polynomial det(lambda I - A) = lambda^n + p_1 lambda^{n-1} + ... + p_n
    RationalVector p(n + 1, Rational(0));
    p[0] = 1;
    RationalMatrix m = RationalMatrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        RationalMatrix am = a * m;
        Rational trace = 0;
        for (std::size_t i = 0; i < n; ++i) trace += am(i, i);
        p[k] = -trace / static_cast<long>(k);
        m = am;
        for (std::size_t i = 0; i < n; ++i) m(i, i) += p[k];
    }
    // det(I - tA) = t^n det(t^{-1} I - A) = sum_k p_k t^k
    return p;
}

/// Scales a vector to coprime integers with a positive first nonzero entry.
inline RationalVector primitive(RationalVector v) {
    Integer den_lcm = 1, num_gcd = 0;
    for (const auto& q : v) {
        if (q == 0) continue;
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), q.get_den_mpz_t());
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), q.get_num_mpz_t());
    }
    if (num_gcd == 0) return v;
    Rational scale(den_lcm, num_gcd);
    scale.canonicalize();
    for (const auto& q : v)
        if (q != 0) {
            if (q < 0) scale = -scale;
            break;
        }
    for (auto& q : v) q *= scale;
    return v;
}

/// Incrementally maintained reduced row echelon basis of sparse vectors.
///
/// Vectors are maps Key -> Rational ordered by Compare; the first key in that
/// order is the pivot. Each stored row remembers which inserted inputs it is
/// a combination of, so dependent inserts yield kernel vectors.
template <class Key, class Compare>
class SparseEchelon {
public:
    using Vector = std::map<Key, Rational, Compare>;
    using Combination = std::map<std::size_t, Rational>;

    struct Reduction {
        Vector residual;
        Combination used;  // v = residual + sum used[i] * input_i
    };

    std::size_t rank() const noexcept { return rows_.size(); }
    std::size_t inserted() const noexcept { return inserted_; }

    Reduction reduce(const Vector& v) const {
        Reduction out{v, {}};
        std::vector<std::pair<std::size_t, Rational>> hits;
        for (const auto& [key, coef] : v) {
            auto it = pivot_row_.find(key);
            if (it != pivot_row_.end()) hits.emplace_back(it->second, coef);
        }
        for (const auto& [row_index, coef] : hits) {
            const Row& row = rows_[row_index];
            axpy(out.residual, -coef, row.vector);
            for (const auto& [input, c] : row.combination) add_to(out.used, input, coef * c);
        }
        return out;
    }

    bool in_span(const Vector& v) const { return reduce(v).residual.empty(); }

    struct InsertResult {
        bool independent = false;
        Combination kernel;  // when dependent: sum kernel[i] * input_i = 0
        Vector residual;     // when independent: the reduced vector before normalisation
    };

    InsertResult insert(const Vector& v) {
        const std::size_t index = inserted_++;
        Reduction red = reduce(v);
        InsertResult result;
        if (red.residual.empty()) {
            result.kernel = std::move(red.used);
            for (auto& [k, c] : result.kernel) c = -c;
            add_to(result.kernel, index, Rational(1));
            return result;
        }
        result.independent = true;
        result.residual = red.residual;

        Row row;
        row.vector = std::move(red.residual);
        row.combination = std::move(red.used);
        for (auto& [k, c] : row.combination) c = -c;
        add_to(row.combination, index, Rational(1));
        const Key pivot = row.vector.begin()->first;
        Rational inv = 1 / row.vector.begin()->second;
        for (auto& [k, c] : row.vector) c *= inv;
        for (auto& [k, c] : row.combination) c *= inv;

        for (auto& other : rows_) {
            auto it = other.vector.find(pivot);
            if (it == other.vector.end()) continue;
            Rational f = it->second;
            axpy(other.vector, -f, row.vector);
            for (const auto& [input, c] : row.combination) add_to(other.combination, input, -f * c);
        }
        pivot_row_.emplace(pivot, rows_.size());
        rows_.push_back(std::move(row));
        return result;
    }

    std::vector<Key> pivots() const {
        std::vector<Key> keys;
        for (const auto& [k, i] : pivot_row_) keys.push_back(k);
        return keys;
    }

    const Vector& row_for_pivot(const Key& k) const { return rows_.at(pivot_row_.at(k)).vector; }
    const Combination& combination_for_pivot(const Key& k) const { return rows_.at(pivot_row_.at(k)).combination; }

private:
    struct Row {
        Vector vector;
        Combination combination;
    };

    static void axpy(Vector& target, const Rational& a, const Vector& x) {
        for (const auto& [k, c] : x) {
            auto [it, fresh] = target.try_emplace(k, 0);
            it->second += a * c;
            if (it->second == 0) target.erase(it);
        }
    }

    static void add_to(Combination& target, std::size_t key, const Rational& value) {
        if (value == 0) return;
        auto [it, fresh] = target.try_emplace(key, 0);
        it->second += value;
        if (it->second == 0) target.erase(it);
    }

    std::vector<Row> rows_;
    std::map<Key, std::size_t, Compare> pivot_row_;
    std::size_t inserted_ = 0;
};

} // namespace orbitscope
