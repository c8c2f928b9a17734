#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "orbitscope/error.hpp"
#include "orbitscope/linalg.hpp"
#include "orbitscope/rational.hpp"

namespace orbitscope {

/// Exponent vector; degree is the sum of entries.
using Monomial = std::vector<int>;

inline int degree(const Monomial& m) { return std::accumulate(m.begin(), m.end(), 0); }

/// Degree with per-variable weights, e.g. the x-degree of a monomial in the basic invariants.
inline int weighted_degree(const Monomial& m, std::span<const int> weights) {
    int d = 0;
    for (std::size_t i = 0; i < m.size(); ++i) d += m[i] * weights[i];
    return d;
}

/// Graded lexicographic order, largest first: higher total degree wins, ties
/// broken by the exponent of the first variable, then the second, and so on.
struct GrlexGreater {
    bool operator()(const Monomial& a, const Monomial& b) const {
        int da = degree(a), db = degree(b);
        if (da != db) return da > db;
        return a > b;
    }
};

/// Whether the variables are coordinates x_1..x_n or basic invariants J_1..J_k.
enum class VariableKind { X, J };

inline const char* variable_prefix(VariableKind kind) { return kind == VariableKind::X ? "x" : "J"; }

/// Sparse multivariate polynomial with exact rational coefficients, stored in
/// canonical graded-lex order (leading term first), never holding zero terms.
class Polynomial {
public:
    using Terms = std::map<Monomial, Rational, GrlexGreater>;

    Polynomial() = default;
    Polynomial(int variable_count, VariableKind kind) : nvars_(variable_count), kind_(kind) {}

    static Polynomial constant(int variable_count, VariableKind kind, const Rational& c) {
        Polynomial p(variable_count, kind);
        p.add_term(Monomial(static_cast<std::size_t>(variable_count), 0), c);
        return p;
    }

    static Polynomial variable(int variable_count, VariableKind kind, int index) {
        Polynomial p(variable_count, kind);
        Monomial m(static_cast<std::size_t>(variable_count), 0);
        m.at(static_cast<std::size_t>(index)) = 1;
        p.add_term(m, 1);
        return p;
    }

    static Polynomial monomial(int variable_count, VariableKind kind, Monomial m, const Rational& c = 1) {
        Polynomial p(variable_count, kind);
        p.add_term(std::move(m), c);
        return p;
    }

    int variable_count() const noexcept { return nvars_; }
    VariableKind kind() const noexcept { return kind_; }
    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    /// Total degree; -1 for the zero polynomial.
    int degree() const { return terms_.empty() ? -1 : orbitscope::degree(terms_.begin()->first); }

    bool is_homogeneous() const {
        if (terms_.empty()) return true;
        int d = degree();
        for (const auto& [m, c] : terms_)
            if (orbitscope::degree(m) != d) return false;
        return true;
    }

    Rational coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    void add_term(Monomial m, const Rational& c) {
        if (static_cast<int>(m.size()) != nvars_) throw Error(Errc::DimensionMismatch, "monomial length");
        if (c == 0) return;
        auto [it, fresh] = terms_.try_emplace(std::move(m), 0);
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }

    void set_coefficient(const Monomial& m, const Rational& c) {
        if (c == 0)
            terms_.erase(m);
        else
            terms_[m] = c;
    }

    Polynomial homogeneous_component(int d) const {
        Polynomial out(nvars_, kind_);
        for (const auto& [m, c] : terms_)
            if (orbitscope::degree(m) == d) out.terms_.emplace(m, c);
        return out;
    }

    /// Terms whose weighted degree equals d.
    Polynomial weighted_component(std::span<const int> weights, int d) const {
        Polynomial out(nvars_, kind_);
        for (const auto& [m, c] : terms_)
            if (weighted_degree(m, weights) == d) out.terms_.emplace(m, c);
        return out;
    }

    /// Drops terms of weighted degree above max_degree.
    Polynomial truncated(std::span<const int> weights, int max_degree) const {
        Polynomial out(nvars_, kind_);
        for (const auto& [m, c] : terms_)
            if (weighted_degree(m, weights) <= max_degree) out.terms_.emplace(m, c);
        return out;
    }

    Polynomial scaled(const Rational& s) const {
        Polynomial out(nvars_, kind_);
        if (s == 0) return out;
        for (const auto& [m, c] : terms_) out.terms_.emplace(m, c * s);
        return out;
    }

    Polynomial derivative(int i) const {
        Polynomial out(nvars_, kind_);
        for (const auto& [m, c] : terms_) {
            int e = m.at(static_cast<std::size_t>(i));
            if (e == 0) continue;
            Monomial dm = m;
            --dm[static_cast<std::size_t>(i)];
            out.add_term(std::move(dm), c * e);
        }
        return out;
    }

    Polynomial& operator+=(const Polynomial& q) {
        check_compatible(q);
        for (const auto& [m, c] : q.terms_) add_term(m, c);
        return *this;
    }

    Polynomial& operator-=(const Polynomial& q) {
        check_compatible(q);
        for (const auto& [m, c] : q.terms_) add_term(m, -c);
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(const Polynomial& a) { return a.scaled(-1); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        a.check_compatible(b);
        Polynomial out(a.nvars_, a.kind_);
        Monomial m(static_cast<std::size_t>(a.nvars_));
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
                out.add_term(m, ca * cb);
            }
        return out;
    }

    /// Product keeping only terms of weighted degree <= max_degree.
    static Polynomial multiply_truncated(const Polynomial& a, const Polynomial& b, std::span<const int> weights,
                                         int max_degree) {
        a.check_compatible(b);
        Polynomial out(a.nvars_, a.kind_);
        Monomial m(static_cast<std::size_t>(a.nvars_));
        for (const auto& [ma, ca] : a.terms_) {
            int wa = weighted_degree(ma, weights);
            if (wa > max_degree) continue;
            for (const auto& [mb, cb] : b.terms_) {
                if (wa + weighted_degree(mb, weights) > max_degree) continue;
                for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
                out.add_term(m, ca * cb);
            }
        }
        return out;
    }

    friend Polynomial operator*(const Rational& s, const Polynomial& p) { return p.scaled(s); }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return a.nvars_ == b.nvars_ && a.kind_ == b.kind_ && a.terms_ == b.terms_;
    }

    /// Exact evaluation at a rational point.
    Rational evaluate(std::span<const Rational> point) const {
        if (static_cast<int>(point.size()) != nvars_) throw Error(Errc::DimensionMismatch, "evaluation point length");
        Rational total = 0;
        for (const auto& [m, c] : terms_) {
            Rational t = c;
            for (std::size_t i = 0; i < m.size(); ++i)
                for (int e = 0; e < m[i]; ++e) t *= point[i];
            total += t;
        }
        return total;
    }

    /// Floating evaluation; a separate code path from the exact one.
    template <class Real>
    Real evaluate_numeric(std::span<const Real> point) const {
        if (static_cast<int>(point.size()) != nvars_) throw Error(Errc::DimensionMismatch, "evaluation point length");
        Real total = 0;
        for (const auto& [m, c] : terms_) {
            Real t = static_cast<Real>(c.get_d());
            for (std::size_t i = 0; i < m.size(); ++i)
                for (int e = 0; e < m[i]; ++e) t *= point[i];
            total += t;
        }
        return total;
    }

    void check_compatible(const Polynomial& q) const {
        if (nvars_ != q.nvars_ || kind_ != q.kind_)
            throw Error(Errc::KindMismatch, std::string("cannot combine ") + variable_prefix(kind_) + "-space(" +
                                                std::to_string(nvars_) + ") with " + variable_prefix(q.kind_) +
                                                "-space(" + std::to_string(q.nvars_) + ") polynomial");
    }

private:
    int nvars_ = 0;
    VariableKind kind_ = VariableKind::X;
    Terms terms_;
};

/// Caches powers of a fixed list of polynomials, used for substitutions.
class PowerCache {
public:
    explicit PowerCache(std::vector<Polynomial> bases) : powers_(bases.size()) {
        for (std::size_t i = 0; i < bases.size(); ++i) powers_[i].push_back(std::move(bases[i]));
    }

    /// bases[i]^e for e >= 1.
    const Polynomial& power(std::size_t i, int e) {
        auto& list = powers_.at(i);
        while (static_cast<int>(list.size()) < e) list.push_back(list.back() * list.front());
        return list[static_cast<std::size_t>(e - 1)];
    }

    const Polynomial& base(std::size_t i) const { return powers_.at(i).front(); }
    std::size_t size() const noexcept { return powers_.size(); }

private:
    std::vector<std::vector<Polynomial>> powers_;
};

/// psi(maps[0], ..., maps[k-1]) for a polynomial psi in k variables.
inline Polynomial substitute(const Polynomial& psi, PowerCache& maps, int target_vars, VariableKind target_kind) {
    if (static_cast<std::size_t>(psi.variable_count()) != maps.size())
        throw Error(Errc::DimensionMismatch, "substitution needs one polynomial per variable");
    Polynomial out(target_vars, target_kind);
    for (const auto& [m, c] : psi.terms()) {
        Polynomial term = Polynomial::constant(target_vars, target_kind, c);
        for (std::size_t a = 0; a < m.size(); ++a)
            if (m[a] > 0) term = term * maps.power(a, m[a]);
        out += term;
    }
    return out;
}

inline Polynomial substitute(const Polynomial& psi, const std::vector<Polynomial>& maps) {
    if (static_cast<std::size_t>(psi.variable_count()) != maps.size())
        throw Error(Errc::DimensionMismatch, "substitution needs one polynomial per variable");
    if (maps.empty()) return Polynomial(0, VariableKind::X);
    for (const auto& m : maps) maps.front().check_compatible(m);
    PowerCache cache(maps);
    return substitute(psi, cache, maps.front().variable_count(), maps.front().kind());
}

/// The polynomial x -> p(T x) for a square matrix T.
inline Polynomial act(const RationalMatrix& t, const Polynomial& p) {
    if (p.kind() != VariableKind::X) throw Error(Errc::KindMismatch, "group acts on x-space polynomials only");
    if (!t.square() || static_cast<int>(t.rows()) != p.variable_count())
        throw Error(Errc::DimensionMismatch, "matrix size does not match polynomial variable count");
    const int n = p.variable_count();
    std::vector<Polynomial> forms;
    forms.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Polynomial form(n, VariableKind::X);
        for (int j = 0; j < n; ++j) {
            const auto& c = t(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (c != 0) {
                Monomial m(static_cast<std::size_t>(n), 0);
                m[static_cast<std::size_t>(j)] = 1;
                form.add_term(std::move(m), c);
            }
        }
        forms.push_back(std::move(form));
    }
    PowerCache cache(std::move(forms));
    return substitute(p, cache, n, VariableKind::X);
}

inline std::vector<Polynomial> gradient(const Polynomial& p) {
    std::vector<Polynomial> g;
    g.reserve(static_cast<std::size_t>(p.variable_count()));
    for (int i = 0; i < p.variable_count(); ++i) g.push_back(p.derivative(i));
    return g;
}

/// All monomials of total degree d in n variables, in canonical (descending) order.
inline std::vector<Monomial> monomials_of_degree(int n, int d) {
    std::vector<Monomial> out;
    Monomial m(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int index, int remaining) -> void {
        if (index == n - 1) {
            m[static_cast<std::size_t>(index)] = remaining;
            out.push_back(m);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            m[static_cast<std::size_t>(index)] = e;
            self(self, index + 1, remaining - e);
        }
    };
    if (n == 0) {
        if (d == 0) out.push_back(m);
        return out;
    }
    rec(rec, 0, d);
    return out;
}

/// All monomials with the given weighted degree, in canonical (descending) order.
inline std::vector<Monomial> monomials_of_weight(std::span<const int> weights, int w) {
    const std::size_t n = weights.size();
    std::vector<Monomial> out;
    Monomial m(n, 0);
    auto rec = [&](auto&& self, std::size_t index, int remaining) -> void {
        if (index == n) {
            if (remaining == 0) out.push_back(m);
            return;
        }
        for (int e = remaining / weights[index]; e >= 0; --e) {
            m[index] = e;
            self(self, index + 1, remaining - e * weights[index]);
        }
        m[index] = 0;
    };
    rec(rec, 0, w);
    std::sort(out.begin(), out.end(), GrlexGreater{});
    return out;
}

// --- text form -------------------------------------------------------------

/// Canonical text: terms in graded-lex order, e.g. "3/2*x1^2*x2 - x2^3 + 1".
inline std::string to_string(const Polynomial& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        bool negative = c < 0;
        Rational mag = negative ? Rational(-c) : c;
        if (first)
            os << (negative ? "-" : "");
        else
            os << (negative ? " - " : " + ");
        first = false;
        bool has_vars = orbitscope::degree(m) > 0;
        bool wrote = false;
        if (!has_vars || mag != 1) {
            os << mag.get_str();
            wrote = true;
        }
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            if (wrote) os << '*';
            os << variable_prefix(p.kind()) << (i + 1);
            if (m[i] > 1) os << '^' << m[i];
            wrote = true;
        }
    }
    return os.str();
}

/// Inverse of to_string. Variable count and kind must be supplied because the
/// text need not mention every variable.
inline Polynomial parse_polynomial(std::string_view text, int variable_count, VariableKind kind) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    const char prefix = variable_prefix(kind)[0];
    Polynomial out(variable_count, kind);
    if (s.empty()) throw Error(Errc::ParseError, "empty polynomial text");
    if (s == "0") return out;

    std::size_t pos = 0;
    auto fail = [&](const std::string& why) {
        throw Error(Errc::ParseError, why + " at offset " + std::to_string(pos) + " in '" + s + "'");
    };
    auto read_digits = [&]() {
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        return s.substr(start, pos - start);
    };

    while (pos < s.size()) {
        bool negative = false;
        if (s[pos] == '+' || s[pos] == '-') {
            negative = s[pos] == '-';
            ++pos;
        } else if (pos != 0) {
            fail("expected '+' or '-'");
        }
        Rational coef = 1;
        Monomial m(static_cast<std::size_t>(variable_count), 0);
        bool any = false;
        while (true) {
            if (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) {
                std::size_t start = pos;
                while (pos < s.size() &&
                       (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '/' || s[pos] == '.'))
                    ++pos;
                coef *= parse_rational(s.substr(start, pos - start));
            } else if (pos < s.size() && s[pos] == prefix) {
                ++pos;
                auto idx = read_digits();
                if (idx.empty()) fail("missing variable index");
                int i = std::stoi(idx);
                if (i < 1 || i > variable_count) fail("variable index out of range");
                int e = 1;
                if (pos < s.size() && s[pos] == '^') {
                    ++pos;
                    auto ex = read_digits();
                    if (ex.empty()) fail("missing exponent");
                    e = std::stoi(ex);
                }
                m[static_cast<std::size_t>(i - 1)] += e;
            } else {
                fail("expected coefficient or variable");
            }
            any = true;
            if (pos < s.size() && s[pos] == '*') {
                ++pos;
                continue;
            }
            break;
        }
        if (!any) fail("empty term");
        out.add_term(std::move(m), negative ? Rational(-coef) : coef);
    }
    return out;
}

// --- floating evaluation ---------------------------------------------------

/// A polynomial with coefficients rounded once to a floating type; used by the
/// numerical modules so exact arithmetic stays out of inner loops.
template <class Real>
class NumericPolynomial {
public:
    NumericPolynomial() = default;
    explicit NumericPolynomial(const Polynomial& p) : nvars_(p.variable_count()) {
        for (const auto& [m, c] : p.terms()) {
            monomials_.push_back(m);
            coefficients_.push_back(to_real(c));
            for (std::size_t i = 0; i < m.size(); ++i) max_exponent_ = std::max(max_exponent_, m[i]);
        }
    }

    int variable_count() const noexcept { return nvars_; }
    bool is_zero() const noexcept { return monomials_.empty(); }

    Real operator()(std::span<const Real> x) const {
        if (static_cast<int>(x.size()) != nvars_) throw Error(Errc::DimensionMismatch, "evaluation point length");
        if (monomials_.empty()) return Real(0);
        const std::size_t stride = static_cast<std::size_t>(max_exponent_) + 1;
        std::vector<Real> powers(static_cast<std::size_t>(nvars_) * stride, Real(1));
        for (std::size_t i = 0; i < static_cast<std::size_t>(nvars_); ++i)
            for (std::size_t e = 1; e < stride; ++e) powers[i * stride + e] = powers[i * stride + e - 1] * x[i];
        Real total = 0;
        for (std::size_t t = 0; t < monomials_.size(); ++t) {
            Real term = coefficients_[t];
            const auto& m = monomials_[t];
            for (std::size_t i = 0; i < m.size(); ++i)
                if (m[i] != 0) term *= powers[i * stride + static_cast<std::size_t>(m[i])];
            total += term;
        }
        return total;
    }

private:
    static Real to_real(const Rational& c) {
        if constexpr (std::is_same_v<Real, double>) return c.get_d();
        // keeps the extra bits of wider types for small numerators and denominators
        return static_cast<Real>(c.get_num().get_d()) / static_cast<Real>(c.get_den().get_d());
    }

    int nvars_ = 0;
    int max_exponent_ = 0;
    std::vector<Monomial> monomials_;
    std::vector<Real> coefficients_;
};

} // namespace orbitscope
