#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>
#include <string_view>

#include "orbitscope/error.hpp"

namespace orbitscope {

using Rational = mpq_class;
using Integer = mpz_class;

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

/// Accepts "p/q", plain integers, and exact decimals ("-0.25", "1e-3").
inline Rational parse_rational(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw Error(Errc::ParseError, "empty rational literal");

    auto digits_only = [](std::string_view v) {
        if (v.empty()) return false;
        for (char c : v)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };

    bool negative = false;
    std::string_view body = s;
    if (body.front() == '+' || body.front() == '-') {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }

    Rational value;
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
        auto num = body.substr(0, slash);
        auto den = body.substr(slash + 1);
        if (!digits_only(num) || !digits_only(den))
            throw Error(Errc::ParseError, "bad rational literal '" + s + "'");
        Integer d{std::string(den)};
        if (d == 0) throw Error(Errc::ParseError, "zero denominator in '" + s + "'");
        value = Rational(Integer{std::string(num)}, d);
        value.canonicalize();
    } else {
        long exponent = 0;
        if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
            auto exp_text = std::string(body.substr(e + 1));
            try {
                size_t used = 0;
                exponent = std::stol(exp_text, &used);
                if (used != exp_text.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw Error(Errc::ParseError, "bad exponent in '" + s + "'");
            }
            body = body.substr(0, e);
        }
        std::string int_part(body), frac_part;
        if (auto dot = body.find('.'); dot != std::string_view::npos) {
            int_part = std::string(body.substr(0, dot));
            frac_part = std::string(body.substr(dot + 1));
        }
        if (int_part.empty() && frac_part.empty())
            throw Error(Errc::ParseError, "bad rational literal '" + s + "'");
        if ((!int_part.empty() && !digits_only(int_part)) || (!frac_part.empty() && !digits_only(frac_part)))
            throw Error(Errc::ParseError, "bad rational literal '" + s + "'");
        Integer mantissa(int_part.empty() ? std::string("0") : int_part);
        for (char c : frac_part) mantissa = mantissa * 10 + (c - '0');
        exponent -= static_cast<long>(frac_part.size());
        Integer scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
        value = exponent < 0 ? Rational(mantissa, scale) : Rational(mantissa * scale);
        value.canonicalize();
    }
    return negative ? Rational(-value) : value;
}

/// Nearest multiple of 2^-bits; keeps iterated exact computations bounded.
inline Rational round_to_dyadic(const Rational& q, unsigned bits) {
    Integer scale = 1;
    scale <<= bits;
    Rational scaled = q * scale;
    Integer floor_value;
    mpz_fdiv_q(floor_value.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
    if (Rational(scaled - floor_value) >= Rational(1, 2)) floor_value += 1;
    Rational out(floor_value, scale);
    out.canonicalize();
    return out;
}

} // namespace orbitscope
