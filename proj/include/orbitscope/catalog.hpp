#pragma once

#include <string>
#include <vector>

#include "orbitscope/group.hpp"

// Small rational representations used throughout the tests and shipped as
// group spec files under groups/.
namespace orbitscope::catalog {

inline RationalMatrix mat(std::initializer_list<std::initializer_list<long>> rows) {
    std::vector<RationalVector> out;
    for (auto r : rows) {
        RationalVector v;
        for (long x : r) v.push_back(Rational(x));
        out.push_back(std::move(v));
    }
    return RationalMatrix::from_rows(out);
}

/// Coordinate permutation matrix sending e_j to e_{perm[j]}.
inline RationalMatrix permutation(const std::vector<int>& perm) {
    const auto n = perm.size();
    RationalMatrix m(n, n);
    for (std::size_t j = 0; j < n; ++j) m(static_cast<std::size_t>(perm[j]), j) = 1;
    return m;
}

inline FiniteGroupRep trivial(int n) { return close_generators({RationalMatrix::identity(static_cast<std::size_t>(n))}, default_max_order, "trivial"); }

/// x -> -x on the line.
inline FiniteGroupRep z2_line() { return close_generators({mat({{-1}})}, default_max_order, "Z2 on R"); }

/// {I, -I} on R^2.
inline FiniteGroupRep z2_plane() { return close_generators({mat({{-1, 0}, {0, -1}})}, default_max_order, "Z2 on R2"); }

/// Independent sign flips of the two coordinates.
inline FiniteGroupRep z2xz2() {
    return close_generators({mat({{-1, 0}, {0, 1}}), mat({{1, 0}, {0, -1}})}, default_max_order, "Z2xZ2 on R2");
}

inline RationalMatrix rot90() { return mat({{0, -1}, {1, 0}}); }
inline RationalMatrix mirror_x() { return mat({{1, 0}, {0, -1}}); }

inline FiniteGroupRep z4() { return close_generators({rot90()}, default_max_order, "Z4 on R2"); }

/// Symmetries of the square.
inline FiniteGroupRep d4() { return close_generators({rot90(), mirror_x()}, default_max_order, "D4 on R2"); }

inline FiniteGroupRep s3_perm() {
    return close_generators({permutation({1, 0, 2}), permutation({1, 2, 0})}, default_max_order, "S3 on R3");
}

inline FiniteGroupRep s4_perm() {
    return close_generators({permutation({1, 0, 2, 3}), permutation({1, 2, 3, 0})}, default_max_order, "S4 on R4");
}

/// S^{-1} g S for every generator g of rep.
inline FiniteGroupRep conjugated(const FiniteGroupRep& rep, const RationalMatrix& s, std::string name = {}) {
    auto s_inv = inverse(s);
    if (!s_inv) throw Error(Errc::NonInvertibleGenerator, "conjugating matrix is singular");
    std::vector<RationalMatrix> gens;
    for (const auto& g : rep.generators()) gens.push_back(*s_inv * g * s);
    return close_generators(gens, default_max_order, name.empty() ? rep.name() + " (conjugated)" : std::move(name));
}

} // namespace orbitscope::catalog
