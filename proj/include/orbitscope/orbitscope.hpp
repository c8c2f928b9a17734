#pragma once

#include "orbitscope/error.hpp"
#include "orbitscope/rational.hpp"
#include "orbitscope/linalg.hpp"
#include "orbitscope/polynomial.hpp"
#include "orbitscope/group.hpp"
#include "orbitscope/invariants.hpp"
#include "orbitscope/strata.hpp"
#include "orbitscope/landau.hpp"
#include "orbitscope/reduction.hpp"
#include "orbitscope/dynamics.hpp"
#include "orbitscope/io.hpp"
#include "orbitscope/catalog.hpp"

namespace orbitscope {

inline constexpr const char* version = "0.1.0";

} // namespace orbitscope
