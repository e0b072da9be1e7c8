#pragma once

#include <random>

#include "convfold/corpus.hpp"
#include "convfold/geometry.hpp"

namespace convfold::testing {

inline ConvexPolygon unit_square() { return builtin_domain("square"); }
inline ConvexPolygon parallelogram() { return builtin_domain("parallelogram"); }

inline ConvexPolygon random_polygon(std::mt19937_64& rng, int n) { return random_convex_polygon(rng, n); }

}  // namespace convfold::testing
