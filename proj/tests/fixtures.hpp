#pragma once

// Complexes with reflections shared by several tests.

#include "regge/action.hpp"
#include "regge/reflection.hpp"

namespace fixture {

using namespace regge;

/// Two tetrahedra sharing {1,2,3}, with θ swapping the apexes 0 and 4.
inline ReflectedGeometry two_tetrahedra() {
  const auto k = build_complex({{0, 1, 2, 3}, {1, 2, 3, 4}});
  const auto rep = verify_reflection(k, Automorphism({{0, 4}, {4, 0}}), build_complex({{0, 1, 2, 3}}));
  return ReflectedGeometry(k, rep.value());
}

/// A strip of five tetrahedra doubled along two adjacent boundary triangles.
inline DoubledComplex doubled_strip() {
  const auto kp = build_complex({{0, 1, 2, 3}, {1, 2, 3, 4}, {2, 3, 4, 5}, {3, 4, 5, 6}, {4, 5, 6, 7}});
  return double_complex(kp, build_complex({{0, 1, 2}, {1, 2, 4}}));
}

inline ReflectedGeometry doubled_strip_geometry() {
  const auto d = doubled_strip();
  return ReflectedGeometry(d.complex, d.verification.value());
}

/// ∂Δ⁴ with the lexicographic layout.
inline MetricLayout boundary_4_simplex() {
  return MetricLayout(build_complex({{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 3, 4}, {0, 2, 3, 4}, {1, 2, 3, 4}}));
}

}  // namespace fixture
