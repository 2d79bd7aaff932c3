#pragma once

// Information measures in bits. 0·log 0 is taken as 0 everywhere.

#include <span>

#include "srdp/prob.hpp"

namespace srdp {

/// Information quantity in bits (log base 2).
using Bits = double;

/// Mutual-information terms within this distance below zero are clamped.
inline constexpr double kClampTol = 1e-12;

Bits entropy(std::span<const double> probs);
inline Bits entropy(const Pmf& p) { return entropy(p.probs()); }
/// Entropy of the full joint table.
inline Bits entropy(const JointPmf& j) { return entropy(j.cells()); }

/// H_b(p); throws for p outside [0, 1].
Bits binary_entropy(double p);

/// The p in [0, 1/2] with H_b(p) = h, to 1e-10 or better, by bisection.
double inverse_binary_entropy(Bits h);

/// I(A;B) for a two-variable joint.
Bits mutual_information(const JointPmf& j);

/// I(A;B|C) for a three-variable joint ordered (A, B, C). Letters of C with
/// zero probability contribute nothing.
Bits conditional_mi(const JointPmf& j);

/// H(A|B) for a two-variable joint ordered (A, B).
Bits conditional_entropy(const JointPmf& j);

/// Half the L1 distance.
double tv_distance(std::span<const double> p, std::span<const double> q);
inline double tv_distance(const Pmf& p, const Pmf& q) { return tv_distance(p.probs(), q.probs()); }

/// Crossover of two cascaded binary symmetric channels, a(1-b) + b(1-a).
double star(double a, double b);

/// Clamps values in [-kClampTol, 0) to zero; larger negatives pass through.
inline Bits clamp_small_negative(Bits v) { return (v < 0.0 && v >= -kClampTol) ? 0.0 : v; }

}  // namespace srdp
