#pragma once

// Closed-form regions: the uniform binary source through a BSC cascade
// (Hamming distortion) and the jointly Gaussian decoder-side-information
// family under squared error.

#include <optional>
#include <string>
#include <vector>

#include "srdp/info.hpp"
#include "srdp/region_noiseless.hpp"

namespace srdp {

struct BinaryParams {
  double alpha = 0.0;  // X -> U crossover
  double beta = 0.0;   // U -> Y crossover
};

/// (1 - H_b(alpha), 1 - H_b(beta), alpha * beta).
RateTuple binary_region_point(const BinaryParams& p);

/// Smallest R at (R0, D), or nullopt when (R0, D) is infeasible for every R.
std::optional<Bits> binary_min_R(Bits R0, double D);

/// Smallest R0 at which distortion D becomes attainable, 1 - H_b(D).
Bits binary_feasibility_edge(double D);

struct TradeoffRow {
  double D = 0.0;
  std::string baseline;  // how R0_base was chosen
  Bits R0_base = 0.0;
  double increase = 0.0;  // fractional increase of R0
  Bits R0_raised = 0.0;
  Bits R_base = 0.0;
  Bits R_raised = 0.0;
  double saving = 0.0;  // 1 - R_raised / R_base; 0 when R_base = 0
};

struct TradeoffBand {
  double D = 0.0;
  std::string baseline;
  double increase_lo = 0.0, increase_hi = 0.0;
  double saving_lo = 0.0, saving_hi = 0.0;
  // Reference band the computed one is compared against; empty for rows
  // without one.
  std::optional<double> reference_lo, reference_hi;

  bool overlaps_reference() const;
};

struct TradeoffTable {
  std::vector<TradeoffRow> rows;
  std::vector<TradeoffBand> bands;
};

/// Rate savings from extra common randomness at D = 0.1 (baseline at the
/// feasibility edge, +40..87%), D = 0.4 (baseline where R = R0, +43..63%) and
/// D = 0.5 (R is already zero).
TradeoffTable fig4_tradeoff_table();

/// The R0 where binary_min_R(R0, D) = R0, for D in (0, 0.5).
Bits binary_rate_crossing(double D);

struct GaussianParams {
  double eta = 0.0;
  double delta = 1.0;
  double nu = 0.5;

  double rho() const { return 1.0 - delta / 2.0; }
};

struct GaussianRates {
  Bits r1 = 0.0;  // R >= r1
  Bits r2 = 0.0;  // R0 >= r2
  Bits r3 = 0.0;  // R + R0 >= r3
};

/// Distance from rho^2 and from 1 inside which gaussian_rates refuses nu.
inline constexpr double kGaussianGuard = 1e-12;

/// s(nu) = (1 - nu)(1 - eta^2) / (nu - eta^2); throws std::domain_error
/// unless eta^2 < nu < 1.
double gaussian_s(double eta, double nu);

/// Throws std::domain_error naming the violated condition.
void validate_gaussian(const GaussianParams& g);

GaussianRates gaussian_rates(const GaussianParams& g);

/// Limit of r1 as nu decreases to rho^2: 0.5 log2((1 - eta^2) / (1 - rho^2)).
/// Requires 0 < delta <= 2 - 2|eta|.
Bits gaussian_min_R_limit(double eta, double delta);

/// Distortion 2 - 2|eta| from which zero communication suffices.
double gaussian_zero_rate_threshold(double eta);

}  // namespace srdp
