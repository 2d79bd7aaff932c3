#pragma once

// Secure RDP region over a noiseless link: a witness (Q_X, P_{U|X}, P_{Y|U})
// with P_Y = Q_X certifies every tuple dominating (I(U;X), I(U;Y), E d(X,Y)).

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "srdp/info.hpp"
#include "srdp/prob.hpp"

namespace srdp {

/// Realism residual TV(P_Y, Q_X) accepted for single-letter witnesses.
inline constexpr double kRealismTol = 1e-9;
/// Slack allowed when comparing a witness corner with a target tuple.
inline constexpr double kCertifyTol = 1e-6;

struct RateTuple {
  Bits R = 0.0;   // message rate
  Bits R0 = 0.0;  // common-randomness rate
  double D = 0.0;
};

/// Componentwise a <= b + tol.
bool dominated_by(const RateTuple& a, const RateTuple& b, double tol = kCertifyTol);

/// Per-letter distortion d(x, y), averaged over the block.
class DistortionMeasure {
 public:
  DistortionMeasure() = default;
  explicit DistortionMeasure(std::vector<std::vector<double>> matrix);
  static DistortionMeasure hamming(std::size_t size);
  /// Squared error between letter values.
  static DistortionMeasure squared_error(const std::vector<double>& letters);

  std::size_t x_size() const noexcept { return x_size_; }
  std::size_t y_size() const noexcept { return y_size_; }
  double operator()(std::size_t x, std::size_t y) const { return d_[x * y_size_ + y]; }
  double max_value() const noexcept { return max_value_; }
  DistortionMeasure scaled(double factor) const;

 private:
  std::size_t x_size_ = 0;
  std::size_t y_size_ = 0;
  std::vector<double> d_;
  double max_value_ = 0.0;
};

/// Cardinality cap |X|^2 + 1 on the auxiliary alphabet.
inline std::size_t noiseless_u_cap(std::size_t x_size) { return x_size * x_size + 1; }

struct NoiselessWitness {
  Pmf source;         // Q_X
  Channel u_channel;  // P_{U|X}
  Channel y_channel;  // P_{Y|U}

  std::size_t u_size() const { return u_channel.output_size(); }
};

/// Validates dimensions, the |U| cap and realism; throws std::invalid_argument.
NoiselessWitness make_noiseless_witness(Pmf source, Channel u_channel, Channel y_channel);

/// P_Y induced by the cascade.
Pmf witness_output(const NoiselessWitness& w);
double realism_residual(const NoiselessWitness& w);
/// Joint over (X, U, Y).
JointPmf witness_joint(const NoiselessWitness& w);

/// Corner (I(U;X), I(U;Y), E d(X,Y)); throws when the realism residual
/// exceeds kRealismTol or dimensions disagree.
RateTuple evaluate_witness(const NoiselessWitness& w, const DistortionMeasure& d);

struct SearchConfig {
  std::size_t starts = 32;
  std::uint64_t seed = 1;
  /// Auxiliary alphabet size; 0 selects the cap |X|^2 + 1.
  std::size_t u_size = 0;
  std::size_t jobs = 1;
  /// Local solver budget per start.
  int max_outer = 25;
  int max_inner = 400;
};

void validate_search(const SearchConfig& search, std::size_t x_size);

struct RatedWitness {
  NoiselessWitness witness;
  RateTuple corner;
};

/// Multi-start search for the smallest I(U;X) subject to I(U;Y) <= r0_cap and
/// E d <= d_cap (r0_cap may be +inf). Returns the best certified witness, or
/// nullopt when no start produced one. Ties in R within 1e-9 go to the
/// smaller I(U;Y).
std::optional<RatedWitness> minimize_rate(const Pmf& source, const DistortionMeasure& d,
                                          double r0_cap, double d_cap,
                                          const SearchConfig& search,
                                          const std::vector<NoiselessWitness>& warm_starts = {});

/// A witness whose corner is dominated by `target` within kCertifyTol, or
/// nullopt when none was found within the search budget. nullopt is not a
/// proof that the target lies outside the region.
std::optional<NoiselessWitness> certify_achievable(const Pmf& source, const DistortionMeasure& d,
                                                   const RateTuple& target,
                                                   const SearchConfig& search);

struct GridPoint {
  double R0 = 0.0;  // +inf leaves the common-randomness rate unconstrained
  double D = 0.0;
};

struct FrontierPoint {
  GridPoint at;
  std::optional<RatedWitness> best;  // empty: no witness found

  std::optional<Bits> r_min() const {
    return best ? std::optional<Bits>(best->corner.R) : std::nullopt;
  }
};

/// Heuristic lower frontier of R over a grid of (R0, D). Every reported value
/// is backed by a stored witness; a final pass lets each point reuse any
/// witness that fits its constraints, so results are nonincreasing in R0 and D.
std::vector<FrontierPoint> frontier_sweep(const Pmf& source, const DistortionMeasure& d,
                                          const std::vector<GridPoint>& grid,
                                          const SearchConfig& search);

}  // namespace srdp
