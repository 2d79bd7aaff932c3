#pragma once

// Secure RDP over a noisy broadcast channel: the legitimate decoder sees Y~,
// the eavesdropper Z~. Witness evaluation for the inner bound, the
// more-capable check, unsecured capacity and the separation threshold.

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "srdp/info.hpp"
#include "srdp/prob.hpp"
#include "srdp/region_noiseless.hpp"

namespace srdp {

class BroadcastChannel {
 public:
  BroadcastChannel() = default;
  /// `joint` maps x~ to the pair (y~, z~) flattened as y * z_size + z.
  BroadcastChannel(Channel joint, std::size_t y_size, std::size_t z_size);

  /// Outputs drawn independently given the input.
  static BroadcastChannel product(const Channel& to_y, const Channel& to_z);
  /// Z~ is Y~ passed through `y_to_z`.
  static BroadcastChannel degraded(const Channel& to_y, const Channel& y_to_z);

  std::size_t input_size() const noexcept { return joint_.input_size(); }
  std::size_t y_size() const noexcept { return y_size_; }
  std::size_t z_size() const noexcept { return z_size_; }
  const Channel& joint() const noexcept { return joint_; }
  const Channel& y_channel() const noexcept { return y_; }
  const Channel& z_channel() const noexcept { return z_; }

 private:
  Channel joint_, y_, z_;
  std::size_t y_size_ = 0, z_size_ = 0;
};

struct BcWitness {
  NoiselessWitness source_part;  // (X, W1, Y)
  Pmf w2;                        // P_{W2}
  Channel x_given_w2;            // P_{X~|W2}
};

/// Checks alphabet sizes and the caps |W1| <= |X|^2 + 1, |W2| <= |X~| + 1.
BcWitness make_bc_witness(NoiselessWitness source_part, Pmf w2, Channel x_given_w2);

class MismatchFactor {
 public:
  explicit MismatchFactor(double kappa);
  double kappa() const noexcept { return kappa_; }

 private:
  double kappa_;
};

struct BcPoint {
  Bits R_lo = 0.0;    // I(W1;X)
  Bits R_hi = 0.0;    // I(W2;Y~)
  Bits R0_min = 0.0;  // max(0, R0_raw)
  Bits R0_raw = 0.0;  // I(W1;Y) + I(W2;Z~) - I(W2;Y~)
  double D = 0.0;
  bool empty = false;  // R_lo > R_hi: no rate fits
};

BcPoint bc_inner_point(const BcWitness& w, const BroadcastChannel& bc, const DistortionMeasure& d);

enum class MoreCapable { holds_on_samples, violated, certified_degraded };
const char* to_string(MoreCapable s);

struct CheckConfig {
  std::size_t random_inputs = 1000;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  /// Gaps I(X~;Y~) - I(X~;Z~) above -tolerance count as holding.
  double tolerance = 1e-12;
  double degradation_tol = 1e-9;
  int degradation_iterations = 20000;
};

struct MoreCapableReport {
  MoreCapable status = MoreCapable::holds_on_samples;
  std::optional<Pmf> witness;     // most violating input when violated
  double min_gap = 0.0;           // smallest sampled I(X~;Y~) - I(X~;Z~)
  std::size_t inputs_checked = 0;
  std::optional<Channel> degrading;  // T with W_Y T = W_Z when certified
  double degradation_residual = 0.0;
};

/// Sampled check of I(X~;Y~) >= I(X~;Z~) over vertices, edge midpoints, the
/// barycenter and Dirichlet(1) draws, followed by a search for a degrading
/// channel. holds_on_samples is evidence, not proof.
MoreCapableReport more_capable_check(const BroadcastChannel& bc, const CheckConfig& config = {});

/// Best row-stochastic T minimizing max |W_Y T - W_Z| (projected gradient on
/// the squared error); returns T and the achieved max residual.
std::pair<Channel, double> find_degrading_channel(const Channel& to_y, const Channel& to_z,
                                                  int max_iterations = 20000,
                                                  double tol = 1e-9);

struct CapacityResult {
  Bits capacity = 0.0;  // lower end of the certified bracket
  double gap = 0.0;     // upper - lower bound on capacity
  int iterations = 0;
  bool converged = false;
  Pmf input;
};

struct CapacityOptions {
  double gap_tol = 1e-9;
  int max_iterations = 10000;
};

/// Blahut-Arimoto; never throws on slow convergence, see `converged`.
CapacityResult blahut_arimoto(const Channel& ch, const CapacityOptions& options = {});

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double gap) : std::runtime_error(what), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

/// max over inputs of I(X~;Y~); throws NonConvergence carrying the gap when
/// the iteration cap is hit first.
Bits capacity_unsecure(const Channel& ch, const CapacityOptions& options = {});

/// Corner with W2 = X~ ~ x_dist. Throws std::invalid_argument when the
/// more-capable check finds a violation.
BcPoint more_capable_region_point(const NoiselessWitness& w, const Pmf& x_dist,
                                  const BroadcastChannel& bc, const DistortionMeasure& d,
                                  const CheckConfig& config = {});

/// R <= kappa * C_unsecure + 1e-9.
bool separation_feasible(const MismatchFactor& kappa, Bits R, const Channel& ch);

}  // namespace srdp
