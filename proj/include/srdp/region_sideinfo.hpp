#pragma once

// Secure RDP over a noiseless link when the decoder sees side information Z
// correlated with the source. Two models: Z at both ends, or at the decoder
// only. Witnesses live on (X, Z, U, Y) with P_{XZ} = Q_{XZ} and P_Y = Q_X.

#include <optional>

#include "srdp/info.hpp"
#include "srdp/prob.hpp"
#include "srdp/region_noiseless.hpp"

namespace srdp {

/// Cap |X|^2 |Z| + 2 on the auxiliary alphabet. Also used for decoder-only
/// searches, where the inner bound itself states no cap.
inline std::size_t si_u_cap(std::size_t x_size, std::size_t z_size) {
  return x_size * x_size * z_size + 2;
}

/// Markov residual accepted for X - (U, Z) - Y.
inline constexpr double kMarkovTol = 1e-12;

struct SiWitnessBoth {
  JointPmf source;      // Q_{XZ}, shape {|X|, |Z|}
  Channel uy_channel;   // P_{UY|XZ}: input x*|Z|+z, output u*|Y|+y
  std::size_t u_size = 0;

  std::size_t x_size() const { return source.shape()[0]; }
  std::size_t z_size() const { return source.shape()[1]; }
};

struct SiWitnessDec {
  JointPmf source;     // Q_{XZ}
  Channel u_channel;   // P_{U|X}
  Channel y_channel;   // P_{Y|UZ}: input u*|Z|+z

  std::size_t x_size() const { return source.shape()[0]; }
  std::size_t z_size() const { return source.shape()[1]; }
  std::size_t u_size() const { return u_channel.output_size(); }
};

/// Validates shapes, the |U| cap, the Markov chain and realism.
SiWitnessBoth make_si_both_witness(JointPmf source, Channel uy_channel, std::size_t u_size);
/// Builds P_{UY|XZ} = P_{U|XZ} P_{Y|UZ}, which is Markov by construction.
SiWitnessBoth si_both_from_parts(JointPmf source, const Channel& u_given_xz,
                                 const Channel& y_given_uz);
SiWitnessDec make_si_dec_witness(JointPmf source, Channel u_channel, Channel y_channel);
/// The decoder-only witness seen as one where the encoder ignores Z.
SiWitnessBoth as_both(const SiWitnessDec& w);

/// Joint over (X, Z, U, Y).
JointPmf si_joint(const SiWitnessBoth& w);
JointPmf si_joint(const SiWitnessDec& w);

/// max over (x, z, u) with positive mass of |P(y|x,z,u) - P(y|z,u)|.
double markov_residual(const SiWitnessBoth& w);
/// TV(P_Y, Q_X).
double si_realism_residual(const JointPmf& xzuy);

/// IPF on P_{Y|UZ} toward P_Y = Q_X: 1000 iterations or residual < 1e-9.
/// The caller checks the achieved residual.
Channel project_realism(const JointPmf& source, const Channel& u_given_xz,
                        const Channel& y_given_uz);

enum class RegionKind { exact, inner_bound };
const char* to_string(RegionKind k);

struct SiModelTag {
  bool jointly_iid = false;  // P_{Y^n Z^n} = P_{YZ}^n is part of the model
  bool z_degenerate = false; // Z constant: the noiseless region applies
};

/// Whether decoder-only bounds describe the exact region under `tag`.
RegionKind jointly_iid_exactness_flag(const SiModelTag& tag);

struct SiPoint {
  Bits R_min = 0.0, R0_min = 0.0, sum_min = 0.0;  // clamped at 0
  Bits R_raw = 0.0, R0_raw = 0.0, sum_raw = 0.0;
  double D = 0.0;
  RegionKind kind = RegionKind::exact;

  /// target dominates every bound within tol.
  bool admits(const RateTuple& target, double tol = kCertifyTol) const;
};

/// R >= I(U;X|Z), R0 >= I(U;Y) - I(U;Z), R + R0 >= I(U;Y|Z) - H(Z|Y).
SiPoint si_both_point(const SiWitnessBoth& w, const DistortionMeasure& d);
/// R >= I(U;X) - I(U;Z), R0 >= I(U;Y) - I(U;Z), R + R0 >= I(U;Y|Z).
SiPoint si_dec_point(const SiWitnessDec& w, const DistortionMeasure& d, SiModelTag tag = {});

/// Multi-start search for a witness whose bounds admit `target`. nullopt
/// means none was found, not that the target is outside the region.
std::optional<SiWitnessBoth> certify_si_both(const JointPmf& source, const DistortionMeasure& d,
                                             const RateTuple& target, const SearchConfig& search);
std::optional<SiWitnessDec> certify_si_dec(const JointPmf& source, const DistortionMeasure& d,
                                           const RateTuple& target, const SearchConfig& search);

}  // namespace srdp
