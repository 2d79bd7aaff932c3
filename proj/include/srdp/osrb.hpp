#pragma once

// Exact small-blocklength simulator of the noiseless secure RDP scheme: a
// seeded codebook U^n(c, s), a likelihood encoder for s given (x^n, c), and a
// decoder that emits Y^n through P_{Y|U} letter by letter. Everything induced
// by one codebook is computed by full enumeration, no sampling.

#include <cstdint>
#include <vector>

#include "srdp/info.hpp"
#include "srdp/prob.hpp"
#include "srdp/region_noiseless.hpp"

namespace srdp {

struct OsrbConfig {
  std::size_t n = 1;
  double R = 0.0;   // message rate, bits per source letter
  double R0 = 0.0;  // common-randomness rate
  Pmf source;       // Q_X
  Pmf u_prior;      // P_U
  Channel ux_channel;  // P_{X|U}
  Channel yu_channel;  // P_{Y|U}
  std::uint64_t seed = 1;  // fixes the codebook
  DistortionMeasure distortion;  // empty: Hamming on the source alphabet
};

/// Bits of message and common randomness after rounding up: ceil(n R).
std::size_t message_bits(const OsrbConfig& cfg);
std::size_t common_bits(const OsrbConfig& cfg);

/// Checks alphabets, rates and the enumeration caps; throws
/// std::invalid_argument or CapExceeded.
void validate_osrb(const OsrbConfig& cfg);

/// Scheme for a noiseless witness: P_U and P_{X|U} by Bayes' rule. Letters of
/// U that carry no mass get P_{X|U} = Q_X; the codebook never draws them.
OsrbConfig osrb_config(const NoiselessWitness& w, std::size_t n, double R, double R0,
                       std::uint64_t seed);

struct Codebook {
  std::size_t n = 0;
  std::size_t c_count = 1, s_count = 1;
  std::vector<std::uint32_t> letters;  // codeword (c, s) starts at (c * s_count + s) * n

  std::span<const std::uint32_t> word(std::size_t c, std::size_t s) const {
    return {letters.data() + (c * s_count + s) * n, n};
  }
};

/// Codewords drawn i.i.d. from u_prior, in (c, s, position) order, from an
/// Rng seeded with cfg.seed.
Codebook build_codebook(const OsrbConfig& cfg);

struct EncoderOutput {
  Pmf posterior;  // P(s | x^n, c)
  bool fallback = false;  // every likelihood was zero; posterior is uniform
};

/// P(s | x^n, c) proportional to prod_i P_{X|U}(x_i | U_i(c, s)).
EncoderOutput likelihood_encode(std::span<const std::size_t> x_seq, std::size_t c,
                                const Codebook& cb, const OsrbConfig& cfg);

/// Joint over (X^n, C, S, Y^n) with sequences indexed base-|alphabet|, first
/// letter most significant. Throws CapExceeded when the table is larger than
/// the enumeration cap.
JointPmf induced_joint(const OsrbConfig& cfg);

struct OsrbMetrics {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double eff_R = 0.0, eff_R0 = 0.0;  // ceil(n R) / n and ceil(n R0) / n
  double realism_tv = 0.0;           // TV(P_{Y^n}, Q_X^n)
  double avg_distortion = 0.0;       // E (1/n) sum_i d(X_i, Y_i)
  Bits leakage_bits = 0.0;           // I(Y^n; S)
  /// TV between the codebook's own law of (C, X^n), with (C, S) uniform and
  /// X^n drawn through P_{X|U} from U^n(C, S), and uniform(C) x Q_X^n.
  double cr_independence_tv = 0.0;
  std::size_t fallback_count = 0;  // (x^n, c) pairs with all-zero likelihoods
  bool unreliable = false;         // fallbacks above 0.1% of those pairs
};

/// Streams the enumeration without storing the full joint. `jobs` splits the
/// source sequences into fixed blocks, so results do not depend on it.
OsrbMetrics metrics(const OsrbConfig& cfg, std::size_t jobs = 1);

struct Spread {
  double median = 0.0, q25 = 0.0, q75 = 0.0;
};

/// Linear-interpolation quantiles of a nonempty sample.
Spread spread_of(std::vector<double> values);

struct TrendRow {
  std::size_t n = 0;
  double eff_R = 0.0, eff_R0 = 0.0;
  Spread realism_tv, avg_distortion, leakage_bits, cr_independence_tv;
  std::size_t fallback_total = 0;
  std::size_t unreliable_runs = 0;
};

struct SweepResult {
  std::vector<OsrbMetrics> runs;  // n-major, then seed index
  std::vector<TrendRow> trend;    // one row per n
};

/// Metrics for every n in `n_list` and seeds derive_seed(base.seed, k),
/// k < seed_count; the same seeds are reused for every n. Runs are
/// independent tasks spread over `jobs` workers.
SweepResult rate_sweep_experiment(const OsrbConfig& base, const std::vector<std::size_t>& n_list,
                                  std::size_t seed_count, std::size_t jobs = 1);

}  // namespace srdp
