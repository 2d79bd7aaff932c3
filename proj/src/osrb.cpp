#include "srdp/osrb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srdp/parallel.hpp"
#include "srdp/rng.hpp"

namespace srdp {

namespace {

// Neumaier compensated sum.
struct Accumulator {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

std::size_t rate_bits(std::size_t n, double rate) {
  // n R = 2 must give 2 bits, not 3, after round-off in n * R
  const double v = std::ceil(static_cast<double>(n) * rate - 1e-9);
  return v <= 0.0 ? 0 : static_cast<std::size_t>(v);
}

const DistortionMeasure& distortion_of(const OsrbConfig& cfg, DistortionMeasure& fallback) {
  if (cfg.distortion.x_size() != 0) return cfg.distortion;
  fallback = DistortionMeasure::hamming(cfg.source.size());
  return fallback;
}

// out[y^n] = prod_i ch(word_i, y_i) over all output sequences.
void sequence_products(std::span<const std::uint32_t> word, const Channel& ch,
                       std::vector<double>& out, std::vector<double>& scratch) {
  const std::size_t m = ch.output_size();
  out.assign(1, 1.0);
  for (std::uint32_t u : word) {
    scratch.resize(out.size() * m);
    for (std::size_t p = 0; p < out.size(); ++p)
      for (std::size_t a = 0; a < m; ++a) scratch[p * m + a] = out[p] * ch(u, a);
    out.swap(scratch);
  }
}

double sequence_prob(const Pmf& q, std::span<const std::size_t> letters) {
  double p = 1.0;
  for (std::size_t l : letters) p *= q[l];
  return p;
}

}  // namespace

std::size_t message_bits(const OsrbConfig& cfg) { return rate_bits(cfg.n, cfg.R); }
std::size_t common_bits(const OsrbConfig& cfg) { return rate_bits(cfg.n, cfg.R0); }

void validate_osrb(const OsrbConfig& cfg) {
  if (cfg.n == 0) throw std::invalid_argument("blocklength n must be >= 1");
  if (!(cfg.R >= 0.0) || !(cfg.R0 >= 0.0) || !std::isfinite(cfg.R) || !std::isfinite(cfg.R0))
    throw std::invalid_argument("rates must be finite and >= 0");
  const std::size_t nx = cfg.source.size(), nu = cfg.u_prior.size();
  if (nx == 0 || nu == 0) throw std::invalid_argument("source and u_prior must be set");
  if (cfg.ux_channel.input_size() != nu || cfg.yu_channel.input_size() != nu)
    throw std::invalid_argument("P_{X|U} and P_{Y|U} must read the U alphabet");
  if (cfg.ux_channel.output_size() != nx || cfg.yu_channel.output_size() != nx)
    throw std::invalid_argument("P_{X|U} and P_{Y|U} must emit the source alphabet");
  if (cfg.distortion.x_size() != 0 && (cfg.distortion.x_size() != nx || cfg.distortion.y_size() != nx))
    throw std::invalid_argument("distortion must be square over the source alphabet");
  const std::uint64_t cap = enumeration_cap();
  checked_power(nx, cfg.n, cap, "source sequences |X|^n");
  checked_power(2, message_bits(cfg) + common_bits(cfg), cap, "codebook 2^ceil(nR0) 2^ceil(nR)");
}

OsrbConfig osrb_config(const NoiselessWitness& w, std::size_t n, double R, double R0,
                       std::uint64_t seed) {
  const std::size_t nx = w.source.size(), nu = w.u_size();
  const Pmf pu = push_forward(w.source, w.u_channel);
  std::vector<std::vector<double>> rows(nu, std::vector<double>(nx));
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t x = 0; x < nx; ++x)
      rows[u][x] = pu[u] > 0.0 ? w.source[x] * w.u_channel(x, u) / pu[u] : w.source[x];
  OsrbConfig cfg;
  cfg.n = n;
  cfg.R = R;
  cfg.R0 = R0;
  cfg.source = w.source;
  cfg.u_prior = pu;
  cfg.ux_channel = Channel::normalized(std::move(rows));
  cfg.yu_channel = w.y_channel;
  cfg.seed = seed;
  return cfg;
}

Codebook build_codebook(const OsrbConfig& cfg) {
  validate_osrb(cfg);
  Codebook cb;
  cb.n = cfg.n;
  cb.c_count = std::size_t{1} << common_bits(cfg);
  cb.s_count = std::size_t{1} << message_bits(cfg);
  cb.letters.resize(cb.c_count * cb.s_count * cfg.n);
  Rng rng(cfg.seed);
  for (auto& l : cb.letters) l = static_cast<std::uint32_t>(rng.categorical(cfg.u_prior.probs()));
  return cb;
}

namespace {

// Unnormalized likelihoods of every s; returns their total.
double likelihoods(std::span<const std::size_t> x, std::size_t c, const Codebook& cb,
                   const Channel& ux, std::vector<double>& out) {
  out.resize(cb.s_count);
  double total = 0.0;
  for (std::size_t s = 0; s < cb.s_count; ++s) {
    const auto word = cb.word(c, s);
    double l = 1.0;
    for (std::size_t i = 0; i < cb.n && l > 0.0; ++i) l *= ux(word[i], x[i]);
    out[s] = l;
    total += l;
  }
  return total;
}

}  // namespace

EncoderOutput likelihood_encode(std::span<const std::size_t> x_seq, std::size_t c,
                                const Codebook& cb, const OsrbConfig& cfg) {
  if (x_seq.size() != cb.n) throw std::invalid_argument("x sequence length differs from n");
  if (c >= cb.c_count) throw std::invalid_argument("common-randomness index out of range");
  for (std::size_t x : x_seq)
    if (x >= cfg.ux_channel.output_size()) throw std::invalid_argument("source letter out of range");
  std::vector<double> l;
  const double total = likelihoods(x_seq, c, cb, cfg.ux_channel, l);
  if (total <= 0.0) return {Pmf::uniform(cb.s_count), true};
  for (double& v : l) v /= total;
  return {Pmf(std::move(l), kChainTol), false};
}

JointPmf induced_joint(const OsrbConfig& cfg) {
  const Codebook cb = build_codebook(cfg);
  const std::size_t nx = cfg.source.size();
  const std::size_t xs = checked_power(nx, cfg.n, enumeration_cap(), "source sequences |X|^n");
  const double cells = static_cast<double>(xs) * cb.c_count * cb.s_count * xs;
  if (cells > static_cast<double>(enumeration_cap()))
    throw CapExceeded("induced joint (X^n, C, S, Y^n): " + std::to_string(cells) +
                          " cells exceed the enumeration cap",
                      cells, enumeration_cap());
  std::vector<double> table(static_cast<std::size_t>(cells), 0.0);
  std::vector<std::size_t> x(cfg.n);
  std::vector<double> l, wy, scratch;
  const double pc = 1.0 / static_cast<double>(cb.c_count);
  for (std::size_t xi = 0; xi < xs; ++xi) {
    decode_sequence(xi, nx, x);
    const double qx = sequence_prob(cfg.source, x);
    for (std::size_t c = 0; c < cb.c_count; ++c) {
      const double total = likelihoods(x, c, cb, cfg.ux_channel, l);
      for (std::size_t s = 0; s < cb.s_count; ++s) {
        const double post = total > 0.0 ? l[s] / total : 1.0 / static_cast<double>(cb.s_count);
        const double w = qx * pc * post;
        if (w == 0.0) continue;
        sequence_products(cb.word(c, s), cfg.yu_channel, wy, scratch);
        const std::size_t base = ((xi * cb.c_count + c) * cb.s_count + s) * xs;
        for (std::size_t y = 0; y < xs; ++y) table[base + y] = w * wy[y];
      }
    }
  }
  return JointPmf({xs, cb.c_count, cb.s_count, xs}, std::move(table), 1e-9);
}

OsrbMetrics metrics(const OsrbConfig& cfg, std::size_t jobs) {
  const Codebook cb = build_codebook(cfg);
  DistortionMeasure hamming;
  const DistortionMeasure& d = distortion_of(cfg, hamming);
  const std::size_t nx = cfg.source.size(), nu = cfg.u_prior.size(), n = cfg.n;
  const std::size_t xs = checked_power(nx, n, enumeration_cap(), "source sequences |X|^n");
  const std::size_t words = cb.c_count * cb.s_count;
  const double pc = 1.0 / static_cast<double>(cb.c_count);

  // expected per-letter distortion given the source letter and the codeword letter
  std::vector<double> delta(nx * nu, 0.0);
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t y = 0; y < nx; ++y) delta[a * nu + u] += cfg.yu_channel(u, y) * d(a, y);

  // Pass 1 over source sequences in fixed blocks.
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (xs + kBlock - 1) / kBlock;
  struct Partial {
    std::vector<double> pi;  // P(c, s)
    Accumulator dist, cr;
    std::size_t fallbacks = 0, pairs = 0;
  };
  std::vector<Partial> parts(blocks);
  parallel_for(blocks, jobs, [&](std::size_t b) {
    Partial& p = parts[b];
    p.pi.assign(words, 0.0);
    std::vector<std::size_t> x(n);
    std::vector<double> l;
    for (std::size_t xi = b * kBlock; xi < std::min(xs, (b + 1) * kBlock); ++xi) {
      decode_sequence(xi, nx, x);
      const double qx = sequence_prob(cfg.source, x);
      for (std::size_t c = 0; c < cb.c_count; ++c) {
        const double total = likelihoods(x, c, cb, cfg.ux_channel, l);
        p.cr.add(std::abs(total / static_cast<double>(words) - qx * pc));
        if (qx == 0.0) continue;
        ++p.pairs;
        const bool fallback = total <= 0.0;
        if (fallback) ++p.fallbacks;
        for (std::size_t s = 0; s < cb.s_count; ++s) {
          const double post = fallback ? 1.0 / static_cast<double>(cb.s_count) : l[s] / total;
          const double w = qx * pc * post;
          if (w == 0.0) continue;
          p.pi[c * cb.s_count + s] += w;
          const auto word = cb.word(c, s);
          double e = 0.0;
          for (std::size_t i = 0; i < n; ++i) e += delta[x[i] * nu + word[i]];
          p.dist.add(w * e / static_cast<double>(n));
        }
      }
    }
  });

  OsrbMetrics m;
  m.n = n;
  m.seed = cfg.seed;
  m.eff_R = static_cast<double>(message_bits(cfg)) / static_cast<double>(n);
  m.eff_R0 = static_cast<double>(common_bits(cfg)) / static_cast<double>(n);
  std::vector<double> pi(words, 0.0);
  Accumulator dist, cr;
  std::size_t pairs = 0;
  for (const Partial& p : parts) {
    for (std::size_t k = 0; k < words; ++k) pi[k] += p.pi[k];
    dist.add(p.dist.value());
    cr.add(p.cr.value());
    m.fallback_count += p.fallbacks;
    pairs += p.pairs;
  }
  m.avg_distortion = dist.value();
  m.cr_independence_tv = std::clamp(0.5 * cr.value(), 0.0, 1.0);
  m.unreliable = pairs > 0 && static_cast<double>(m.fallback_count) > 1e-3 * static_cast<double>(pairs);

  // Pass 2: P_{Y^n} from fixed codeword blocks.
  const std::size_t ys = xs;
  const std::size_t wblocks = std::min<std::size_t>(16, words);
  std::vector<std::vector<double>> py_parts(wblocks);
  parallel_for(wblocks, jobs, [&](std::size_t b) {
    auto& acc = py_parts[b];
    acc.assign(ys, 0.0);
    std::vector<double> wy, scratch;
    for (std::size_t k = b; k < words; k += wblocks) {
      if (pi[k] == 0.0) continue;
      sequence_products(std::span(cb.letters).subspan(k * n, n), cfg.yu_channel, wy, scratch);
      for (std::size_t y = 0; y < ys; ++y) acc[y] += pi[k] * wy[y];
    }
  });
  std::vector<double> py(ys, 0.0);
  for (const auto& part : py_parts)
    for (std::size_t y = 0; y < ys; ++y) py[y] += part[y];
  {
    Accumulator tv;
    std::vector<std::size_t> y(n);
    for (std::size_t yi = 0; yi < ys; ++yi) {
      decode_sequence(yi, nx, y);
      tv.add(std::abs(py[yi] - sequence_prob(cfg.source, y)));
    }
    m.realism_tv = std::clamp(0.5 * tv.value(), 0.0, 1.0);
  }

  // Pass 3: I(Y^n; S) = sum_s P(s) D(P_{Y^n|s} || P_{Y^n}).
  if (cb.s_count == 1) {
    m.leakage_bits = 0.0;
    return m;
  }
  std::vector<double> terms(cb.s_count, 0.0);
  parallel_for(cb.s_count, jobs, [&](std::size_t s) {
    std::vector<double> acc(ys, 0.0), wy, scratch;
    double ps = 0.0;
    for (std::size_t c = 0; c < cb.c_count; ++c) {
      const double w = pi[c * cb.s_count + s];
      if (w == 0.0) continue;
      ps += w;
      sequence_products(cb.word(c, s), cfg.yu_channel, wy, scratch);
      for (std::size_t y = 0; y < ys; ++y) acc[y] += w * wy[y];
    }
    if (ps <= 0.0) return;
    Accumulator t;
    for (std::size_t y = 0; y < ys; ++y)
      if (acc[y] > 0.0) t.add(acc[y] * std::log2(acc[y] / (ps * py[y])));
    terms[s] = t.value();
  });
  Accumulator leak;
  for (double t : terms) leak.add(t);
  m.leakage_bits = std::max(0.0, clamp_small_negative(leak.value()));
  return m;
}

Spread spread_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("spread of an empty sample");
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {quantile(0.5), quantile(0.25), quantile(0.75)};
}

SweepResult rate_sweep_experiment(const OsrbConfig& base, const std::vector<std::size_t>& n_list,
                                  std::size_t seed_count, std::size_t jobs) {
  if (n_list.empty()) throw std::invalid_argument("n list is empty");
  if (seed_count == 0) throw std::invalid_argument("seed count must be positive");
  for (std::size_t n : n_list) {
    OsrbConfig c = base;
    c.n = n;
    validate_osrb(c);
  }
  SweepResult out;
  out.runs.resize(n_list.size() * seed_count);
  parallel_for(out.runs.size(), jobs, [&](std::size_t t) {
    OsrbConfig c = base;
    c.n = n_list[t / seed_count];
    c.seed = derive_seed(base.seed, t % seed_count);
    out.runs[t] = metrics(c, 1);
  });
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    TrendRow row;
    row.n = n_list[i];
    std::vector<double> tv, dist, leak, cr;
    for (std::size_t k = 0; k < seed_count; ++k) {
      const OsrbMetrics& m = out.runs[i * seed_count + k];
      row.eff_R = m.eff_R;
      row.eff_R0 = m.eff_R0;
      tv.push_back(m.realism_tv);
      dist.push_back(m.avg_distortion);
      leak.push_back(m.leakage_bits);
      cr.push_back(m.cr_independence_tv);
      row.fallback_total += m.fallback_count;
      row.unreliable_runs += m.unreliable ? 1 : 0;
    }
    row.realism_tv = spread_of(tv);
    row.avg_distortion = spread_of(dist);
    row.leakage_bits = spread_of(leak);
    row.cr_independence_tv = spread_of(cr);
    out.trend.push_back(row);
  }
  return out;
}

}  // namespace srdp
