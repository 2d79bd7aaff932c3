#include "srdp/region_bc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "srdp/parallel.hpp"
#include "srdp/rng.hpp"

namespace srdp {

BroadcastChannel::BroadcastChannel(Channel joint, std::size_t y_size, std::size_t z_size)
    : joint_(std::move(joint)), y_size_(y_size), z_size_(z_size) {
  if (y_size == 0 || z_size == 0 || joint_.output_size() != y_size * z_size)
    throw std::invalid_argument("broadcast channel output must be |Y~| x |Z~|");
  std::vector<std::vector<double>> ry(input_size(), std::vector<double>(y_size, 0.0));
  std::vector<std::vector<double>> rz(input_size(), std::vector<double>(z_size, 0.0));
  for (std::size_t x = 0; x < input_size(); ++x)
    for (std::size_t y = 0; y < y_size; ++y)
      for (std::size_t z = 0; z < z_size; ++z) {
        ry[x][y] += joint_(x, y * z_size + z);
        rz[x][z] += joint_(x, y * z_size + z);
      }
  y_ = Channel(std::move(ry), kChainTol);
  z_ = Channel(std::move(rz), kChainTol);
}

BroadcastChannel BroadcastChannel::product(const Channel& to_y, const Channel& to_z) {
  if (to_y.input_size() != to_z.input_size())
    throw std::invalid_argument("broadcast marginals need the same input alphabet");
  std::vector<std::vector<double>> rows(to_y.input_size());
  for (std::size_t x = 0; x < to_y.input_size(); ++x)
    for (std::size_t y = 0; y < to_y.output_size(); ++y)
      for (std::size_t z = 0; z < to_z.output_size(); ++z) rows[x].push_back(to_y(x, y) * to_z(x, z));
  return BroadcastChannel(Channel(std::move(rows), kChainTol), to_y.output_size(), to_z.output_size());
}

BroadcastChannel BroadcastChannel::degraded(const Channel& to_y, const Channel& y_to_z) {
  if (to_y.output_size() != y_to_z.input_size())
    throw std::invalid_argument("degrading channel must read the Y~ alphabet");
  std::vector<std::vector<double>> rows(to_y.input_size());
  for (std::size_t x = 0; x < to_y.input_size(); ++x)
    for (std::size_t y = 0; y < to_y.output_size(); ++y)
      for (std::size_t z = 0; z < y_to_z.output_size(); ++z)
        rows[x].push_back(to_y(x, y) * y_to_z(y, z));
  return BroadcastChannel(Channel(std::move(rows), kChainTol), to_y.output_size(),
                          y_to_z.output_size());
}

BcWitness make_bc_witness(NoiselessWitness source_part, Pmf w2, Channel x_given_w2) {
  // Re-validate the source block (caps and realism).
  source_part = make_noiseless_witness(std::move(source_part.source),
                                       std::move(source_part.u_channel),
                                       std::move(source_part.y_channel));
  if (x_given_w2.input_size() != w2.size())
    throw std::invalid_argument("P_{X~|W2} input size differs from |W2|");
  if (w2.size() > x_given_w2.output_size() + 1)
    throw std::invalid_argument("|W2| exceeds the cap |X~| + 1");
  return {std::move(source_part), std::move(w2), std::move(x_given_w2)};
}

MismatchFactor::MismatchFactor(double kappa) : kappa_(kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("mismatch factor must be positive and finite");
}

BcPoint bc_inner_point(const BcWitness& w, const BroadcastChannel& bc, const DistortionMeasure& d) {
  if (w.x_given_w2.output_size() != bc.input_size())
    throw std::invalid_argument("P_{X~|W2} output differs from the channel input alphabet");
  const RateTuple corner = evaluate_witness(w.source_part, d);
  const Bits i_w2_y = mutual_information(joint_from(w.w2, compose(w.x_given_w2, bc.y_channel())));
  const Bits i_w2_z = mutual_information(joint_from(w.w2, compose(w.x_given_w2, bc.z_channel())));
  BcPoint p;
  p.R_lo = corner.R;
  p.R_hi = i_w2_y;
  p.R0_raw = corner.R0 + i_w2_z - i_w2_y;
  p.R0_min = std::max(0.0, p.R0_raw);
  p.D = corner.D;
  p.empty = p.R_lo > p.R_hi;
  return p;
}

const char* to_string(MoreCapable s) {
  switch (s) {
    case MoreCapable::holds_on_samples: return "holds_on_samples";
    case MoreCapable::violated: return "violated";
    case MoreCapable::certified_degraded: return "certified_degraded";
  }
  return "?";
}

namespace {

// Euclidean projection onto the probability simplex.
void project_simplex(std::span<double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

}  // namespace

std::pair<Channel, double> find_degrading_channel(const Channel& to_y, const Channel& to_z,
                                                  int max_iterations, double tol) {
  if (to_y.input_size() != to_z.input_size())
    throw std::invalid_argument("channels need the same input alphabet");
  const std::size_t nx = to_y.input_size(), ny = to_y.output_size(), nz = to_z.output_size();
  // Lipschitz constant of the gradient: ||W_Y||_F^2 bounds ||W_Y^T W_Y||_2.
  double lip = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) lip += to_y(x, y) * to_y(x, y);
  const double step = 1.0 / std::max(lip, 1e-300);

  std::vector<double> t(ny * nz, 1.0 / static_cast<double>(nz)), prev = t, look = t;
  std::vector<double> resid(nx * nz), grad(ny * nz);
  double momentum = 1.0;
  auto residual_of = [&](const std::vector<double>& tt) {
    double worst = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t z = 0; z < nz; ++z) {
        double v = -to_z(x, z);
        for (std::size_t y = 0; y < ny; ++y) v += to_y(x, y) * tt[y * nz + z];
        resid[x * nz + z] = v;
        worst = std::max(worst, std::abs(v));
      }
    return worst;
  };
  double best = residual_of(t);
  std::vector<double> best_t = t;
  for (int it = 0; it < max_iterations && best >= tol; ++it) {
    residual_of(look);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t z = 0; z < nz; ++z) grad[y * nz + z] += to_y(x, y) * resid[x * nz + z];
    prev = t;
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = look[k] - step * grad[k];
    for (std::size_t y = 0; y < ny; ++y) project_simplex(std::span(t).subspan(y * nz, nz));
    const double r = residual_of(t);
    if (r < best) {
      best = r;
      best_t = t;
    }
    // FISTA with restart on non-improvement.
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    double beta = (momentum - 1.0) / next;
    if (r > best) {
      beta = 0.0;
      momentum = 1.0;
    } else {
      momentum = next;
    }
    for (std::size_t k = 0; k < t.size(); ++k) look[k] = t[k] + beta * (t[k] - prev[k]);
  }
  std::vector<std::vector<double>> rows(ny);
  for (std::size_t y = 0; y < ny; ++y) rows[y].assign(best_t.begin() + y * nz, best_t.begin() + (y + 1) * nz);
  return {Channel::normalized(std::move(rows)), best};
}

MoreCapableReport more_capable_check(const BroadcastChannel& bc, const CheckConfig& config) {
  const std::size_t k = bc.input_size();
  std::vector<std::vector<double>> inputs;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> v(k, 0.0);
    v[i] = 1.0;
    inputs.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      std::vector<double> v(k, 0.0);
      v[i] = v[j] = 0.5;
      inputs.push_back(std::move(v));
    }
  inputs.emplace_back(k, 1.0 / static_cast<double>(k));
  Rng rng(config.seed);
  for (std::size_t s = 0; s < config.random_inputs; ++s) inputs.push_back(rng.flat_dirichlet(k));

  std::vector<double> gaps(inputs.size());
  parallel_for(inputs.size(), config.jobs, [&](std::size_t i) {
    const Pmf p = Pmf::normalized(inputs[i]);
    gaps[i] = mutual_information(joint_from(p, bc.y_channel())) -
              mutual_information(joint_from(p, bc.z_channel()));
  });

  MoreCapableReport report;
  report.inputs_checked = inputs.size();
  const auto worst = std::min_element(gaps.begin(), gaps.end());
  report.min_gap = *worst;
  if (report.min_gap < -config.tolerance) {
    report.status = MoreCapable::violated;
    report.witness = Pmf::normalized(inputs[static_cast<std::size_t>(worst - gaps.begin())]);
    return report;
  }
  auto [t, residual] = find_degrading_channel(bc.y_channel(), bc.z_channel(),
                                              config.degradation_iterations, config.degradation_tol);
  report.degradation_residual = residual;
  if (residual < config.degradation_tol) {
    report.status = MoreCapable::certified_degraded;
    report.degrading = std::move(t);
  }
  return report;
}

namespace {

// Mutual information I(p) and the per-input divergences D(W_x || q).
double divergences(const Channel& ch, std::span<const double> p, std::vector<double>& q,
                   std::vector<double>& div) {
  const std::size_t nx = ch.input_size(), ny = ch.output_size();
  std::fill(q.begin(), q.end(), 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) q[y] += p[x] * ch(x, y);
  double mi = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    double dv = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      const double w = ch(x, y);
      if (w > 0.0) dv += w * std::log2(w / q[y]);
    }
    div[x] = dv;
    mi += p[x] * dv;
  }
  return mi;
}

}  // namespace

CapacityResult blahut_arimoto(const Channel& ch, const CapacityOptions& options) {
  const std::size_t nx = ch.input_size(), ny = ch.output_size();
  std::vector<double> p(nx, 1.0 / static_cast<double>(nx)), q(ny), div(nx);
  std::vector<double> trial(nx), q_trial(ny), div_trial(nx);
  // Over-relaxed update p <- p 2^{mu D}; mu = 1 is the classical step and
  // never decreases I(p), larger mu is kept only while it helps.
  double mu = 1.0;
  double lower = divergences(ch, p, q, div);
  CapacityResult r;
  for (int it = 0;; ++it) {
    const double upper = *std::max_element(div.begin(), div.end());
    r.capacity = std::max(0.0, lower);
    r.gap = upper - lower;
    r.iterations = it;
    if (r.gap < options.gap_tol) {
      r.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;
    for (;;) {
      double total = 0.0;
      for (std::size_t x = 0; x < nx; ++x) total += (trial[x] = p[x] * std::exp2(mu * (div[x] - upper)));
      for (double& v : trial) v /= total;
      const double next = divergences(ch, trial, q_trial, div_trial);
      if (next >= lower || mu == 1.0) {
        p.swap(trial);
        q.swap(q_trial);
        div.swap(div_trial);
        lower = next;
        mu = std::min(mu * 1.5, 64.0);
        break;
      }
      mu = std::max(1.0, mu / 4.0);
    }
  }
  r.input = Pmf::normalized(p);
  return r;
}

Bits capacity_unsecure(const Channel& ch, const CapacityOptions& options) {
  const CapacityResult r = blahut_arimoto(ch, options);
  if (!r.converged)
    throw NonConvergence("Blahut-Arimoto stopped after " + std::to_string(r.iterations) +
                             " iterations with duality gap " + std::to_string(r.gap),
                         r.gap);
  return r.capacity;
}

BcPoint more_capable_region_point(const NoiselessWitness& w, const Pmf& x_dist,
                                  const BroadcastChannel& bc, const DistortionMeasure& d,
                                  const CheckConfig& config) {
  const MoreCapableReport check = more_capable_check(bc, config);
  if (check.status == MoreCapable::violated)
    throw std::invalid_argument("channel is not more capable: I(X~;Y~) - I(X~;Z~) = " +
                                std::to_string(check.min_gap) + " at a sampled input");
  if (x_dist.size() != bc.input_size())
    throw std::invalid_argument("input distribution size differs from the channel input");
  const BcWitness bw{w, x_dist, Channel::identity(bc.input_size())};
  return bc_inner_point(bw, bc, d);
}

bool separation_feasible(const MismatchFactor& kappa, Bits R, const Channel& ch) {
  return R <= kappa.kappa() * capacity_unsecure(ch) + 1e-9;
}

}  // namespace srdp
