#include "srdp/info.hpp"

#include <cmath>
#include <stdexcept>

namespace srdp {

Bits entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

Bits binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double inverse_binary_entropy(Bits h) {
  if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("inverse_binary_entropy: h outside [0,1]");
  if (h == 0.0) return 0.0;
  if (h == 1.0) return 0.5;
  double lo = 0.0, hi = 0.5;
  // H_b is strictly increasing on [0, 1/2]; 200 halvings exhaust double precision.
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (binary_entropy(mid) < h)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Bits mutual_information(const JointPmf& j) {
  if (j.arity() != 2) throw std::invalid_argument("mutual_information: joint must have two variables");
  const auto& shape = j.shape();
  std::vector<double> pa(shape[0], 0.0), pb(shape[1], 0.0);
  auto cells = j.cells();
  for (std::size_t a = 0; a < shape[0]; ++a)
    for (std::size_t b = 0; b < shape[1]; ++b) {
      const double p = cells[a * shape[1] + b];
      pa[a] += p;
      pb[b] += p;
    }
  return clamp_small_negative(entropy(pa) + entropy(pb) - entropy(cells));
}

Bits conditional_mi(const JointPmf& j) {
  if (j.arity() != 3) throw std::invalid_argument("conditional_mi: joint must have three variables");
  const auto& shape = j.shape();
  const std::size_t na = shape[0], nb = shape[1], nc = shape[2];
  auto cells = j.cells();
  std::vector<double> slice(na * nb);
  Bits total = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    double pc = 0.0;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const double p = cells[(a * nb + b) * nc + c];
        slice[a * nb + b] = p;
        pc += p;
      }
    if (pc <= 0.0) continue;
    std::vector<double> pa(na, 0.0), pb(nb, 0.0);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        pa[a] += slice[a * nb + b];
        pb[b] += slice[a * nb + b];
      }
    // H over unnormalized slices: H(p/pc) = (H(p) + pc log pc) / pc.
    const double shift = pc * std::log2(pc);
    const double hab = entropy(slice) + shift;
    const double ha = entropy(pa) + shift;
    const double hb = entropy(pb) + shift;
    total += ha + hb - hab;
  }
  return clamp_small_negative(total);
}

Bits conditional_entropy(const JointPmf& j) {
  if (j.arity() != 2) throw std::invalid_argument("conditional_entropy: joint must have two variables");
  const std::size_t keep[] = {1};
  return entropy(j.cells()) - entropy(marginal(j, keep).cells());
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: alphabet sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double star(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
    throw std::invalid_argument("star: arguments must lie in [0,1]");
  return a * (1.0 - b) + b * (1.0 - a);
}

}  // namespace srdp
