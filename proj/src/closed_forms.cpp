#include "srdp/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srdp {

namespace {

void check_crossover(double v, const char* name) {
  if (!(v >= 0.0 && v <= 0.5))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 0.5]");
}

// Slack for the bisection error in the inverse entropy at the feasibility edge.
constexpr double kEdgeSlack = 1e-12;

}  // namespace

RateTuple binary_region_point(const BinaryParams& p) {
  check_crossover(p.alpha, "alpha");
  check_crossover(p.beta, "beta");
  return {1.0 - binary_entropy(p.alpha), 1.0 - binary_entropy(p.beta), star(p.alpha, p.beta)};
}

std::optional<Bits> binary_min_R(Bits R0, double D) {
  if (!(R0 >= 0.0) || !(D >= 0.0)) throw std::invalid_argument("binary_min_R: R0 and D must be >= 0");
  if (D >= 0.5) return 0.0;
  // Cheapest admissible beta for this R0; a larger beta only costs rate.
  const double beta = inverse_binary_entropy(std::clamp(1.0 - R0, 0.0, 1.0));
  if (beta >= 0.5) return std::nullopt;  // only D = 0.5 is representable
  if (D < beta - kEdgeSlack) return std::nullopt;
  const double alpha = std::clamp((D - beta) / (1.0 - 2.0 * beta), 0.0, 0.5);
  return 1.0 - binary_entropy(alpha);
}

Bits binary_feasibility_edge(double D) {
  if (!(D >= 0.0)) throw std::invalid_argument("D must be >= 0");
  if (D >= 0.5) return 0.0;
  return 1.0 - binary_entropy(D);
}

Bits binary_rate_crossing(double D) {
  if (!(D > 0.0 && D < 0.5)) throw std::invalid_argument("crossing needs D in (0, 0.5)");
  // R - R0 is 1 - R0 > 0 at the edge and falls to -1 at R0 = 1.
  double lo = binary_feasibility_edge(D), hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (*binary_min_R(mid, D) > mid)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

bool TradeoffBand::overlaps_reference() const {
  if (!reference_lo || !reference_hi) return false;
  return saving_lo <= *reference_hi && *reference_lo <= saving_hi;
}

TradeoffTable fig4_tradeoff_table() {
  struct Setting {
    double D;
    std::string baseline;
    double R0_base;
    double inc_lo, inc_hi;
    std::optional<double> ref_lo, ref_hi;
  };
  const Setting settings[] = {
      {0.1, "feasibility edge R0 = 1 - H_b(D)", binary_feasibility_edge(0.1), 0.40, 0.87, 0.45, 0.52},
      {0.4, "crossing R = R0", binary_rate_crossing(0.4), 0.43, 0.63, 0.31, 0.39},
      {0.5, "R0 = 0.5", 0.5, 0.40, 0.87, std::nullopt, std::nullopt},
  };
  constexpr int kSteps = 8;

  TradeoffTable table;
  for (const auto& s : settings) {
    const Bits r_base = binary_min_R(s.R0_base, s.D).value_or(0.0);
    TradeoffBand band{s.D, s.baseline, s.inc_lo, s.inc_hi, 1.0, 0.0, s.ref_lo, s.ref_hi};
    for (int k = 0; k <= kSteps; ++k) {
      TradeoffRow row;
      row.D = s.D;
      row.baseline = s.baseline;
      row.R0_base = s.R0_base;
      row.increase = s.inc_lo + (s.inc_hi - s.inc_lo) * k / kSteps;
      row.R0_raised = s.R0_base * (1.0 + row.increase);
      row.R_base = r_base;
      row.R_raised = binary_min_R(row.R0_raised, s.D).value_or(0.0);
      row.saving = r_base > 0.0 ? 1.0 - row.R_raised / r_base : 0.0;
      band.saving_lo = std::min(band.saving_lo, row.saving);
      band.saving_hi = std::max(band.saving_hi, row.saving);
      table.rows.push_back(row);
    }
    table.bands.push_back(band);
  }
  return table;
}

double gaussian_s(double eta, double nu) {
  if (!(std::abs(eta) < 1.0)) throw std::domain_error("|eta| < 1 violated");
  if (!(nu > eta * eta && nu < 1.0)) throw std::domain_error("eta^2 < nu < 1 violated");
  return (1.0 - nu) * (1.0 - eta * eta) / (nu - eta * eta);
}

void validate_gaussian(const GaussianParams& g) {
  if (!(std::abs(g.eta) < 1.0)) throw std::domain_error("|eta| < 1 violated");
  if (!(g.delta > 0.0 && g.delta <= 2.0)) throw std::domain_error("0 < delta <= 2 violated");
  if (g.delta > 2.0 - 2.0 * std::abs(g.eta) + 1e-15)
    throw std::domain_error("delta <= 2 - 2|eta| violated");
  const double rho2 = g.rho() * g.rho();
  if (!(g.nu > rho2 && g.nu < 1.0)) throw std::domain_error("rho^2 < nu < 1 violated");
  if (g.nu - rho2 < kGaussianGuard) throw std::domain_error("nu too close to rho^2 (r3 diverges)");
  if (1.0 - g.nu < kGaussianGuard) throw std::domain_error("nu too close to 1 (r1 diverges)");
}

GaussianRates gaussian_rates(const GaussianParams& g) {
  validate_gaussian(g);
  const double eta2 = g.eta * g.eta;
  const double rho = g.rho(), rho2 = rho * rho;
  const double nu = g.nu;
  const double s = gaussian_s(g.eta, nu);
  GaussianRates r;
  r.r1 = 0.5 * std::log2((1.0 - eta2) / (1.0 - nu));
  r.r2 = 0.5 * std::log2((1.0 + s - eta2) / (1.0 + s - rho2 / (nu * nu)));
  // nu^2 - eta^2 rho^2 = (nu - rho^2)(nu + rho^2) + rho^2 (rho^2 - eta^2); the
  // split keeps the ratio accurate as nu approaches rho^2 at rho = |eta|.
  const double num = (nu - rho2) * (nu + rho2) + rho2 * (rho2 - eta2);
  r.r3 = 0.5 * std::log2(num / (nu * (nu - rho2)));
  r.r1 = std::max(0.0, r.r1);
  r.r2 = std::max(0.0, r.r2);
  r.r3 = std::max(0.0, r.r3);
  return r;
}

Bits gaussian_min_R_limit(double eta, double delta) {
  if (!(std::abs(eta) < 1.0)) throw std::domain_error("|eta| < 1 violated");
  if (!(delta > 0.0)) throw std::domain_error("delta > 0 violated (limit diverges as delta -> 0)");
  if (delta > 2.0 - 2.0 * std::abs(eta) + 1e-15)
    throw std::domain_error("delta <= 2 - 2|eta| violated");
  const double rho = 1.0 - delta / 2.0;
  return std::max(0.0, 0.5 * std::log2((1.0 - eta * eta) / (1.0 - rho * rho)));
}

double gaussian_zero_rate_threshold(double eta) {
  if (!(std::abs(eta) < 1.0)) throw std::domain_error("|eta| < 1 violated");
  return 2.0 - 2.0 * std::abs(eta);
}

}  // namespace srdp
