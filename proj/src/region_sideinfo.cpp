#include "srdp/region_sideinfo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "srdp/optimize.hpp"
#include "srdp/parallel.hpp"
#include "srdp/rng.hpp"

namespace srdp {

namespace {

void check_source(const JointPmf& source) {
  if (source.arity() != 2) throw std::invalid_argument("side-information source must be a joint over (X, Z)");
}

void check_distortion(const JointPmf& source, const DistortionMeasure& d) {
  const std::size_t nx = source.shape()[0];
  if (d.x_size() != nx || d.y_size() != nx)
    throw std::invalid_argument("distortion must be square over the source alphabet");
}

Pmf source_x(const JointPmf& source) { return marginal_pmf(source, 0); }

std::vector<std::vector<double>> rows_of(std::span<const double> flat, std::size_t rows,
                                         std::size_t cols) {
  std::vector<std::vector<double>> out(rows);
  for (std::size_t r = 0; r < rows; ++r)
    out[r].assign(flat.begin() + r * cols, flat.begin() + (r + 1) * cols);
  return out;
}

// P_{U|XZ} from a decoder-only witness: the encoder ignores z.
Channel u_given_xz_of(const SiWitnessDec& w) {
  std::vector<std::vector<double>> rows;
  for (std::size_t x = 0; x < w.x_size(); ++x)
    for (std::size_t z = 0; z < w.z_size(); ++z) {
      auto r = w.u_channel.row(x);
      rows.emplace_back(r.begin(), r.end());
    }
  return Channel(std::move(rows));
}

// P_{UZ} over u*|Z|+z.
Pmf uz_marginal(const JointPmf& source, const Channel& u_given_xz) {
  const std::size_t nx = source.shape()[0], nz = source.shape()[1], nu = u_given_xz.output_size();
  std::vector<double> w(nu * nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z)
      for (std::size_t u = 0; u < nu; ++u)
        w[u * nz + z] += source.at({x, z}) * u_given_xz(x * nz + z, u);
  return Pmf::normalized(std::move(w));
}

}  // namespace

SiWitnessBoth make_si_both_witness(JointPmf source, Channel uy_channel, std::size_t u_size) {
  check_source(source);
  const std::size_t nx = source.shape()[0], nz = source.shape()[1];
  if (uy_channel.input_size() != nx * nz)
    throw std::invalid_argument("P_{UY|XZ} input must be |X| x |Z|");
  if (u_size == 0 || uy_channel.output_size() != u_size * nx)
    throw std::invalid_argument("P_{UY|XZ} output must be |U| x |X|");
  if (u_size > si_u_cap(nx, nz)) throw std::invalid_argument("|U| exceeds the cap |X|^2 |Z| + 2");
  SiWitnessBoth w{std::move(source), std::move(uy_channel), u_size};
  if (markov_residual(w) > kMarkovTol) throw std::invalid_argument("X - (U, Z) - Y is not Markov");
  if (si_realism_residual(si_joint(w)) > kRealismTol)
    throw std::invalid_argument("realism violated: P_Y differs from Q_X");
  return w;
}

SiWitnessBoth si_both_from_parts(JointPmf source, const Channel& u_given_xz,
                                 const Channel& y_given_uz) {
  check_source(source);
  const std::size_t nx = source.shape()[0], nz = source.shape()[1];
  const std::size_t nu = u_given_xz.output_size(), ny = y_given_uz.output_size();
  if (u_given_xz.input_size() != nx * nz || y_given_uz.input_size() != nu * nz)
    throw std::invalid_argument("P_{U|XZ} or P_{Y|UZ} has the wrong input alphabet");
  std::vector<std::vector<double>> rows(nx * nz, std::vector<double>(nu * ny));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z)
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t y = 0; y < ny; ++y)
          rows[x * nz + z][u * ny + y] = u_given_xz(x * nz + z, u) * y_given_uz(u * nz + z, y);
  return make_si_both_witness(std::move(source), Channel(std::move(rows), kChainTol), nu);
}

SiWitnessDec make_si_dec_witness(JointPmf source, Channel u_channel, Channel y_channel) {
  check_source(source);
  const std::size_t nx = source.shape()[0], nz = source.shape()[1];
  if (u_channel.input_size() != nx) throw std::invalid_argument("P_{U|X} input must be |X|");
  const std::size_t nu = u_channel.output_size();
  if (nu > si_u_cap(nx, nz)) throw std::invalid_argument("|U| exceeds the cap |X|^2 |Z| + 2");
  if (y_channel.input_size() != nu * nz) throw std::invalid_argument("P_{Y|UZ} input must be |U| x |Z|");
  if (y_channel.output_size() != nx)
    throw std::invalid_argument("reconstruction alphabet differs from the source alphabet");
  SiWitnessDec w{std::move(source), std::move(u_channel), std::move(y_channel)};
  if (si_realism_residual(si_joint(w)) > kRealismTol)
    throw std::invalid_argument("realism violated: P_Y differs from Q_X");
  return w;
}

SiWitnessBoth as_both(const SiWitnessDec& w) {
  return si_both_from_parts(w.source, u_given_xz_of(w), w.y_channel);
}

JointPmf si_joint(const SiWitnessBoth& w) {
  const std::size_t nx = w.x_size(), nz = w.z_size(), nu = w.u_size;
  const std::size_t ny = w.uy_channel.output_size() / nu;
  std::vector<double> cells;
  cells.reserve(nx * nz * nu * ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z) {
      const double q = w.source.at({x, z});
      for (std::size_t k = 0; k < nu * ny; ++k) cells.push_back(q * w.uy_channel(x * nz + z, k));
    }
  return JointPmf({nx, nz, nu, ny}, std::move(cells), kChainTol);
}

JointPmf si_joint(const SiWitnessDec& w) {
  const std::size_t nx = w.x_size(), nz = w.z_size(), nu = w.u_size();
  const std::size_t ny = w.y_channel.output_size();
  std::vector<double> cells;
  cells.reserve(nx * nz * nu * ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z)
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t y = 0; y < ny; ++y)
          cells.push_back(w.source.at({x, z}) * w.u_channel(x, u) * w.y_channel(u * nz + z, y));
  return JointPmf({nx, nz, nu, ny}, std::move(cells), kChainTol);
}

double markov_residual(const SiWitnessBoth& w) {
  const std::size_t nx = w.x_size(), nz = w.z_size(), nu = w.u_size;
  const std::size_t ny = w.uy_channel.output_size() / nu;
  double worst = 0.0;
  std::vector<double> pooled(ny);
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t u = 0; u < nu; ++u) {
      std::fill(pooled.begin(), pooled.end(), 0.0);
      double mass = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        const double q = w.source.at({x, z});
        for (std::size_t y = 0; y < ny; ++y) {
          const double v = q * w.uy_channel(x * nz + z, u * ny + y);
          pooled[y] += v;
          mass += v;
        }
      }
      if (mass <= 0.0) continue;
      for (std::size_t x = 0; x < nx; ++x) {
        if (w.source.at({x, z}) <= 0.0) continue;
        double pu = 0.0;
        for (std::size_t y = 0; y < ny; ++y) pu += w.uy_channel(x * nz + z, u * ny + y);
        if (pu <= 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y)
          worst = std::max(worst, std::abs(w.uy_channel(x * nz + z, u * ny + y) / pu -
                                           pooled[y] / mass));
      }
    }
  return worst;
}

double si_realism_residual(const JointPmf& xzuy) {
  const Pmf qx = marginal_pmf(xzuy, 0);
  const Pmf py = marginal_pmf(xzuy, 3);
  if (qx.size() != py.size()) return 1.0;
  return tv_distance(qx, py);
}

Channel project_realism(const JointPmf& source, const Channel& u_given_xz,
                        const Channel& y_given_uz) {
  check_source(source);
  return fit_output_marginal(uz_marginal(source, u_given_xz), y_given_uz, source_x(source), 1e-9,
                             1000);
}

const char* to_string(RegionKind k) {
  return k == RegionKind::exact ? "exact" : "inner_bound";
}

RegionKind jointly_iid_exactness_flag(const SiModelTag& tag) {
  return tag.jointly_iid || tag.z_degenerate ? RegionKind::exact : RegionKind::inner_bound;
}

bool SiPoint::admits(const RateTuple& t, double tol) const {
  return t.R >= R_min - tol && t.R0 >= R0_min - tol && t.R + t.R0 >= sum_min - tol &&
         t.D >= D - tol;
}

namespace {

// Variable positions in the (X, Z, U, Y) joint.
constexpr std::size_t kX = 0, kZ = 1, kU = 2, kY = 3;

double expected_distortion(const JointPmf& j, const DistortionMeasure& d) {
  const JointPmf xy = marginal(j, {kX, kY});
  const std::size_t ny = xy.shape()[1];
  double e = 0.0;
  for (std::size_t k = 0; k < xy.cell_count(); ++k) e += xy.cells()[k] * d(k / ny, k % ny);
  return e;
}

Bits mi(const JointPmf& j, std::size_t a, std::size_t b) {
  return clamp_small_negative(mutual_information(marginal(j, {a, b})));
}

Bits cmi(const JointPmf& j, std::size_t a, std::size_t b, std::size_t c) {
  return clamp_small_negative(conditional_mi(marginal(j, {a, b, c})));
}

void finish(SiPoint& p) {
  p.R_min = std::max(0.0, p.R_raw);
  p.R0_min = std::max(0.0, p.R0_raw);
  p.sum_min = std::max(0.0, p.sum_raw);
}

bool z_constant(const JointPmf& source) {
  const Pmf z = marginal_pmf(source, 1);
  return std::any_of(z.begin(), z.end(), [](double v) { return v >= 1.0 - kConstructionTol; });
}

}  // namespace

SiPoint si_both_point(const SiWitnessBoth& w, const DistortionMeasure& d) {
  check_distortion(w.source, d);
  if (markov_residual(w) > kMarkovTol) throw std::invalid_argument("X - (U, Z) - Y is not Markov");
  const JointPmf j = si_joint(w);
  if (si_realism_residual(j) > kRealismTol)
    throw std::invalid_argument("realism violated: P_Y differs from Q_X");
  SiPoint p;
  p.R_raw = cmi(j, kU, kX, kZ);
  p.R0_raw = mi(j, kU, kY) - mi(j, kU, kZ);
  p.sum_raw = cmi(j, kU, kY, kZ) - conditional_entropy(marginal(j, {kZ, kY}));
  p.D = expected_distortion(j, d);
  p.kind = RegionKind::exact;
  finish(p);
  return p;
}

SiPoint si_dec_point(const SiWitnessDec& w, const DistortionMeasure& d, SiModelTag tag) {
  check_distortion(w.source, d);
  const JointPmf j = si_joint(w);
  if (si_realism_residual(j) > kRealismTol)
    throw std::invalid_argument("realism violated: P_Y differs from Q_X");
  SiPoint p;
  p.R_raw = mi(j, kU, kX) - mi(j, kU, kZ);
  p.R0_raw = mi(j, kU, kY) - mi(j, kU, kZ);
  p.sum_raw = cmi(j, kU, kY, kZ);
  p.D = expected_distortion(j, d);
  tag.z_degenerate = tag.z_degenerate || z_constant(w.source);
  p.kind = jointly_iid_exactness_flag(tag);
  finish(p);
  return p;
}

namespace {

constexpr double kTiny = 1e-300;

// Bits of the (X, Z, U, Y) tuple: X = 1, Z = 2, U = 4, Y = 8.
struct Term {
  unsigned mask;
  double coef;
};
using Combo = std::vector<Term>;

// Each bound as a signed sum of joint entropies H(mask).
Combo rate_combo(bool both) {
  if (both) return {{6, 1}, {3, 1}, {7, -1}, {2, -1}};  // I(U;X|Z)
  return {{1, 1}, {5, -1}, {2, -1}, {6, 1}};            // I(U;X) - I(U;Z)
}
Combo cr_combo() { return {{8, 1}, {12, -1}, {2, -1}, {6, 1}}; }  // I(U;Y) - I(U;Z)
Combo sum_combo(bool both) {
  if (both) return {{6, 1}, {14, -1}, {2, -1}, {8, 1}};  // I(U;Y|Z) - H(Z|Y)
  return {{6, 1}, {10, 1}, {14, -1}, {2, -1}};           // I(U;Y|Z)
}

struct SiProblem {
  bool both = true;
  std::size_t nx = 0, nz = 0, nu = 0;
  std::vector<double> q;   // Q_{XZ}, x*nz+z
  std::vector<double> qx;  // Q_X
  const DistortionMeasure* d = nullptr;
  RateTuple target;
  std::array<Combo, 3> combos;
  // marginal index of every cell for each mask in use
  std::array<std::vector<std::uint32_t>, 16> index;
  std::array<std::size_t, 16> msize{};

  std::size_t ny() const { return nx; }
  std::size_t a_rows() const { return both ? nx * nz : nx; }
  std::size_t na() const { return a_rows() * nu; }
  std::size_t nb() const { return nu * nz * ny(); }
  std::size_t dim() const { return na() + nb(); }
  std::size_t cells() const { return nx * nz * nu * ny(); }
  std::size_t a_row(std::size_t x, std::size_t z) const { return both ? x * nz + z : x; }

  void build_indices() {
    const std::array<std::size_t, 4> size{nx, nz, nu, ny()};
    for (const auto& c : combos)
      for (const Term& t : c) {
        if (!index[t.mask].empty()) continue;
        std::size_t m = 1;
        for (std::size_t v = 0; v < 4; ++v)
          if (t.mask & (1u << v)) m *= size[v];
        msize[t.mask] = m;
        auto& idx = index[t.mask];
        idx.reserve(cells());
        std::array<std::size_t, 4> at{};
        for (at[0] = 0; at[0] < nx; ++at[0])
          for (at[1] = 0; at[1] < nz; ++at[1])
            for (at[2] = 0; at[2] < nu; ++at[2])
              for (at[3] = 0; at[3] < ny(); ++at[3]) {
                std::size_t k = 0;
                for (std::size_t v = 0; v < 4; ++v)
                  if (t.mask & (1u << v)) k = k * size[v] + at[v];
                idx.push_back(static_cast<std::uint32_t>(k));
              }
      }
  }
};

// Objective: the rate bound. Constraints: cr bound <= R0, sum bound <= R + R0,
// E d <= D, P_Y = Q_X.
class SiEvaluator {
 public:
  explicit SiEvaluator(const SiProblem& p)
      : p_(p), a_(p.na()), b_(p.nb()), cell_(p.cells()), g_(p.cells()), ga_(p.na()), gb_(p.nb()) {
    for (std::size_t m = 0; m < 16; ++m)
      if (!p.index[m].empty()) marg_[m].resize(p.msize[m]);
  }

  void operator()(std::span<const double> theta, opt::Evaluation& out) {
    const std::size_t na = p_.na(), ny = p_.ny();
    if (out.grad_f.size() != p_.dim()) out.resize(p_.dim(), 3, ny);
    opt::softmax_rows(theta.subspan(0, na), p_.a_rows(), p_.nu, a_);
    opt::softmax_rows(theta.subspan(na), p_.nu * p_.nz, ny, b_);

    std::size_t k = 0;
    for (std::size_t x = 0; x < p_.nx; ++x)
      for (std::size_t z = 0; z < p_.nz; ++z) {
        const double q = p_.q[x * p_.nz + z];
        const double* a = &a_[p_.a_row(x, z) * p_.nu];
        for (std::size_t u = 0; u < p_.nu; ++u)
          for (std::size_t y = 0; y < ny; ++y, ++k) cell_[k] = q * a[u] * b_[(u * p_.nz + z) * ny + y];
      }
    for (std::size_t m = 0; m < 16; ++m) {
      if (p_.index[m].empty()) continue;
      auto& mg = marg_[m];
      std::fill(mg.begin(), mg.end(), 0.0);
      for (std::size_t c = 0; c < cell_.size(); ++c) mg[p_.index[m][c]] += cell_[c];
    }

    out.f = combo(p_.combos[0]);
    pullback(out.grad_f);
    out.ineq[0] = combo(p_.combos[1]) - p_.target.R0;
    pullback(out.grad_ineq[0]);
    out.ineq[1] = combo(p_.combos[2]) - (p_.target.R + p_.target.R0);
    pullback(out.grad_ineq[1]);

    double ed = 0.0;
    k = 0;
    for (std::size_t x = 0; x < p_.nx; ++x)
      for (std::size_t r = 0; r < p_.nz * p_.nu; ++r)
        for (std::size_t y = 0; y < ny; ++y, ++k) {
          g_[k] = (*p_.d)(x, y);
          ed += cell_[k] * g_[k];
        }
    out.ineq[2] = ed - p_.target.D;
    pullback(out.grad_ineq[2]);

    for (std::size_t yy = 0; yy < ny; ++yy) {
      double py = 0.0;
      for (std::size_t c = 0; c < cell_.size(); ++c) {
        g_[c] = (c % ny == yy) ? 1.0 : 0.0;
        py += cell_[c] * g_[c];
      }
      out.eq[yy] = py - p_.qx[yy];
      pullback(out.grad_eq[yy]);
    }
  }

 private:
  // Value of the entropy combination; leaves d/dcell in g_. Mass is conserved
  // under the softmax, so the constant part of d H / d p drops out.
  double combo(const Combo& c) {
    double v = 0.0;
    std::fill(g_.begin(), g_.end(), 0.0);
    for (const Term& t : c) {
      v += t.coef * entropy(marg_[t.mask]);
      const auto& idx = p_.index[t.mask];
      const auto& mg = marg_[t.mask];
      for (std::size_t k = 0; k < g_.size(); ++k) g_[k] -= t.coef * std::log2(std::max(mg[idx[k]], kTiny));
    }
    return v;
  }

  void pullback(std::vector<double>& grad) {
    const std::size_t ny = p_.ny(), nu = p_.nu, nz = p_.nz;
    std::fill(ga_.begin(), ga_.end(), 0.0);
    std::fill(gb_.begin(), gb_.end(), 0.0);
    std::size_t k = 0;
    for (std::size_t x = 0; x < p_.nx; ++x)
      for (std::size_t z = 0; z < nz; ++z) {
        const double q = p_.q[x * nz + z];
        const std::size_t ar = p_.a_row(x, z) * nu;
        for (std::size_t u = 0; u < nu; ++u) {
          const double a = a_[ar + u];
          const std::size_t br = (u * nz + z) * ny;
          double s = 0.0;
          for (std::size_t y = 0; y < ny; ++y, ++k) {
            s += b_[br + y] * g_[k];
            gb_[br + y] += q * a * g_[k];
          }
          ga_[ar + u] += q * s;
        }
      }
    opt::softmax_pullback(a_, p_.a_rows(), nu, ga_, std::span(grad).subspan(0, p_.na()));
    opt::softmax_pullback(b_, nu * nz, ny, gb_, std::span(grad).subspan(p_.na()));
  }

  const SiProblem& p_;
  std::vector<double> a_, b_, cell_, g_, ga_, gb_;
  std::array<std::vector<double>, 16> marg_;
};

// Start 0: U carries the encoder's view and Y decodes it. Start 1: U carries
// nothing and Y ~ Q_X. Remaining starts: random logits.
std::vector<double> initial_logits(const SiProblem& p, std::size_t index, std::uint64_t seed) {
  const std::size_t na = p.na(), ny = p.ny(), nu = p.nu, nz = p.nz;
  std::vector<double> theta(p.dim(), 0.0);
  if (index == 0) {
    for (std::size_t x = 0; x < p.nx; ++x)
      for (std::size_t z = 0; z < nz; ++z) {
        const std::size_t view = p.both ? x * nz + z : x;
        theta[p.a_row(x, z) * nu + view % nu] = 8.0;
      }
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t z = 0; z < nz; ++z) {
        const std::size_t x = p.both ? (u / nz) % p.nx : u % p.nx;
        theta[na + (u * nz + z) * ny + x] = 8.0;
      }
    return theta;
  }
  if (index == 1) {
    for (std::size_t r = 0; r < nu * nz; ++r)
      for (std::size_t y = 0; y < ny; ++y)
        theta[na + r * ny + y] = std::log(std::max(p.qx[y], 1e-12));
    return theta;
  }
  Rng rng(seed);
  const double scale = 0.5 + 3.0 * rng.uniform();
  for (double& v : theta) v = scale * rng.normal();
  return theta;
}

struct Found {
  Channel u_given_xz, y_given_uz;
};

std::optional<Found> polish(const SiProblem& p, const JointPmf& source,
                            std::span<const double> a, std::span<const double> b, double snap,
                            const std::function<bool(const Channel&, const Channel&)>& accept) {
  std::vector<double> aa(a.begin(), a.end()), bb(b.begin(), b.end());
  if (snap > 0.0) {
    for (double& v : aa) v = v < snap ? 0.0 : v;
    for (double& v : bb) v = v < snap ? 0.0 : v;
  }
  try {
    auto arows = rows_of(aa, p.a_rows(), p.nu);
    std::vector<std::vector<double>> full;
    for (std::size_t x = 0; x < p.nx; ++x)
      for (std::size_t z = 0; z < p.nz; ++z) full.push_back(arows[p.a_row(x, z)]);
    Channel uc = Channel::normalized(std::move(full));
    Channel yc = Channel::normalized(rows_of(bb, p.nu * p.nz, p.ny()));
    yc = fit_output_marginal(uz_marginal(source, uc), yc, source_x(source), 1e-13, 5000);
    if (!accept(uc, yc)) return std::nullopt;
    return Found{std::move(uc), std::move(yc)};
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::optional<Found> run_start(const SiProblem& p, const JointPmf& source,
                               std::vector<double> theta, const SearchConfig& search,
                               const std::function<bool(const Channel&, const Channel&)>& accept) {
  SiEvaluator ev(p);
  opt::AugLagOptions opts;
  opts.max_outer = search.max_outer;
  opts.inner.max_iterations = search.max_inner;
  const auto result =
      opt::augmented_lagrangian(std::ref(ev), p.dim(), 3, p.ny(), std::move(theta), opts);
  std::vector<double> a(p.na()), b(p.nb());
  opt::softmax_rows(std::span<const double>(result.x).subspan(0, p.na()), p.a_rows(), p.nu, a);
  opt::softmax_rows(std::span<const double>(result.x).subspan(p.na()), p.nu * p.nz, p.ny(), b);
  for (double snap : {0.0, 1e-7, 1e-5, 1e-3})
    if (auto f = polish(p, source, a, b, snap, accept)) return f;
  return std::nullopt;
}

// Runs starts in chunks of `jobs` and keeps the lowest-index success, so the
// answer does not depend on the degree of parallelism.
std::optional<Found> search_si(bool both, const JointPmf& source, const DistortionMeasure& d,
                               const RateTuple& target, const SearchConfig& search,
                               const std::function<bool(const Channel&, const Channel&)>& accept) {
  check_source(source);
  check_distortion(source, d);
  SiProblem p;
  p.both = both;
  p.nx = source.shape()[0];
  p.nz = source.shape()[1];
  const std::size_t cap = si_u_cap(p.nx, p.nz);
  if (search.starts == 0) throw std::invalid_argument("search needs at least one start");
  if (search.u_size > cap) throw std::invalid_argument("u_size exceeds the cap |X|^2 |Z| + 2");
  if (search.max_outer < 1 || search.max_inner < 1)
    throw std::invalid_argument("solver budget must be positive");
  if (!(target.R >= 0.0 && target.R0 >= 0.0 && target.D >= 0.0) ||
      !std::isfinite(target.R + target.R0 + target.D))
    throw std::invalid_argument("target rates and distortion must be finite and >= 0");
  p.nu = search.u_size == 0 ? cap : search.u_size;
  p.q.assign(source.cells().begin(), source.cells().end());
  const Pmf qx = source_x(source);
  p.qx.assign(qx.begin(), qx.end());
  p.d = &d;
  p.target = target;
  p.combos = {rate_combo(both), cr_combo(), sum_combo(both)};
  p.build_indices();

  const std::size_t chunk = std::max<std::size_t>(1, search.jobs);
  for (std::size_t begin = 0; begin < search.starts; begin += chunk) {
    const std::size_t count = std::min(chunk, search.starts - begin);
    std::vector<std::optional<Found>> found(count);
    parallel_for(count, search.jobs, [&](std::size_t i) {
      const std::size_t s = begin + i;
      found[i] = run_start(p, source, initial_logits(p, s, derive_seed(search.seed, s)), search,
                           accept);
    });
    for (auto& f : found)
      if (f) return f;
  }
  return std::nullopt;
}

}  // namespace

std::optional<SiWitnessBoth> certify_si_both(const JointPmf& source, const DistortionMeasure& d,
                                             const RateTuple& target, const SearchConfig& search) {
  auto accept = [&](const Channel& uc, const Channel& yc) {
    const SiWitnessBoth w = si_both_from_parts(source, uc, yc);
    return si_both_point(w, d).admits(target);
  };
  auto f = search_si(true, source, d, target, search, accept);
  if (!f) return std::nullopt;
  return si_both_from_parts(source, f->u_given_xz, f->y_given_uz);
}

std::optional<SiWitnessDec> certify_si_dec(const JointPmf& source, const DistortionMeasure& d,
                                           const RateTuple& target, const SearchConfig& search) {
  const std::size_t nx = source.arity() == 2 ? source.shape()[0] : 0;
  auto to_dec = [&](const Channel& uc, const Channel& yc) {
    // the encoder rows are shared across z; keep the z = 0 copy
    const std::size_t nz = source.shape()[1];
    std::vector<std::vector<double>> rows;
    for (std::size_t x = 0; x < nx; ++x) {
      auto r = uc.row(x * nz);
      rows.emplace_back(r.begin(), r.end());
    }
    return make_si_dec_witness(source, Channel(std::move(rows)), yc);
  };
  auto accept = [&](const Channel& uc, const Channel& yc) {
    return si_dec_point(to_dec(uc, yc), d).admits(target);
  };
  auto f = search_si(false, source, d, target, search, accept);
  if (!f) return std::nullopt;
  return to_dec(f->u_given_xz, f->y_given_uz);
}

}  // namespace srdp
