#include "srdp/region_noiseless.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "srdp/optimize.hpp"
#include "srdp/parallel.hpp"
#include "srdp/rng.hpp"

namespace srdp {

bool dominated_by(const RateTuple& a, const RateTuple& b, double tol) {
  return a.R <= b.R + tol && a.R0 <= b.R0 + tol && a.D <= b.D + tol;
}

DistortionMeasure::DistortionMeasure(std::vector<std::vector<double>> matrix) {
  if (matrix.empty() || matrix.front().empty())
    throw std::invalid_argument("distortion matrix is empty");
  x_size_ = matrix.size();
  y_size_ = matrix.front().size();
  d_.reserve(x_size_ * y_size_);
  for (const auto& row : matrix) {
    if (row.size() != y_size_) throw std::invalid_argument("distortion matrix is ragged");
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("distortion entries must be finite and nonnegative");
      d_.push_back(v);
      max_value_ = std::max(max_value_, v);
    }
  }
}

DistortionMeasure DistortionMeasure::hamming(std::size_t size) {
  std::vector<std::vector<double>> m(size, std::vector<double>(size, 1.0));
  for (std::size_t i = 0; i < size; ++i) m[i][i] = 0.0;
  return DistortionMeasure(std::move(m));
}

DistortionMeasure DistortionMeasure::squared_error(const std::vector<double>& letters) {
  std::vector<std::vector<double>> m(letters.size(), std::vector<double>(letters.size()));
  for (std::size_t i = 0; i < letters.size(); ++i)
    for (std::size_t j = 0; j < letters.size(); ++j)
      m[i][j] = (letters[i] - letters[j]) * (letters[i] - letters[j]);
  return DistortionMeasure(std::move(m));
}

DistortionMeasure DistortionMeasure::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("distortion scale must be positive");
  DistortionMeasure out = *this;
  for (double& v : out.d_) v *= factor;
  out.max_value_ *= factor;
  return out;
}

NoiselessWitness make_noiseless_witness(Pmf source, Channel u_channel, Channel y_channel) {
  if (u_channel.input_size() != source.size())
    throw std::invalid_argument("u_channel input size differs from the source alphabet");
  if (y_channel.input_size() != u_channel.output_size())
    throw std::invalid_argument("y_channel input size differs from |U|");
  if (y_channel.output_size() != source.size())
    throw std::invalid_argument("reconstruction alphabet differs from the source alphabet");
  if (u_channel.output_size() > noiseless_u_cap(source.size()))
    throw std::invalid_argument("|U| exceeds the cap |X|^2 + 1");
  NoiselessWitness w{std::move(source), std::move(u_channel), std::move(y_channel)};
  const double residual = realism_residual(w);
  if (residual > kRealismTol)
    throw std::invalid_argument("realism residual " + std::to_string(residual) +
                                " exceeds tolerance");
  return w;
}

Pmf witness_output(const NoiselessWitness& w) {
  return push_forward(push_forward(w.source, w.u_channel), w.y_channel);
}

double realism_residual(const NoiselessWitness& w) {
  return tv_distance(witness_output(w), w.source);
}

JointPmf witness_joint(const NoiselessWitness& w) {
  return extend(joint_from(w.source, w.u_channel), [&] {
    // (x, u) -> y depends on u only.
    std::vector<std::vector<double>> rows;
    rows.reserve(w.source.size() * w.u_size());
    for (std::size_t x = 0; x < w.source.size(); ++x)
      for (std::size_t u = 0; u < w.u_size(); ++u) {
        auto r = w.y_channel.row(u);
        rows.emplace_back(r.begin(), r.end());
      }
    return Channel(std::move(rows));
  }());
}

namespace {

struct Corner {
  double ux = 0.0;  // I(U;X)
  double uy = 0.0;  // I(U;Y)
  double ed = 0.0;
};

// Rates straight from the factors, no joint table.
Corner corner_of(std::span<const double> q, std::span<const double> a, std::span<const double> b,
                 std::size_t nx, std::size_t nu, const DistortionMeasure& d) {
  std::vector<double> pu(nu, 0.0), py(nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t u = 0; u < nu; ++u) pu[u] += q[x] * a[x * nu + u];
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t y = 0; y < nx; ++y) py[y] += pu[u] * b[u * nx + y];
  Corner c;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t u = 0; u < nu; ++u) {
      const double p = q[x] * a[x * nu + u];
      if (p > 0.0) c.ux += p * std::log2(a[x * nu + u] / pu[u]);
      for (std::size_t y = 0; y < nx; ++y) c.ed += p * b[u * nx + y] * d(x, y);
    }
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t y = 0; y < nx; ++y) {
      const double p = pu[u] * b[u * nx + y];
      if (p > 0.0) c.uy += p * std::log2(b[u * nx + y] / py[y]);
    }
  c.ux = std::max(0.0, clamp_small_negative(c.ux));
  c.uy = std::max(0.0, clamp_small_negative(c.uy));
  return c;
}

}  // namespace

RateTuple evaluate_witness(const NoiselessWitness& w, const DistortionMeasure& d) {
  if (d.x_size() != w.source.size() || d.y_size() != w.y_channel.output_size())
    throw std::invalid_argument("distortion dimensions do not match the witness");
  const double residual = realism_residual(w);
  if (residual > kRealismTol)
    throw std::invalid_argument("witness realism residual " + std::to_string(residual) +
                                " exceeds tolerance");
  const JointPmf xuy = witness_joint(w);
  RateTuple t;
  t.R = clamp_small_negative(mutual_information(marginal(xuy, {1, 0})));
  t.R0 = clamp_small_negative(mutual_information(marginal(xuy, {1, 2})));
  const auto& shape = xuy.shape();
  const auto cells = xuy.cells();
  std::size_t k = 0;
  for (std::size_t x = 0; x < shape[0]; ++x)
    for (std::size_t u = 0; u < shape[1]; ++u)
      for (std::size_t y = 0; y < shape[2]; ++y, ++k) t.D += cells[k] * d(x, y);
  return t;
}

void validate_search(const SearchConfig& search, std::size_t x_size) {
  if (search.starts == 0) throw std::invalid_argument("search needs at least one start");
  if (search.u_size > noiseless_u_cap(x_size))
    throw std::invalid_argument("u_size exceeds the cap |X|^2 + 1");
  if (search.max_outer < 1 || search.max_inner < 1)
    throw std::invalid_argument("solver budget must be positive");
}

namespace {

constexpr double kTiny = 1e-300;

struct Problem {
  std::vector<double> q;
  const DistortionMeasure* d = nullptr;
  std::size_t nx = 0, nu = 0;
  bool cap_r0 = false;
  double r0_cap = 0.0;
  double d_cap = 0.0;

  std::size_t na() const { return nx * nu; }
  std::size_t dim() const { return na() + nu * nx; }
  std::size_t n_ineq() const { return cap_r0 ? 2 : 1; }
  std::size_t n_eq() const { return nx; }
};

// Objective I(U;X); constraints I(U;Y) <= r0_cap, E d <= d_cap, P_Y = Q_X.
class NoiselessEvaluator {
 public:
  explicit NoiselessEvaluator(const Problem& p)
      : p_(p), a_(p.na()), b_(p.nu * p.nx), pu_(p.nu), py_(p.nx), kl_(p.nu),
        ga_(p.na()), gb_(p.nu * p.nx) {}

  void operator()(std::span<const double> theta, opt::Evaluation& out) {
    const std::size_t nx = p_.nx, nu = p_.nu, na = p_.na();
    if (out.grad_f.size() != p_.dim()) out.resize(p_.dim(), p_.n_ineq(), p_.n_eq());
    opt::softmax_rows(theta.subspan(0, na), nx, nu, a_);
    opt::softmax_rows(theta.subspan(na), nu, nx, b_);
    const auto& q = p_.q;
    const auto& d = *p_.d;

    std::fill(pu_.begin(), pu_.end(), 0.0);
    std::fill(py_.begin(), py_.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t u = 0; u < nu; ++u) pu_[u] += q[x] * a_[x * nu + u];
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t y = 0; y < nx; ++y) py_[y] += pu_[u] * b_[u * nx + y];

    // f = I(U;X)
    double f = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t u = 0; u < nu; ++u) {
        const double a = a_[x * nu + u];
        const double l = std::log2(std::max(a, kTiny) / std::max(pu_[u], kTiny));
        f += q[x] * a * l;
        ga_[x * nu + u] = q[x] * l;
      }
    out.f = f;
    opt::softmax_pullback(a_, nx, nu, ga_, std::span(out.grad_f).subspan(0, na));
    std::fill(out.grad_f.begin() + na, out.grad_f.end(), 0.0);

    std::size_t gi = 0;
    if (p_.cap_r0) {
      double iuy = 0.0;
      for (std::size_t u = 0; u < nu; ++u) {
        double kl = 0.0;
        for (std::size_t y = 0; y < nx; ++y) {
          const double b = b_[u * nx + y];
          const double l = std::log2(std::max(b, kTiny) / std::max(py_[y], kTiny));
          kl += b * l;
          gb_[u * nx + y] = pu_[u] * l;
        }
        kl_[u] = kl;
        iuy += pu_[u] * kl;
      }
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t u = 0; u < nu; ++u) ga_[x * nu + u] = q[x] * kl_[u];
      out.ineq[gi] = iuy - p_.r0_cap;
      pullback_both(out.grad_ineq[gi]);
      ++gi;
    }

    double ed = 0.0;
    std::fill(gb_.begin(), gb_.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t u = 0; u < nu; ++u) {
        double row = 0.0;
        const double w = q[x] * a_[x * nu + u];
        for (std::size_t y = 0; y < nx; ++y) {
          row += b_[u * nx + y] * d(x, y);
          gb_[u * nx + y] += w * d(x, y);
        }
        ga_[x * nu + u] = q[x] * row;
        ed += w * row;
      }
    out.ineq[gi] = ed - p_.d_cap;
    pullback_both(out.grad_ineq[gi]);

    for (std::size_t y = 0; y < nx; ++y) {
      out.eq[y] = py_[y] - q[y];
      std::fill(gb_.begin(), gb_.end(), 0.0);
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t u = 0; u < nu; ++u) ga_[x * nu + u] = q[x] * b_[u * nx + y];
      for (std::size_t u = 0; u < nu; ++u) gb_[u * nx + y] = pu_[u];
      pullback_both(out.grad_eq[y]);
    }
  }

 private:
  void pullback_both(std::vector<double>& grad) {
    const std::size_t na = p_.na();
    opt::softmax_pullback(a_, p_.nx, p_.nu, ga_, std::span(grad).subspan(0, na));
    opt::softmax_pullback(b_, p_.nu, p_.nx, gb_, std::span(grad).subspan(na));
  }

  const Problem& p_;
  std::vector<double> a_, b_, pu_, py_, kl_, ga_, gb_;
};

std::vector<std::vector<double>> rows_of(std::span<const double> flat, std::size_t rows,
                                         std::size_t cols) {
  std::vector<std::vector<double>> out(rows);
  for (std::size_t r = 0; r < rows; ++r)
    out[r].assign(flat.begin() + r * cols, flat.begin() + (r + 1) * cols);
  return out;
}

std::vector<double> flatten(const Channel& ch) {
  std::vector<double> out;
  out.reserve(ch.input_size() * ch.output_size());
  for (std::size_t i = 0; i < ch.input_size(); ++i) {
    auto r = ch.row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

// Zeroes entries below `snap`, refits the output marginal and returns a
// witness when realism is restored.
std::optional<NoiselessWitness> polish(const Pmf& source, std::span<const double> a,
                                       std::span<const double> b, std::size_t nu, double snap) {
  const std::size_t nx = source.size();
  std::vector<double> aa(a.begin(), a.end()), bb(b.begin(), b.end());
  if (snap > 0.0) {
    for (double& v : aa) v = v < snap ? 0.0 : v;
    for (double& v : bb) v = v < snap ? 0.0 : v;
  }
  try {
    Channel uc = Channel::normalized(rows_of(aa, nx, nu));
    Channel yc = Channel::normalized(rows_of(bb, nu, nx));
    const Pmf pu = push_forward(source, uc);
    yc = fit_output_marginal(pu, yc, source, 1e-13, 5000);
    NoiselessWitness w{source, std::move(uc), std::move(yc)};
    if (realism_residual(w) > kRealismTol) return std::nullopt;
    return w;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

bool better(const RateTuple& cand, const RateTuple& best) {
  if (cand.R < best.R - 1e-9) return true;
  if (cand.R <= best.R + 1e-9) return cand.R0 < best.R0;
  return false;
}

void consider(std::optional<RatedWitness>& best, std::optional<NoiselessWitness> w,
              const DistortionMeasure& d, const Problem& p) {
  if (!w) return;
  const auto& q = p.q;
  const auto a = flatten(w->u_channel);
  const auto b = flatten(w->y_channel);
  const Corner c = corner_of(q, a, b, p.nx, p.nu, d);
  if (p.cap_r0 && c.uy > p.r0_cap + kCertifyTol) return;
  if (c.ed > p.d_cap + kCertifyTol) return;
  RateTuple t{c.ux, c.uy, c.ed};
  if (!best || better(t, best->corner)) best = RatedWitness{std::move(*w), t};
}

std::vector<double> logits_of(const NoiselessWitness& w) {
  std::vector<double> theta = flatten(w.u_channel);
  const auto b = flatten(w.y_channel);
  theta.insert(theta.end(), b.begin(), b.end());
  for (double& v : theta) v = std::log(std::max(v, 1e-12));
  return theta;
}

// Start 0: U copies X (extra letters unused). Start 1: U independent of X and
// Y ~ Q_X. Remaining starts: random logits.
std::vector<double> initial_logits(const Problem& p, std::size_t index, std::uint64_t seed) {
  const std::size_t nx = p.nx, nu = p.nu, na = p.na();
  std::vector<double> theta(p.dim(), 0.0);
  if (index == 0) {
    for (std::size_t x = 0; x < nx; ++x) theta[x * nu + (x % nu)] = 8.0;
    for (std::size_t u = 0; u < nu; ++u) theta[na + u * nx + (u % nx)] = 8.0;
    return theta;
  }
  if (index == 1) {
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t y = 0; y < nx; ++y) theta[na + u * nx + y] = std::log(std::max(p.q[y], 1e-12));
    return theta;
  }
  Rng rng(seed);
  const double scale = 0.5 + 3.0 * rng.uniform();
  for (double& v : theta) v = scale * rng.normal();
  return theta;
}

std::optional<RatedWitness> run_start(const Problem& p, const Pmf& source,
                                      const DistortionMeasure& d, std::vector<double> theta,
                                      const SearchConfig& search) {
  NoiselessEvaluator ev(p);
  opt::AugLagOptions opts;
  opts.max_outer = search.max_outer;
  opts.inner.max_iterations = search.max_inner;
  const auto result = opt::augmented_lagrangian(std::ref(ev), p.dim(), p.n_ineq(), p.n_eq(),
                                                std::move(theta), opts);
  std::vector<double> a(p.na()), b(p.nu * p.nx);
  opt::softmax_rows(std::span<const double>(result.x).subspan(0, p.na()), p.nx, p.nu, a);
  opt::softmax_rows(std::span<const double>(result.x).subspan(p.na()), p.nu, p.nx, b);

  std::optional<RatedWitness> best;
  for (double snap : {0.0, 1e-7, 1e-5, 1e-3}) consider(best, polish(source, a, b, p.nu, snap), d, p);
  return best;
}

std::optional<RatedWitness> search_impl(const Pmf& source, const DistortionMeasure& d,
                                        double r0_cap, double d_cap, const SearchConfig& search,
                                        std::size_t random_starts,
                                        const std::vector<NoiselessWitness>& warm_starts) {
  Problem p;
  p.q.assign(source.begin(), source.end());
  p.d = &d;
  p.nx = source.size();
  p.nu = search.u_size == 0 ? noiseless_u_cap(p.nx) : search.u_size;
  p.cap_r0 = std::isfinite(r0_cap);
  p.r0_cap = p.cap_r0 ? r0_cap : 0.0;
  p.d_cap = d_cap;

  std::vector<std::vector<double>> starts;
  for (std::size_t i = 0; i < random_starts; ++i)
    starts.push_back(initial_logits(p, i, derive_seed(search.seed, i)));
  for (const auto& w : warm_starts)
    if (w.u_size() == p.nu && w.source.size() == p.nx) starts.push_back(logits_of(w));

  std::vector<std::optional<RatedWitness>> found(starts.size());
  parallel_for(starts.size(), search.jobs, [&](std::size_t i) {
    found[i] = run_start(p, source, d, starts[i], search);
  });

  std::optional<RatedWitness> best;
  for (auto& f : found)
    if (f && (!best || better(f->corner, best->corner))) best = std::move(f);
  if (best) best->corner = evaluate_witness(best->witness, d);
  return best;
}

void check_problem(const Pmf& source, const DistortionMeasure& d) {
  if (d.x_size() != source.size() || d.y_size() != source.size())
    throw std::invalid_argument("distortion must be square over the source alphabet");
}

}  // namespace

std::optional<RatedWitness> minimize_rate(const Pmf& source, const DistortionMeasure& d,
                                          double r0_cap, double d_cap,
                                          const SearchConfig& search,
                                          const std::vector<NoiselessWitness>& warm_starts) {
  check_problem(source, d);
  validate_search(search, source.size());
  if (std::isnan(r0_cap) || r0_cap < 0.0 || !std::isfinite(d_cap) || d_cap < 0.0)
    throw std::invalid_argument("caps must be nonnegative");
  return search_impl(source, d, r0_cap, d_cap, search, search.starts, warm_starts);
}

std::optional<NoiselessWitness> certify_achievable(const Pmf& source, const DistortionMeasure& d,
                                                   const RateTuple& target,
                                                   const SearchConfig& search) {
  if (!std::isfinite(target.R) || !std::isfinite(target.R0) || !std::isfinite(target.D) ||
      target.R < 0.0 || target.R0 < 0.0 || target.D < 0.0)
    throw std::invalid_argument("target must be finite and nonnegative");
  auto best = minimize_rate(source, d, target.R0, target.D, search);
  if (best && dominated_by(best->corner, target)) return std::move(best->witness);
  return std::nullopt;
}

std::vector<FrontierPoint> frontier_sweep(const Pmf& source, const DistortionMeasure& d,
                                          const std::vector<GridPoint>& grid,
                                          const SearchConfig& search) {
  if (grid.empty()) throw std::invalid_argument("frontier grid is empty");
  check_problem(source, d);
  validate_search(search, source.size());
  for (const auto& g : grid)
    if (std::isnan(g.R0) || g.R0 < 0.0 || !std::isfinite(g.D) || g.D < 0.0)
      throw std::invalid_argument("grid points need R0 >= 0 and finite D >= 0");

  SearchConfig inner = search;
  inner.jobs = 1;
  std::vector<FrontierPoint> out(grid.size());
  parallel_for(grid.size(), search.jobs, [&](std::size_t i) {
    SearchConfig s = inner;
    s.seed = derive_seed(search.seed, 1000003 + i);
    out[i].at = grid[i];
    out[i].best = search_impl(source, d, grid[i].R0, grid[i].D, s, s.starts, {});
  });

  // Warm starts from the nearest neighbours' witnesses.
  double r0_span = 0.0, d_span = 0.0;
  for (const auto& g : grid) {
    if (std::isfinite(g.R0)) r0_span = std::max(r0_span, g.R0);
    d_span = std::max(d_span, g.D);
  }
  auto distance = [&](const GridPoint& a, const GridPoint& b) {
    if (std::isfinite(a.R0) != std::isfinite(b.R0)) return std::numeric_limits<double>::infinity();
    const double dr = std::isfinite(a.R0) ? (a.R0 - b.R0) / std::max(r0_span, 1e-12) : 0.0;
    const double dd = (a.D - b.D) / std::max(d_span, 1e-12);
    return dr * dr + dd * dd;
  };
  std::vector<std::optional<RatedWitness>> refined(grid.size());
  parallel_for(grid.size(), search.jobs, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (j != i && out[j].best) near.emplace_back(distance(grid[i], grid[j]), j);
    std::sort(near.begin(), near.end());
    std::vector<NoiselessWitness> warm;
    for (std::size_t k = 0; k < near.size() && k < 4; ++k)
      if (std::isfinite(near[k].first)) warm.push_back(out[near[k].second].best->witness);
    if (out[i].best) warm.push_back(out[i].best->witness);
    if (warm.empty()) return;
    refined[i] = search_impl(source, d, grid[i].R0, grid[i].D, inner, 0, warm);
  });
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (refined[i] && (!out[i].best || better(refined[i]->corner, out[i].best->corner)))
      out[i].best = std::move(refined[i]);

  // Monotone cleanup: any stored witness whose corner fits a point's caps
  // also serves that point.
  std::vector<std::optional<RatedWitness>> pool;
  for (const auto& f : out) pool.push_back(f.best);
  for (auto& f : out) {
    for (const auto& cand : pool) {
      if (!cand) continue;
      if (cand->corner.R0 > f.at.R0 + kCertifyTol || cand->corner.D > f.at.D + kCertifyTol)
        continue;
      if (!f.best || better(cand->corner, f.best->corner)) f.best = cand;
    }
  }
  return out;
}

}  // namespace srdp
