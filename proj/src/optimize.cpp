#include "srdp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace srdp::opt {

void Evaluation::resize(std::size_t dim, std::size_t n_ineq, std::size_t n_eq) {
  grad_f.assign(dim, 0.0);
  ineq.assign(n_ineq, 0.0);
  grad_ineq.assign(n_ineq, std::vector<double>(dim, 0.0));
  eq.assign(n_eq, 0.0);
  grad_eq.assign(n_eq, std::vector<double>(dim, 0.0));
}

double Evaluation::max_violation() const {
  double v = 0.0;
  for (double g : ineq) v = std::max(v, g);
  for (double h : eq) v = std::max(v, std::abs(h));
  return v;
}

Evaluator finite_difference(ValueFunction values, std::size_t n_ineq, std::size_t n_eq,
                            double step) {
  return [values = std::move(values), n_ineq, n_eq, step](std::span<const double> x,
                                                          Evaluation& out) {
    const std::size_t dim = x.size();
    if (out.grad_f.size() != dim || out.ineq.size() != n_ineq || out.eq.size() != n_eq)
      out.resize(dim, n_ineq, n_eq);
    values(x, out.f, out.ineq, out.eq);

    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> gp(n_ineq), gm(n_ineq), hp(n_eq), hm(n_eq);
    double fp = 0.0, fm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double h = step * std::max(1.0, std::abs(x[k]));
      xp[k] = x[k] + h;
      values(xp, fp, gp, hp);
      xp[k] = x[k] - h;
      values(xp, fm, gm, hm);
      xp[k] = x[k];
      const double inv = 1.0 / (2.0 * h);
      out.grad_f[k] = (fp - fm) * inv;
      for (std::size_t i = 0; i < n_ineq; ++i) out.grad_ineq[i][k] = (gp[i] - gm[i]) * inv;
      for (std::size_t j = 0; j < n_eq; ++j) out.grad_eq[j][k] = (hp[j] - hm[j]) * inv;
    }
  };
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

LbfgsResult lbfgs_minimize(const ValueAndGradient& fg, std::vector<double> x0,
                           const LbfgsOptions& options) {
  const std::size_t n = x0.size();
  LbfgsResult result;
  result.x = std::move(x0);
  std::vector<double> g(n), g_new(n), x_new(n), dir(n), alpha(options.history);
  double f = fg(result.x, g);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  int flat_steps = 0;

  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it;
    if (!std::isfinite(f)) break;
    if (inf_norm(g) <= options.grad_tol) {
      result.converged = true;
      break;
    }

    // Two-loop recursion.
    dir = g;
    const std::size_t m = s_hist.size();
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * y_hist[k][i];
    }
    double gamma = 1.0;
    if (m > 0) gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (double& d : dir) d *= gamma;
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += s_hist[k][i] * (alpha[k] - beta);
    }
    for (double& d : dir) d = -d;

    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      // Lost descent; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = -dot(g, g);
    }

    double step = (m == 0) ? std::min(1.0, 1.0 / std::max(inf_norm(g), 1e-300)) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = result.x[i] + step * dir[i];
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - result.x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (static_cast<int>(s_hist.size()) == options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    const double decrease = f - f_new;
    result.x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    flat_steps = (decrease <= options.f_tol * std::max(1.0, std::abs(f))) ? flat_steps + 1 : 0;
    if (flat_steps >= 3) {
      result.converged = true;
      break;
    }
  }
  result.f = f;
  return result;
}

AugLagResult augmented_lagrangian(const Evaluator& evaluate, std::size_t dim, std::size_t n_ineq,
                                  std::size_t n_eq, std::vector<double> x0,
                                  const AugLagOptions& options) {
  std::vector<double> lambda(n_ineq, 0.0), mu(n_eq, 0.0);
  double penalty = options.initial_penalty;
  Evaluation ev;
  ev.resize(dim, n_ineq, n_eq);

  const ValueAndGradient lagrangian = [&](std::span<const double> x, std::span<double> grad) {
    evaluate(x, ev);
    double value = ev.f;
    std::copy(ev.grad_f.begin(), ev.grad_f.end(), grad.begin());
    for (std::size_t i = 0; i < n_ineq; ++i) {
      const double shifted = std::max(0.0, lambda[i] + penalty * ev.ineq[i]);
      value += (shifted * shifted - lambda[i] * lambda[i]) / (2.0 * penalty);
      if (shifted > 0.0)
        for (std::size_t k = 0; k < dim; ++k) grad[k] += shifted * ev.grad_ineq[i][k];
    }
    for (std::size_t j = 0; j < n_eq; ++j) {
      const double h = ev.eq[j];
      value += mu[j] * h + 0.5 * penalty * h * h;
      const double w = mu[j] + penalty * h;
      for (std::size_t k = 0; k < dim; ++k) grad[k] += w * ev.grad_eq[j][k];
    }
    return value;
  };

  AugLagResult result;
  result.x = std::move(x0);
  double prev_violation = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < options.max_outer; ++outer) {
    auto inner = lbfgs_minimize(lagrangian, result.x, options.inner);
    result.x = std::move(inner.x);
    result.inner_iterations += inner.iterations;
    result.outer_iterations = outer + 1;
    evaluate(result.x, ev);
    const double violation = ev.max_violation();

    for (std::size_t i = 0; i < n_ineq; ++i) lambda[i] = std::max(0.0, lambda[i] + penalty * ev.ineq[i]);
    for (std::size_t j = 0; j < n_eq; ++j) mu[j] += penalty * ev.eq[j];

    if (violation <= options.feasibility_tol && outer > 0) break;
    if (violation > 0.25 * prev_violation) penalty = std::min(penalty * options.penalty_growth, options.max_penalty);
    prev_violation = violation;
  }
  evaluate(result.x, ev);
  result.at_x = ev;
  result.max_violation = ev.max_violation();
  return result;
}

void softmax_rows(std::span<const double> logits, std::size_t rows, std::size_t cols,
                  std::span<double> out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* l = logits.data() + r * cols;
    double* o = out.data() + r * cols;
    const double m = *std::max_element(l, l + cols);
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += (o[c] = std::exp(l[c] - m));
    for (std::size_t c = 0; c < cols; ++c) o[c] /= s;
  }
}

// d/dlogits of a function of softmax rows, given d/dprobs.
void softmax_pullback(std::span<const double> probs, std::size_t rows, std::size_t cols,
                      std::span<const double> g, std::span<double> out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += probs[r * cols + c] * g[r * cols + c];
    for (std::size_t c = 0; c < cols; ++c)
      out[r * cols + c] = probs[r * cols + c] * (g[r * cols + c] - mean);
  }
}

}  // namespace srdp::opt
