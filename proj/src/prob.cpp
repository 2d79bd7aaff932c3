#include "srdp/prob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace srdp {

namespace {

void validate_probs(std::span<const double> probs, double tol, const char* what) {
  if (probs.empty()) throw std::invalid_argument(std::string(what) + ": empty");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < -tol) {
      std::ostringstream os;
      os << what << ": invalid probability " << p;
      throw std::invalid_argument(os.str());
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": mass " << total << " differs from 1";
    throw std::invalid_argument(os.str());
  }
}

// Tiny negative rounding residue is clipped; anything larger was rejected.
std::vector<double> clip_negative_zero(std::vector<double> v) {
  for (double& p : v) p = std::max(p, 0.0);
  return v;
}

}  // namespace

std::uint64_t enumeration_cap() {
  constexpr std::uint64_t kDefault = std::uint64_t{1} << 20;
  const char* env = std::getenv("SRDP_ENUM_CAP");
  if (env == nullptr || *env == '\0') return kDefault;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0)
    throw std::invalid_argument("SRDP_ENUM_CAP must be a positive integer");
  return v;
}

// ---------------------------------------------------------------- Pmf

Pmf::Pmf(std::vector<double> probs, double tol) {
  validate_probs(probs, tol, "Pmf");
  probs_ = clip_negative_zero(std::move(probs));
}

Pmf Pmf::uniform(std::size_t size) {
  if (size == 0) throw std::invalid_argument("Pmf::uniform: empty alphabet");
  return Pmf(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Pmf Pmf::point_mass(std::size_t size, std::size_t at) {
  if (at >= size) throw std::invalid_argument("Pmf::point_mass: index out of range");
  std::vector<double> p(size, 0.0);
  p[at] = 1.0;
  return Pmf(std::move(p));
}

Pmf Pmf::bernoulli(double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("Pmf::bernoulli: p outside [0,1]");
  return Pmf({1.0 - p1, p1});
}

Pmf Pmf::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("Pmf::normalized: bad weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("Pmf::normalized: all-zero weights");
  for (double& w : weights) w /= total;
  return Pmf(std::move(weights), kChainTol);
}

// ---------------------------------------------------------------- Channel

Channel::Channel(std::vector<std::vector<double>> rows, double tol) {
  if (rows.empty()) throw std::invalid_argument("Channel: no rows");
  input_size_ = rows.size();
  output_size_ = rows.front().size();
  data_.reserve(input_size_ * output_size_);
  for (std::size_t x = 0; x < rows.size(); ++x) {
    if (rows[x].size() != output_size_) throw std::invalid_argument("Channel: ragged rows");
    validate_probs(rows[x], tol, "Channel row");
    for (double p : rows[x]) data_.push_back(std::max(p, 0.0));
  }
}

Channel Channel::identity(std::size_t size) {
  std::vector<std::vector<double>> rows(size, std::vector<double>(size, 0.0));
  for (std::size_t i = 0; i < size; ++i) rows[i][i] = 1.0;
  return Channel(std::move(rows));
}

Channel Channel::bsc(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Channel::bsc: p outside [0,1]");
  return Channel({{1.0 - p, p}, {p, 1.0 - p}});
}

Channel Channel::constant(std::size_t input_size, const Pmf& output) {
  std::vector<double> row(output.begin(), output.end());
  return Channel(std::vector<std::vector<double>>(input_size, row));
}

Channel Channel::normalized(std::vector<std::vector<double>> weights) {
  for (auto& row : weights) {
    double total = 0.0;
    for (double w : row) {
      if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("Channel::normalized: bad weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("Channel::normalized: degenerate all-zero row");
    for (double& w : row) w /= total;
  }
  return Channel(std::move(weights), kChainTol);
}

Pmf Channel::row_pmf(std::size_t x) const {
  auto r = row(x);
  return Pmf(std::vector<double>(r.begin(), r.end()), kChainTol);
}

// ---------------------------------------------------------------- JointPmf

JointPmf::JointPmf(std::vector<std::size_t> shape, std::vector<double> cells, double tol)
    : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > kMaxArity)
    throw std::invalid_argument("JointPmf: arity must be 1-4");
  std::size_t count = 1;
  for (std::size_t s : shape_) {
    if (s == 0) throw std::invalid_argument("JointPmf: empty alphabet");
    count *= s;
  }
  if (cells.size() != count) throw std::invalid_argument("JointPmf: cell count does not match shape");
  validate_probs(cells, tol, "JointPmf");
  cells_ = clip_negative_zero(std::move(cells));
}

std::size_t JointPmf::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw std::invalid_argument("JointPmf: index arity mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    if (index[k] >= shape_[k]) throw std::out_of_range("JointPmf: index out of range");
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

double JointPmf::at(std::span<const std::size_t> index) const { return cells_[flat_index(index)]; }

Pmf JointPmf::as_pmf() const {
  if (arity() != 1) throw std::invalid_argument("JointPmf::as_pmf: arity is not 1");
  return Pmf(cells_, kChainTol);
}

// ---------------------------------------------------------------- operations

Pmf push_forward(const Pmf& source, const Channel& ch) {
  if (source.size() != ch.input_size())
    throw std::invalid_argument("push_forward: source size does not match channel input");
  std::vector<double> out(ch.output_size(), 0.0);
  for (std::size_t x = 0; x < source.size(); ++x) {
    const double px = source[x];
    if (px == 0.0) continue;
    auto row = ch.row(x);
    for (std::size_t y = 0; y < out.size(); ++y) out[y] += px * row[y];
  }
  return Pmf(std::move(out), kChainTol);
}

Channel compose(const Channel& first, const Channel& second) {
  if (first.output_size() != second.input_size())
    throw std::invalid_argument("compose: inner dimensions differ");
  std::vector<std::vector<double>> rows(first.input_size(),
                                        std::vector<double>(second.output_size(), 0.0));
  for (std::size_t x = 0; x < first.input_size(); ++x)
    for (std::size_t u = 0; u < first.output_size(); ++u) {
      const double w = first(x, u);
      if (w == 0.0) continue;
      for (std::size_t y = 0; y < second.output_size(); ++y) rows[x][y] += w * second(u, y);
    }
  return Channel(std::move(rows), kChainTol);
}

JointPmf joint_from(const Pmf& source, const Channel& ch) {
  if (source.size() != ch.input_size())
    throw std::invalid_argument("joint_from: source size does not match channel input");
  std::vector<double> cells;
  cells.reserve(source.size() * ch.output_size());
  for (std::size_t x = 0; x < source.size(); ++x)
    for (std::size_t y = 0; y < ch.output_size(); ++y) cells.push_back(source[x] * ch(x, y));
  return JointPmf({source.size(), ch.output_size()}, std::move(cells), kChainTol);
}

JointPmf extend(const JointPmf& joint, const Channel& ch) {
  if (joint.cell_count() != ch.input_size())
    throw std::invalid_argument("extend: channel input must index the joint's cells");
  if (joint.arity() >= JointPmf::kMaxArity) throw std::invalid_argument("extend: arity limit");
  std::vector<double> cells;
  cells.reserve(joint.cell_count() * ch.output_size());
  auto src = joint.cells();
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t y = 0; y < ch.output_size(); ++y) cells.push_back(src[i] * ch(i, y));
  auto shape = joint.shape();
  shape.push_back(ch.output_size());
  return JointPmf(std::move(shape), std::move(cells), kChainTol);
}

JointPmf marginal(const JointPmf& j, std::span<const std::size_t> keep) {
  if (keep.empty()) throw std::invalid_argument("marginal: empty keep set");
  const auto& shape = j.shape();
  std::vector<bool> seen(shape.size(), false);
  std::vector<std::size_t> out_shape;
  for (std::size_t k : keep) {
    if (k >= shape.size()) throw std::invalid_argument("marginal: variable index out of range");
    if (seen[k]) throw std::invalid_argument("marginal: repeated variable index");
    seen[k] = true;
    out_shape.push_back(shape[k]);
  }
  std::size_t out_count = 1;
  for (std::size_t s : out_shape) out_count *= s;
  std::vector<double> out(out_count, 0.0);

  std::vector<std::size_t> idx(shape.size(), 0);
  auto cells = j.cells();
  for (std::size_t flat = 0; flat < cells.size(); ++flat) {
    std::size_t o = 0;
    for (std::size_t k : keep) o = o * shape[k] + idx[k];
    out[o] += cells[flat];
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
  return JointPmf(std::move(out_shape), std::move(out), kChainTol);
}

JointPmf marginal(const JointPmf& j, std::initializer_list<std::size_t> keep) {
  return marginal(j, std::span<const std::size_t>(keep.begin(), keep.size()));
}

Pmf marginal_pmf(const JointPmf& j, std::size_t variable) {
  const std::size_t keep[] = {variable};
  return marginal(j, keep).as_pmf();
}

Channel fit_output_marginal(const Pmf& input, const Channel& kernel, const Pmf& target,
                            double tol, int max_iterations) {
  if (input.size() != kernel.input_size() || kernel.output_size() != target.size())
    throw std::invalid_argument("fit_output_marginal: dimension mismatch");
  const std::size_t nu = kernel.input_size(), ny = kernel.output_size();
  std::vector<double> m(nu * ny);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t y = 0; y < ny; ++y) m[u * ny + y] = input[u] * kernel(u, y);

  std::vector<double> col(ny);
  for (int it = 0; it < max_iterations; ++it) {
    std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t y = 0; y < ny; ++y) col[y] += m[u * ny + y];
    double residual = 0.0;
    for (std::size_t y = 0; y < ny; ++y) residual = std::max(residual, std::abs(col[y] - target[y]));
    if (residual < tol) break;
    for (std::size_t y = 0; y < ny; ++y) {
      if (col[y] <= 0.0) continue;  // unreachable output letter; fitting cannot fix it
      const double scale = target[y] / col[y];
      for (std::size_t u = 0; u < nu; ++u) m[u * ny + y] *= scale;
    }
    for (std::size_t u = 0; u < nu; ++u) {
      double row = 0.0;
      for (std::size_t y = 0; y < ny; ++y) row += m[u * ny + y];
      if (row <= 0.0) continue;
      const double scale = input[u] / row;
      for (std::size_t y = 0; y < ny; ++y) m[u * ny + y] *= scale;
    }
  }

  std::vector<std::vector<double>> rows(nu, std::vector<double>(ny));
  for (std::size_t u = 0; u < nu; ++u) {
    double row = 0.0;
    for (std::size_t y = 0; y < ny; ++y) row += m[u * ny + y];
    for (std::size_t y = 0; y < ny; ++y)
      rows[u][y] = (input[u] > 0.0 && row > 0.0) ? m[u * ny + y] / row : kernel(u, y);
  }
  return Channel::normalized(std::move(rows));
}

std::size_t checked_power(std::size_t base, std::size_t n, std::uint64_t cap, const char* what) {
  const double required = std::pow(static_cast<double>(base), static_cast<double>(n));
  if (required > static_cast<double>(cap)) {
    std::ostringstream os;
    os << what << ": " << required << " cells exceed the enumeration cap " << cap;
    throw CapExceeded(os.str(), required, cap);
  }
  std::size_t v = 1;
  for (std::size_t i = 0; i < n; ++i) v *= base;
  return v;
}

void decode_sequence(std::size_t index, std::size_t base, std::span<std::size_t> letters) {
  for (std::size_t i = letters.size(); i-- > 0;) {
    letters[i] = index % base;
    index /= base;
  }
}

Pmf iid_extension(const Pmf& source, std::size_t n) {
  if (n == 0) throw std::invalid_argument("iid_extension: n must be positive");
  const std::size_t count = checked_power(source.size(), n, enumeration_cap(), "iid_extension");
  std::vector<double> out(count);
  std::vector<std::size_t> letters(n);
  for (std::size_t i = 0; i < count; ++i) {
    decode_sequence(i, source.size(), letters);
    double p = 1.0;
    for (std::size_t l : letters) p *= source[l];
    out[i] = p;
  }
  return Pmf(std::move(out), kChainTol);
}

}  // namespace srdp
