#pragma once

// Finite-alphabet probability primitives: pmfs, stochastic matrices and small
// joint tables. All values are immutable after construction.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srdp {

/// Construction-time tolerance on normalization.
inline constexpr double kConstructionTol = 1e-12;
/// Tolerance used after long arithmetic chains (products, compositions).
inline constexpr double kChainTol = 1e-10;

/// Thrown when an exhaustive enumeration would exceed the configured cap.
class CapExceeded : public std::length_error {
 public:
  CapExceeded(const std::string& what, double required_cells, std::uint64_t cap)
      : std::length_error(what), required_cells_(required_cells), cap_(cap) {}

  double required_cells() const noexcept { return required_cells_; }
  std::uint64_t cap() const noexcept { return cap_; }
  /// Memory a dense double table of the requested size would need.
  double required_bytes() const noexcept { return required_cells_ * sizeof(double); }

 private:
  double required_cells_;
  std::uint64_t cap_;
};

/// Enumeration cap in cells; 2^20 unless SRDP_ENUM_CAP is set.
std::uint64_t enumeration_cap();

class Pmf {
 public:
  Pmf() = default;
  /// Validates nonnegativity and unit mass within `tol`; never renormalizes.
  explicit Pmf(std::vector<double> probs, double tol = kConstructionTol);
  Pmf(std::initializer_list<double> probs) : Pmf(std::vector<double>(probs)) {}

  static Pmf uniform(std::size_t size);
  static Pmf point_mass(std::size_t size, std::size_t at);
  static Pmf bernoulli(double p1);
  /// Divides by the total; throws if the total is not positive.
  static Pmf normalized(std::vector<double> weights);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  auto begin() const noexcept { return probs_.begin(); }
  auto end() const noexcept { return probs_.end(); }

 private:
  std::vector<double> probs_;
};

/// Row-stochastic matrix W[x][y] = P(y|x).
class Channel {
 public:
  Channel() = default;
  explicit Channel(std::vector<std::vector<double>> rows, double tol = kConstructionTol);

  static Channel identity(std::size_t size);
  /// Binary symmetric channel with crossover `p`.
  static Channel bsc(double p);
  /// Every input maps to the same output law.
  static Channel constant(std::size_t input_size, const Pmf& output);
  /// Row-normalizes nonnegative weights; all-zero rows are an error.
  static Channel normalized(std::vector<std::vector<double>> weights);

  std::size_t input_size() const noexcept { return input_size_; }
  std::size_t output_size() const noexcept { return output_size_; }
  double operator()(std::size_t x, std::size_t y) const { return data_[x * output_size_ + y]; }
  std::span<const double> row(std::size_t x) const {
    return {data_.data() + x * output_size_, output_size_};
  }
  Pmf row_pmf(std::size_t x) const;

 private:
  std::size_t input_size_ = 0;
  std::size_t output_size_ = 0;
  std::vector<double> data_;
};

/// Dense joint distribution over 1-4 finite variables, row-major with the
/// last variable fastest.
class JointPmf {
 public:
  static constexpr std::size_t kMaxArity = 4;

  JointPmf() = default;
  JointPmf(std::vector<std::size_t> shape, std::vector<double> cells,
           double tol = kConstructionTol);

  std::size_t arity() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::span<const double> cells() const noexcept { return cells_; }
  std::size_t cell_count() const noexcept { return cells_.size(); }

  double at(std::span<const std::size_t> index) const;
  double at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }
  std::size_t flat_index(std::span<const std::size_t> index) const;

  /// Arity-1 joint viewed as a Pmf.
  Pmf as_pmf() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> cells_;
};

/// output[y] = sum_x source[x] * ch(x, y).
Pmf push_forward(const Pmf& source, const Channel& ch);

/// Cascade: result(x, y) = sum_u first(x, u) * second(u, y).
Channel compose(const Channel& first, const Channel& second);

/// cells[x][y] = source[x] * ch(x, y).
JointPmf joint_from(const Pmf& source, const Channel& ch);

/// Extends a joint over (A...) with a new last variable drawn through `ch`
/// from the flattened tuple of existing variables.
JointPmf extend(const JointPmf& joint, const Channel& ch);

/// Sums out every variable not listed in `keep`; the result lists the kept
/// variables in the order given.
JointPmf marginal(const JointPmf& j, std::span<const std::size_t> keep);
JointPmf marginal(const JointPmf& j, std::initializer_list<std::size_t> keep);
Pmf marginal_pmf(const JointPmf& j, std::size_t variable);

/// Product law over alphabet^n; sequence index is base-|alphabet| with the
/// first letter most significant.
Pmf iid_extension(const Pmf& source, std::size_t n);

/// Iterative proportional fitting of the coupling input(u)·kernel(u, y) so
/// that its output marginal equals `target`. Rows with zero input mass are
/// returned unchanged. Stops after `max_iterations` or once the output
/// residual (max abs) is below `tol`; callers check the achieved residual.
Channel fit_output_marginal(const Pmf& input, const Channel& kernel, const Pmf& target,
                            double tol = 1e-12, int max_iterations = 1000);

/// Number of sequences |alphabet|^n, or CapExceeded when above `cap`.
std::size_t checked_power(std::size_t base, std::size_t n, std::uint64_t cap,
                          const char* what);

/// Decodes a base-`base` sequence index (first letter most significant).
void decode_sequence(std::size_t index, std::size_t base, std::span<std::size_t> letters);

}  // namespace srdp
