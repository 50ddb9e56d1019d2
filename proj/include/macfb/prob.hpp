/**
 * Exact finite-probability arithmetic on dense joint tables: marginalization,
 * conditional entropy, and (conditional) mutual information in bits, plus the
 * Dirichlet-style simplex sampler that drives all randomized searches.
 *
 * All quantities use base-2 logarithms with the convention 0*log(0) = 0.
 * Tables are immutable after construction and freely shareable across threads;
 * the only stateful object in this header is the caller-owned RNG engine.
 */

#ifndef MACFB_PROB_HPP
#define MACFB_PROB_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace macfb {

/** Malformed input: unknown variable names, bad cardinalities, invalid options. */
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** A requested object exceeds a hard size cap (table cells, codebook entries). */
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Mismatched sequence lengths or symbol values out of alphabet range. */
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** An internal invariant failed (negative probability mass, non-normalized table). */
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Tolerance on "sums to one" checks for probability tables and pmf slices.
inline constexpr double kProbSumTol = 1e-12;

/// Mutual-information values in (-kMiNoiseFloor, 0) are clamped to 0; anything
/// more negative raises ConsistencyError.
inline constexpr double kMiNoiseFloor = 1e-12;

/// Default cap on dense table size (product of alphabet cardinalities).
inline constexpr Eigen::Index kDefaultMaxCells = Eigen::Index{1} << 18;

/** A named finite alphabet; `size` is the cardinality (>= 1). */
struct Alphabet {
    std::string name;
    int size = 0;
};

/// An (ordered) set of variable names used to address table dimensions.
using VarSet = std::vector<std::string>;

/**
 * Compensated (Neumaier) accumulator. Keeps long reductions over probability
 * tables accurate to a few ulps independent of the number of terms.
 */
class NeumaierSum {
  public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/**
 * A normalized probability table over an ordered list of finite variables.
 *
 * Storage is a dense row-major array (last variable fastest). Construction
 * validates nonnegativity, normalization to within kProbSumTol, and the cell
 * cap; instances are immutable afterwards.
 */
class JointTable {
  public:
    JointTable(std::vector<Alphabet> vars, Eigen::ArrayXd probs,
               Eigen::Index max_cells = kDefaultMaxCells);

    const std::vector<Alphabet>& vars() const noexcept { return vars_; }
    const Eigen::ArrayXd& probs() const noexcept { return probs_; }
    Eigen::Index cells() const noexcept { return probs_.size(); }
    int var_count() const noexcept { return static_cast<int>(vars_.size()); }

    /** Position of `name` in vars(); throws ConfigError if absent. */
    int index_of(std::string_view name) const;

    /** Flat-array stride of variable `var`. */
    Eigen::Index stride(int var) const { return strides_.at(static_cast<std::size_t>(var)); }

    /** Probability mass at a full coordinate (one symbol per variable). */
    double mass(std::span<const int> symbols) const;

  private:
    std::vector<Alphabet> vars_;
    std::vector<Eigen::Index> strides_;
    Eigen::ArrayXd probs_;
};

/**
 * Sum out every variable not listed in `keep`. The result preserves the
 * relative order of the kept variables as they appear in `t`.
 */
JointTable marginalize(const JointTable& t, const VarSet& keep);

/**
 * Conditional entropy H(of | given) in bits. `of` and `given` must be
 * disjoint subsets of the table's variables; `given` may be empty.
 */
double entropy(const JointTable& t, const VarSet& of, const VarSet& given = {});

/**
 * Conditional mutual information I(a ; b | given) in bits over pairwise
 * disjoint variable sets. Tiny negative values caused by floating-point
 * noise clamp to zero (see kMiNoiseFloor).
 */
double mutual_info(const JointTable& t, const VarSet& a, const VarSet& b,
                   const VarSet& given = {});

/**
 * One draw from the Dirichlet(concentration, ..., concentration) distribution
 * on the `dim`-simplex; concentration 1 is uniform over the simplex. The
 * result is nonnegative and sums to one to within kProbSumTol.
 */
Eigen::ArrayXd sample_simplex(int dim, double concentration, std::mt19937_64& rng);

/** Counter-based seed derivation (splitmix64 finalizer). */
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) noexcept;

/** Fresh engine for stream `counter` of `seed`; streams are independent. */
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t counter);

}  // namespace macfb

#endif  // MACFB_PROB_HPP
