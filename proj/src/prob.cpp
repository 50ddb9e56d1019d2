#include "macfb/prob.hpp"

#include <algorithm>
#include <utility>

namespace macfb {

namespace {

/// log2 with the 0*log(0) = 0 convention handled by callers (p > 0 here).
inline double log2_pos(double x) { return std::log2(x); }

Eigen::Index checked_cell_count(const std::vector<Alphabet>& vars, Eigen::Index max_cells) {
    Eigen::Index cells = 1;
    for (const auto& a : vars) {
        if (a.size < 1) throw ConfigError("alphabet '" + a.name + "' has size < 1");
        if (cells > max_cells / a.size)
            throw SizeError("table over " + std::to_string(vars.size()) +
                            " variables exceeds the cell cap of " + std::to_string(max_cells));
        cells *= a.size;
    }
    return cells;
}

std::vector<Eigen::Index> row_major_strides(const std::vector<Alphabet>& vars) {
    std::vector<Eigen::Index> strides(vars.size(), 1);
    for (int k = static_cast<int>(vars.size()) - 2; k >= 0; --k)
        strides[static_cast<std::size_t>(k)] =
            strides[static_cast<std::size_t>(k) + 1] * vars[static_cast<std::size_t>(k) + 1].size;
    return strides;
}

/// Resolve a variable-name set to table indices; rejects unknowns and duplicates.
std::vector<int> resolve(const JointTable& t, const VarSet& names) {
    std::vector<int> idx;
    idx.reserve(names.size());
    for (const auto& n : names) {
        const int k = t.index_of(n);
        if (std::find(idx.begin(), idx.end(), k) != idx.end())
            throw ConfigError("variable '" + n + "' listed twice");
        idx.push_back(k);
    }
    return idx;
}

void require_disjoint(const std::vector<int>& a, const std::vector<int>& b,
                      const char* what) {
    for (int k : a)
        if (std::find(b.begin(), b.end(), k) != b.end())
            throw ConfigError(std::string("variable sets must be disjoint: ") + what);
}

/// Strides of a projection of `t` onto the variables flagged in `mask`,
/// expressed per source variable (0 for summed-out variables), plus the
/// projected cell count.
struct Projection {
    std::vector<Eigen::Index> dstride;  // per source variable
    Eigen::Index cells = 1;
};

Projection make_projection(const JointTable& t, const std::vector<char>& mask) {
    Projection pr;
    pr.dstride.assign(mask.size(), 0);
    Eigen::Index stride = 1;
    for (int k = static_cast<int>(mask.size()) - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        if (!mask[ku]) continue;
        pr.dstride[ku] = stride;
        stride *= t.vars()[ku].size;
    }
    pr.cells = stride;
    return pr;
}

/// Sum the table onto a projection with compensated accumulation.
Eigen::ArrayXd project_sums(const JointTable& t, const Projection& pr) {
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(pr.cells);
    Eigen::ArrayXd comp = Eigen::ArrayXd::Zero(pr.cells);
    const auto& p = t.probs();
    const int nv = t.var_count();
    if (nv == 0) {
        out[0] = p[0];
        return out;
    }
    std::vector<int> coord(static_cast<std::size_t>(nv), 0);
    Eigen::Index dst = 0;
    for (Eigen::Index src = 0;; ++src) {
        const double x = p[src];
        const double t0 = out[dst] + x;
        if (std::abs(out[dst]) >= std::abs(x))
            comp[dst] += (out[dst] - t0) + x;
        else
            comp[dst] += (x - t0) + out[dst];
        out[dst] = t0;
        int k = nv - 1;
        for (; k >= 0; --k) {
            const auto ku = static_cast<std::size_t>(k);
            ++coord[ku];
            dst += pr.dstride[ku];
            if (coord[ku] < t.vars()[ku].size) break;
            dst -= static_cast<Eigen::Index>(t.vars()[ku].size) * pr.dstride[ku];
            coord[ku] = 0;
        }
        if (k < 0) break;
    }
    return out + comp;
}

std::vector<char> mask_of(const JointTable& t, const std::vector<int>& idx) {
    std::vector<char> mask(static_cast<std::size_t>(t.var_count()), 0);
    for (int k : idx) mask[static_cast<std::size_t>(k)] = 1;
    return mask;
}

}  // namespace

JointTable::JointTable(std::vector<Alphabet> vars, Eigen::ArrayXd probs,
                       Eigen::Index max_cells)
    : vars_(std::move(vars)), probs_(std::move(probs)) {
    const Eigen::Index cells = checked_cell_count(vars_, max_cells);
    if (cells != probs_.size())
        throw ShapeError("table data has " + std::to_string(probs_.size()) +
                         " entries, expected " + std::to_string(cells));
    for (std::size_t i = 0; i < vars_.size(); ++i)
        for (std::size_t j = i + 1; j < vars_.size(); ++j)
            if (vars_[i].name == vars_[j].name)
                throw ConfigError("duplicate variable name '" + vars_[i].name + "'");
    NeumaierSum total;
    for (Eigen::Index c = 0; c < probs_.size(); ++c) {
        if (probs_[c] < 0.0)
            throw ConsistencyError("negative probability at cell " + std::to_string(c));
        total.add(probs_[c]);
    }
    if (std::abs(total.value() - 1.0) > kProbSumTol)
        throw ConsistencyError("table mass is " + std::to_string(total.value()) +
                               ", expected 1 within tolerance");
    strides_ = row_major_strides(vars_);
}

int JointTable::index_of(std::string_view name) const {
    for (std::size_t k = 0; k < vars_.size(); ++k)
        if (vars_[k].name == name) return static_cast<int>(k);
    throw ConfigError("unknown variable '" + std::string(name) + "'");
}

double JointTable::mass(std::span<const int> symbols) const {
    if (symbols.size() != vars_.size())
        throw ShapeError("coordinate arity does not match table");
    Eigen::Index flat = 0;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (symbols[k] < 0 || symbols[k] >= vars_[k].size)
            throw ShapeError("symbol out of range for variable '" + vars_[k].name + "'");
        flat += strides_[k] * symbols[k];
    }
    return probs_[flat];
}

JointTable marginalize(const JointTable& t, const VarSet& keep) {
    const auto idx = resolve(t, keep);
    const auto mask = mask_of(t, idx);
    const auto pr = make_projection(t, mask);
    std::vector<Alphabet> out_vars;
    for (int k = 0; k < t.var_count(); ++k)
        if (mask[static_cast<std::size_t>(k)]) out_vars.push_back(t.vars()[static_cast<std::size_t>(k)]);
    Eigen::ArrayXd sums = project_sums(t, pr);
    // Summation can leave infinitesimal negatives at zero-mass cells.
    for (Eigen::Index c = 0; c < sums.size(); ++c)
        if (sums[c] < 0.0 && sums[c] > -kProbSumTol) sums[c] = 0.0;
    return JointTable(std::move(out_vars), std::move(sums));
}

double entropy(const JointTable& t, const VarSet& of, const VarSet& given) {
    const auto of_idx = resolve(t, of);
    const auto given_idx = resolve(t, given);
    require_disjoint(of_idx, given_idx, "entropy(of, given)");

    VarSet all = of;
    all.insert(all.end(), given.begin(), given.end());
    const JointTable tm = marginalize(t, all);

    NeumaierSum h;
    if (given.empty()) {
        for (Eigen::Index c = 0; c < tm.cells(); ++c) {
            const double p = tm.probs()[c];
            if (p > 0.0) h.add(-p * log2_pos(p));
        }
    } else {
        const auto gmask = mask_of(tm, resolve(tm, given));
        const auto gpr = make_projection(tm, gmask);
        const Eigen::ArrayXd pg = project_sums(tm, gpr);
        const int nv = tm.var_count();
        std::vector<int> coord(static_cast<std::size_t>(nv), 0);
        Eigen::Index gi = 0;
        for (Eigen::Index c = 0;; ++c) {
            const double p = tm.probs()[c];
            if (p > 0.0) h.add(p * log2_pos(pg[gi] / p));
            int k = nv - 1;
            for (; k >= 0; --k) {
                const auto ku = static_cast<std::size_t>(k);
                ++coord[ku];
                gi += gpr.dstride[ku];
                if (coord[ku] < tm.vars()[ku].size) break;
                gi -= static_cast<Eigen::Index>(tm.vars()[ku].size) * gpr.dstride[ku];
                coord[ku] = 0;
            }
            if (k < 0) break;
        }
    }
    double value = h.value();
    if (value < 0.0) {
        if (value < -kMiNoiseFloor)
            throw ConsistencyError("conditional entropy evaluated to " + std::to_string(value));
        value = 0.0;
    }
    return value;
}

double mutual_info(const JointTable& t, const VarSet& a, const VarSet& b,
                   const VarSet& given) {
    const auto a_idx = resolve(t, a);
    const auto b_idx = resolve(t, b);
    const auto g_idx = resolve(t, given);
    require_disjoint(a_idx, b_idx, "mutual_info(a, b)");
    require_disjoint(a_idx, g_idx, "mutual_info(a, given)");
    require_disjoint(b_idx, g_idx, "mutual_info(b, given)");
    if (a.empty() || b.empty()) return 0.0;

    VarSet all = a;
    all.insert(all.end(), b.begin(), b.end());
    all.insert(all.end(), given.begin(), given.end());
    const JointTable tm = marginalize(t, all);

    VarSet ag = a, bg = b;
    ag.insert(ag.end(), given.begin(), given.end());
    bg.insert(bg.end(), given.begin(), given.end());
    const auto pra = make_projection(tm, mask_of(tm, resolve(tm, ag)));
    const auto prb = make_projection(tm, mask_of(tm, resolve(tm, bg)));
    const auto prg = make_projection(tm, mask_of(tm, resolve(tm, given)));
    const Eigen::ArrayXd pa = project_sums(tm, pra);
    const Eigen::ArrayXd pb = project_sums(tm, prb);
    const Eigen::ArrayXd pg = project_sums(tm, prg);

    const int nv = tm.var_count();
    std::vector<int> coord(static_cast<std::size_t>(nv), 0);
    Eigen::Index ai = 0, bi = 0, gi = 0;
    NeumaierSum acc;
    for (Eigen::Index c = 0;; ++c) {
        const double p = tm.probs()[c];
        if (p > 0.0) acc.add(p * log2_pos(p * pg[gi] / (pa[ai] * pb[bi])));
        int k = nv - 1;
        for (; k >= 0; --k) {
            const auto ku = static_cast<std::size_t>(k);
            ++coord[ku];
            ai += pra.dstride[ku];
            bi += prb.dstride[ku];
            gi += prg.dstride[ku];
            if (coord[ku] < tm.vars()[ku].size) break;
            const auto span = static_cast<Eigen::Index>(tm.vars()[ku].size);
            ai -= span * pra.dstride[ku];
            bi -= span * prb.dstride[ku];
            gi -= span * prg.dstride[ku];
            coord[ku] = 0;
        }
        if (k < 0) break;
    }
    double value = acc.value();
    if (value < 0.0) {
        if (value < -kMiNoiseFloor)
            throw ConsistencyError("mutual information evaluated to " + std::to_string(value) +
                                   ", beyond the floating-point noise floor");
        value = 0.0;
    }
    return value;
}

Eigen::ArrayXd sample_simplex(int dim, double concentration, std::mt19937_64& rng) {
    if (dim < 1) throw ConfigError("simplex dimension must be >= 1");
    if (!(concentration > 0.0)) throw ConfigError("concentration must be > 0");
    Eigen::ArrayXd v(dim);
    if (dim == 1) {
        v[0] = 1.0;
        return v;
    }
    std::gamma_distribution<double> gamma(concentration, 1.0);
    NeumaierSum total;
    for (int k = 0; k < dim; ++k) {
        v[k] = gamma(rng);
        total.add(v[k]);
    }
    if (!(total.value() > 0.0)) {
        v.setConstant(1.0 / dim);  // all draws underflowed; fall back to the centroid
        return v;
    }
    v /= total.value();
    NeumaierSum again;
    for (int k = 0; k < dim; ++k) again.add(v[k]);
    v /= again.value();
    return v;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t counter) {
    return std::mt19937_64(mix_seed(seed, counter));
}

}  // namespace macfb
