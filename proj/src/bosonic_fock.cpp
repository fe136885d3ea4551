#include "decoupler/bosonic_fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace decoupler {

namespace {

void enumerate_strings(int n_modes, const Truncation& trunc, OccupationString& current,
                       int used_photons, std::vector<OccupationString>& out) {
    if (static_cast<int>(current.size()) == n_modes) {
        out.push_back(current);
        return;
    }
    const int cap = trunc.kind == Truncation::Kind::PerMode ? trunc.limit
                                                            : trunc.limit - used_photons;
    for (int n = 0; n <= cap; ++n) {
        current.push_back(n);
        enumerate_strings(n_modes, trunc, current, used_photons + n, out);
        current.pop_back();
    }
}

} // namespace

FockRegister::FockRegister(int n_modes, Truncation truncation)
    : n_modes_(n_modes), truncation_(truncation) {
    if (n_modes < 1) throw std::invalid_argument("FockRegister: n_modes must be >= 1");
    if (truncation.limit < 0) throw std::invalid_argument("FockRegister: truncation must be >= 0");
    pack_bits_ = std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(truncation.limit))));
    if (pack_bits_ * n_modes > 64)
        throw std::invalid_argument("FockRegister: register too large to index");
    OccupationString current;
    current.reserve(n_modes);
    enumerate_strings(n_modes, truncation, current, 0, basis_);
    lookup_.reserve(basis_.size());
    for (std::size_t i = 0; i < basis_.size(); ++i)
        lookup_.emplace(pack(basis_[i]), static_cast<std::int64_t>(i));
}

std::uint64_t FockRegister::pack(const OccupationString& occ) const {
    std::uint64_t key = 0;
    for (int n : occ) key = (key << pack_bits_) | static_cast<std::uint64_t>(n);
    return key;
}

const OccupationString& FockRegister::occupation(std::int64_t index) const {
    if (index < 0 || index >= dim()) throw std::invalid_argument("FockRegister: index out of range");
    return basis_[static_cast<std::size_t>(index)];
}

std::optional<std::int64_t> FockRegister::find(const OccupationString& occ) const {
    if (static_cast<int>(occ.size()) != n_modes_) return std::nullopt;
    for (int n : occ)
        if (n < 0 || n > truncation_.limit) return std::nullopt;
    auto it = lookup_.find(pack(occ));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::int64_t FockRegister::index_of(const OccupationString& occ) const {
    auto idx = find(occ);
    if (!idx) throw std::invalid_argument("FockRegister: occupation string not in basis");
    return *idx;
}

int FockRegister::total_photons(std::int64_t index) const {
    const auto& occ = occupation(index);
    return std::accumulate(occ.begin(), occ.end(), 0);
}

std::vector<OccupationString> enumerate_fixed_total(int n_modes, int total) {
    if (n_modes < 1 || total < 0)
        throw std::invalid_argument("enumerate_fixed_total: invalid arguments");
    std::vector<OccupationString> out;
    OccupationString current;
    // Depth-first with the exact remaining budget forced onto the last mode.
    auto rec = [&](auto&& self, int mode, int remaining) -> void {
        if (mode == n_modes - 1) {
            current.push_back(remaining);
            out.push_back(current);
            current.pop_back();
            return;
        }
        for (int n = 0; n <= remaining; ++n) {
            current.push_back(n);
            self(self, mode + 1, remaining - n);
            current.pop_back();
        }
    };
    rec(rec, 0, total);
    return out;
}

DiagonalModeDistribution make_mode_distribution(std::vector<double> probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("DiagonalModeDistribution: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument("DiagonalModeDistribution: probabilities must sum to 1");
    return DiagonalModeDistribution{std::move(probs)};
}

PureState tmss_state(double r, int cutoff, bool renormalized) {
    if (r < 0.0) throw std::invalid_argument("tmss_state: squeeze strength must be >= 0");
    if (cutoff < 0) throw std::invalid_argument("tmss_state: cutoff must be >= 0");
    const int d = cutoff + 1;
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(d) * d);
    const double t = std::tanh(r);
    double c_n = 1.0 / std::cosh(r);
    for (int n = 0; n < d; ++n) {
        amps(static_cast<Eigen::Index>(n) * d + n) = c_n;
        c_n *= t;
    }
    HilbertSpec spec({d, d});
    if (!renormalized) return PureState{std::move(amps), std::move(spec)}; // raw: norm <= 1
    amps /= amps.norm();
    return make_pure(std::move(amps), std::move(spec));
}

double tmss_norm_deficit(double r, int cutoff) {
    const double t2 = std::tanh(r) * std::tanh(r);
    return std::pow(t2, cutoff + 1);
}

double tmss_entanglement(double r) {
    if (r < 0.0) throw std::invalid_argument("tmss_entanglement: squeeze strength must be >= 0");
    if (r == 0.0) return 0.0;
    const double ch2 = std::cosh(r) * std::cosh(r);
    const double sh2 = std::sinh(r) * std::sinh(r);
    return ch2 * std::log2(ch2) - sh2 * std::log2(sh2);
}

double thermal_entropy(double n_bar) {
    if (n_bar < 0.0) throw std::invalid_argument("thermal_entropy: mean photon number must be >= 0");
    if (n_bar == 0.0) return 0.0;
    return (n_bar + 1.0) * std::log2(n_bar + 1.0) - n_bar * std::log2(n_bar);
}

std::vector<double> thermal_probs(double n_bar, int cutoff, bool renormalized) {
    if (n_bar < 0.0) throw std::invalid_argument("thermal_probs: mean photon number must be >= 0");
    if (cutoff < 0) throw std::invalid_argument("thermal_probs: cutoff must be >= 0");
    std::vector<double> probs(static_cast<std::size_t>(cutoff) + 1, 0.0);
    const double ratio = n_bar / (n_bar + 1.0);
    double p = 1.0 / (n_bar + 1.0);
    for (int n = 0; n <= cutoff; ++n) {
        probs[static_cast<std::size_t>(n)] = p;
        p *= ratio;
    }
    if (renormalized) {
        const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
        for (double& q : probs) q /= sum;
    }
    return probs;
}

DensityOperator thermal_state(double n_bar, int cutoff, bool renormalized) {
    auto probs = thermal_probs(n_bar, cutoff, renormalized);
    const int d = cutoff + 1;
    Matrix m = Matrix::Zero(d, d);
    for (int n = 0; n < d; ++n) m(n, n) = probs[static_cast<std::size_t>(n)];
    DensityOperator rho{std::move(m), HilbertSpec({d})};
    if (renormalized) validate_density(rho);
    return rho;
}

double effective_dimension(const DensityOperator& rho) {
    return std::exp2(von_neumann_entropy(rho));
}

double r0_from(int k_pairs, int n_modes, double r) {
    if (k_pairs < 1 || k_pairs > n_modes)
        throw std::invalid_argument("r0_from: require 1 <= K <= N");
    if (r < 0.0) throw std::invalid_argument("r0_from: squeeze strength must be >= 0");
    const double sh2 = std::sinh(r) * std::sinh(r);
    return std::asinh(std::sqrt(static_cast<double>(k_pairs) * sh2 / n_modes));
}

Matrix dephase(const Matrix& rho, const FockRegister& reg, std::optional<int> mode) {
    const auto d = reg.dim();
    if (rho.rows() != d || rho.cols() != d)
        throw std::invalid_argument("dephase: matrix does not match register dimension");
    if (mode && (*mode < 0 || *mode >= reg.n_modes()))
        throw std::invalid_argument("dephase: mode index out of range");
    Matrix out = Matrix::Zero(d, d);
    for (std::int64_t i = 0; i < d; ++i) {
        const auto& si = reg.occupation(i);
        for (std::int64_t j = 0; j < d; ++j) {
            const auto& sj = reg.occupation(j);
            const bool keep = mode ? si[static_cast<std::size_t>(*mode)] ==
                                         sj[static_cast<std::size_t>(*mode)]
                                   : si == sj;
            if (keep) out(i, j) = rho(i, j);
        }
    }
    return out;
}

DensityOperator dephase(const DensityOperator& rho, const FockRegister& reg,
                        std::optional<int> mode) {
    return make_density(dephase(rho.matrix, reg, mode), rho.spec);
}

TypicalProjector typical_projector(const TypicalSubspaceSpec& spec, const FockRegister& reg) {
    if (spec.delta < 0.0) throw std::invalid_argument("typical_projector: delta must be >= 0");
    if (spec.n_modes != reg.n_modes())
        throw std::invalid_argument("typical_projector: mode count does not match register");
    const auto& p = spec.base.probs;
    const double h = shannon_entropy_bits(p);

    TypicalProjector result;
    result.base_entropy = h;
    result.total_probability = 0.0;
    for (std::int64_t i = 0; i < reg.dim(); ++i) {
        const auto& occ = reg.occupation(i);
        double log_prob = 0.0;
        double string_prob = 1.0;
        bool supported = true;
        for (int n : occ) {
            const double pn = static_cast<std::size_t>(n) < p.size() ? p[static_cast<std::size_t>(n)] : 0.0;
            if (pn <= 0.0) {
                supported = false; // log2(0) = -inf: never typical
                break;
            }
            log_prob += std::log2(pn);
            string_prob *= pn;
        }
        if (!supported) continue;
        const double empirical = -log_prob / spec.n_modes;
        if (std::abs(empirical - h) <= spec.delta) {
            result.basis_indices.push_back(i);
            result.total_probability += string_prob;
        }
    }
    result.dim = static_cast<std::int64_t>(result.basis_indices.size());
    if (result.dim == 0) {
        std::ostringstream msg;
        msg << "typical_projector: empty typical set (N=" << spec.n_modes
            << ", delta=" << spec.delta << ", H=" << h << ")";
        throw std::runtime_error(msg.str());
    }
    return result;
}

std::pair<Matrix, FockRegister> fock_partial_trace(const Matrix& rho, const FockRegister& reg,
                                                   std::span<const std::size_t> keep_modes) {
    const auto d = reg.dim();
    if (rho.rows() != d || rho.cols() != d)
        throw std::invalid_argument("fock_partial_trace: matrix does not match register");
    std::vector<std::size_t> keep(keep_modes.begin(), keep_modes.end());
    std::sort(keep.begin(), keep.end());
    if (keep.empty() || std::adjacent_find(keep.begin(), keep.end()) != keep.end())
        throw std::invalid_argument("fock_partial_trace: keep set must be nonempty and distinct");
    for (auto k : keep)
        if (k >= static_cast<std::size_t>(reg.n_modes()))
            throw std::invalid_argument("fock_partial_trace: mode index out of range");
    std::vector<std::size_t> traced;
    for (std::size_t m = 0; m < static_cast<std::size_t>(reg.n_modes()); ++m)
        if (!std::binary_search(keep.begin(), keep.end(), m)) traced.push_back(m);

    FockRegister out_reg(static_cast<int>(keep.size()), reg.truncation());
    FockRegister traced_reg(std::max<int>(1, static_cast<int>(traced.size())), reg.truncation());

    // (kept substring, traced substring) coordinates of every basis string.
    std::vector<std::int64_t> kept_of(static_cast<std::size_t>(d));
    std::vector<std::int64_t> traced_of(static_cast<std::size_t>(d));
    OccupationString sub_keep(keep.size()), sub_traced(std::max<std::size_t>(1, traced.size()), 0);
    for (std::int64_t i = 0; i < d; ++i) {
        const auto& occ = reg.occupation(i);
        for (std::size_t k = 0; k < keep.size(); ++k) sub_keep[k] = occ[keep[k]];
        for (std::size_t k = 0; k < traced.size(); ++k) sub_traced[k] = occ[traced[k]];
        kept_of[static_cast<std::size_t>(i)] = out_reg.index_of(sub_keep);
        traced_of[static_cast<std::size_t>(i)] =
            traced.empty() ? 0 : traced_reg.index_of(sub_traced);
    }

    Matrix out = Matrix::Zero(out_reg.dim(), out_reg.dim());
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j)
            if (traced_of[static_cast<std::size_t>(i)] == traced_of[static_cast<std::size_t>(j)])
                out(kept_of[static_cast<std::size_t>(i)], kept_of[static_cast<std::size_t>(j)]) +=
                    rho(i, j);
    return {std::move(out), std::move(out_reg)};
}

std::vector<double> mode_marginal_from_probs(std::span<const double> probs,
                                             const FockRegister& reg, int mode) {
    if (static_cast<std::int64_t>(probs.size()) != reg.dim())
        throw std::invalid_argument("mode_marginal_from_probs: probability vector size mismatch");
    if (mode < 0 || mode >= reg.n_modes())
        throw std::invalid_argument("mode_marginal_from_probs: mode index out of range");
    std::vector<double> marginal(static_cast<std::size_t>(reg.max_occupancy()) + 1, 0.0);
    for (std::int64_t i = 0; i < reg.dim(); ++i)
        marginal[static_cast<std::size_t>(reg.occupation(i)[static_cast<std::size_t>(mode)])] +=
            probs[static_cast<std::size_t>(i)];
    return marginal;
}

} // namespace decoupler
