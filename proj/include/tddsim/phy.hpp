#ifndef TDDSIM_PHY_HPP
#define TDDSIM_PHY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tddsim/random.hpp"

namespace tddsim {

using Complex = std::complex<double>;
constexpr int kMaxAntennas = 8;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAntennas, kMaxAntennas>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxAntennas, 1>;

/// rows x cols i.i.d. CN(0, gain) entries.
inline CMatrix draw_channel(Rng& rng, int rows, int cols, double gain)
{
    CMatrix h(rows, cols);
    if (gain <= 0.0) {
        h.setZero();
        return h;
    }
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) h(r, c) = complex_gaussian(rng, gain);
    }
    return h;
}

inline CVector draw_vector(Rng& rng, int n, double gain)
{
    CVector v(n);
    for (int i = 0; i < n; ++i) v(i) = gain > 0.0 ? complex_gaussian(rng, gain) : Complex{};
    return v;
}

/// Channel matrices of one TTI. DL/UL are reciprocal views of the same pair;
/// G and Q are the UE-UE and BS-BS cross-link channels.
struct LinkRealization {
    CMatrix h_dl; ///< M_r x N_t, BS -> UE
    CMatrix h_ul; ///< N_t x M_r, UE -> BS
    CMatrix g;    ///< M_r x M_r, UE -> UE
    CMatrix q;    ///< N_t x N_t, BS -> BS
};

inline LinkRealization draw_link_realization(Rng& rng, int n_t, int m_r, double gain_bs_ue, double gain_ue_ue,
                                             double gain_bs_bs)
{
    LinkRealization l;
    l.h_dl = draw_channel(rng, m_r, n_t, gain_bs_ue);
    l.h_ul = draw_channel(rng, n_t, m_r, gain_bs_ue);
    l.g = draw_channel(rng, m_r, m_r, gain_ue_ue);
    l.q = draw_channel(rng, n_t, n_t, gain_bs_bs);
    return l;
}

/// Dominant right singular vector of `h`, unit norm, first nonzero entry real.
inline CVector precode(const CMatrix& h)
{
    if (h.size() == 0 || h.squaredNorm() == 0.0) throw std::invalid_argument("precode: channel is all zero");
    CVector v;
    if (h.rows() < h.cols()) {
        // Eigenvector of the smaller Gram matrix H H^H, mapped back through H^H.
        const CMatrix gram = h * h.adjoint();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
        const CVector u = es.eigenvectors().col(gram.rows() - 1);
        v = h.adjoint() * u;
    } else {
        const CMatrix gram = h.adjoint() * h;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
        v = es.eigenvectors().col(gram.rows() - 1);
    }
    v.normalize();
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
        }
    }
    return v;
}

enum class InterferenceClass { SameLink, CrossLink };
enum class TddMode { Aligned, Flexible };

/// Interferer as seen at the receiver: channel times the interferer's own
/// precoder, plus its transmit power.
struct Interferer {
    CVector h;
    double power = 0.0;
    InterferenceClass kind = InterferenceClass::SameLink;
};

struct ReceiverOutput {
    double sinr = 0.0;
    CVector u; ///< unit-norm combiner
    double same_link = 0.0;
    double cross_link = 0.0;
    double noise = 0.0;
    bool regularized = false;

    double interference_plus_noise() const { return same_link + cross_link + noise; }
};

/// LMMSE-IRC: u = R^-1 h with R the interference-plus-noise covariance.
/// Aligned mode refuses cross-link interferers.
inline ReceiverOutput post_sinr(const CVector& h, double power, std::span<const Interferer> interferers, TddMode mode,
                                double noise_power)
{
    const int m = static_cast<int>(h.size());
    if (m == 0) throw std::invalid_argument("post_sinr: empty serving channel");
    CMatrix r = CMatrix::Identity(m, m) * noise_power;
    for (const auto& i : interferers) {
        if (i.kind == InterferenceClass::CrossLink && mode == TddMode::Aligned) {
            throw std::logic_error("post_sinr: cross-link interferer under aligned TDD");
        }
        if (i.h.size() != m) throw std::invalid_argument("post_sinr: interferer dimension mismatch");
        r.noalias() += i.power * (i.h * i.h.adjoint());
    }

    ReceiverOutput out;
    Eigen::LDLT<CMatrix> ldlt(r);
    const double scale = std::max(r.trace().real(), power * h.squaredNorm());
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().real().minCoeff() <= 1e-14 * scale) {
        r += CMatrix::Identity(m, m) * (1e-12 * scale);
        ldlt.compute(r);
        out.regularized = true;
    }
    CVector u = ldlt.solve(h);
    if (u.squaredNorm() == 0.0) u = h;
    u.normalize();
    out.u = u;

    out.noise = noise_power;
    for (const auto& i : interferers) {
        const double p = i.power * std::norm(u.dot(i.h));
        (i.kind == InterferenceClass::SameLink ? out.same_link : out.cross_link) += p;
    }
    const double signal = power * std::norm(u.dot(h));
    const double denom = out.interference_plus_noise();
    out.sinr = denom > 0.0 ? signal / denom : std::numeric_limits<double>::infinity();
    return out;
}

/// Interferer given as a full channel matrix and its precoder.
struct MatrixInterferer {
    CMatrix h;
    CVector v;
    double power = 0.0;
    InterferenceClass kind = InterferenceClass::SameLink;
};

inline ReceiverOutput post_sinr(const CMatrix& h, const CVector& v, double power,
                                std::span<const MatrixInterferer> interferers, TddMode mode, double noise_power)
{
    std::vector<Interferer> eff;
    eff.reserve(interferers.size());
    for (const auto& i : interferers) eff.push_back({i.h * i.v, i.power, i.kind});
    return post_sinr(h * v, power, eff, mode, noise_power);
}

/// Exponential effective SINR mapping over linear per-PRB SINRs.
inline double effective_sinr(std::span<const double> gamma, double beta = 1.0)
{
    if (gamma.empty()) throw std::invalid_argument("effective_sinr: no PRBs");
    if (!(beta > 0.0)) throw std::invalid_argument("effective_sinr: beta must be > 0");
    const double lo = *std::min_element(gamma.begin(), gamma.end());
    if (std::isinf(lo)) return lo;
    // -beta ln(mean exp(-g/beta)), shifted by the minimum for stability.
    double s = 0.0;
    for (double g : gamma) s += std::exp(-(g - lo) / beta);
    return lo - beta * std::log(s / static_cast<double>(gamma.size()));
}

// Modulation and coding ------------------------------------------------------

struct Mcs {
    int bits_per_symbol = 2;
    double code_rate = 0.5;
    double threshold_db = 0.0;
    double eesm_beta = 1.0;

    double spectral_efficiency() const { return bits_per_symbol * code_rate; }
};

class McsTable {
public:
    McsTable() : McsTable(2.0, 1.0) {}

    /// Thresholds sit `gap_db` above the Shannon SNR for each efficiency.
    McsTable(double gap_db, double eesm_beta)
    {
        static constexpr std::array<std::pair<int, double>, 15> entries = {{
            {2, 0.125}, {2, 0.2}, {2, 0.3}, {2, 0.45}, {2, 0.6}, {2, 0.75},
            {4, 0.475}, {4, 0.6}, {4, 0.675},
            {6, 0.55}, {6, 0.65}, {6, 0.75}, {6, 0.85},
            {8, 0.75}, {8, 0.9},
        }};
        for (auto [q, rate] : entries) {
            Mcs m{q, rate, 0.0, eesm_beta};
            m.threshold_db = 10.0 * std::log10(std::exp2(m.spectral_efficiency()) - 1.0) + gap_db;
            table_.push_back(m);
        }
    }

    int size() const { return static_cast<int>(table_.size()); }
    const Mcs& operator[](int i) const { return table_.at(i); }

    /// Highest entry whose threshold does not exceed `sinr_db`; lowest otherwise.
    int select(double sinr_db) const
    {
        int best = 0;
        for (int i = 0; i < size(); ++i) {
            if (table_[i].threshold_db <= sinr_db) best = i;
        }
        return best;
    }

    int bits(int mcs, int prbs, int re_per_prb) const
    {
        return static_cast<int>(std::floor(table_.at(mcs).spectral_efficiency() * re_per_prb * prbs + 1e-9));
    }

private:
    std::vector<Mcs> table_;
};

/// Chase combining: linear SINR adds across attempts.
inline double chase_combine(double gamma_sum, double gamma_eff) { return gamma_sum + gamma_eff; }

/// Block decodes iff the combined SINR clears the MCS threshold plus a
/// Gaussian decoding margin.
inline bool decode(double gamma_sum, const Mcs& mcs, double margin_sigma_db, Rng& rng)
{
    const double margin = margin_sigma_db > 0.0 ? margin_sigma_db * standard_normal(rng) : 0.0;
    if (gamma_sum <= 0.0) return false;
    return 10.0 * std::log10(gamma_sum) >= mcs.threshold_db + margin;
}

} // namespace tddsim

#endif // TDDSIM_PHY_HPP
