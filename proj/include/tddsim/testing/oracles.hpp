#ifndef TDDSIM_TESTING_ORACLES_HPP
#define TDDSIM_TESTING_ORACLES_HPP

// Brute-force reference computations. Deliberately written without reusing
// any library routine they are meant to check.

#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace tddsim::oracle {

/// I0 by its plain power series in long double, no scaling.
inline long double bessel_i0(long double x)
{
    long double sum = 0.0L;
    long double term = 1.0L; // (x/2)^k / k!
    for (int k = 0; k < 2000; ++k) {
        if (k > 0) term *= (x / 2.0L) / k;
        const long double t2 = term * term;
        sum += t2;
        if (k > 12 && t2 < sum * 1e-22L) break;
    }
    return sum;
}

inline double kaiser_weight(int l, int L, double beta)
{
    if (L == 0) return 1.0;
    const long double r = static_cast<long double>(l) / L;
    return static_cast<double>(bessel_i0(beta * std::sqrt(1.0L - r * r)) / bessel_i0(beta));
}

/// Per-slot buffered (DL, UL) bits of one cell over one frame.
using CellFrame = std::vector<std::pair<double, double>>;

/// Ratio -> frame average -> selection sort by distance -> window -> weighted
/// mean. Returns nullopt when no cell had any traffic.
inline std::optional<double> cluster_theta(const std::vector<CellFrame>& z, double beta, double balance = 0.5)
{
    const int C = static_cast<int>(z.size());
    std::vector<double> mu(C, balance);
    bool any = false;
    for (int c = 0; c < C; ++c) {
        double sum = 0.0;
        int n = 0;
        for (auto [dl, ul] : z[c]) {
            if (dl + ul > 0) {
                sum += dl / (dl + ul);
                ++n;
            }
        }
        if (n > 0) {
            mu[c] = sum / n;
            any = true;
        }
    }
    if (!any) return std::nullopt;

    std::vector<bool> taken(C, false);
    std::vector<double> psi;
    for (int k = 0; k < C; ++k) {
        int best = -1;
        for (int c = 0; c < C; ++c) {
            if (taken[c]) continue;
            if (best < 0 || std::fabs(mu[c] - balance) > std::fabs(mu[best] - balance)) best = c;
        }
        taken[best] = true;
        psi.push_back(mu[best]);
    }
    long double num = 0.0L, den = 0.0L;
    for (int l = 0; l < C; ++l) {
        const double w = kaiser_weight(l, C - 1, beta);
        num += psi[l] * static_cast<long double>(w);
        den += w;
    }
    return static_cast<double>(num / den);
}

/// Nearest DL fraction; exact ties resolve to the larger one.
inline int nearest_fraction(double theta, const std::vector<double>& fractions)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(fractions.size()); ++i) {
        const double a = std::fabs(fractions[i] - theta);
        const double b = std::fabs(fractions[best] - theta);
        if (a < b || std::fabs(a - b) <= 1e-12) best = i;
    }
    return best;
}

/// MMSE SINR for a 2-antenna receiver, one interferer, via the explicit
/// 2x2 inverse of R = N I + p_i g g^H.
inline double mmse_sinr_2x2(std::complex<double> h0, std::complex<double> h1, double p, std::complex<double> g0,
                            std::complex<double> g1, double p_i, double noise)
{
    const double r00 = noise + p_i * std::norm(g0);
    const double r11 = noise + p_i * std::norm(g1);
    const std::complex<double> r01 = p_i * g0 * std::conj(g1);
    const double det = r00 * r11 - std::norm(r01);
    // h^H R^-1 h with R^-1 = [r11 -r01; -conj(r01) r00] / det
    const std::complex<double> q =
        std::conj(h0) * (r11 * h0 - r01 * h1) + std::conj(h1) * (-std::conj(r01) * h0 + r00 * h1);
    return p * q.real() / det;
}

inline double eesm(const std::vector<double>& gamma, double beta)
{
    long double s = 0.0L;
    for (double g : gamma) s += std::exp(-static_cast<long double>(g) / beta);
    return static_cast<double>(-beta * std::log(s / gamma.size()));
}

} // namespace tddsim::oracle

#endif // TDDSIM_TESTING_ORACLES_HPP
