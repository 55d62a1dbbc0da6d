#ifndef TDDSIM_TOPOLOGY_HPP
#define TDDSIM_TOPOLOGY_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "tddsim/common.hpp"
#include "tddsim/random.hpp"
#include "tddsim/scenario.hpp"

namespace tddsim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Node ids: cells occupy [0, cell_count), UEs follow.
using NodeId = int;

struct UeInfo {
    Point position;
    Direction direction = Direction::Dl;
    int home_cell = 0;    ///< cell whose area the UE was dropped in (selects its offered load)
    int serving_cell = 0; ///< strongest-gain cell
};

class Topology {
public:
    std::vector<Point> cells;
    std::vector<Point> sites;
    std::vector<UeInfo> ues;

    int cell_count() const { return static_cast<int>(cells.size()); }
    int ue_count() const { return static_cast<int>(ues.size()); }
    int node_count() const { return cell_count() + ue_count(); }
    NodeId cell_node(int c) const { return c; }
    NodeId ue_node(int u) const { return cell_count() + u; }

    /// Large-scale gain in dB (negative path loss plus shadowing), symmetric.
    double gain_db(NodeId a, NodeId b) const { return gain_db_[static_cast<std::size_t>(a) * node_count() + b]; }
    double gain_linear(NodeId a, NodeId b) const { return gain_lin_[static_cast<std::size_t>(a) * node_count() + b]; }

    /// UEs served by `cell` in direction `d`, ascending id.
    const std::vector<int>& served(int cell, Direction d) const { return served_[cell][index(d)]; }

    void set_gain(NodeId a, NodeId b, double db)
    {
        const std::size_t n = node_count();
        gain_db_[a * n + b] = gain_db_[b * n + a] = db;
        gain_lin_[a * n + b] = gain_lin_[b * n + a] = db_to_linear(db);
    }

    void allocate_gains()
    {
        const std::size_t n = node_count();
        gain_db_.assign(n * n, 0.0);
        gain_lin_.assign(n * n, 1.0);
    }

    void index_serving()
    {
        served_.assign(cells.size(), {});
        for (int u = 0; u < ue_count(); ++u) {
            served_[ues[u].serving_cell][index(ues[u].direction)].push_back(u);
        }
    }

private:
    std::vector<double> gain_db_;
    std::vector<double> gain_lin_;
    std::vector<std::array<std::vector<int>, 2>> served_;
};

namespace detail {

/// Site centres on hexagonal rings around the origin: 1, 6, 12, ...
inline std::vector<Point> hex_sites(int count, double isd)
{
    std::vector<Point> out{{0.0, 0.0}};
    // Axial directions of the six neighbours.
    const int dq[6] = {1, 0, -1, -1, 0, 1};
    const int dr[6] = {0, 1, 1, 0, -1, -1};
    auto to_xy = [isd](int q, int r) {
        return Point{isd * (q + 0.5 * r), isd * (std::sqrt(3.0) / 2.0) * r};
    };
    for (int ring = 1; static_cast<int>(out.size()) < count; ++ring) {
        int q = dq[4] * ring;
        int r = dr[4] * ring;
        for (int side = 0; side < 6; ++side) {
            for (int step = 0; step < ring; ++step) {
                out.push_back(to_xy(q, r));
                q += dq[side];
                r += dr[side];
            }
        }
    }
    out.resize(count);
    return out;
}

/// Sector polygon (site-relative) for a hexagon whose neighbours sit at
/// multiples of 60 degrees. Sector k points at 120k degrees.
inline std::vector<Point> sector_polygon(int sector, int sectors, double isd)
{
    const double apothem = isd / 2.0;
    const double radius = isd / std::sqrt(3.0);
    auto at = [](double r, double deg) {
        const double a = deg * std::numbers::pi / 180.0;
        return Point{r * std::cos(a), r * std::sin(a)};
    };
    std::vector<Point> poly;
    if (sectors == 1) {
        for (int k = 0; k < 6; ++k) poly.push_back(at(radius, 30.0 + 60.0 * k));
        return poly;
    }
    const double boresight = 120.0 * sector;
    poly.push_back({0.0, 0.0});
    poly.push_back(at(apothem, boresight - 60.0));
    poly.push_back(at(radius, boresight - 30.0));
    poly.push_back(at(radius, boresight + 30.0));
    poly.push_back(at(apothem, boresight + 60.0));
    return poly;
}

inline Point polygon_centroid(const std::vector<Point>& p)
{
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Point& u = p[i];
        const Point& v = p[(i + 1) % p.size()];
        const double cross = u.x * v.y - v.x * u.y;
        a += cross;
        cx += (u.x + v.x) * cross;
        cy += (u.y + v.y) * cross;
    }
    a *= 0.5;
    return {cx / (6.0 * a), cy / (6.0 * a)};
}

inline bool inside_polygon(const std::vector<Point>& poly, Point q)
{
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if (((poly[i].y > q.y) != (poly[j].y > q.y)) &&
            (q.x < (poly[j].x - poly[i].x) * (q.y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)) {
            in = !in;
        }
    }
    return in;
}

/// Free-space loss at the reference distance, then log-distance decay.
inline double pathloss_db(double d, double exponent, double ref_m, double carrier_hz)
{
    const double fspl_ref = 20.0 * std::log10(ref_m) + 20.0 * std::log10(carrier_hz) - 147.55;
    return fspl_ref + 10.0 * exponent * std::log10(std::max(d, ref_m) / ref_m);
}

} // namespace detail

/// Hex-grid layout with sector cells collapsed to omni cells at sector
/// centroids, UEs uniform in their home sector, and frozen log-normal
/// shadowing. Deterministic in (scenario, rng state).
inline Topology build_topology(const Scenario& s, Rng& rng)
{
    Topology t;
    const int sites = (s.cell_count + s.sectors_per_site - 1) / s.sectors_per_site;
    t.sites = detail::hex_sites(sites, s.inter_site_distance_m);

    std::vector<std::vector<Point>> areas;
    std::vector<int> cell_site;
    for (int c = 0; c < s.cell_count; ++c) {
        const int site = c / s.sectors_per_site;
        const int sector = c % s.sectors_per_site;
        auto poly = detail::sector_polygon(sector, s.sectors_per_site, s.inter_site_distance_m);
        const Point centroid = s.sectors_per_site == 1 ? Point{} : detail::polygon_centroid(poly);
        t.cells.push_back({t.sites[site].x + centroid.x, t.sites[site].y + centroid.y});
        areas.push_back(std::move(poly));
        cell_site.push_back(site);
    }

    const double bound = s.inter_site_distance_m / std::sqrt(3.0);
    std::uniform_real_distribution<double> coord(-bound, bound);
    for (int c = 0; c < s.cell_count; ++c) {
        for (Direction d : {Direction::Dl, Direction::Ul}) {
            const int k = d == Direction::Dl ? s.ue_per_cell_dl : s.ue_per_cell_ul;
            for (int i = 0; i < k; ++i) {
                Point q;
                do {
                    q = {coord(rng), coord(rng)};
                } while (!detail::inside_polygon(areas[c], q) || std::hypot(q.x, q.y) < s.pathloss_ref_m);
                const Point site = t.sites[cell_site[c]];
                t.ues.push_back({{site.x + q.x, site.y + q.y}, d, c, c});
            }
        }
    }

    t.allocate_gains();
    const int n = t.node_count();
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const bool a_cell = a < t.cell_count();
            const bool b_cell = b < t.cell_count();
            const Point pa = a_cell ? t.cells[a] : t.ues[a - t.cell_count()].position;
            const Point pb = b_cell ? t.cells[b] : t.ues[b - t.cell_count()].position;
            double exponent = s.pathloss_exponent;
            if (a_cell && b_cell) exponent = s.bs_bs_pathloss_exponent;
            if (!a_cell && !b_cell) exponent = s.ue_ue_pathloss_exponent;
            const double pl = detail::pathloss_db(distance(pa, pb), exponent, s.pathloss_ref_m, s.carrier_freq_hz);
            t.set_gain(a, b, -pl + s.shadowing_sigma_db * standard_normal(rng));
        }
    }

    for (int u = 0; u < t.ue_count(); ++u) {
        int best = 0;
        for (int c = 1; c < t.cell_count(); ++c) {
            if (t.gain_db(c, t.ue_node(u)) > t.gain_db(best, t.ue_node(u))) best = c;
        }
        t.ues[u].serving_cell = best;
    }
    t.index_serving();
    return t;
}

} // namespace tddsim

#endif // TDDSIM_TOPOLOGY_HPP
