#ifndef TDDSIM_COMMON_HPP
#define TDDSIM_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tddsim {

enum class Direction { Dl = 0, Ul = 1 };

constexpr int index(Direction d) noexcept { return static_cast<int>(d); }
constexpr Direction opposite(Direction d) noexcept { return d == Direction::Dl ? Direction::Ul : Direction::Dl; }

inline std::string_view to_string(Direction d) noexcept { return d == Direction::Dl ? "DL" : "UL"; }

constexpr int kSymbolsPerSlot = 14;
constexpr int kTtiSymbols = 4;
constexpr double kFrameMs = 10.0;

/// OFDM numerology derived from the subcarrier spacing.
struct Numerology {
    double scs_hz = 30e3;

    double slot_ms() const { return 15e3 / scs_hz; }
    double symbol_ms() const { return slot_ms() / kSymbolsPerSlot; }
    int slots_per_frame() const { return static_cast<int>(std::lround(kFrameMs / slot_ms())); }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }

} // namespace tddsim

#endif // TDDSIM_COMMON_HPP
