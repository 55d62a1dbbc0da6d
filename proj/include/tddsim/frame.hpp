#ifndef TDDSIM_FRAME_HPP
#define TDDSIM_FRAME_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tddsim/common.hpp"

namespace tddsim {

enum class Symbol : char { Downlink = 'D', Uplink = 'U', Flexible = 'F' };

/// One 4-symbol transmission opportunity inside a slot.
struct Block {
    int first_symbol = 0;
    Direction direction = Direction::Dl;

    int end_symbol() const { return first_symbol + kTtiSymbols; }
    bool operator==(const Block&) const = default;
};

class SlotFormat {
public:
    using Symbols = std::array<Symbol, kSymbolsPerSlot>;

    SlotFormat() { symbols_.fill(Symbol::Flexible); }
    explicit SlotFormat(const Symbols& symbols) : symbols_(symbols) {}

    /// Accepts "DDDDFUUUUDDDDF" with or without surrounding brackets.
    static SlotFormat parse(std::string_view text)
    {
        if (text.size() == kSymbolsPerSlot + 2 && text.front() == '[' && text.back() == ']') {
            text = text.substr(1, kSymbolsPerSlot);
        }
        if (text.size() != kSymbolsPerSlot) {
            throw std::invalid_argument("slot format needs exactly 14 symbols: " + std::string(text));
        }
        Symbols s{};
        for (int i = 0; i < kSymbolsPerSlot; ++i) {
            switch (text[i]) {
            case 'D': s[i] = Symbol::Downlink; break;
            case 'U': s[i] = Symbol::Uplink; break;
            case 'F': s[i] = Symbol::Flexible; break;
            default: throw std::invalid_argument("bad slot symbol '" + std::string(1, text[i]) + "'");
            }
        }
        return SlotFormat(s);
    }

    Symbol operator[](int i) const { return symbols_[i]; }
    const Symbols& symbols() const { return symbols_; }

    int count(Symbol s) const { return static_cast<int>(std::count(symbols_.begin(), symbols_.end(), s)); }

    /// TTIs carried by the slot, in time order. Runs of D or U are cut into
    /// consecutive 4-symbol blocks; a run that is not a multiple of 4 throws.
    std::vector<Block> blocks() const
    {
        std::vector<Block> out;
        int i = 0;
        while (i < kSymbolsPerSlot) {
            const Symbol s = symbols_[i];
            if (s == Symbol::Flexible) {
                ++i;
                continue;
            }
            int j = i;
            while (j < kSymbolsPerSlot && symbols_[j] == s) ++j;
            if ((j - i) % kTtiSymbols != 0) {
                throw std::logic_error("slot " + str() + " has a run not aligned to 4-symbol blocks");
            }
            for (int b = i; b < j; b += kTtiSymbols) {
                out.push_back({b, s == Symbol::Downlink ? Direction::Dl : Direction::Ul});
            }
            i = j;
        }
        return out;
    }

    std::string str() const
    {
        std::string s = "[";
        for (Symbol sym : symbols_) s.push_back(static_cast<char>(sym));
        s.push_back(']');
        return s;
    }

    bool operator==(const SlotFormat&) const = default;

private:
    Symbols symbols_;
};

/// Checks the block/guard rules: every D or U run is a whole number of
/// 4-symbol blocks and each D->U switch is preceded by at least one F.
/// U->D needs no guard.
inline bool satisfies_block_rules(const SlotFormat& slot)
{
    int i = 0;
    while (i < kSymbolsPerSlot) {
        const Symbol s = slot[i];
        int j = i;
        while (j < kSymbolsPerSlot && slot[j] == s) ++j;
        if (s != Symbol::Flexible && (j - i) % kTtiSymbols != 0) return false;
        if (s == Symbol::Downlink && j < kSymbolsPerSlot && slot[j] == Symbol::Uplink) return false;
        i = j;
    }
    return true;
}

inline SlotFormat build_slot_pattern(int dl_blocks, int ul_blocks)
{
    if (dl_blocks < 0 || ul_blocks < 0 || dl_blocks + ul_blocks < 1) {
        throw std::invalid_argument("slot needs at least one block");
    }
    // Alternate blocks, leading with the majority direction.
    std::vector<Direction> order;
    int d = dl_blocks, u = ul_blocks;
    Direction next = dl_blocks >= ul_blocks ? Direction::Dl : Direction::Ul;
    while (d + u > 0) {
        if (next == Direction::Dl && d == 0) next = Direction::Ul;
        if (next == Direction::Ul && u == 0) next = Direction::Dl;
        order.push_back(next);
        (next == Direction::Dl ? d : u) -= 1;
        next = opposite(next);
    }

    int needed = kTtiSymbols * static_cast<int>(order.size());
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        if (order[k] == Direction::Dl && order[k + 1] == Direction::Ul) ++needed;
    }
    if (needed > kSymbolsPerSlot) {
        throw std::length_error("(" + std::to_string(dl_blocks) + "," + std::to_string(ul_blocks) +
                                ") blocks do not fit in a 14-symbol slot");
    }

    SlotFormat::Symbols s{};
    s.fill(Symbol::Flexible);
    int pos = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Symbol sym = order[k] == Direction::Dl ? Symbol::Downlink : Symbol::Uplink;
        for (int n = 0; n < kTtiSymbols; ++n) s[pos++] = sym;
        if (k + 1 < order.size() && order[k] == Direction::Dl && order[k + 1] == Direction::Ul) {
            ++pos; // guard
        }
    }
    return SlotFormat(s);
}

/// DL:UL ratio label, e.g. 1:4.
struct RatioLabel {
    int dl = 1;
    int ul = 1;

    double dl_fraction() const { return static_cast<double>(dl) / (dl + ul); }
    std::string str() const { return std::to_string(dl) + ":" + std::to_string(ul); }
    bool operator==(const RatioLabel&) const = default;

    static RatioLabel parse(std::string_view text)
    {
        const auto colon = text.find(':');
        RatioLabel r{};
        if (colon == std::string_view::npos) throw std::invalid_argument("ratio must look like d:u");
        auto a = std::from_chars(text.data(), text.data() + colon, r.dl);
        auto b = std::from_chars(text.data() + colon + 1, text.data() + text.size(), r.ul);
        if (a.ec != std::errc{} || b.ec != std::errc{} || a.ptr != text.data() + colon ||
            b.ptr != text.data() + text.size()) {
            throw std::invalid_argument("ratio must look like d:u, got '" + std::string(text) + "'");
        }
        if (r.dl < 0 || r.ul < 0 || r.dl + r.ul == 0) {
            throw std::invalid_argument("ratio terms must be non-negative and not both zero");
        }
        return r;
    }
};

struct RadioFrameConfig {
    RatioLabel label;
    std::vector<SlotFormat> slots;
    int dl_symbols = 0;
    int ul_symbols = 0;
    int flexible_symbols = 0;

    double dl_fraction() const { return label.dl_fraction(); }
    int slot_count() const { return static_cast<int>(slots.size()); }

    std::string str() const
    {
        std::string s;
        for (const auto& slot : slots) s += slot.str();
        return s;
    }
};

namespace detail {

inline RadioFrameConfig tally(RatioLabel label, std::vector<SlotFormat> slots)
{
    RadioFrameConfig rfc{label, std::move(slots)};
    for (const auto& s : rfc.slots) {
        rfc.dl_symbols += s.count(Symbol::Downlink);
        rfc.ul_symbols += s.count(Symbol::Uplink);
        rfc.flexible_symbols += s.count(Symbol::Flexible);
    }
    return rfc;
}

} // namespace detail

constexpr int kBlocksPerSlot = 3;

/// Lays out a frame of `slots_per_frame` slots, each carrying three blocks.
/// DL blocks are apportioned by cumulative rounding of the target fraction,
/// so every prefix of the frame stays within half a block of the target.
/// Each half-frame is then forced to contain both directions.
inline RadioFrameConfig build_rfc(RatioLabel label, int slots_per_frame)
{
    if (slots_per_frame < 1) throw std::invalid_argument("slots_per_frame must be >= 1");
    if (label.dl <= 0 || label.ul <= 0) {
        throw std::invalid_argument("ratio " + label.str() + " leaves one direction without symbols");
    }
    const std::int64_t num = label.dl;
    const std::int64_t den = label.dl + label.ul;
    // round(3 n dl / (dl+ul)) with halves rounded up, in exact integer arithmetic.
    auto dl_cumulative = [&](std::int64_t n) {
        return (2 * kBlocksPerSlot * n * num + den) / (2 * den);
    };

    std::vector<int> dl_per_slot(slots_per_frame);
    for (int s = 0; s < slots_per_frame; ++s) {
        dl_per_slot[s] = static_cast<int>(dl_cumulative(s + 1) - dl_cumulative(s));
    }

    const int half = std::max(1, slots_per_frame / 2);
    for (int start = 0; start < slots_per_frame; start += half) {
        const int stop = std::min(slots_per_frame, start + half);
        int dl = 0, total = 0;
        for (int s = start; s < stop; ++s) {
            dl += dl_per_slot[s];
            total += kBlocksPerSlot;
        }
        const int mid = start + (stop - start) / 2;
        if (dl == 0) dl_per_slot[mid] += 1;
        if (dl == total) dl_per_slot[mid] -= 1;
    }

    std::vector<SlotFormat> slots;
    slots.reserve(slots_per_frame);
    for (int s = 0; s < slots_per_frame; ++s) {
        slots.push_back(build_slot_pattern(dl_per_slot[s], kBlocksPerSlot - dl_per_slot[s]));
    }
    return detail::tally(label, std::move(slots));
}

/// The ordered set of admissible frame configurations.
class RfcSet {
public:
    RfcSet(const std::vector<RatioLabel>& labels, int slots_per_frame)
    {
        if (labels.empty()) throw std::invalid_argument("RFC set is empty");
        for (const auto& l : labels) members_.push_back(build_rfc(l, slots_per_frame));
        for (std::size_t i = 1; i < members_.size(); ++i) {
            if (!(members_[i].dl_fraction() > members_[i - 1].dl_fraction())) {
                throw std::invalid_argument("RFC set DL fractions must be strictly increasing");
            }
        }
        const auto it = std::find_if(members_.begin(), members_.end(),
                                     [](const RadioFrameConfig& r) { return r.label.dl == r.label.ul; });
        if (it == members_.end()) throw std::invalid_argument("RFC set needs a balanced (1:1) member");
        default_index_ = static_cast<int>(it - members_.begin());
    }

    static std::vector<RatioLabel> default_labels()
    {
        return {{1, 4}, {1, 3}, {1, 2}, {1, 1}, {2, 1}, {3, 1}, {4, 1}};
    }

    int size() const { return static_cast<int>(members_.size()); }
    const RadioFrameConfig& operator[](int i) const { return members_.at(i); }
    int default_index() const { return default_index_; }
    const RadioFrameConfig& fallback() const { return members_[default_index_]; }

    int find(RatioLabel label) const
    {
        for (int i = 0; i < size(); ++i) {
            if (members_[i].label == label) return i;
        }
        throw std::invalid_argument("ratio " + label.str() + " is not in the RFC set");
    }

    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }

private:
    std::vector<RadioFrameConfig> members_;
    int default_index_ = 0;
};

/// Index of the member whose DL fraction is nearest to `theta`.
/// Exact ties go to the larger DL fraction.
inline int quantize_theta(double theta, const RfcSet& set)
{
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
    int best = 0;
    double best_dist = std::abs(set[0].dl_fraction() - theta);
    for (int i = 1; i < set.size(); ++i) {
        const double dist = std::abs(set[i].dl_fraction() - theta);
        if (dist <= best_dist + 1e-12) {
            best = i;
            best_dist = std::min(dist, best_dist);
        }
    }
    return best;
}

} // namespace tddsim

#endif // TDDSIM_FRAME_HPP
