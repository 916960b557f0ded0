#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sixv/errors.hpp"

namespace sixv {

enum class Topology { Line, Ring, HalfLineWindow };

// Tagged positions beyond the finite range use explicit sentinel accessors
// rather than large integers, so jump arithmetic cannot overflow.
struct ParticleConfiguration {
    Topology topology = Topology::Line;
    int64_t ring_size = 0;               // sites 0..N-1 when topology == Ring
    std::vector<int64_t> tagged;         // strictly increasing where finite

    static ParticleConfiguration line(std::vector<int64_t> positions);
    static ParticleConfiguration ring(int64_t n, std::vector<int64_t> positions);

    int64_t count() const { return static_cast<int64_t>(tagged.size()); }
    bool empty() const { return tagged.empty(); }

    // p(k) with sentinels: k < 0 -> -inf, k >= count() -> +inf
    bool is_neg_inf(int64_t k) const { return k < 0; }
    bool is_pos_inf(int64_t k) const { return k >= count(); }
    int64_t pos(int64_t k) const { return tagged[static_cast<size_t>(k)]; }

    bool occupied(int64_t x) const;
    void validate() const;
};

inline ParticleConfiguration ParticleConfiguration::line(std::vector<int64_t> positions) {
    ParticleConfiguration c;
    c.topology = Topology::Line;
    c.tagged = std::move(positions);
    c.validate();
    return c;
}

inline ParticleConfiguration ParticleConfiguration::ring(int64_t n, std::vector<int64_t> positions) {
    ParticleConfiguration c;
    c.topology = Topology::Ring;
    c.ring_size = n;
    c.tagged = std::move(positions);
    c.validate();
    return c;
}

inline bool ParticleConfiguration::occupied(int64_t x) const {
    if (topology == Topology::Ring && ring_size > 0) x = ((x % ring_size) + ring_size) % ring_size;
    for (int64_t p : tagged)
        if (p == x) return true;
    return false;
}

inline void ParticleConfiguration::validate() const {
    for (size_t i = 0; i + 1 < tagged.size(); ++i)
        if (tagged[i] >= tagged[i + 1])
            throw OrderingViolation("tagged positions must be strictly increasing");
    if (topology == Topology::Ring) {
        if (ring_size < 1) throw RangeViolation("ring size must be >= 1");
        if (!tagged.empty() && (tagged.front() < 0 || tagged.back() >= ring_size))
            throw RangeViolation("ring positions must lie in [0, N)");
    }
}

}  // namespace sixv
