#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "sixv/errors.hpp"
#include "sixv/params.hpp"

namespace sixv {

// Counter-based randomness keyed by (seed, time, site, class, stream).
// Every value is a pure function of its key, so identical site-indexed
// randomness can be shared across coupled models and any key can be
// evaluated on demand (e.g. for sites that were never materialized).
namespace rnd {

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t combine(uint64_t h, uint64_t v) { return mix64(h ^ (v + 0x632be59bd9b4e019ULL)); }

// uniform in the open interval (0,1)
inline double to_unit(uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace rnd

enum class Stream : uint64_t {
    Chi = 1,
    Jump = 2,
    InitialData = 3,
    QuadrantVertex = 4,
    QuadrantXAxis = 5,
    QuadrantYAxis = 6,
    RingSeam = 7,
    RingEdge = 8,
    Generic = 9,
};

// Stateless provider: one instance per experiment seed.
class RandomField {
  public:
    RandomField(uint64_t seed, double b1, double b2) : seed_(seed), b1_(b1), b2_(b2), log_b2_(std::log(b2)) {}
    RandomField(uint64_t seed, const ModelParams& mp) : RandomField(seed, mp.b1, mp.b2) {}

    uint64_t seed() const { return seed_; }
    double b1() const { return b1_; }
    double b2() const { return b2_; }

    double uniform(Stream s, int64_t t, int64_t x, int64_t cls = 1) const {
        uint64_t h = rnd::mix64(seed_ ^ 0x8f1bbcdc);
        h = rnd::combine(h, static_cast<uint64_t>(s));
        h = rnd::combine(h, static_cast<uint64_t>(t));
        h = rnd::combine(h, static_cast<uint64_t>(x));
        h = rnd::combine(h, static_cast<uint64_t>(cls));
        return rnd::to_unit(h);
    }

    // stay/move coin: P[chi = 1] = b1
    int chi(int64_t t, int64_t x, int64_t cls = 1) const {
        return uniform(Stream::Chi, t, x, cls) < b1_ ? 1 : 0;
    }

    // b2-geometric jump length: P[jump = r] = (1-b2) b2^(r-1), r >= 1,
    // sampled by inverse CDF.
    int64_t jump(int64_t t, int64_t x, int64_t cls = 1) const {
        double u = uniform(Stream::Jump, t, x, cls);
        return 1 + static_cast<int64_t>(std::floor(std::log(u) / log_b2_));
    }

    // derive an independent field for a replica index
    RandomField replica(uint64_t index) const {
        return RandomField(rnd::combine(rnd::mix64(seed_ ^ 0xa5a5a5a5ULL), index), b1_, b2_);
    }

  private:
    uint64_t seed_;
    double b1_, b2_;
    double log_b2_;
};

// One time-slice view of the field, optionally restricted to a site range.
// Queries outside the declared range throw RandomnessGap; an unrestricted
// view is total.
class StepRandomness {
  public:
    StepRandomness(const RandomField& field, int64_t t) : field_(&field), t_(t) {}
    StepRandomness(const RandomField& field, int64_t t, int64_t lo, int64_t hi)
        : field_(&field), t_(t), lo_(lo), hi_(hi), bounded_(true) {}

    int64_t time() const { return t_; }
    const RandomField& field() const { return *field_; }

    int chi(int64_t x, int64_t cls = 1) const {
        check(x);
        return field_->chi(t_, x, cls);
    }
    int64_t jump(int64_t x, int64_t cls = 1) const {
        check(x);
        return field_->jump(t_, x, cls);
    }

  private:
    void check(int64_t x) const {
        if (bounded_ && (x < lo_ || x > hi_))
            throw RandomnessGap("site " + std::to_string(x) + " outside covered range [" +
                                std::to_string(lo_) + "," + std::to_string(hi_) + "]");
    }

    const RandomField* field_;
    int64_t t_;
    int64_t lo_ = 0, hi_ = 0;
    bool bounded_ = false;
};

}  // namespace sixv
