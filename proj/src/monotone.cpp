#include "sixv/monotone.hpp"

#include <algorithm>
#include <cmath>

#include "sixv/errors.hpp"

namespace sixv {

namespace {

constexpr int64_t kFar = INT64_MAX / 4;

// deterministic stream of fresh draws for one coupled update
struct Draws {
    const RandomField* field;
    int64_t t;
    int64_t counter = 0;

    double u() { return field->uniform(Stream::Generic, t, counter++); }
    int coin() { return u() < field->b1() ? 1 : 0; }
    int64_t geometric() {
        return 1 + static_cast<int64_t>(std::floor(std::log(u()) / std::log(field->b2())));
    }
    // geometric conditioned on being >= m (memorylessness)
    int64_t geometric_at_least(int64_t m) { return m - 1 + geometric(); }
};

struct PairRandomness {
    std::vector<int> chi;
    std::vector<int64_t> jump;
};

PairRandomness fresh_randomness(size_t n, Draws& d) {
    PairRandomness r;
    r.chi.resize(n);
    r.jump.resize(n);
    for (size_t i = 0; i < n; ++i) {
        r.chi[i] = d.coin();
        r.jump[i] = d.geometric();
    }
    return r;
}

// One-step map of the coupling: particles are processed left to right with
// per-particle randomness; the pair (k-1, k) adjacent to the discrepancy
// index k is sampled jointly, the overshoot of a blocked particle k-1 being
// handed to particle k.  k < 0 means no special pair (plain update).
std::vector<int64_t> apply_pair_map(const std::vector<int64_t>& p, int64_t k, const PairRandomness& r) {
    int64_t n = static_cast<int64_t>(p.size());
    std::vector<int64_t> out(p.size());
    auto cap = [&](int64_t i) { return i + 1 < n ? p[static_cast<size_t>(i + 1)] : kFar; };
    auto pushed = [&](int64_t i) { return i > 0 && out[static_cast<size_t>(i - 1)] == p[static_cast<size_t>(i)]; };

    for (int64_t i = 0; i < n; ++i) {
        if (k >= 1 && i == k - 1) {
            int64_t x = p[static_cast<size_t>(i)];
            int64_t xk = p[static_cast<size_t>(k)];
            if (r.chi[static_cast<size_t>(i)] == 1 && !pushed(i)) {
                out[static_cast<size_t>(i)] = x;
                // particle k is then free: plain rule, never pushed by k-1
                out[static_cast<size_t>(k)] =
                    r.chi[static_cast<size_t>(k)] == 1
                        ? xk
                        : std::min(xk + r.jump[static_cast<size_t>(k)], cap(k));
            } else {
                int64_t target = x + r.jump[static_cast<size_t>(i)];
                if (target < xk) {
                    out[static_cast<size_t>(i)] = target;
                    out[static_cast<size_t>(k)] =
                        r.chi[static_cast<size_t>(k)] == 1
                            ? xk
                            : std::min(xk + r.jump[static_cast<size_t>(k)], cap(k));
                } else if (target < cap(k)) {
                    out[static_cast<size_t>(i)] = xk;
                    out[static_cast<size_t>(k)] = target + 1;  // overshoot handed over
                } else {
                    out[static_cast<size_t>(i)] = xk;
                    out[static_cast<size_t>(k)] = cap(k);
                }
            }
            ++i;  // both k-1 and k are now set
            continue;
        }
        int64_t x = p[static_cast<size_t>(i)];
        if (!pushed(i) && r.chi[static_cast<size_t>(i)] == 1)
            out[static_cast<size_t>(i)] = x;
        else
            out[static_cast<size_t>(i)] = std::min(x + r.jump[static_cast<size_t>(i)], cap(i));
    }
    return out;
}

// Conditional law of the randomness given that the map sent p to obs; any
// component the observation does not pin down is drawn fresh.  Every
// realized transition of the one-step kernel has positive probability under
// the map, so each branch below is total.
PairRandomness reconstruct_randomness(const std::vector<int64_t>& p, const std::vector<int64_t>& obs,
                                      int64_t k, Draws& d) {
    int64_t n = static_cast<int64_t>(p.size());
    PairRandomness r;
    r.chi.assign(p.size(), 0);
    r.jump.assign(p.size(), 0);
    auto cap = [&](int64_t i) { return i + 1 < n ? p[static_cast<size_t>(i + 1)] : kFar; };
    auto pushed = [&](int64_t i) { return i > 0 && obs[static_cast<size_t>(i - 1)] == p[static_cast<size_t>(i)]; };

    auto generic = [&](int64_t i) {
        int64_t x = p[static_cast<size_t>(i)];
        int64_t o = obs[static_cast<size_t>(i)];
        if (!pushed(i)) {
            if (o == x) {
                r.chi[static_cast<size_t>(i)] = 1;
                r.jump[static_cast<size_t>(i)] = d.geometric();
                return;
            }
            r.chi[static_cast<size_t>(i)] = 0;
        } else {
            r.chi[static_cast<size_t>(i)] = d.coin();
        }
        if (o < cap(i))
            r.jump[static_cast<size_t>(i)] = o - x;
        else
            r.jump[static_cast<size_t>(i)] = d.geometric_at_least(cap(i) - x);
        if (r.jump[static_cast<size_t>(i)] < 1) throw Error("monotone reconstruction: impossible move");
    };

    for (int64_t i = 0; i < n; ++i) {
        if (k >= 1 && i == k - 1) {
            int64_t x = p[static_cast<size_t>(i)];
            int64_t xk = p[static_cast<size_t>(k)];
            int64_t o1 = obs[static_cast<size_t>(i)];
            int64_t o2 = obs[static_cast<size_t>(k)];
            if (o1 == x) {
                // particle k-1 held its ground: coin 1, jump unused
                if (pushed(i)) throw Error("monotone reconstruction: pushed particle stayed");
                r.chi[static_cast<size_t>(i)] = 1;
                r.jump[static_cast<size_t>(i)] = d.geometric();
                if (o2 == xk) {
                    r.chi[static_cast<size_t>(k)] = 1;
                    r.jump[static_cast<size_t>(k)] = d.geometric();
                } else {
                    r.chi[static_cast<size_t>(k)] = 0;
                    r.jump[static_cast<size_t>(k)] =
                        o2 < cap(k) ? o2 - xk : d.geometric_at_least(cap(k) - xk);
                }
            } else {
                r.chi[static_cast<size_t>(i)] = pushed(i) ? d.coin() : 0;
                if (o1 < xk) {
                    r.jump[static_cast<size_t>(i)] = o1 - x;
                    if (o2 == xk) {
                        r.chi[static_cast<size_t>(k)] = 1;
                        r.jump[static_cast<size_t>(k)] = d.geometric();
                    } else {
                        r.chi[static_cast<size_t>(k)] = 0;
                        r.jump[static_cast<size_t>(k)] =
                            o2 < cap(k) ? o2 - xk : d.geometric_at_least(cap(k) - xk);
                    }
                } else if (o1 == xk) {
                    // blocked at the discrepancy; o2 encodes the overshoot
                    r.jump[static_cast<size_t>(i)] =
                        o2 < cap(k) ? o2 - x - 1 : d.geometric_at_least(cap(k) - x - 1);
                    if (r.jump[static_cast<size_t>(i)] < xk - x)
                        throw Error("monotone reconstruction: blocked jump too short");
                    r.chi[static_cast<size_t>(k)] = d.coin();
                    r.jump[static_cast<size_t>(k)] = d.geometric();
                } else {
                    throw Error("monotone reconstruction: particle k-1 beyond discrepancy");
                }
            }
            ++i;
            continue;
        }
        generic(i);
    }
    return r;
}

}  // namespace

MonotonePair monotone_step(const std::vector<int64_t>& p, const std::vector<int64_t>& q,
                           const RandomField& field, int64_t t) {
    if (p.size() != q.size()) throw OrderViolation("sequences must have equal particle counts");
    for (size_t i = 0; i < p.size(); ++i)
        if (p[i] < q[i]) throw OrderViolation("require p >= q coordinatewise");
    Draws draws{&field, t, 0};
    if (p.empty()) return {};

    // interpolating chain of one-site raises, rightmost coordinate first so
    // every intermediate sequence is strictly increasing
    std::vector<std::pair<std::vector<int64_t>, int64_t>> links;  // (lower of link, raised index)
    std::vector<int64_t> cur = q;
    for (int64_t k = static_cast<int64_t>(p.size()) - 1; k >= 0; --k) {
        while (cur[static_cast<size_t>(k)] < p[static_cast<size_t>(k)]) {
            links.emplace_back(cur, k);
            ++cur[static_cast<size_t>(k)];
        }
    }

    if (links.empty()) {
        PairRandomness r = fresh_randomness(p.size(), draws);
        std::vector<int64_t> out = apply_pair_map(q, -1, r);
        return {out, out};
    }

    std::vector<int64_t> lower_new;
    std::vector<int64_t> upper_new;
    for (size_t l = 0; l < links.size(); ++l) {
        const auto& link_lower = links[l].first;
        int64_t k = links[l].second;
        std::vector<int64_t> link_upper = link_lower;
        ++link_upper[static_cast<size_t>(k)];
        PairRandomness r;
        if (l == 0) {
            r = fresh_randomness(p.size(), draws);
            lower_new = apply_pair_map(link_lower, k, r);
        } else {
            r = reconstruct_randomness(link_lower, upper_new, k, draws);
        }
        std::vector<int64_t> prev_upper = upper_new;
        upper_new = apply_pair_map(link_upper, k, r);
        if (l == 0) {
            for (size_t i = 0; i < p.size(); ++i)
                if (upper_new[i] < lower_new[i]) throw Error("monotone coupling violated order");
        } else {
            for (size_t i = 0; i < p.size(); ++i)
                if (upper_new[i] < prev_upper[i]) throw Error("monotone coupling violated order");
        }
    }
    for (size_t i = 0; i < p.size(); ++i)
        if (upper_new[i] < lower_new[i]) throw Error("monotone coupling violated order");
    return {upper_new, lower_new};
}

}  // namespace sixv
