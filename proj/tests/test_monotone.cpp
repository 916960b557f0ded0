#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "sixv/monotone.hpp"
#include "sixv/params.hpp"

using namespace sixv;

namespace {

const ModelParams kParams = make_params(0.25, 0.5, 1.0);

uint64_t outcome_key(const std::vector<int64_t>& pos, int64_t lo, int64_t n_total) {
    std::vector<uint8_t> occ(static_cast<size_t>(n_total), 0);
    bool escaped = false;
    for (int64_t x : pos) {
        int64_t i = x - lo;
        if (i >= n_total)
            escaped = true;
        else if (i >= 0)
            occ[static_cast<size_t>(i)] = 1;
    }
    return oracle::encode_line_outcome(occ, escaped);
}

std::vector<uint8_t> occ_of(const std::vector<int64_t>& pos, int64_t lo, int64_t n) {
    std::vector<uint8_t> occ(static_cast<size_t>(n), 0);
    for (int64_t x : pos)
        if (x >= lo && x < lo + n) occ[static_cast<size_t>(x - lo)] = 1;
    return occ;
}

}  // namespace

TEST_CASE("equal inputs evolve identically") {
    std::vector<int64_t> p{0, 3, 4, 9};
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        RandomField f(seed, kParams);
        MonotonePair out = monotone_step(p, p, f, 1);
        CHECK(out.upper == out.lower);
    }
}

TEST_CASE("order violations in input are rejected") {
    RandomField f(1, kParams);
    CHECK_THROWS_AS(monotone_step({0, 2}, {1, 2}, f, 1), OrderViolation);
    CHECK_THROWS_AS(monotone_step({0, 2}, {0, 2, 5}, f, 1), OrderViolation);
}

TEST_CASE("single-site discrepancy: order holds and both marginals are exact") {
    std::vector<int64_t> p{0, 3}, q{0, 2};
    auto law_p = oracle::line_row_law(occ_of(p, 0, 4), 8, kParams.b1, kParams.b2);
    auto law_q = oracle::line_row_law(occ_of(q, 0, 4), 8, kParams.b1, kParams.b2);
    std::map<uint64_t, int64_t> counts_p, counts_q;
    const int64_t n = 100000;
    for (int64_t i = 0; i < n; ++i) {
        RandomField f = RandomField(555, kParams).replica(static_cast<uint64_t>(i));
        MonotonePair out = monotone_step(p, q, f, 1);  // throws on any order violation
        ++counts_p[outcome_key(out.upper, 0, 12)];
        ++counts_q[outcome_key(out.lower, 0, 12)];
    }
    auto cp = oracle::compare_counts(law_p, counts_p, n, 4.0);
    auto cq = oracle::compare_counts(law_q, counts_q, n, 4.0);
    INFO("upper worst z = ", cp.worst_z, ", lower worst z = ", cq.worst_z);
    CHECK(cp.ok);
    CHECK(cq.ok);
}

TEST_CASE("chained discrepancies: order holds and both marginals stay exact") {
    // several sites apart at several indices, exercising the interpolating
    // chain and the conditional randomness reconstruction
    std::vector<int64_t> q{0, 2, 5, 9};
    std::vector<int64_t> p{1, 4, 7, 12};
    auto law_p = oracle::line_row_law(occ_of(p, 0, 13), 8, kParams.b1, kParams.b2);
    auto law_q = oracle::line_row_law(occ_of(q, 0, 13), 8, kParams.b1, kParams.b2);
    std::map<uint64_t, int64_t> counts_p, counts_q;
    const int64_t n = 100000;
    for (int64_t i = 0; i < n; ++i) {
        RandomField f = RandomField(777, kParams).replica(static_cast<uint64_t>(i));
        MonotonePair out = monotone_step(p, q, f, 1);
        ++counts_p[outcome_key(out.upper, 0, 21)];
        ++counts_q[outcome_key(out.lower, 0, 21)];
    }
    auto cp = oracle::compare_counts(law_p, counts_p, n, 4.0);
    auto cq = oracle::compare_counts(law_q, counts_q, n, 4.0);
    INFO("upper worst z = ", cp.worst_z, ", lower worst z = ", cq.worst_z);
    CHECK(cp.ok);
    CHECK(cq.ok);
}

TEST_CASE("iterated coupling stays ordered over long runs") {
    std::vector<int64_t> q, p;
    RandomField init(9001, kParams);
    for (int64_t x = 0; x < 120; ++x)
        if (init.uniform(Stream::InitialData, 0, x) < 0.5) q.push_back(x);
    p = q;
    for (size_t i = p.size() / 2; i < p.size(); ++i) p[i] += 3;
    for (int64_t t = 1; t <= 400; ++t) {
        MonotonePair out = monotone_step(p, q, init, t);  // internal hard assertion on order
        p = out.upper;
        q = out.lower;
        for (size_t i = 0; i < p.size(); ++i) REQUIRE(p[i] >= q[i]);
    }
}
