#pragma once

#include <cstdint>
#include <vector>

#include "sixv/randomness.hpp"

namespace sixv {

struct MonotonePair {
    std::vector<int64_t> upper;  // p'
    std::vector<int64_t> lower;  // q'
};

// Order-preserving coupled update of two aligned tagged-position sequences
// with p >= q coordinatewise.  The coupling indexes randomness by particle
// rather than by site and treats the two particles adjacent to a one-site
// discrepancy jointly; general pairs are chained through the interpolating
// sequence of one-site raises, with the shared randomness of each link
// reconstructed from the realized lower step so every marginal stays exact.
// Both outputs follow the correct one-step law and upper' >= lower' always.
MonotonePair monotone_step(const std::vector<int64_t>& p, const std::vector<int64_t>& q,
                           const RandomField& field, int64_t t);

}  // namespace sixv
