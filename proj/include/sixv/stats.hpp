#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sixv/dynamics.hpp"
#include "sixv/particle_config.hpp"
#include "sixv/pde.hpp"

namespace sixv {

// R(I; eta, xi): 0 iff the two configurations are coordinatewise ordered on
// the interval [lo, hi], else 1.
int discrepancy_R(int64_t lo, int64_t hi, const ParticleConfiguration& eta,
                  const ParticleConfiguration& xi);

// Delta_N(eta, xi) = (1/N) max_x |sum_{i<=x} (eta(i) - xi(i))|
double delta_N(const ParticleConfiguration& eta, const ParticleConfiguration& xi, int64_t n);

// Delta_N(eta; f) = sup_x |int_{-inf}^x (eta(floor(yN)) - f(y)) dy|, exact
// for piecewise-constant f with compact support
double delta_N_profile(const ParticleConfiguration& eta, const DensityProfile& f, int64_t n);

// total rightward displacement; asserts the exact identity with the
// horizontal edge count of the trajectory's ensemble
int64_t total_current(const Trajectory& trajectory);

// half L1 distance between two normalized histograms over the same state
// space
struct Histogram {
    std::map<uint64_t, int64_t> counts;
    int64_t total = 0;
    int64_t shape_nx = 0, shape_ny = 0;
};
double tv_distance(const Histogram& h1, const Histogram& h2);

// cumulative-sum profile estimate at scale N
struct ProfileEstimate {
    int64_t scale = 1;
    int64_t x_lo = 0;
    std::vector<int64_t> cumulative;  // S(x) = sum_{i <= x} eta(i), x from x_lo

    static ProfileEstimate from_row(const std::vector<uint8_t>& row, int64_t x_lo, int64_t scale);
    double density(int64_t a, int64_t b) const;  // mean occupancy on [a, b]
};

// sample mean and standard error over replicas
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    int64_t n = 0;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

// two-sample chi-square homogeneity test over histogram cells (cells pooled
// so expected counts stay above 5); p-value via the Wilson-Hilferty
// approximation
double chi_square_homogeneity_p(const Histogram& h1, const Histogram& h2);

}  // namespace sixv
