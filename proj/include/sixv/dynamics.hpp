#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sixv/ensemble.hpp"
#include "sixv/particle_config.hpp"
#include "sixv/randomness.hpp"

namespace sixv {

// One synchronous update of a finite particle system on the line: particles
// are processed left to right; particle k at x stays when its coin says so
// and particle k-1 did not land on x, otherwise it jumps geometrically to the
// right, stopping at the previous position of particle k+1.
ParticleConfiguration step_line(const ParticleConfiguration& config, const StepRandomness& rnd);

// A recorded run of a finite system.  Row t of the ensemble encodes the
// arrows laid down by the step from states[t] to states[t+1]: the vertical
// edge above (x,t) is occupied iff eta_t(x) = 1.
struct Trajectory {
    ModelParams params;
    std::vector<ParticleConfiguration> states;          // states[t], t = 0..T
    std::vector<std::vector<std::pair<int64_t, int64_t>>> moves;  // per step: (from, to), to > from

    int64_t steps() const { return static_cast<int64_t>(moves.size()); }
    int64_t horizontal_edge_count() const;
    VertexEnsemble extract_ensemble(int64_t x_lo, int64_t x_hi) const;
};

Trajectory run_line(const ParticleConfiguration& init, int64_t steps, const RandomField& field,
                    const ModelParams& params);

// Exact sampler of one cylinder row from the weights: per-site 2x2 transfer
// matrices over the horizontal edge state, seam edge drawn from the diagonal
// of the full product, then conditional forward sampling using suffix
// products.
ParticleConfiguration step_ring(const ParticleConfiguration& config, const RandomField& field, int64_t t,
                                std::vector<uint8_t>* horizontal_out = nullptr);

// Particle-dynamics ring update driven by the keyed (chi, jump) field: the
// ring is cut at a one-step separating column derived from the same
// randomness, and the line rules are applied around it.  Intended for rings
// large enough (N >> 1/(1-b2)^2) that a cut exists with overwhelming
// probability; when none exists the transfer sampler takes the row.  Its law
// matches the cylinder row law up to boundary terms that vanish
// exponentially in N, and it shares (chi, jump) keys with the line stepper
// site for site, which is what the matched couplings need.
ParticleConfiguration step_ring_particle(const ParticleConfiguration& config, const RandomField& field,
                                         int64_t t,
                                         std::vector<std::pair<int64_t, int64_t>>* moves_out = nullptr);

struct RingRun {
    ModelParams params;
    int64_t n = 0;
    std::vector<std::vector<uint8_t>> occupancy;   // rows t = 0..T
    std::vector<std::vector<uint8_t>> horizontal;  // rows t = 1..T, size n each

    VertexEnsemble extract_ensemble(int64_t x_lo, int64_t x_hi, int64_t y_lo, int64_t y_hi) const;
    int64_t horizontal_edge_count() const;
};

RingRun run_ring(const ParticleConfiguration& init, int64_t steps, const RandomField& field,
                 const ModelParams& params);

// Separating integers of the randomness field: k is separating for the
// horizon [1, nsteps] when chi_t(k+t) = 0 and max_{m < k+t} (j_t(m) + m)
// <= k+t for every t.  The max over the infinite left tail is resolved by
// scanning until the residual crossing probability drops below tolerance.
struct SeparatingScan {
    std::vector<int64_t> found;
    int64_t truncation_depth = 0;  // how far left the jump scan went
};
SeparatingScan find_separating(const RandomField& field, int64_t nsteps, int64_t window_lo,
                               int64_t window_hi, double tail_tolerance = 1e-15);

// same scan against arbitrary coin/jump functions of (t, x)
SeparatingScan find_separating_with(const std::function<int(int64_t, int64_t)>& chi,
                                    const std::function<int64_t(int64_t, int64_t)>& jump, double b2,
                                    int64_t nsteps, int64_t window_lo, int64_t window_hi,
                                    double tail_tolerance = 1e-15);

// Occupancy rows of the infinite half-plane system restricted to a window.
struct WindowTrajectory {
    int64_t x_lo = 0, x_hi = 0;
    std::vector<std::vector<uint8_t>> occupancy;   // rows t = 0..T over [x_lo, x_hi]
    std::vector<std::vector<uint8_t>> horizontal;  // rows t = 1..T over [x_lo, x_hi]
    int64_t slab_lo = 0, slab_hi = 0;              // materialized range
    bool used_bracketing = false;                  // exact separating-integer route taken
};

// Infinite initial data is materialized on demand through the generator
// (site -> occupancy), which must be deterministic in the site.  For short
// horizons the exact separating-integer bracketing is used; otherwise a
// halo-truncated slab whose width is driven by the discrepancy speed bound.
WindowTrajectory evolve_half_plane_infinite(const std::function<int(int64_t)>& initial, int64_t nsteps,
                                            int64_t window_lo, int64_t window_hi, const RandomField& field,
                                            const ModelParams& params, int64_t widen_cap = 1 << 16);

// Bernoulli(rho) initial data keyed off the field's seed.
std::function<int(int64_t)> bernoulli_initial(const RandomField& field, double rho);
// double-sided (theta | rho) data: density theta at x <= 0, rho at x > 0
std::function<int(int64_t)> double_sided_initial(const RandomField& field, double theta, double rho);

// S_m eta(x) = eta(x+m): shift the configuration left by m.
ParticleConfiguration shift_S(const ParticleConfiguration& config, int64_t m);
// M_t: t applications of the line stepper starting at time t0.
ParticleConfiguration evolve_M(const ParticleConfiguration& config, int64_t t, const RandomField& field,
                               int64_t t0 = 1);

}  // namespace sixv
