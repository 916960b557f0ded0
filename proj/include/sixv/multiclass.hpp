#pragma once

#include <cstdint>
#include <vector>

#include "sixv/particle_config.hpp"
#include "sixv/randomness.hpp"

namespace sixv {

struct MultiParticle {
    int64_t pos;
    int cls;  // 1..n_classes; lower class moves first
};

struct MultiClassConfiguration {
    int n_classes = 1;
    std::vector<MultiParticle> particles;  // sorted by pos, positions distinct

    static MultiClassConfiguration from_particles(int n_classes, std::vector<MultiParticle> ps);
    std::vector<int64_t> positions_of_class(int cls) const;
    std::vector<int64_t> all_positions() const;
    int64_t count() const { return static_cast<int64_t>(particles.size()); }
    void validate() const;
};

// One step of the multi-class dynamics: classes advance in increasing order,
// left to right within a class; lower classes are blind to higher ones.  A
// moving particle stops at the original site of the nearest lower-class
// mover to its right, skips lower-class particles that stayed, and never
// passes the next particle of its own class.
MultiClassConfiguration step_multiclass(const MultiClassConfiguration& config, const StepRandomness& rnd,
                                        std::vector<std::pair<int64_t, int64_t>>* moves_out = nullptr);

// Joint labeling of one eta-model and n ordered xi-models: a particle shared
// by eta and xi-shell j has class j, an eta-only particle has class n+1, a
// xi-only particle of shell j has class n+j.
MultiClassConfiguration assign_classes(const ParticleConfiguration& eta,
                                       const std::vector<ParticleConfiguration>& xis);

// Concatenation: class r in (thresholds[i-1], thresholds[i]] becomes class
// i+1 .. i.e. position i in the increasing threshold list; classes above the
// last threshold become empty.
MultiClassConfiguration project_classes(const MultiClassConfiguration& config,
                                        const std::vector<int>& thresholds);

struct CoupledSystem {
    ParticleConfiguration eta;
    std::vector<ParticleConfiguration> xis;  // xi[0] <= xi[1] <= ... as occupancy
};

struct HigherRankStepResult {
    CoupledSystem next;
    int64_t particle_steps = 0;
    int64_t attractivity_violations = 0;    // coupled pair decoupled, or xi-ordering broken
    int64_t class_increase_violations = 0;  // a tracked particle's class went up
};

// Advances all models one step under literally shared class-resolved
// randomness; classes are reassigned from scratch before each step.
HigherRankStepResult higher_rank_step(const CoupledSystem& sys, const RandomField& field, int64_t t);

struct SpeedTail {
    std::vector<double> tail;       // tail[v-1] = P[displacement >= v]
    std::vector<double> sigma;      // binomial standard error
    int64_t samples = 0;
    bool violation = false;         // tail exceeds b2^(v-1) beyond the band
    int max_v = 12;
};

SpeedTail tagged_speed_tail(const std::vector<int64_t>& displacements, double b2, int max_v = 12,
                            double n_sigma = 4.0);

}  // namespace sixv
