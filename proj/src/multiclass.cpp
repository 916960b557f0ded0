#include "sixv/multiclass.hpp"

#include <algorithm>
#include <cmath>

#include "sixv/errors.hpp"

namespace sixv {

MultiClassConfiguration MultiClassConfiguration::from_particles(int n_classes,
                                                                std::vector<MultiParticle> ps) {
    MultiClassConfiguration c;
    c.n_classes = n_classes;
    c.particles = std::move(ps);
    std::sort(c.particles.begin(), c.particles.end(),
              [](const MultiParticle& a, const MultiParticle& b) { return a.pos < b.pos; });
    c.validate();
    return c;
}

void MultiClassConfiguration::validate() const {
    for (size_t i = 0; i + 1 < particles.size(); ++i)
        if (particles[i].pos >= particles[i + 1].pos)
            throw OrderingViolation("multiclass positions must be strictly increasing");
    for (const auto& p : particles)
        if (p.cls < 1 || p.cls > n_classes) throw RangeViolation("class label out of range");
}

std::vector<int64_t> MultiClassConfiguration::positions_of_class(int cls) const {
    std::vector<int64_t> out;
    for (const auto& p : particles)
        if (p.cls == cls) out.push_back(p.pos);
    return out;
}

std::vector<int64_t> MultiClassConfiguration::all_positions() const {
    std::vector<int64_t> out;
    out.reserve(particles.size());
    for (const auto& p : particles) out.push_back(p.pos);
    return out;
}

namespace {

constexpr int64_t kFar = INT64_MAX / 4;

// what the classes below the current one did this step
struct LowerState {
    std::vector<std::pair<int64_t, int64_t>> movers;  // (old, new), sorted by old
    std::vector<int64_t> prefix_max_new;              // prefix max of landings over movers
    std::vector<int64_t> landings;                    // sorted landings
    std::vector<int64_t> stationary;                  // sorted sites that kept their particle

    void fold(std::vector<std::pair<int64_t, int64_t>>& new_movers, std::vector<int64_t>& new_stationary) {
        movers.insert(movers.end(), new_movers.begin(), new_movers.end());
        std::sort(movers.begin(), movers.end());
        prefix_max_new.resize(movers.size());
        int64_t mx = -kFar;
        for (size_t i = 0; i < movers.size(); ++i) {
            mx = std::max(mx, movers[i].second);
            prefix_max_new[i] = mx;
        }
        for (const auto& mv : new_movers) landings.push_back(mv.second);
        std::sort(landings.begin(), landings.end());
        stationary.insert(stationary.end(), new_stationary.begin(), new_stationary.end());
        std::sort(stationary.begin(), stationary.end());
    }

    // exists a mover with old < x < new
    bool jumped_over(int64_t x) const {
        auto it = std::lower_bound(movers.begin(), movers.end(), std::make_pair(x, int64_t{-kFar}));
        if (it == movers.begin()) return false;
        return prefix_max_new[static_cast<size_t>(it - movers.begin()) - 1] > x;
    }
    bool landed_on(int64_t x) const {
        return std::binary_search(landings.begin(), landings.end(), x);
    }
    // original site of the nearest mover strictly right of x
    int64_t next_mover_origin_after(int64_t x) const {
        auto it = std::upper_bound(movers.begin(), movers.end(), std::make_pair(x, kFar));
        return it == movers.end() ? kFar : it->first;
    }
    bool is_stationary(int64_t x) const {
        return std::binary_search(stationary.begin(), stationary.end(), x);
    }
};

// core of the update; emits (old, new, class) per particle in class-major
// processing order
struct StepRecord {
    int64_t from, to;
    int cls;
};

std::vector<StepRecord> run_classes(const MultiClassConfiguration& config, const StepRandomness& rnd) {
    LowerState lower;
    std::vector<StepRecord> records;
    records.reserve(config.particles.size());
    for (int r = 1; r <= config.n_classes; ++r) {
        std::vector<int64_t> p = config.positions_of_class(r);
        if (p.empty()) continue;
        std::vector<std::pair<int64_t, int64_t>> class_moves;
        std::vector<int64_t> class_stationary;
        int64_t prev_new = kFar;
        bool have_prev = false;
        for (size_t k = 0; k < p.size(); ++k) {
            int64_t x = p[k];
            bool forced_stay = lower.jumped_over(x);
            bool forced_move = !forced_stay && (lower.landed_on(x) || (have_prev && prev_new == x));
            bool moving = forced_stay ? false : (forced_move ? true : rnd.chi(x, r) == 0);

            int64_t landing = x;
            if (moving) {
                int64_t same_cap = (k + 1 < p.size()) ? p[k + 1] : kFar;
                int64_t cap = std::min(same_cap, lower.next_mover_origin_after(x));
                int64_t j = rnd.jump(x, r);
                int64_t taken = 0;
                int64_t y = x;
                // walk right j effective steps, skipping lower-class
                // particles that stayed, stopping at the cap
                while (taken < j) {
                    ++y;
                    if (y >= cap) {
                        y = cap;
                        break;
                    }
                    if (!lower.is_stationary(y)) ++taken;
                }
                landing = y;
            }
            if (landing > x)
                class_moves.emplace_back(x, landing);
            else
                class_stationary.push_back(x);
            records.push_back({x, landing, r});
            prev_new = landing;
            have_prev = true;
        }
        lower.fold(class_moves, class_stationary);
    }
    return records;
}

}  // namespace

MultiClassConfiguration step_multiclass(const MultiClassConfiguration& config, const StepRandomness& rnd,
                                        std::vector<std::pair<int64_t, int64_t>>* moves_out) {
    if (moves_out) moves_out->clear();
    auto records = run_classes(config, rnd);
    std::vector<MultiParticle> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        if (moves_out && rec.to > rec.from) moves_out->emplace_back(rec.from, rec.to);
        out.push_back({rec.to, rec.cls});
    }
    return MultiClassConfiguration::from_particles(config.n_classes, std::move(out));
}

MultiClassConfiguration assign_classes(const ParticleConfiguration& eta,
                                       const std::vector<ParticleConfiguration>& xis) {
    int n = static_cast<int>(xis.size());
    for (size_t i = 0; i + 1 < xis.size(); ++i) {
        // xi^(i) <= xi^(i+1) as occupancy
        const auto& a = xis[i].tagged;
        const auto& b = xis[i + 1].tagged;
        if (!std::includes(b.begin(), b.end(), a.begin(), a.end()))
            throw OrderViolation("xi configurations must be nested");
    }
    std::vector<MultiParticle> ps;
    auto shell_of = [&](int64_t x) {
        for (int j = 0; j < n; ++j)
            if (std::binary_search(xis[static_cast<size_t>(j)].tagged.begin(),
                                   xis[static_cast<size_t>(j)].tagged.end(), x))
                return j + 1;
        return n + 1;  // not in any xi
    };
    for (int64_t x : eta.tagged) {
        int j = shell_of(x);
        ps.push_back({x, j <= n ? j : n + 1});
    }
    if (n > 0) {
        for (int64_t x : xis.back().tagged) {
            if (std::binary_search(eta.tagged.begin(), eta.tagged.end(), x)) continue;
            int j = shell_of(x);
            ps.push_back({x, n + j});
        }
    }
    return MultiClassConfiguration::from_particles(std::max(1, 2 * n), std::move(ps));
}

MultiClassConfiguration project_classes(const MultiClassConfiguration& config,
                                        const std::vector<int>& thresholds) {
    if (thresholds.empty()) throw BadThresholds("need at least one threshold");
    int prev = 0;
    for (int t : thresholds) {
        if (t <= prev) throw BadThresholds("thresholds must be strictly increasing from 1");
        prev = t;
    }
    if (thresholds.back() > config.n_classes) throw BadThresholds("threshold exceeds class count");
    std::vector<MultiParticle> ps;
    for (const auto& p : config.particles) {
        int cls = 0;
        for (size_t i = 0; i < thresholds.size(); ++i) {
            if (p.cls <= thresholds[i]) {
                cls = static_cast<int>(i) + 1;
                break;
            }
        }
        if (cls > 0) ps.push_back({p.pos, cls});
    }
    return MultiClassConfiguration::from_particles(static_cast<int>(thresholds.size()), std::move(ps));
}

namespace {

// one step of a model whose particles carry the joint labels; returns
// (old position, new position) sorted by old position
std::vector<std::pair<int64_t, int64_t>> evolve_model(std::vector<MultiParticle> labeled, int n_classes,
                                                      const StepRandomness& rnd) {
    MultiClassConfiguration mc = MultiClassConfiguration::from_particles(n_classes, std::move(labeled));
    auto records = run_classes(mc, rnd);
    std::vector<std::pair<int64_t, int64_t>> mapping;
    mapping.reserve(records.size());
    for (const auto& rec : records) mapping.emplace_back(rec.from, rec.to);
    std::sort(mapping.begin(), mapping.end());
    return mapping;
}

}  // namespace

HigherRankStepResult higher_rank_step(const CoupledSystem& sys, const RandomField& field, int64_t t) {
    int n = static_cast<int>(sys.xis.size());
    MultiClassConfiguration joint = assign_classes(sys.eta, sys.xis);
    StepRandomness rnd(field, t);

    auto joint_class = [](const MultiClassConfiguration& j, int64_t x) {
        auto it = std::lower_bound(j.particles.begin(), j.particles.end(), x,
                                   [](const MultiParticle& p, int64_t v) { return p.pos < v; });
        return (it != j.particles.end() && it->pos == x) ? it->cls : 0;
    };
    auto label_model = [&](const ParticleConfiguration& model) {
        std::vector<MultiParticle> labeled;
        labeled.reserve(model.tagged.size());
        for (int64_t x : model.tagged) {
            int cls = joint_class(joint, x);
            if (cls == 0) throw Error("site missing from joint labeling");
            labeled.push_back({x, cls});
        }
        return labeled;
    };

    HigherRankStepResult res;
    auto eta_map = evolve_model(label_model(sys.eta), joint.n_classes, rnd);
    std::vector<std::vector<std::pair<int64_t, int64_t>>> xi_maps;
    for (const auto& xi : sys.xis) xi_maps.push_back(evolve_model(label_model(xi), joint.n_classes, rnd));

    auto to_config = [](const std::vector<std::pair<int64_t, int64_t>>& mapping) {
        std::vector<int64_t> pos;
        pos.reserve(mapping.size());
        for (const auto& m : mapping) pos.push_back(m.second);
        std::sort(pos.begin(), pos.end());
        return ParticleConfiguration::line(std::move(pos));
    };

    res.next.eta = to_config(eta_map);
    for (const auto& m : xi_maps) res.next.xis.push_back(to_config(m));
    res.particle_steps = static_cast<int64_t>(eta_map.size());
    for (const auto& m : xi_maps) res.particle_steps += static_cast<int64_t>(m.size());

    // attractivity: coupled pairs stay coupled.  Any pair of models that
    // shared a site must share the landing of that site's particle.
    auto landing_of = [](const std::vector<std::pair<int64_t, int64_t>>& mapping, int64_t x) {
        auto it = std::lower_bound(mapping.begin(), mapping.end(), std::make_pair(x, int64_t{INT64_MIN}));
        return (it != mapping.end() && it->first == x) ? it->second : int64_t{-1};
    };
    for (int a = -1; a < n; ++a) {
        const auto& ma = a < 0 ? eta_map : xi_maps[static_cast<size_t>(a)];
        for (int b = a + 1; b < n; ++b) {
            const auto& mb = xi_maps[static_cast<size_t>(b)];
            for (const auto& mv : ma) {
                int64_t other = landing_of(mb, mv.first);
                if (other >= 0 && other != mv.second) ++res.attractivity_violations;
            }
        }
    }
    // xi-ordering preserved
    for (int i = 0; i + 1 < n; ++i) {
        const auto& a = res.next.xis[static_cast<size_t>(i)].tagged;
        const auto& b = res.next.xis[static_cast<size_t>(i + 1)].tagged;
        if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) ++res.attractivity_violations;
    }
    // class monotonicity of tracked particles in every model
    MultiClassConfiguration joint_next = assign_classes(res.next.eta, res.next.xis);
    for (int a = -1; a < n; ++a) {
        const auto& ma = a < 0 ? eta_map : xi_maps[static_cast<size_t>(a)];
        for (const auto& mv : ma) {
            int before = joint_class(joint, mv.first);
            int after = joint_class(joint_next, mv.second);
            if (after > before) ++res.class_increase_violations;
        }
    }
    return res;
}

SpeedTail tagged_speed_tail(const std::vector<int64_t>& displacements, double b2, int max_v,
                            double n_sigma) {
    if (displacements.size() < 10000) throw TooFewSamples("need at least 10^4 tagged displacements");
    SpeedTail st;
    st.samples = static_cast<int64_t>(displacements.size());
    st.max_v = max_v;
    double n = static_cast<double>(st.samples);
    for (int v = 1; v <= max_v; ++v) {
        int64_t count = 0;
        for (int64_t d : displacements)
            if (d >= v) ++count;
        double p = static_cast<double>(count) / n;
        double sig = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
        st.tail.push_back(p);
        st.sigma.push_back(sig);
        if (p > std::pow(b2, v - 1) + n_sigma * sig) st.violation = true;
    }
    return st;
}

}  // namespace sixv
