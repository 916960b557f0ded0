#include "sixv/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace sixv {

ParticleConfiguration step_line(const ParticleConfiguration& config, const StepRandomness& rnd) {
    if (config.topology == Topology::Ring) throw DomainMismatch("step_line expects a line configuration");
    const auto& p = config.tagged;
    std::vector<int64_t> out(p.size());
    bool have_prev = false;
    int64_t prev_new = 0;
    for (size_t k = 0; k < p.size(); ++k) {
        int64_t x = p[k];
        bool pushed = have_prev && prev_new == x;
        int64_t landing;
        if (!pushed && rnd.chi(x) == 1) {
            landing = x;
        } else {
            landing = x + rnd.jump(x);
            if (k + 1 < p.size()) landing = std::min(landing, p[k + 1]);
        }
        out[k] = landing;
        prev_new = landing;
        have_prev = true;
    }
    ParticleConfiguration next = config;
    next.tagged = std::move(out);
    next.validate();
    return next;
}

int64_t Trajectory::horizontal_edge_count() const {
    int64_t total = 0;
    for (const auto& row : moves)
        for (const auto& mv : row) total += mv.second - mv.first;
    return total;
}

VertexEnsemble Trajectory::extract_ensemble(int64_t x_lo, int64_t x_hi) const {
    int64_t t_steps = steps();
    VertexEnsemble e = VertexEnsemble::zeros(x_lo, 1, x_hi - x_lo + 1, t_steps);
    for (int64_t t = 0; t <= t_steps; ++t)
        for (int64_t x : states[static_cast<size_t>(t)].tagged)
            if (x >= x_lo && x <= x_hi) e.vertical(x, t) = 1;
    for (int64_t t = 1; t <= t_steps; ++t)
        for (const auto& mv : moves[static_cast<size_t>(t - 1)])
            for (int64_t z = std::max(mv.first, x_lo - 1); z < std::min(mv.second, x_hi + 1); ++z)
                e.horizontal(z, t) = 1;
    return e;
}

Trajectory run_line(const ParticleConfiguration& init, int64_t steps, const RandomField& field,
                    const ModelParams& params) {
    Trajectory tr;
    tr.params = params;
    tr.states.push_back(init);
    for (int64_t t = 1; t <= steps; ++t) {
        const auto& cur = tr.states.back();
        ParticleConfiguration next = step_line(cur, StepRandomness(field, t));
        std::vector<std::pair<int64_t, int64_t>> mv;
        for (size_t k = 0; k < cur.tagged.size(); ++k)
            if (next.tagged[k] > cur.tagged[k]) mv.emplace_back(cur.tagged[k], next.tagged[k]);
        tr.moves.push_back(std::move(mv));
        tr.states.push_back(std::move(next));
    }
    return tr;
}

namespace {

using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 mat_mul(const Mat2& a, const Mat2& b) {
    Mat2 c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return c;
}

void normalize(Mat2& m) {
    double mx = std::max(std::max(m[0][0], m[0][1]), std::max(m[1][0], m[1][1]));
    if (mx > 0.0)
        for (auto& row : m)
            for (double& v : row) v /= mx;
}

// w(i1, j1; i2, j2) from the stochastic weights; zero off the six allowed
// configurations.
double vertex_weight(int i1, int j1, int i2, int j2, double b1, double b2) {
    if (i1 + j1 != i2 + j2) return 0.0;
    if (i1 == i2 && j1 == j2) {
        if (i1 == 1 && j1 == 0) return b1;
        if (i1 == 0 && j1 == 1) return b2;
        return 1.0;  // (0,0;0,0) and (1,1;1,1)
    }
    if (i1 == 1 && j1 == 0) return 1.0 - b1;
    if (i1 == 0 && j1 == 1) return 1.0 - b2;
    return 0.0;
}

Mat2 site_matrix(int eta, double b1, double b2) {
    Mat2 m{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            int i2 = eta + a - b;
            m[a][b] = (i2 == 0 || i2 == 1) ? vertex_weight(eta, a, i2, b, b1, b2) : 0.0;
        }
    return m;
}

}  // namespace

ParticleConfiguration step_ring(const ParticleConfiguration& config, const RandomField& field, int64_t t,
                                std::vector<uint8_t>* horizontal_out) {
    if (config.topology != Topology::Ring) throw DomainMismatch("step_ring expects a ring configuration");
    int64_t n = config.ring_size;
    std::vector<uint8_t> eta(static_cast<size_t>(n), 0);
    for (int64_t x : config.tagged) eta[static_cast<size_t>(x)] = 1;

    std::vector<Mat2> site(static_cast<size_t>(n));
    for (int64_t x = 0; x < n; ++x)
        site[static_cast<size_t>(x)] = site_matrix(eta[static_cast<size_t>(x)], field.b1(), field.b2());

    // suffix[x] = M_x M_{x+1} ... M_{n-1}, rescaled; suffix[n] = identity
    std::vector<Mat2> suffix(static_cast<size_t>(n) + 1);
    suffix[static_cast<size_t>(n)] = Mat2{{{1.0, 0.0}, {0.0, 1.0}}};
    for (int64_t x = n - 1; x >= 0; --x) {
        suffix[static_cast<size_t>(x)] = mat_mul(site[static_cast<size_t>(x)], suffix[static_cast<size_t>(x) + 1]);
        normalize(suffix[static_cast<size_t>(x)]);
    }

    double w0 = suffix[0][0][0], w1 = suffix[0][1][1];
    double z = w0 + w1;
    if (!(z > 0.0)) throw DegenerateRow("both seam weights vanish");
    int h0 = field.uniform(Stream::RingSeam, t, 0) * z < w0 ? 0 : 1;

    std::vector<uint8_t> h(static_cast<size_t>(n) + 1);
    h[0] = static_cast<uint8_t>(h0);
    for (int64_t x = 0; x < n; ++x) {
        int a = h[static_cast<size_t>(x)];
        double p0 = site[static_cast<size_t>(x)][a][0] * suffix[static_cast<size_t>(x) + 1][0][h0];
        double p1 = site[static_cast<size_t>(x)][a][1] * suffix[static_cast<size_t>(x) + 1][1][h0];
        double s = p0 + p1;
        if (!(s > 0.0)) throw DegenerateRow("conditional edge weights vanish");
        h[static_cast<size_t>(x) + 1] =
            static_cast<uint8_t>(field.uniform(Stream::RingEdge, t, x) * s < p0 ? 0 : 1);
    }

    std::vector<int64_t> next;
    next.reserve(config.tagged.size());
    for (int64_t x = 0; x < n; ++x) {
        int i2 = eta[static_cast<size_t>(x)] + h[static_cast<size_t>(x)] - h[static_cast<size_t>(x) + 1];
        if (i2 == 1) next.push_back(x);
    }
    if (horizontal_out) {
        horizontal_out->assign(h.begin(), h.begin() + static_cast<long>(n));
    }
    return ParticleConfiguration::ring(n, std::move(next));
}

namespace {

int64_t tail_depth(double b2, double tol) {
    // smallest D with b2^D / (1 - b2) <= tol
    int64_t d = 1;
    double mass = b2 / (1.0 - b2);
    while (mass > tol && d < 4096) {
        mass *= b2;
        ++d;
    }
    return d;
}

}  // namespace

ParticleConfiguration step_ring_particle(const ParticleConfiguration& config, const RandomField& field,
                                         int64_t t,
                                         std::vector<std::pair<int64_t, int64_t>>* moves_out) {
    if (config.topology != Topology::Ring) throw DomainMismatch("ring configuration required");
    int64_t n = config.ring_size;
    if (config.tagged.empty()) {
        if (moves_out) moves_out->clear();
        return config;
    }
    int64_t depth = std::min<int64_t>(n - 1, tail_depth(field.b2(), 1e-15));
    auto wrap = [n](int64_t x) { return ((x % n) + n) % n; };

    int64_t cut = -1;
    for (int64_t c = 0; c < n; ++c) {
        if (field.chi(t, c) != 0) continue;
        bool ok = true;
        for (int64_t d = 1; d <= depth; ++d)
            if (field.jump(t, wrap(c - d)) > d) {
                ok = false;
                break;
            }
        if (ok) {
            cut = c;
            break;
        }
    }
    if (cut < 0) return step_ring(config, field, t, nullptr);  // practically unreachable

    // process particles cyclically starting from the first at or right of the
    // cut, in unwrapped coordinates
    const auto& p = config.tagged;
    size_t m = p.size();
    size_t start = 0;
    while (start < m && p[start] < cut) ++start;
    if (start == m) start = 0;

    std::vector<int64_t> unwrapped(m), landing(m);
    for (size_t i = 0; i < m; ++i) {
        size_t idx = (start + i) % m;
        unwrapped[i] = p[idx] + (idx < start ? n : 0);
    }
    for (size_t i = 0; i < m; ++i) {
        int64_t x = unwrapped[i];
        int64_t cap = (i + 1 < m) ? unwrapped[i + 1] : unwrapped[0] + n;
        bool pushed = i > 0 && landing[i - 1] == x;
        int64_t site = wrap(x);
        if (!pushed && field.chi(t, site) == 1) {
            landing[i] = x;
        } else {
            landing[i] = std::min(x + field.jump(t, site), cap);
        }
    }
    if (moves_out) {
        moves_out->clear();
        for (size_t i = 0; i < m; ++i)
            if (landing[i] > unwrapped[i]) moves_out->emplace_back(wrap(unwrapped[i]), wrap(unwrapped[i]) + (landing[i] - unwrapped[i]));
    }
    std::vector<int64_t> next(m);
    for (size_t i = 0; i < m; ++i) next[i] = wrap(landing[i]);
    std::sort(next.begin(), next.end());
    return ParticleConfiguration::ring(n, std::move(next));
}

VertexEnsemble RingRun::extract_ensemble(int64_t x_lo, int64_t x_hi, int64_t y_lo, int64_t y_hi) const {
    VertexEnsemble e = VertexEnsemble::zeros(x_lo, y_lo, x_hi - x_lo + 1, y_hi - y_lo + 1);
    auto wrap = [this](int64_t x) { return ((x % n) + n) % n; };
    for (int64_t y = y_lo - 1; y <= y_hi; ++y)
        for (int64_t x = x_lo; x <= x_hi; ++x)
            e.vertical(x, y) = occupancy[static_cast<size_t>(y)][static_cast<size_t>(wrap(x))];
    // the sampler's h[x] is the edge entering vertex x; chi^(h)(x, y) is the
    // edge leaving it
    for (int64_t y = y_lo; y <= y_hi; ++y)
        for (int64_t x = x_lo - 1; x <= x_hi; ++x)
            e.horizontal(x, y) = horizontal[static_cast<size_t>(y - 1)][static_cast<size_t>(wrap(x + 1))];
    return e;
}

int64_t RingRun::horizontal_edge_count() const {
    int64_t total = 0;
    for (const auto& row : horizontal)
        for (uint8_t hbit : row) total += hbit;
    return total;
}

RingRun run_ring(const ParticleConfiguration& init, int64_t steps, const RandomField& field,
                 const ModelParams& params) {
    RingRun run;
    run.params = params;
    run.n = init.ring_size;
    ParticleConfiguration cur = init;
    auto to_occ = [&](const ParticleConfiguration& c) {
        std::vector<uint8_t> occ(static_cast<size_t>(run.n), 0);
        for (int64_t x : c.tagged) occ[static_cast<size_t>(x)] = 1;
        return occ;
    };
    run.occupancy.push_back(to_occ(cur));
    for (int64_t t = 1; t <= steps; ++t) {
        std::vector<uint8_t> h;
        cur = step_ring(cur, field, t, &h);
        run.horizontal.push_back(std::move(h));
        run.occupancy.push_back(to_occ(cur));
    }
    return run;
}

SeparatingScan find_separating_with(const std::function<int(int64_t, int64_t)>& chi,
                                    const std::function<int64_t(int64_t, int64_t)>& jump, double b2,
                                    int64_t nsteps, int64_t window_lo, int64_t window_hi,
                                    double tail_tolerance) {
    if (nsteps < 1) throw RangeViolation("nsteps must be >= 1");
    SeparatingScan scan;
    scan.truncation_depth = tail_depth(b2, tail_tolerance);
    for (int64_t k = window_lo; k <= window_hi; ++k) {
        bool ok = true;
        for (int64_t t = 1; t <= nsteps && ok; ++t) {
            if (chi(t, k + t) != 0) {
                ok = false;
                break;
            }
            for (int64_t d = 1; d <= scan.truncation_depth; ++d)
                if (jump(t, k + t - d) > d) {
                    ok = false;
                    break;
                }
        }
        if (ok) scan.found.push_back(k);
    }
    if (scan.found.empty())
        throw NoneFound("no separating integer in [" + std::to_string(window_lo) + "," +
                        std::to_string(window_hi) + "]");
    return scan;
}

SeparatingScan find_separating(const RandomField& field, int64_t nsteps, int64_t window_lo,
                               int64_t window_hi, double tail_tolerance) {
    return find_separating_with([&](int64_t t, int64_t x) { return field.chi(t, x); },
                                [&](int64_t t, int64_t x) { return field.jump(t, x); }, field.b2(),
                                nsteps, window_lo, window_hi, tail_tolerance);
}

namespace {

// probability that a fixed integer is separating, used to decide whether the
// exact bracketing search is worth attempting
double separating_site_probability(const ModelParams& p, int64_t nsteps) {
    double prod = 1.0, pw = p.b2;
    for (int i = 0; i < 200 && pw > 1e-18; ++i) {
        prod *= (1.0 - pw);
        pw *= p.b2;
    }
    return std::pow((1.0 - p.b1) * prod, static_cast<double>(nsteps));
}

}  // namespace

WindowTrajectory evolve_half_plane_infinite(const std::function<int(int64_t)>& initial, int64_t nsteps,
                                            int64_t window_lo, int64_t window_hi, const RandomField& field,
                                            const ModelParams& params, int64_t widen_cap) {
    WindowTrajectory out;
    out.x_lo = window_lo;
    out.x_hi = window_hi;

    int64_t slab_lo, slab_hi = window_hi;
    bool bracketed = false;
    double psep = separating_site_probability(params, nsteps);
    if (psep * static_cast<double>(widen_cap) >= 8.0) {
        try {
            // block (R_i + t, R_{i+1} + t] must cover the window at every
            // t in [0, nsteps]: R_i <= window_lo - nsteps - 1, R_{i+1} >= window_hi
            auto left = find_separating(field, nsteps, window_lo - nsteps - widen_cap, window_lo - nsteps - 1);
            auto right = find_separating(field, nsteps, window_hi, window_hi + widen_cap);
            slab_lo = left.found.back() + 1;
            slab_hi = right.found.front();
            bracketed = true;
        } catch (const NoneFound&) {
            bracketed = false;
        }
    }
    if (!bracketed) {
        // halo sized by the discrepancy speed bound: second-class particles
        // travel at most ~2t/(1-b2) with exponentially small exceptions
        int64_t halo = static_cast<int64_t>(std::ceil(2.0 * static_cast<double>(nsteps) / (1.0 - params.b2))) +
                       std::max<int64_t>(64, nsteps);
        slab_lo = window_lo - halo;
        slab_hi = window_hi;
    }
    out.slab_lo = slab_lo;
    out.slab_hi = slab_hi;
    out.used_bracketing = bracketed;

    std::vector<int64_t> particles;
    for (int64_t x = slab_lo; x <= slab_hi; ++x)
        if (initial(x)) particles.push_back(x);

    int64_t width = window_hi - window_lo + 1;
    auto record_row = [&](const std::vector<int64_t>& pos) {
        std::vector<uint8_t> row(static_cast<size_t>(width), 0);
        for (int64_t x : pos)
            if (x >= window_lo && x <= window_hi) row[static_cast<size_t>(x - window_lo)] = 1;
        out.occupancy.push_back(std::move(row));
    };
    record_row(particles);

    std::vector<int64_t> next(particles.size());
    for (int64_t t = 1; t <= nsteps; ++t) {
        std::vector<uint8_t> hrow(static_cast<size_t>(width), 0);
        bool have_prev = false;
        int64_t prev_new = 0;
        for (size_t k = 0; k < particles.size(); ++k) {
            int64_t x = particles[k];
            bool pushed = have_prev && prev_new == x;
            int64_t landing;
            if (!pushed && field.chi(t, x) == 1) {
                landing = x;
            } else {
                landing = x + field.jump(t, x);
                if (k + 1 < particles.size()) landing = std::min(landing, particles[k + 1]);
            }
            for (int64_t z = std::max(x, window_lo); z < std::min(landing, window_hi + 1); ++z)
                hrow[static_cast<size_t>(z - window_lo)] = 1;
            next[k] = landing;
            prev_new = landing;
            have_prev = true;
        }
        particles.swap(next);
        out.horizontal.push_back(std::move(hrow));
        record_row(particles);
    }
    return out;
}

std::function<int(int64_t)> bernoulli_initial(const RandomField& field, double rho) {
    return [field, rho](int64_t x) { return field.uniform(Stream::InitialData, 0, x) < rho ? 1 : 0; };
}

std::function<int(int64_t)> double_sided_initial(const RandomField& field, double theta, double rho) {
    return [field, theta, rho](int64_t x) {
        double p = x <= 0 ? theta : rho;
        return field.uniform(Stream::InitialData, 0, x) < p ? 1 : 0;
    };
}

ParticleConfiguration shift_S(const ParticleConfiguration& config, int64_t m) {
    ParticleConfiguration out = config;
    if (config.topology == Topology::Ring) {
        for (auto& x : out.tagged) x = ((x - m) % config.ring_size + config.ring_size) % config.ring_size;
        std::sort(out.tagged.begin(), out.tagged.end());
    } else {
        for (auto& x : out.tagged) x -= m;
    }
    return out;
}

ParticleConfiguration evolve_M(const ParticleConfiguration& config, int64_t t, const RandomField& field,
                               int64_t t0) {
    ParticleConfiguration cur = config;
    for (int64_t s = 0; s < t; ++s) {
        if (cur.topology == Topology::Ring)
            cur = step_ring(cur, field, t0 + s, nullptr);
        else
            cur = step_line(cur, StepRandomness(field, t0 + s));
    }
    return cur;
}

}  // namespace sixv
