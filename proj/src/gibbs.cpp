#include "sixv/gibbs.hpp"

#include <cmath>

#include "sixv/dynamics.hpp"
#include "sixv/pde.hpp"

namespace sixv {

VertexEnsemble sample_quadrant(double rho, int64_t n, const RandomField& field, const ModelParams& params) {
    if (n < 2) throw RangeViolation("triangle size must be >= 2");
    if (!(rho >= 0.0 && rho <= 1.0)) throw RangeViolation("rho must lie in [0,1]");
    FluxModel flux(params);
    double phi_rho = flux.phi(rho);

    // vertices (x, y) with 1 <= x, y and x + y <= n
    VertexEnsemble e = VertexEnsemble::zeros(1, 1, n - 1, n - 1);
    for (int64_t d = 2; d <= n; ++d) {
        for (int64_t x = 1; x < d; ++x) {
            int64_t y = d - x;
            int i1 = (y == 1) ? (field.uniform(Stream::QuadrantXAxis, 0, x) < rho ? 1 : 0)
                              : e.vertical(x, y - 1);
            int j1 = (x == 1) ? (field.uniform(Stream::QuadrantYAxis, 0, y) < phi_rho ? 1 : 0)
                              : e.horizontal(x - 1, y);
            int i2, j2;
            if (i1 == j1) {
                i2 = i1;
                j2 = j1;
            } else {
                double stay = (i1 == 1) ? params.b1 : params.b2;
                bool keep = field.uniform(Stream::QuadrantVertex, y, x) < stay;
                if (keep) {
                    i2 = i1;
                    j2 = j1;
                } else {
                    i2 = j1;
                    j2 = i1;
                }
            }
            e.vertical(x, y) = static_cast<uint8_t>(i2);
            e.horizontal(x, y) = static_cast<uint8_t>(j2);
        }
    }
    // boundary rows of the storage, for validation of the filled region
    for (int64_t x = 1; x < n; ++x)
        e.vertical(x, 0) = static_cast<uint8_t>(field.uniform(Stream::QuadrantXAxis, 0, x) < rho ? 1 : 0);
    for (int64_t y = 1; y < n; ++y)
        e.horizontal(0, y) =
            static_cast<uint8_t>(field.uniform(Stream::QuadrantYAxis, 0, y) < phi_rho ? 1 : 0);
    return e;
}

namespace {

VertexEnsemble crop(const VertexEnsemble& e, int64_t x0, int64_t y0, int64_t w) {
    VertexEnsemble out = VertexEnsemble::zeros(x0, y0, w, w);
    for (int64_t y = y0 - 1; y < y0 + w; ++y)
        for (int64_t x = x0; x < x0 + w; ++x) out.vertical(x, y) = e.vertical(x, y);
    for (int64_t y = y0; y < y0 + w; ++y)
        for (int64_t x = x0 - 1; x < x0 + w; ++x) out.horizontal(x, y) = e.horizontal(x, y);
    return out;
}

}  // namespace

GibbsWindowSample sample_mu_window(double rho, int64_t w, const RandomField& field,
                                   const ModelParams& params, GibbsMethod method, int64_t t_override,
                                   int64_t slab_override) {
    if (w < 1) throw RangeViolation("window side must be >= 1");
    if (!(rho >= 0.0 && rho <= 1.0)) throw RangeViolation("rho must lie in [0,1]");
    GibbsWindowSample out;
    out.rho = rho;
    out.provenance = method;

    if (method == GibbsMethod::Quadrant) {
        int64_t c = 8 + w;
        int64_t n = 2 * (c + w + 2);
        VertexEnsemble tri = sample_quadrant(rho, n, field, params);
        out.boundary_distance = c;
        out.window = crop(tri, c, c, w);
        return out;
    }

    int64_t t = t_override > 0 ? t_override : std::max<int64_t>(16, 8 * w);
    int64_t per_side = static_cast<int64_t>(std::ceil(2.0 / (1.0 - params.b2))) * t + w;
    int64_t slab = slab_override > 0 ? slab_override : 2 * per_side + 2 * w;
    if (t < w + 1 || slab < 2 * w + 2 * t * static_cast<int64_t>(std::ceil(2.0 / (1.0 - params.b2))))
        throw WindowTooLarge("halo rule violated: enlarge T or the slab");

    int64_t x_lo = -w / 2 - 1, x_hi = x_lo + w + 1;  // window plus one site of margin
    // materialize the full slab of Bernoulli data; the window trajectory
    // helper reuses the same left-halo logic internally
    std::vector<int64_t> particles;
    for (int64_t x = -slab / 2; x <= slab / 2; ++x)
        if (field.uniform(Stream::InitialData, 0, x) < rho) particles.push_back(x);

    int64_t y0 = t - w + 1;
    VertexEnsemble e = VertexEnsemble::zeros(x_lo, y0, w + 2, w);
    std::vector<int64_t> next(particles.size());
    for (int64_t s = 1; s <= t; ++s) {
        bool record = s >= y0 - 1;
        bool have_prev = false;
        int64_t prev_new = 0;
        for (size_t k = 0; k < particles.size(); ++k) {
            int64_t x = particles[k];
            bool pushed = have_prev && prev_new == x;
            int64_t landing;
            if (!pushed && field.chi(s, x) == 1) {
                landing = x;
            } else {
                landing = x + field.jump(s, x);
                if (k + 1 < particles.size()) landing = std::min(landing, particles[k + 1]);
            }
            if (record && s >= y0) {
                for (int64_t z = std::max(x, x_lo - 1); z < std::min(landing, x_hi + 1); ++z)
                    e.horizontal(z, s) = 1;
            }
            next[k] = landing;
            prev_new = landing;
            have_prev = true;
        }
        particles.swap(next);
        if (s >= y0 - 1) {
            for (int64_t p : particles)
                if (p >= x_lo && p <= x_hi) e.vertical(p, s) = 1;
        }
    }
    out.boundary_distance = t;
    out.window = crop(e, x_lo + 1, y0, w);
    return out;
}

uint64_t pack_window(const VertexEnsemble& e) {
    int64_t bits = e.nx * (e.ny + 1) + (e.nx + 1) * e.ny;
    if (bits > 64) throw MixedShapes("window too large to pack into 64 bits");
    uint64_t key = 0;
    int shift = 0;
    for (int64_t y = e.y0 - 1; y < e.y0 + e.ny; ++y)
        for (int64_t x = e.x0; x < e.x0 + e.nx; ++x) key |= static_cast<uint64_t>(e.vertical(x, y)) << shift++;
    for (int64_t y = e.y0; y < e.y0 + e.ny; ++y)
        for (int64_t x = e.x0 - 1; x < e.x0 + e.nx; ++x)
            key |= static_cast<uint64_t>(e.horizontal(x, y)) << shift++;
    return key;
}

void WindowHistogram::add(const VertexEnsemble& window) {
    if (total == 0 && counts.empty()) {
        nx = window.nx;
        ny = window.ny;
    }
    if (window.nx != nx || window.ny != ny) throw MixedShapes("window shapes differ");
    ++counts[pack_window(window)];
    ++total;
}

WindowHistogram window_histogram(const std::vector<GibbsWindowSample>& samples) {
    WindowHistogram h;
    for (const auto& s : samples) h.add(s.window);
    return h;
}

}  // namespace sixv
