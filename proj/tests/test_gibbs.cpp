#include <cmath>

#include "doctest.h"
#include "sixv/gibbs.hpp"
#include "sixv/pde.hpp"
#include "sixv/stats.hpp"

using namespace sixv;

namespace {
const ModelParams kParams = make_params(0.25, 0.5, 1.0);
const FluxModel kFlux(kParams);
}  // namespace

TEST_CASE("quadrant growth: degenerate densities") {
    RandomField f(1, kParams);
    VertexEnsemble empty = sample_quadrant(0.0, 24, f, kParams);
    for (int64_t y = 1; y < 12; ++y)
        for (int64_t x = 1; x < 12; ++x) {
            CHECK(empty.vertical(x, y) == 0);
            CHECK(empty.horizontal(x, y) == 0);
        }
    VertexEnsemble full = sample_quadrant(1.0, 24, f, kParams);
    for (int64_t y = 1; y < 12; ++y)
        for (int64_t x = 1; x < 12; ++x) CHECK(full.vertical(x, y) == 1);
}

namespace {

// the filled region of a quadrant sample is the triangle x + y <= n; crop a
// square inside it so validate_ensemble sees only assigned vertices
VertexEnsemble crop_square(const VertexEnsemble& e, int64_t lo, int64_t hi) {
    VertexEnsemble out = VertexEnsemble::zeros(lo, lo, hi - lo + 1, hi - lo + 1);
    for (int64_t y = lo - 1; y <= hi; ++y)
        for (int64_t x = lo; x <= hi; ++x) out.vertical(x, y) = e.vertical(x, y);
    for (int64_t y = lo; y <= hi; ++y)
        for (int64_t x = lo - 1; x <= hi; ++x) out.horizontal(x, y) = e.horizontal(x, y);
    return out;
}

}  // namespace

TEST_CASE("quadrant growth: ensembles validate and edge means match the slope") {
    const double rho = 0.4;
    std::vector<double> v_means, h_means;
    for (uint64_t rep = 0; rep < 40; ++rep) {
        RandomField f = RandomField(31, kParams).replica(rep);
        VertexEnsemble e = sample_quadrant(rho, 64, f, kParams);
        CHECK(validate_ensemble(crop_square(e, 1, 30)));
        double v = 0.0, h = 0.0;
        int64_t n = 0;
        for (int64_t y = 12; y <= 24; ++y)
            for (int64_t x = 12; x <= 24; ++x) {
                v += e.vertical(x, y);
                h += e.horizontal(x, y);
                ++n;
            }
        v_means.push_back(v / n);
        h_means.push_back(h / n);
    }
    auto vm = mean_stderr(v_means);
    auto hm = mean_stderr(h_means);
    CHECK(std::abs(vm.mean - rho) <= 4.0 * vm.stderr_);
    CHECK(std::abs(hm.mean - kFlux.phi(rho)) <= 4.0 * hm.stderr_);
}

TEST_CASE("slope identity along the conical singularity curve") {
    for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        std::vector<double> v_means, h_means;
        for (uint64_t rep = 0; rep < 24; ++rep) {
            RandomField f = RandomField(1000 + static_cast<uint64_t>(rho * 100), kParams).replica(rep);
            VertexEnsemble e = sample_quadrant(rho, 56, f, kParams);
            double v = 0.0, h = 0.0;
            int64_t n = 0;
            for (int64_t y = 10; y <= 22; ++y)
                for (int64_t x = 10; x <= 22; ++x) {
                    v += e.vertical(x, y);
                    h += e.horizontal(x, y);
                    ++n;
                }
            v_means.push_back(v / n);
            h_means.push_back(h / n);
        }
        auto vm = mean_stderr(v_means);
        auto hm = mean_stderr(h_means);
        CHECK(std::abs(vm.mean - rho) <= 4.0 * vm.stderr_ + 1e-9);
        CHECK(std::abs(hm.mean - kFlux.phi(rho)) <= 4.0 * hm.stderr_ + 1e-9);
    }
}

TEST_CASE("mu window sampler: single-edge marginals from both constructions") {
    const double rho = 0.4;
    for (auto method : {GibbsMethod::HalfPlane, GibbsMethod::Quadrant}) {
        int64_t n = 4000;
        double v = 0.0, h = 0.0;
        for (int64_t rep = 0; rep < n; ++rep) {
            RandomField f = RandomField(77, kParams).replica(static_cast<uint64_t>(rep));
            GibbsWindowSample s = sample_mu_window(rho, 1, f, kParams, method);
            CHECK(validate_ensemble(s.window));
            v += s.window.vertical(s.window.x0, s.window.y0);
            h += s.window.horizontal(s.window.x0, s.window.y0);
        }
        double sv = std::sqrt(rho * (1 - rho) / n);
        double ph = kFlux.phi(rho);
        double sh = std::sqrt(ph * (1 - ph) / n);
        CHECK(std::abs(v / n - rho) <= 4.0 * sv);
        CHECK(std::abs(h / n - ph) <= 4.0 * sh);
    }
}

TEST_CASE("broken-line independence of the boundary family") {
    // along the L-shaped family, products of means match means of products
    const double rho = 0.35;
    const int64_t n = 6000;
    double h1 = 0, h2 = 0, v1 = 0, v2 = 0, h1h2 = 0, h1v1 = 0, v1v2 = 0;
    for (int64_t rep = 0; rep < n; ++rep) {
        RandomField f = RandomField(5150, kParams).replica(static_cast<uint64_t>(rep));
        VertexEnsemble e = sample_quadrant(rho, 40, f, kParams);
        // family anchored at (x, y) = (8, 8)
        double a = e.horizontal(8, 9), b = e.horizontal(8, 10);
        double c = e.vertical(9, 8), d = e.vertical(10, 8);
        h1 += a;
        h2 += b;
        v1 += c;
        v2 += d;
        h1h2 += a * b;
        h1v1 += a * c;
        v1v2 += c * d;
    }
    auto cov_z = [n](double sxy, double sx, double sy) {
        double mx = sx / n, my = sy / n, mxy = sxy / n;
        double cov = mxy - mx * my;
        double sd = std::sqrt(mx * (1 - mx) * my * (1 - my) / n) + 1e-12;
        return std::abs(cov) / sd;
    };
    CHECK(cov_z(h1h2, h1, h2) <= 4.0);
    CHECK(cov_z(h1v1, h1, v1) <= 4.0);
    CHECK(cov_z(v1v2, v1, v2) <= 4.0);
}

TEST_CASE("window histograms: point masses and small-window marginals") {
    RandomField f(3, kParams);
    GibbsWindowSample s = sample_mu_window(0.5, 1, f, kParams);
    WindowHistogram h;
    h.add(s.window);
    h.add(s.window);
    CHECK(h.counts.size() == 1);
    CHECK(h.total == 2);
    VertexEnsemble other = VertexEnsemble::zeros(0, 0, 2, 2);
    CHECK_THROWS_AS(h.add(other), MixedShapes);

    // 1x1 histogram vertical marginal matches (1-rho, rho)
    const double rho = 0.4;
    int64_t n = 4000, occupied = 0;
    WindowHistogram h11;
    for (int64_t rep = 0; rep < n; ++rep) {
        RandomField g = RandomField(10101, kParams).replica(static_cast<uint64_t>(rep));
        GibbsWindowSample ws = sample_mu_window(rho, 1, g, kParams);
        h11.add(ws.window);
        occupied += ws.window.vertical(ws.window.x0, ws.window.y0);
    }
    double sd = std::sqrt(rho * (1 - rho) / n);
    CHECK(std::abs(static_cast<double>(occupied) / n - rho) <= 4.0 * sd);
    CHECK(h11.total == n);
}

TEST_CASE("translation invariance and cross-construction agreement") {
    const double rho = 0.45;
    const int64_t n = 5000;
    auto collect = [&](GibbsMethod method, uint64_t salt, int64_t w) {
        WindowHistogram h;
        for (int64_t rep = 0; rep < n; ++rep) {
            RandomField f = RandomField(salt, kParams).replica(static_cast<uint64_t>(rep));
            h.add(sample_mu_window(rho, w, f, kParams, method).window);
        }
        return h;
    };
    // two distinct interior window centers of one quadrant construction
    auto center_hist = [&](int64_t cx, uint64_t salt) {
        WindowHistogram h;
        for (int64_t rep = 0; rep < n; ++rep) {
            RandomField f = RandomField(salt, kParams).replica(static_cast<uint64_t>(rep));
            VertexEnsemble e = sample_quadrant(rho, 48, f, kParams);
            VertexEnsemble win = VertexEnsemble::zeros(cx, 9, 2, 2);
            for (int64_t y = 8; y <= 10; ++y)
                for (int64_t x = cx; x <= cx + 1; ++x) win.vertical(x, y) = e.vertical(x, y);
            for (int64_t y = 9; y <= 10; ++y)
                for (int64_t x = cx - 1; x <= cx + 1; ++x) win.horizontal(x, y) = e.horizontal(x, y);
            h.add(win);
        }
        return h;
    };
    auto ha = center_hist(9, 909);
    auto hb = center_hist(14, 909);
    Histogram sa{ha.counts, ha.total, ha.nx, ha.ny};
    Histogram sb{hb.counts, hb.total, hb.nx, hb.ny};
    CHECK(chi_square_homogeneity_p(sa, sb) > 0.001);

    for (int64_t w : {int64_t{1}, int64_t{2}}) {
        auto hq = collect(GibbsMethod::Quadrant, 2222, w);
        auto hh = collect(GibbsMethod::HalfPlane, 3333, w);
        Histogram q{hq.counts, hq.total, hq.nx, hq.ny};
        Histogram p{hh.counts, hh.total, hh.nx, hh.ny};
        CHECK(chi_square_homogeneity_p(q, p) > 0.001);
    }
}

TEST_CASE("stationarity in time of the half-plane construction") {
    const double rho = 0.45;
    const int64_t n = 5000;
    auto collect_t = [&](int64_t t_extra, uint64_t salt) {
        WindowHistogram h;
        for (int64_t rep = 0; rep < n; ++rep) {
            RandomField f = RandomField(salt, kParams).replica(static_cast<uint64_t>(rep));
            h.add(sample_mu_window(rho, 2, f, kParams, GibbsMethod::HalfPlane, 16 + t_extra).window);
        }
        return h;
    };
    auto ha = collect_t(0, 4141);
    auto hb = collect_t(5, 4242);
    Histogram sa{ha.counts, ha.total, ha.nx, ha.ny};
    Histogram sb{hb.counts, hb.total, hb.nx, hb.ny};
    CHECK(chi_square_homogeneity_p(sa, sb) > 0.001);
}

TEST_CASE("halo rule violations are reported") {
    RandomField f(5, kParams);
    CHECK_THROWS_AS(sample_mu_window(0.4, 4, f, kParams, GibbsMethod::HalfPlane, 2), WindowTooLarge);
    CHECK_THROWS_AS(sample_mu_window(-0.2, 2, f, kParams), RangeViolation);
}
