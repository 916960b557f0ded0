#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sixv/ensemble.hpp"
#include "sixv/params.hpp"
#include "sixv/randomness.hpp"

namespace sixv {

// Quadrant growth of the translation-invariant Gibbs measure: boundary
// entrances are Bernoulli(phi(rho)) on the y-axis and Bernoulli(rho) on the
// x-axis, and each diagonal is completed from the stochastic weights.
// Returns the ensemble on vertices [1, n-1]^2 intersected with x + y <= n.
VertexEnsemble sample_quadrant(double rho, int64_t n, const RandomField& field, const ModelParams& params);

enum class GibbsMethod { HalfPlane, Quadrant };

struct GibbsWindowSample {
    double rho = 0.0;
    GibbsMethod provenance = GibbsMethod::HalfPlane;
    int64_t boundary_distance = 0;  // steps run / distance from the axes
    VertexEnsemble window;
};

// A w x w vertex window distributed as the mu(rho) restriction.  The default
// half-plane method runs Bernoulli(rho) product data on a slab wide enough
// that lateral boundaries cannot reach the window (W >= 2w + 2T ceil(2/(1-b2)),
// T >= 8w) and reads the window at the top; the quadrant method reads a
// window far from both axes of the quadrant construction.
GibbsWindowSample sample_mu_window(double rho, int64_t w, const RandomField& field,
                                   const ModelParams& params,
                                   GibbsMethod method = GibbsMethod::HalfPlane, int64_t t_override = 0,
                                   int64_t slab_override = 0);

// canonical bit-packing of a window's edge indicators: vertical edges
// bottom-to-top then left-to-right rows, followed by horizontal edges; the
// window must carry at most 64 bits of edges
uint64_t pack_window(const VertexEnsemble& e);

struct WindowHistogram {
    int64_t nx = 0, ny = 0;
    std::map<uint64_t, int64_t> counts;
    int64_t total = 0;

    void add(const VertexEnsemble& window);
};

WindowHistogram window_histogram(const std::vector<GibbsWindowSample>& samples);

}  // namespace sixv
