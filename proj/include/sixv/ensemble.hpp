#pragma once

#include <cstdint>
#include <vector>

#include "sixv/errors.hpp"

namespace sixv {

// Edge indicators on a rectangular window of lattice vertices
// [x0, x0+nx) x [y0, y0+ny).  vertical(x,y) is the indicator chi^(v)(x,y) of
// an arrow exiting (x,y) upward; it is stored for y in [y0-1, y0+ny) so that
// every vertex in the window has its incoming vertical edge.  horizontal(x,y)
// is chi^(h)(x,y), stored for x in [x0-1, x0+nx).
struct VertexEnsemble {
    int64_t x0 = 0, y0 = 0;
    int64_t nx = 0, ny = 0;
    std::vector<uint8_t> vert;   // (nx) * (ny+1), index (x-x0) + nx*(y-y0+1)
    std::vector<uint8_t> horiz;  // (nx+1) * (ny), index (x-x0+1) + (nx+1)*(y-y0)

    static VertexEnsemble zeros(int64_t x0, int64_t y0, int64_t nx, int64_t ny) {
        VertexEnsemble e;
        e.x0 = x0;
        e.y0 = y0;
        e.nx = nx;
        e.ny = ny;
        e.vert.assign(static_cast<size_t>(nx * (ny + 1)), 0);
        e.horiz.assign(static_cast<size_t>((nx + 1) * ny), 0);
        return e;
    }

    uint8_t& vertical(int64_t x, int64_t y) {
        return vert[static_cast<size_t>((x - x0) + nx * (y - y0 + 1))];
    }
    uint8_t vertical(int64_t x, int64_t y) const {
        return vert[static_cast<size_t>((x - x0) + nx * (y - y0 + 1))];
    }
    uint8_t& horizontal(int64_t x, int64_t y) {
        return horiz[static_cast<size_t>((x - x0 + 1) + (nx + 1) * (y - y0))];
    }
    uint8_t horizontal(int64_t x, int64_t y) const {
        return horiz[static_cast<size_t>((x - x0 + 1) + (nx + 1) * (y - y0))];
    }

    int64_t horizontal_count() const {
        int64_t s = 0;
        for (uint8_t h : horiz) s += h;
        return s;
    }
};

// Arrow conservation i1 + j1 = i2 + j2 with all indicators in {0,1} at every
// vertex of the window; binary conservation is equivalent to the local
// configuration being one of the six allowed ones.
bool validate_ensemble(const VertexEnsemble& e);

}  // namespace sixv
