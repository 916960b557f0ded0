#include "sixv/ensemble.hpp"
#include "sixv/params.hpp"

namespace sixv {

ModelParams make_params(double b1, double b2, double lambda) {
    if (!(b1 > 0.0 && b1 < 1.0) || !(b2 > 0.0 && b2 < 1.0))
        throw RangeViolation("b1 and b2 must lie in (0,1)");
    if (!(lambda > 0.0)) throw RangeViolation("lambda must be positive");
    if (!(b1 < b2)) throw OrderingViolation("require b1 < b2");
    ModelParams p;
    p.b1 = b1;
    p.b2 = b2;
    p.lambda = lambda;
    p.kappa = (1.0 - b1) / (1.0 - b2);
    return p;
}

bool validate_ensemble(const VertexEnsemble& e) {
    for (int64_t y = e.y0; y < e.y0 + e.ny; ++y) {
        for (int64_t x = e.x0; x < e.x0 + e.nx; ++x) {
            int i1 = e.vertical(x, y - 1);
            int j1 = e.horizontal(x - 1, y);
            int i2 = e.vertical(x, y);
            int j2 = e.horizontal(x, y);
            if ((i1 | j1 | i2 | j2) > 1) return false;
            if (i1 + j1 != i2 + j2) return false;
        }
    }
    return true;
}

}  // namespace sixv
