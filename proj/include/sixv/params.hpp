#pragma once

#include "sixv/errors.hpp"

namespace sixv {

// Jump parameters of the model. Throughout we require 0 < b1 < b2 < 1, so
// that kappa = (1-b1)/(1-b2) > 1 and the flux is strictly concave.
struct ModelParams {
    double b1 = 0.25;
    double b2 = 0.5;
    double lambda = 1.0;  // aspect ratio L/N of the cylinder
    double kappa = 1.5;
};

ModelParams make_params(double b1, double b2, double lambda);

}  // namespace sixv
