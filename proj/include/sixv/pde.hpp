#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sixv/errors.hpp"
#include "sixv/params.hpp"

namespace sixv {

// Macroscopic flux phi(z) = kappa z / ((kappa-1) z + 1), strictly increasing
// and strictly concave on [0,1]; phi'(0) = kappa, phi'(1) = 1/kappa.
struct FluxModel {
    double kappa = 1.5;

    explicit FluxModel(double k) : kappa(k) {
        if (!(k > 1.0)) throw RangeViolation("kappa must exceed 1");
    }
    explicit FluxModel(const ModelParams& p) : FluxModel(p.kappa) {}

    double phi(double z) const { return kappa * z / ((kappa - 1.0) * z + 1.0); }
    double phi_prime(double z) const {
        double d = (kappa - 1.0) * z + 1.0;
        return kappa / (d * d);
    }
    // inverse of phi' on [1/kappa, kappa]
    double phi_prime_inverse(double xi) const {
        if (!(xi >= 1.0 / kappa - 1e-12 && xi <= kappa + 1e-12))
            throw RangeViolation("phi' inverse argument outside [1/kappa, kappa]");
        return (std::sqrt(kappa / xi) - 1.0) / (kappa - 1.0);
    }
};

enum class ProfileDomain { Line, Torus };

// Piecewise-constant density: values[i] on [breakpoints[i], breakpoints[i+1]).
// Line profiles vanish outside [breakpoints.front(), breakpoints.back()];
// torus profiles must cover one full period.
struct DensityProfile {
    ProfileDomain domain = ProfileDomain::Line;
    double period = 1.0;  // torus only
    std::vector<double> breakpoints;
    std::vector<double> values;

    static DensityProfile line(std::vector<double> breaks, std::vector<double> vals);
    static DensityProfile torus(std::vector<double> breaks, std::vector<double> vals, double period = 1.0);
    static DensityProfile constant_torus(double v, double period = 1.0);

    double value_at(double x) const;
    double cumulative(double x) const;  // integral from domain start (line: -inf) to x
    double total_mass() const;
    double total_variation() const;
    void validate() const;
};

double shock_speed(double theta, double rho, const FluxModel& flux);

// Entropy solution of the Riemann problem with left state theta, right state
// rho, evaluated at the similarity coordinate xi = x/t.
double riemann_solution(double theta, double rho, double xi, const FluxModel& flux);

// Space-time record of a finite-volume evolution; rows[n][i] is the cell
// average on [x0 + i dx, x0 + (i+1) dx) at time n*dt.
struct PdeField {
    ProfileDomain domain = ProfileDomain::Torus;
    double x0 = 0.0, dx = 0.0, dt = 0.0;
    double period = 1.0;
    std::vector<std::vector<double>> rows;

    int64_t nx() const { return rows.empty() ? 0 : static_cast<int64_t>(rows[0].size()); }
    int64_t nt() const { return static_cast<int64_t>(rows.size()); }
};

// First-order upwind scheme; since phi is strictly increasing this is exactly
// the Godunov flux F(u_l, u_r) = phi(u_l).  CFL: dt = 0.9 dx / kappa.
DensityProfile evolve_P(const DensityProfile& u, double t, double dx, const FluxModel& flux);
DensityProfile evolve_Q(const DensityProfile& u, double t, double dx, const FluxModel& flux);
PdeField evolve_Q_field(const DensityProfile& u, double t, double dx, const FluxModel& flux);

// Field sampled from a closed-form function G(x,t); used for negative
// controls where the field is not produced by the solver.
PdeField field_from_function(const std::function<double(double, double)>& g, double t_max, double dx,
                             double dt, double period);

// Delta(u, v) = sup_x |I(x;u) - I(x;v)|, exact for piecewise-constant input.
double delta_distance(const DensityProfile& u, const DensityProfile& v);

// Kruzhkov entropy residual of a field against one smooth nonnegative test
// function and constant c; quadrature uses finite differences of f so that
// the summation-by-parts form matches the scheme's discrete entropy flux.
struct BumpTest {
    double x_center = 0.5, x_width = 0.25;
    double t_center = 0.5, t_width = 0.25;
};
double entropy_residual_single(const PdeField& g, const FluxModel& flux, const BumpTest& f, double c);

// Most negative residual over a dyadic grid of tensor bumps and a c-grid of
// n_c values in [0,1].
double entropy_residual(const PdeField& g, const FluxModel& flux, int n_c = 21);

bool finite_speed_check(const DensityProfile& u, const DensityProfile& v, double a, double b, double t,
                        const FluxModel& flux, double dx, double c = -1.0);

// plain-text breakpoint/value table, one pair per line
std::string profile_to_text(const DensityProfile& p);
DensityProfile profile_from_text(const std::string& text);

}  // namespace sixv
