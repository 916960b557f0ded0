#include "sixv/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sixv {

DensityProfile DensityProfile::line(std::vector<double> breaks, std::vector<double> vals) {
    DensityProfile p;
    p.domain = ProfileDomain::Line;
    p.breakpoints = std::move(breaks);
    p.values = std::move(vals);
    p.validate();
    return p;
}

DensityProfile DensityProfile::torus(std::vector<double> breaks, std::vector<double> vals, double period) {
    DensityProfile p;
    p.domain = ProfileDomain::Torus;
    p.period = period;
    p.breakpoints = std::move(breaks);
    p.values = std::move(vals);
    p.validate();
    return p;
}

DensityProfile DensityProfile::constant_torus(double v, double period) {
    return torus({0.0, period}, {v}, period);
}

void DensityProfile::validate() const {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
        throw RangeViolation("profile needs K+1 breakpoints for K values");
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw RangeViolation("breakpoints must be strictly increasing");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw RangeViolation("profile values must lie in [0,1]");
    if (domain == ProfileDomain::Torus) {
        if (!(period > 0.0)) throw RangeViolation("period must be positive");
        if (std::abs(breakpoints.back() - breakpoints.front() - period) > 1e-12 * std::max(1.0, period))
            throw RangeViolation("torus profile must cover one full period");
    }
}

double DensityProfile::value_at(double x) const {
    if (domain == ProfileDomain::Torus) {
        double s = breakpoints.front();
        x = s + std::fmod(std::fmod(x - s, period) + period, period);
    }
    if (x < breakpoints.front() || x >= breakpoints.back()) return 0.0;
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    size_t i = static_cast<size_t>(it - breakpoints.begin()) - 1;
    if (i >= values.size()) i = values.size() - 1;
    return values[i];
}

double DensityProfile::cumulative(double x) const {
    if (x <= breakpoints.front()) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        double lo = breakpoints[i], hi = breakpoints[i + 1];
        if (x <= lo) break;
        acc += values[i] * (std::min(x, hi) - lo);
    }
    return acc;
}

double DensityProfile::total_mass() const { return cumulative(breakpoints.back()); }

double DensityProfile::total_variation() const {
    double tv = 0.0;
    if (domain == ProfileDomain::Line) {
        double prev = 0.0;
        for (double v : values) {
            tv += std::abs(v - prev);
            prev = v;
        }
        tv += std::abs(prev);
    } else {
        for (size_t i = 0; i < values.size(); ++i)
            tv += std::abs(values[i] - values[(i + values.size() - 1) % values.size()]);
    }
    return tv;
}

double shock_speed(double theta, double rho, const FluxModel& flux) {
    if (!(theta >= 0.0 && theta <= 1.0 && rho >= 0.0 && rho <= 1.0))
        throw RangeViolation("states must lie in [0,1]");
    if (theta == rho) throw EqualStates("shock speed undefined for equal states");
    return (flux.phi(rho) - flux.phi(theta)) / (rho - theta);
}

double riemann_solution(double theta, double rho, double xi, const FluxModel& flux) {
    if (!(theta >= 0.0 && theta <= 1.0 && rho >= 0.0 && rho <= 1.0))
        throw RangeViolation("states must lie in [0,1]");
    if (theta == rho) return theta;
    if (theta < rho) {
        double v = shock_speed(theta, rho, flux);
        return xi <= v ? theta : rho;
    }
    // theta > rho: rarefaction fan between the characteristic speeds
    if (xi <= flux.phi_prime(theta)) return theta;
    if (xi >= flux.phi_prime(rho)) return rho;
    return flux.phi_prime_inverse(xi);
}

namespace {

struct Grid {
    double x0 = 0.0, dx = 0.0;
    std::vector<double> u;
};

// exact cell averages of a piecewise-constant profile
Grid project(const DensityProfile& p, double x0, double dx, int64_t n) {
    Grid g;
    g.x0 = x0;
    g.dx = dx;
    g.u.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        double a = x0 + i * dx, b = a + dx;
        g.u[static_cast<size_t>(i)] = (p.cumulative(b) - p.cumulative(a)) / dx;
    }
    return g;
}

DensityProfile grid_to_profile(const Grid& g, ProfileDomain domain, double period) {
    DensityProfile p;
    p.domain = domain;
    p.period = period;
    p.breakpoints.resize(g.u.size() + 1);
    for (size_t i = 0; i <= g.u.size(); ++i) p.breakpoints[i] = g.x0 + static_cast<double>(i) * g.dx;
    p.values = g.u;
    for (double& v : p.values) v = std::min(1.0, std::max(0.0, v));
    return p;
}

void check_resolution(double dx, double extent) {
    if (!(dx > 0.0)) throw ResolutionTooCoarse("dx must be positive");
    if (dx > 0.1 * extent) throw ResolutionTooCoarse("dx exceeds a tenth of the domain extent");
}

}  // namespace

DensityProfile evolve_P(const DensityProfile& u0, double t, double dx, const FluxModel& flux) {
    if (u0.domain != ProfileDomain::Line) throw DomainMismatch("evolve_P expects a line profile");
    double lo = u0.breakpoints.front(), hi = u0.breakpoints.back();
    check_resolution(dx, hi - lo + flux.kappa * t + dx);
    // pad so the support (speed <= kappa) never reaches the boundary
    double pad = flux.kappa * t + 4.0 * dx;
    int64_t n = static_cast<int64_t>(std::ceil((hi - lo + 2.0 * pad) / dx)) + 1;
    Grid g = project(u0, lo - pad, dx, n);
    if (t > 0.0) {
        double dt_max = 0.9 * dx / flux.kappa;
        int64_t steps = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(t / dt_max)));
        double dt = t / static_cast<double>(steps);
        std::vector<double> next(g.u.size());
        for (int64_t s = 0; s < steps; ++s) {
            double r = dt / dx;
            next[0] = g.u[0] - r * flux.phi(g.u[0]);
            for (size_t i = 1; i < g.u.size(); ++i)
                next[i] = g.u[i] - r * (flux.phi(g.u[i]) - flux.phi(g.u[i - 1]));
            g.u.swap(next);
        }
    }
    return grid_to_profile(g, ProfileDomain::Line, 1.0);
}

namespace {

PdeField evolve_torus(const DensityProfile& u0, double t, double dx, const FluxModel& flux,
                      bool record_rows) {
    if (u0.domain != ProfileDomain::Torus) throw DomainMismatch("evolve_Q expects a torus profile");
    check_resolution(dx, u0.period);
    int64_t n = std::max<int64_t>(4, static_cast<int64_t>(std::llround(u0.period / dx)));
    double dxe = u0.period / static_cast<double>(n);
    Grid g = project(u0, u0.breakpoints.front(), dxe, n);

    double dt_max = 0.9 * dxe / flux.kappa;
    int64_t steps = t > 0.0 ? std::max<int64_t>(1, static_cast<int64_t>(std::ceil(t / dt_max))) : 0;
    double dt = steps > 0 ? t / static_cast<double>(steps) : dt_max;

    PdeField f;
    f.domain = ProfileDomain::Torus;
    f.x0 = g.x0;
    f.dx = dxe;
    f.dt = dt;
    f.period = u0.period;
    f.rows.reserve(record_rows ? static_cast<size_t>(steps + 1) : 2);
    f.rows.push_back(g.u);

    std::vector<double> next(g.u.size());
    double r = dt / dxe;
    for (int64_t s = 0; s < steps; ++s) {
        size_t m = g.u.size();
        for (size_t i = 0; i < m; ++i) {
            double ul = g.u[(i + m - 1) % m];
            next[i] = g.u[i] - r * (flux.phi(g.u[i]) - flux.phi(ul));
        }
        g.u.swap(next);
        if (record_rows)
            f.rows.push_back(g.u);
        else
            f.rows.back() = g.u;
    }
    if (!record_rows && steps > 0) {
        f.rows.resize(1);
        f.rows[0] = g.u;
    }
    return f;
}

}  // namespace

DensityProfile evolve_Q(const DensityProfile& u0, double t, double dx, const FluxModel& flux) {
    PdeField f = evolve_torus(u0, t, dx, flux, false);
    Grid g;
    g.x0 = f.x0;
    g.dx = f.dx;
    g.u = f.rows.back();
    return grid_to_profile(g, ProfileDomain::Torus, u0.period);
}

PdeField evolve_Q_field(const DensityProfile& u0, double t, double dx, const FluxModel& flux) {
    return evolve_torus(u0, t, dx, flux, true);
}

PdeField field_from_function(const std::function<double(double, double)>& g, double t_max, double dx,
                             double dt, double period) {
    PdeField f;
    f.domain = ProfileDomain::Torus;
    f.x0 = 0.0;
    f.dx = dx;
    f.dt = dt;
    f.period = period;
    int64_t nx = static_cast<int64_t>(std::llround(period / dx));
    int64_t nt = static_cast<int64_t>(std::ceil(t_max / dt));
    for (int64_t n = 0; n <= nt; ++n) {
        std::vector<double> row(static_cast<size_t>(nx));
        for (int64_t i = 0; i < nx; ++i)
            row[static_cast<size_t>(i)] = g((static_cast<double>(i) + 0.5) * dx, static_cast<double>(n) * dt);
        f.rows.push_back(std::move(row));
    }
    return f;
}

double delta_distance(const DensityProfile& u, const DensityProfile& v) {
    if (u.domain != v.domain) throw DomainMismatch("profiles live on different domains");
    if (u.domain == ProfileDomain::Torus && std::abs(u.period - v.period) > 1e-12)
        throw DomainMismatch("torus profiles have different periods");
    if (u.domain == ProfileDomain::Torus &&
        std::abs(u.breakpoints.front() - v.breakpoints.front()) > 1e-12)
        throw DomainMismatch("torus profiles must share an origin");
    // The difference of cumulatives is piecewise linear, so the sup is
    // attained at a breakpoint of either profile.
    std::vector<double> pts;
    pts.reserve(u.breakpoints.size() + v.breakpoints.size());
    for (double b : u.breakpoints) pts.push_back(b);
    for (double b : v.breakpoints) pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double best = 0.0;
    for (double x : pts) best = std::max(best, std::abs(u.cumulative(x) - v.cumulative(x)));
    return best;
}

namespace {

double bump(double s) {
    double a = 1.0 - s * s;
    if (a <= 0.0) return 0.0;
    return std::exp(1.0 - 1.0 / a);
}

double torus_dist(double a, double b, double period) {
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

}  // namespace

double entropy_residual_single(const PdeField& g, const FluxModel& flux, const BumpTest& tf, double c) {
    int64_t nx = g.nx(), nt = g.nt();
    if (nx == 0 || nt < 2) throw RangeViolation("field too small for a residual");
    auto fval = [&](int64_t i, int64_t n) {
        double x = g.x0 + (static_cast<double>(i) + 0.5) * g.dx;
        double t = static_cast<double>(n) * g.dt;
        double sx = torus_dist(x, tf.x_center, g.period) / tf.x_width;
        double st = (t - tf.t_center) / tf.t_width;
        return bump(sx) * bump(st);
    };
    // summation-by-parts quadrature of
    //   /int/int f_t |G-c| + f_x |phi(G)-phi(c)|  +  /int f(.,0) |G(.,0)-c|
    double res = 0.0;
    for (int64_t i = 0; i < nx; ++i) {
        double f_prev = fval(i, 0);
        res += g.dx * f_prev * std::abs(g.rows[0][static_cast<size_t>(i)] - c);
        for (int64_t n = 1; n < nt; ++n) {
            double f_cur = fval(i, n);
            res += g.dx * (f_cur - f_prev) * std::abs(g.rows[static_cast<size_t>(n)][static_cast<size_t>(i)] - c);
            f_prev = f_cur;
        }
    }
    double pc = flux.phi(c);
    for (int64_t n = 0; n < nt; ++n) {
        const auto& row = g.rows[static_cast<size_t>(n)];
        for (int64_t i = 0; i < nx; ++i) {
            double fx = fval((i + 1) % nx, n) - fval(i, n);
            res += g.dt * fx * std::abs(flux.phi(row[static_cast<size_t>(i)]) - pc);
        }
    }
    return res;
}

double entropy_residual(const PdeField& g, const FluxModel& flux, int n_c) {
    double t_max = static_cast<double>(g.nt() - 1) * g.dt;
    double worst = 0.0;
    for (int ix = 0; ix < 8; ++ix) {
        for (int it = 2; it <= 6; ++it) {
            for (double wx : {g.period / 8.0, g.period / 4.0}) {
                BumpTest tf;
                tf.x_center = g.period * (static_cast<double>(ix) + 0.5) / 8.0;
                tf.x_width = wx;
                tf.t_center = t_max * static_cast<double>(it) / 8.0;
                tf.t_width = t_max / 8.0;
                for (int k = 0; k < n_c; ++k) {
                    double c = static_cast<double>(k) / static_cast<double>(n_c - 1);
                    worst = std::min(worst, entropy_residual_single(g, flux, tf, c));
                }
            }
        }
    }
    return worst;
}

bool finite_speed_check(const DensityProfile& u, const DensityProfile& v, double a, double b, double t,
                        const FluxModel& flux, double dx, double c) {
    if (c < 0.0) c = 2.0 * flux.kappa;
    if (!(c > flux.kappa)) throw RangeViolation("speed bound must exceed kappa");
    if (b - a < 2.0 * c * t) throw EmptyInterval("comparison interval is empty");
    DensityProfile pu = evolve_P(u, t, dx, flux);
    DensityProfile pv = evolve_P(v, t, dx, flux);
    double lo = a + c * t, hi = b - c * t;
    // L1 mass of the difference on [lo, hi], grid cells aligned
    double mass = 0.0;
    for (double x = lo + dx / 2; x < hi; x += dx) mass += std::abs(pu.value_at(x) - pv.value_at(x)) * dx;
    return mass <= 10.0 * dx;
}

std::string profile_to_text(const DensityProfile& p) {
    std::ostringstream os;
    os.precision(17);
    os << "# profile " << (p.domain == ProfileDomain::Line ? "line" : "torus") << " " << p.period << "\n";
    for (size_t i = 0; i < p.values.size(); ++i) os << p.breakpoints[i] << " " << p.values[i] << "\n";
    os << p.breakpoints.back() << " end\n";
    return os.str();
}

DensityProfile profile_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string hash, word, kind;
    double period;
    if (!(is >> hash >> word >> kind >> period) || hash != "#" || word != "profile")
        throw IoError("bad profile header");
    DensityProfile p;
    p.domain = kind == "line" ? ProfileDomain::Line : ProfileDomain::Torus;
    p.period = period;
    double b;
    std::string v;
    while (is >> b >> v) {
        p.breakpoints.push_back(b);
        if (v != "end") p.values.push_back(std::stod(v));
    }
    p.validate();
    return p;
}

}  // namespace sixv
