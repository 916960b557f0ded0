#include "sixv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sixv/errors.hpp"

namespace sixv {

int discrepancy_R(int64_t lo, int64_t hi, const ParticleConfiguration& eta,
                  const ParticleConfiguration& xi) {
    bool eta_above = false, xi_above = false;
    auto occupied = [](const ParticleConfiguration& c, int64_t x) {
        return std::binary_search(c.tagged.begin(), c.tagged.end(), x);
    };
    for (int64_t x = lo; x <= hi; ++x) {
        int a = occupied(eta, x) ? 1 : 0;
        int b = occupied(xi, x) ? 1 : 0;
        if (a > b) eta_above = true;
        if (b > a) xi_above = true;
        if (eta_above && xi_above) return 1;
    }
    return 0;
}

double delta_N(const ParticleConfiguration& eta, const ParticleConfiguration& xi, int64_t n) {
    if (eta.topology != Topology::Line || xi.topology != Topology::Line)
        throw UnboundedSupport("delta_N expects finite line configurations");
    // cumulative difference changes only at particle positions
    std::vector<int64_t> pts;
    pts.reserve(eta.tagged.size() + xi.tagged.size());
    for (int64_t x : eta.tagged) pts.push_back(x);
    for (int64_t x : xi.tagged) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    int64_t best = 0, diff = 0;
    size_t ia = 0, ib = 0;
    for (int64_t x : pts) {
        while (ia < eta.tagged.size() && eta.tagged[ia] <= x) {
            ++diff;
            ++ia;
        }
        while (ib < xi.tagged.size() && xi.tagged[ib] <= x) {
            --diff;
            ++ib;
        }
        best = std::max(best, std::abs(diff));
    }
    return static_cast<double>(best) / static_cast<double>(n);
}

double delta_N_profile(const ParticleConfiguration& eta, const DensityProfile& f, int64_t n) {
    if (eta.topology != Topology::Line) throw UnboundedSupport("delta_N expects a line configuration");
    if (f.domain != ProfileDomain::Line) throw DomainMismatch("profile must live on the line");
    double dn = static_cast<double>(n);
    // breakpoints of the integrand: lattice cell edges i/N and f's breaks
    std::set<double> pts(f.breakpoints.begin(), f.breakpoints.end());
    for (int64_t x : eta.tagged) {
        pts.insert(static_cast<double>(x) / dn);
        pts.insert(static_cast<double>(x + 1) / dn);
    }
    if (pts.empty()) return 0.0;
    auto occupied = [&](double y) {
        int64_t cell = static_cast<int64_t>(std::floor(y * dn));
        return std::binary_search(eta.tagged.begin(), eta.tagged.end(), cell) ? 1.0 : 0.0;
    };
    double acc = 0.0, best = 0.0, prev = *pts.begin();
    for (double x : pts) {
        if (x > prev) {
            double mid = 0.5 * (prev + x);
            acc += (occupied(mid) - f.value_at(mid)) * (x - prev);
            best = std::max(best, std::abs(acc));
            prev = x;
        }
    }
    return best;
}

int64_t total_current(const Trajectory& trajectory) {
    if (trajectory.states.empty()) throw InfiniteSystem("trajectory has no recorded states");
    const auto& first = trajectory.states.front().tagged;
    const auto& last = trajectory.states.back().tagged;
    if (first.size() != last.size()) throw InfiniteSystem("particle count changed along the trajectory");
    int64_t displacement = 0;
    for (size_t k = 0; k < first.size(); ++k) displacement += last[k] - first[k];
    int64_t edges = trajectory.horizontal_edge_count();
    if (displacement != edges) throw Error("current identity violated: displacements != edge count");
    return displacement;
}

double tv_distance(const Histogram& h1, const Histogram& h2) {
    if (h1.total == 0 || h2.total == 0) throw SupportMismatch("empty histogram");
    if (h1.shape_nx != h2.shape_nx || h1.shape_ny != h2.shape_ny)
        throw SupportMismatch("histograms describe different state spaces");
    std::set<uint64_t> keys;
    for (const auto& kv : h1.counts) keys.insert(kv.first);
    for (const auto& kv : h2.counts) keys.insert(kv.first);
    double d = 0.0;
    for (uint64_t k : keys) {
        auto a = h1.counts.count(k) ? static_cast<double>(h1.counts.at(k)) / h1.total : 0.0;
        auto b = h2.counts.count(k) ? static_cast<double>(h2.counts.at(k)) / h2.total : 0.0;
        d += std::abs(a - b);
    }
    return 0.5 * d;
}

ProfileEstimate ProfileEstimate::from_row(const std::vector<uint8_t>& row, int64_t x_lo, int64_t scale) {
    ProfileEstimate pe;
    pe.scale = scale;
    pe.x_lo = x_lo;
    pe.cumulative.resize(row.size());
    int64_t s = 0;
    for (size_t i = 0; i < row.size(); ++i) {
        s += row[i];
        pe.cumulative[i] = s;
    }
    return pe;
}

double ProfileEstimate::density(int64_t a, int64_t b) const {
    int64_t ia = a - x_lo, ib = b - x_lo;
    if (ia < 0 || ib >= static_cast<int64_t>(cumulative.size()) || ia > ib)
        throw RangeViolation("density window outside the estimate");
    int64_t lo = ia > 0 ? cumulative[static_cast<size_t>(ia - 1)] : 0;
    return static_cast<double>(cumulative[static_cast<size_t>(ib)] - lo) / static_cast<double>(b - a + 1);
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr m;
    m.n = static_cast<int64_t>(xs.size());
    if (xs.empty()) return m;
    double s = 0.0;
    for (double x : xs) s += x;
    m.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double v = 0.0;
        for (double x : xs) v += (x - m.mean) * (x - m.mean);
        v /= static_cast<double>(xs.size() - 1);
        m.stderr_ = std::sqrt(v / static_cast<double>(xs.size()));
    }
    return m;
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Wilson-Hilferty upper tail of chi-square with k dof
double chi2_sf(double stat, double k) {
    if (k <= 0.0) return 1.0;
    double t = std::cbrt(stat / k);
    double mu = 1.0 - 2.0 / (9.0 * k);
    double sd = std::sqrt(2.0 / (9.0 * k));
    return normal_sf((t - mu) / sd);
}

}  // namespace

double chi_square_homogeneity_p(const Histogram& h1, const Histogram& h2) {
    if (h1.shape_nx != h2.shape_nx || h1.shape_ny != h2.shape_ny)
        throw SupportMismatch("histograms describe different state spaces");
    std::set<uint64_t> keys;
    for (const auto& kv : h1.counts) keys.insert(kv.first);
    for (const auto& kv : h2.counts) keys.insert(kv.first);
    double n1 = static_cast<double>(h1.total), n2 = static_cast<double>(h2.total);
    // pool rare cells so expected counts stay reasonable
    std::vector<std::pair<double, double>> cells;
    double a_rare = 0.0, b_rare = 0.0;
    for (uint64_t k : keys) {
        double a = h1.counts.count(k) ? static_cast<double>(h1.counts.at(k)) : 0.0;
        double b = h2.counts.count(k) ? static_cast<double>(h2.counts.at(k)) : 0.0;
        if ((a + b) * std::min(n1, n2) / (n1 + n2) < 5.0) {
            a_rare += a;
            b_rare += b;
        } else {
            cells.emplace_back(a, b);
        }
    }
    if (a_rare + b_rare > 0.0) cells.emplace_back(a_rare, b_rare);
    if (cells.size() < 2) return 1.0;
    double stat = 0.0;
    for (const auto& c : cells) {
        double tot = c.first + c.second;
        double e1 = tot * n1 / (n1 + n2);
        double e2 = tot * n2 / (n1 + n2);
        if (e1 > 0.0) stat += (c.first - e1) * (c.first - e1) / e1;
        if (e2 > 0.0) stat += (c.second - e2) * (c.second - e2) / e2;
    }
    return chi2_sf(stat, static_cast<double>(cells.size()) - 1.0);
}

}  // namespace sixv
