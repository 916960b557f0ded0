// Acceptance suite: runs every acceptance criterion at its stated scale and
// tolerance and prints one pass/fail line per criterion.  Exit code 0 iff
// all criteria pass.  An optional argv filter selects criteria by number.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sixv/dynamics.hpp"
#include "sixv/harness.hpp"
#include "sixv/multiclass.hpp"
#include "sixv/pde.hpp"
#include "sixv/stats.hpp"

using namespace sixv;

namespace {

const ModelParams kParams = make_params(0.25, 0.5, 1.0);

struct Reporter {
    int failures = 0;

    void line(int criterion, bool ok, const std::string& detail) {
        std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

bool records_pass(const std::vector<ResultRecord>& rs, std::string* why = nullptr) {
    bool ok = true;
    for (const auto& r : rs) {
        if (!r.pass) {
            ok = false;
            if (why) *why += " " + r.statistic + "=" + std::to_string(r.value);
        }
    }
    return ok;
}

// ------------------------------------------------------------- criterion 1
bool criterion1(std::string& detail) {
    const int64_t n_mc = 100000;
    double worst = 0.0;
    bool ok = true;

    // line: micro systems with <= 3 particles on <= 6 sites
    std::vector<std::vector<uint8_t>> line_cases = {{1, 0, 1, 1, 0, 0}, {1, 1, 1, 0, 0, 0}, {0, 1, 0, 0, 1, 0}};
    for (size_t c = 0; c < line_cases.size(); ++c) {
        const auto& occ = line_cases[c];
        auto law = oracle::line_row_law(occ, 6, kParams.b1, kParams.b2);
        std::vector<int64_t> pos;
        for (size_t i = 0; i < occ.size(); ++i)
            if (occ[i]) pos.push_back(static_cast<int64_t>(i));
        ParticleConfiguration init = ParticleConfiguration::line(pos);
        std::map<uint64_t, int64_t> counts;
        for (int64_t i = 0; i < n_mc; ++i) {
            RandomField f = RandomField(100 + c, kParams).replica(static_cast<uint64_t>(i));
            auto next = step_line(init, StepRandomness(f, 1));
            std::vector<uint8_t> out(12, 0);
            bool esc = false;
            for (int64_t x : next.tagged) {
                if (x >= 12)
                    esc = true;
                else
                    out[static_cast<size_t>(x)] = 1;
            }
            ++counts[oracle::encode_line_outcome(out, esc)];
        }
        auto chk = oracle::compare_counts(law, counts, n_mc, 4.0);
        worst = std::max(worst, chk.worst_z);
        ok = ok && chk.ok;
    }

    // ring: micro systems against the brute-force row law
    std::vector<std::vector<uint8_t>> ring_cases = {{1, 0}, {1, 1, 0}, {1, 0, 1, 0, 0, 1}};
    for (size_t c = 0; c < ring_cases.size(); ++c) {
        const auto& occ = ring_cases[c];
        auto law = oracle::ring_row_law(occ, kParams.b1, kParams.b2);
        std::vector<int64_t> pos;
        for (size_t i = 0; i < occ.size(); ++i)
            if (occ[i]) pos.push_back(static_cast<int64_t>(i));
        ParticleConfiguration init = ParticleConfiguration::ring(static_cast<int64_t>(occ.size()), pos);
        std::map<uint64_t, int64_t> counts;
        for (int64_t i = 0; i < n_mc; ++i) {
            RandomField f = RandomField(200 + c, kParams).replica(static_cast<uint64_t>(i));
            auto next = step_ring(init, f, 1);
            std::vector<uint8_t> out(occ.size(), 0);
            for (int64_t x : next.tagged) out[static_cast<size_t>(x)] = 1;
            ++counts[oracle::encode_ring_outcome(out)];
        }
        auto chk = oracle::compare_counts(law, counts, n_mc, 4.0);
        worst = std::max(worst, chk.worst_z);
        ok = ok && chk.ok;
    }

    // two-class stepper
    std::vector<std::vector<int>> mc_cases = {{2, 0, 1, 2, 0, 0}, {1, 2, 0, 0, 1, 0}};
    for (size_t c = 0; c < mc_cases.size(); ++c) {
        const auto& cls = mc_cases[c];
        auto law = oracle::multiclass_row_law(cls, 2, 6, kParams.b1, kParams.b2);
        std::vector<MultiParticle> ps;
        for (size_t i = 0; i < cls.size(); ++i)
            if (cls[i]) ps.push_back({static_cast<int64_t>(i), cls[i]});
        MultiClassConfiguration init = MultiClassConfiguration::from_particles(2, ps);
        std::map<uint64_t, int64_t> counts;
        for (int64_t i = 0; i < n_mc; ++i) {
            RandomField f = RandomField(300 + c, kParams).replica(static_cast<uint64_t>(i));
            auto next = step_multiclass(init, StepRandomness(f, 1));
            std::vector<int> out(12, 0);
            int esc = 0;
            for (const auto& p : next.particles) {
                if (p.pos >= 12)
                    esc = p.cls;
                else
                    out[static_cast<size_t>(p.pos)] = p.cls;
            }
            ++counts[oracle::encode_multiclass_outcome(out, 2, esc)];
        }
        auto chk = oracle::compare_counts(law, counts, n_mc, 4.0);
        worst = std::max(worst, chk.worst_z);
        ok = ok && chk.ok;
    }

    detail = fmt("micro-oracle equivalence, 8 systems x %lld replicas, worst |z| = %.2f (gate 4)",
                 static_cast<long long>(n_mc), worst);
    return ok;
}

// ------------------------------------------------------------- criterion 2
bool criterion2(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E3\nsizes = 4000\nreplicas = 100\nseed = 20\nprofile = constant 0.4");
    auto rs = run_experiment(cfg);
    std::string why;
    bool ok = records_pass(rs, &why);
    detail = fmt("stationarity at rho=0.4: density %.4f (0.4), pair %.4f (0.16), edge %.4f (0.5)%s",
                 rs[0].value, rs[1].value, rs[2].value, ok ? "" : why.c_str());
    return ok;
}

// ------------------------------------------------------------- criterion 3
bool criterion3(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E2\nsizes = 500 1000 2000\nreplicas = 50\nseed = 30\nprofile = double-sided 0.2 0.8");
    auto rs = run_experiment(cfg);
    std::string why;
    bool ok = records_pass(rs, &why);
    detail = fmt("shock location/(theta N): %.4f %.4f %.4f (1 +- 0.05, error non-increasing)%s",
                 rs[0].value, rs[1].value, rs[2].value, ok ? "" : why.c_str());
    return ok;
}

// ------------------------------------------------------------- criterion 4
bool criterion4(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E2\nsizes = 1000\nreplicas = 100\nseed = 40\nprofile = double-sided 0.8 0.2");
    auto rs = run_experiment(cfg);
    std::string why;
    bool ok = records_pass(rs, &why);
    detail = fmt("fan: value@xi=1 %.4f (0.4495 +- 0.03), edges %.4f (0.7653), %.4f (1.2397) +- 0.05%s",
                 rs[0].value, rs[1].value, rs[2].value, ok ? "" : why.c_str());
    return ok;
}

// ------------------------------------------------------------- criterion 5
bool criterion5(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E5\nsizes = 64 128 256\nreplicas = 700\nseed = 50\nprofile = constant 0.5");
    auto rs = run_experiment(cfg);
    double steps = 0, viol = 0;
    bool ok = true;
    for (const auto& r : rs) {
        if (r.statistic == "particle_steps") {
            steps = r.value;
            ok = ok && r.pass;
        }
        if (r.statistic.find("violations") != std::string::npos) {
            viol += r.value;
            ok = ok && r.pass;
        }
    }
    detail = fmt("coupling invariants: %.0f violations over %.2e particle-steps (gate: 0 over >= 1e7)",
                 viol, steps);
    return ok;
}

// ------------------------------------------------------------- criterion 6
bool criterion6(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E6\nsizes = 1024\nreplicas = 10\nseed = 60\nprofile = constant 0.5");
    auto rs = run_experiment(cfg);
    std::string why;
    bool ok = records_pass(rs, &why);
    detail = fmt("speed tails v<=12: worst excess z line %.2f, ring %.2f (gate 4 sigma)%s", rs[0].value,
                 rs[1].value, ok ? "" : why.c_str());
    return ok;
}

// ------------------------------------------------------------- criterion 7
bool criterion7(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E7\nsizes = 512\nreplicas = 90\nseed = 70\nprofile = constant 0.5");
    auto rs = run_experiment(cfg);
    std::string why;
    bool ok = records_pass(rs, &why);
    std::string rates;
    for (const auto& r : rs)
        if (r.statistic.rfind("current_rate", 0) == 0) rates += fmt(" %.4f(%.4f)", r.value, r.target);
    detail = "current identity exact on every trajectory; rates" + rates + (ok ? "" : " FAIL" + why);
    return ok;
}

// ------------------------------------------------------------- criterion 8
bool criterion8(std::string& detail) {
    FluxModel flux(kParams);
    auto l1_err = [&](double theta, double rho, double dx) {
        DensityProfile u0 = DensityProfile::line({-8.0, 0.0, 8.0}, {theta, rho});
        DensityProfile ut = evolve_P(u0, 1.0, dx, flux);
        double err = 0.0;
        for (double x = -2.5 + dx / 2; x < 2.5; x += dx)
            err += std::abs(ut.value_at(x) - riemann_solution(theta, rho, x, flux)) * dx;
        return err;
    };
    bool ok = true;
    double ratios[4];
    {
        double s200 = l1_err(0.2, 0.8, 1.0 / 200), s400 = l1_err(0.2, 0.8, 1.0 / 400),
               s800 = l1_err(0.2, 0.8, 1.0 / 800);
        double f200 = l1_err(0.8, 0.2, 1.0 / 200), f400 = l1_err(0.8, 0.2, 1.0 / 400),
               f800 = l1_err(0.8, 0.2, 1.0 / 800);
        ratios[0] = s200 / s400;
        ratios[1] = s400 / s800;
        ratios[2] = f200 / f400;
        ratios[3] = f400 / f800;
        for (double r : ratios) ok = ok && r >= 1.3;
    }

    DensityProfile cst = DensityProfile::constant_torus(0.4);
    double r_const = entropy_residual(evolve_Q_field(cst, 0.5, 1.0 / 100, flux), flux);
    DensityProfile shock = DensityProfile::torus({0.0, 0.25, 0.75, 1.0}, {0.2, 0.8, 0.2});
    double r_shock = entropy_residual(evolve_Q_field(shock, 0.5, 1.0 / 200, flux), flux);
    DensityProfile fan = DensityProfile::torus({0.0, 0.25, 0.75, 1.0}, {0.8, 0.2, 0.8});
    double r_fan = entropy_residual(evolve_Q_field(fan, 0.5, 1.0 / 200, flux), flux);
    double v = shock_speed(0.8, 0.2, flux);
    PdeField bad = field_from_function(
        [&](double x, double t) { return x < 0.25 + v * t ? 0.8 : 0.2; }, 0.5, 1.0 / 200, 0.5 / 300, 1.0);
    double r_bad = entropy_residual(bad, flux);
    ok = ok && r_const >= -1e-10 && r_shock >= -1e-6 && r_fan >= -1e-6 && r_bad < -1e-3;

    // contraction of Delta under the solver on 100 random pairs
    RandomField f(80, kParams);
    double dx = 1.0 / 200.0;
    int contraction_fails = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> b1{-1.0}, v1, b2{-1.0}, v2;
        for (int i = 0; i < 6; ++i) {
            b1.push_back(b1.back() + 0.1 + 0.4 * f.uniform(Stream::Generic, rep, 2 * i));
            v1.push_back(f.uniform(Stream::Generic, rep, 2 * i + 1));
            b2.push_back(b2.back() + 0.1 + 0.4 * f.uniform(Stream::Generic, rep, 100 + 2 * i));
            v2.push_back(f.uniform(Stream::Generic, rep, 100 + 2 * i + 1));
        }
        DensityProfile u = DensityProfile::line(b1, v1);
        DensityProfile w = DensityProfile::line(b2, v2);
        double before = delta_distance(u, w);
        double after = delta_distance(evolve_P(u, 0.4, dx, flux), evolve_P(w, 0.4, dx, flux));
        if (after > before + 2.0 * dx) ++contraction_fails;
    }
    ok = ok && contraction_fails == 0;

    detail = fmt(
        "pde oracle: halving ratios %.2f %.2f %.2f %.2f (>=1.3); residuals const %.1e shock %.1e fan "
        "%.1e control %.1e; contraction fails %d/100",
        ratios[0], ratios[1], ratios[2], ratios[3], r_const, r_shock, r_fan, r_bad, contraction_fails);
    return ok;
}

// ------------------------------------------------------------- criterion 9
bool criterion9(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E4\nsizes = 64 128 256\nreplicas = 3000\nseed = 90\nprofile = sine 0.5 0.3");
    auto rs = run_experiment(cfg);
    std::string why;
    bool ok = records_pass(rs, &why);
    double tv1 = 0, tv2 = 0, rho = 0;
    for (const auto& r : rs) {
        if (r.statistic == "tv_1x1" && r.n == 256) tv1 = r.value;
        if (r.statistic == "tv_2x2" && r.n == 256) tv2 = r.value;
        if (r.statistic == "continuity_rho") rho = r.value;
    }
    detail = fmt("local statistics at rho=%.3f: tv(1x1,N=256)=%.4f (<0.08), tv(2x2,N=256)=%.4f, "
                 "non-increasing in N%s",
                 rho, tv1, tv2, ok ? "" : why.c_str());
    return ok;
}

// ------------------------------------------------------------ criterion 10
bool criterion10(std::string& detail) {
    ExperimentConfig cfg = parse_config_text(
        "experiment = E8\nsizes = 16 32 64\nreplicas = 3000\nseed = 100\nprofile = constant 0.5");
    auto rs = run_experiment(cfg);
    std::string why;
    bool ok = records_pass(rs, &why);
    detail = fmt("cylinder vs half-plane discrepancy frequency: %.4f %.4f %.4f (strictly decreasing)%s",
                 rs[0].value, rs[1].value, rs[2].value, ok ? "" : why.c_str());
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto want = [&](int c) { return only.empty() || only.count(c) > 0; };

    Reporter rep;
    struct Entry {
        int id;
        bool (*fn)(std::string&);
    };
    const Entry entries[] = {{1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
                             {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
                             {9, criterion9}, {10, criterion10}};
    for (const auto& e : entries) {
        if (!want(e.id)) continue;
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = e.fn(detail);
        } catch (const std::exception& ex) {
            detail = std::string("exception: ") + ex.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rep.line(e.id, ok, detail + fmt("  [%.1fs]", secs));
    }
    if (rep.failures) std::printf("%d criterion(s) FAILED\n", rep.failures);
    return rep.failures == 0 ? 0 : 1;
}
