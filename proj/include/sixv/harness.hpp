#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sixv/params.hpp"
#include "sixv/pde.hpp"

namespace sixv {

enum class ExperimentKind { E1, E2, E3, E4, E5, E6, E7, E8 };

std::string experiment_name(ExperimentKind k);
ExperimentKind experiment_from_name(const std::string& name);

struct InitialProfileSpec {
    enum class Kind { Constant, DoubleSided, Sine, Piecewise, BitString };
    Kind kind = Kind::Constant;
    double rho = 0.5;           // Constant; right density for DoubleSided
    double theta = 0.5;         // left density for DoubleSided
    double mean = 0.5, amplitude = 0.3, frequency = 1.0;  // Sine
    DensityProfile table = DensityProfile::constant_torus(0.5);
    std::string bits;

    DensityProfile as_torus_profile(int pieces = 256) const;
    double density_at(double x) const;  // line coordinate (DoubleSided: x<=0 -> theta)
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::E3;
    ModelParams params = make_params(0.25, 0.5, 1.0);
    std::vector<int64_t> sizes = {64, 128, 256};
    int64_t replicas = 100;
    uint64_t seed = 1;
    InitialProfileSpec profile;
    std::string out_path;
    std::string format = "csv";
    std::map<std::string, double> tolerance;  // per-statistic overrides

    double tol(const std::string& key, double fallback) const;
    void validate() const;
    uint64_t hash() const;
};

struct ResultRecord {
    std::string experiment;
    uint64_t seed = 0;
    int64_t n = 0;
    std::string statistic;
    double value = 0.0;
    double target = 0.0;
    double sigma = 0.0;
    bool pass = true;
    double seconds = 0.0;
    uint64_t config_hash = 0;
};

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config);

// stable columns: experiment,seed,N,statistic,value,target,sigma,pass,seconds;
// values printed with fixed 9-decimal precision.  with_timing=false zeroes
// the wall-clock column so that (config, seed) fixes every emitted byte.
void emit(const std::vector<ResultRecord>& records, const std::string& format, std::ostream& os,
          bool with_timing = true);
void emit_to_file(const std::vector<ResultRecord>& records, const std::string& format,
                  const std::string& path, bool with_timing = true);
std::vector<ResultRecord> parse_records_csv(std::istream& is);

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace sixv
