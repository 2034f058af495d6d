#pragma once
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "blowup/config.hpp"
#include "blowup/correction_two.hpp"
#include "blowup/spectral.hpp"

namespace blowup {

struct Gate {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string rule;  // e.g. "<= 1e-4"
};

struct StageResult {
    std::string name;
    double seconds = 0.0;
    std::vector<std::string> files;  // relative to the output directory
    std::vector<std::pair<std::string, double>> constants;
    std::vector<Gate> gates;
    bool passed() const;
};

// Stages in pipeline order.
const std::vector<std::string>& stage_names();

class Pipeline {
public:
    explicit Pipeline(Config cfg);
    ~Pipeline();

    const Config& config() const { return cfg_; }
    std::string path(const std::string& file) const;  // inside output.dir

    StageResult dump_profiles();
    StageResult build_v1();
    StageResult build_profile();
    StageResult certify();
    // out: file name override (relative names go into output.dir)
    StageResult spectral(const std::string& out = "");
    StageResult simulate(const std::string& out = "", bool svg = false);
    StageResult run_stage(const std::string& name);

    // runs the stages, writes manifest.json and timings.json; true if every gate passed
    bool run_all(const std::vector<std::string>& stages, std::vector<StageResult>* results = nullptr);

    const FirstCorrection& first_correction();
    const SecondCorrection& second_correction();
    const SpectralData& spectral_data();

private:
    Config cfg_;
    std::unique_ptr<FirstCorrection> fc_;
    std::unique_ptr<SecondCorrection> sc_;
    std::unique_ptr<SpectralData> sd_;
};

// exit codes
constexpr int kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitGate = 4;

}  // namespace blowup
