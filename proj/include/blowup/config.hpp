#pragma once
#include <map>
#include <string>
#include <vector>

#include "blowup/scaling.hpp"
#include "blowup/simulator.hpp"
#include "blowup/spectral.hpp"

namespace blowup {

struct RecursionConfig {
    int N = 30;
    std::vector<int> levels{1, 2};  // q_j built for these j
};

struct OutputConfig {
    std::string dir = "out";
    bool svg = false;
    int threads = 0;          // 0: all cores
    std::string isa = "auto"; // auto, scalar, avx2, neon
};

struct Config {
    ScalingParams scaling;
    RecursionConfig recursion;
    SpectralConfig spectral;
    SimConfig simulate;
    OutputConfig output;

    // every schema violation, each prefixed by its key path
    std::vector<std::string> problems() const;
    void validate() const;  // throws ValidationError listing problems()
    // section.key = value lines in schema order, values at full precision
    std::string canonical() const;
};

// INI file (empty path: defaults), then PREFIX_SECTION_KEY environment overrides.
// Unknown sections or keys and unparsable values are reported with their key paths.
Config load_config(const std::string& path, const std::string& env_prefix = "BLOWUP_");

// keys in schema order, "section.key"
std::vector<std::string> config_keys();

}  // namespace blowup
