#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "blowup/errors.hpp"
#include "blowup/io.hpp"
#include "blowup/pipeline.hpp"

using namespace blowup;

namespace {

void report(const StageResult& r) {
    std::printf("%-14s %8.2f s  %s\n", r.name.c_str(), r.seconds, r.passed() ? "ok" : "GATE FAILED");
    for (const auto& f : r.files) std::printf("    wrote %s\n", f.c_str());
    for (const auto& g : r.gates)
        if (!g.pass) std::printf("    gate %s: %s (need %s)\n", g.name.c_str(), fmt17(g.value).c_str(), g.rule.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-time blowup with an oscillating rate: profiles, residual, spectral data, simulation"};
    app.require_subcommand(1);
    std::string config_path, env_prefix = "BLOWUP_", out;
    bool svg = false, xi_d_only = false;
    std::vector<std::string> stages;
    app.add_option("-c,--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--env-prefix", env_prefix, "environment override prefix, PREFIX_SECTION_KEY");

    auto* dump = app.add_subcommand("dump-profiles", "W, fundamental systems and sources as CSV");
    auto* v1 = app.add_subcommand("build-v1", "first correction profiles f1, f2");
    auto* prof = app.add_subcommand("build-profile", "recursion growth and u2 slices");
    auto* cert = app.add_subcommand("certify", "residual bound over three dyadic slices");
    auto* spec = app.add_subcommand("spectral", "spectral density and bound state");
    spec->add_option("--out", out, "CSV of (xi, rho, a_re, a_im)");
    spec->add_flag("--xi-d", xi_d_only, "print the bound-state eigenvalue and exit");
    auto* sim = app.add_subcommand("simulate", "perturbation evolution in the comoving frame");
    sim->add_option("--out", out, "trajectory CSV");
    sim->add_flag("--svg", svg, "also write an SVG plot next to the CSV");
    auto* all = app.add_subcommand("all", "every stage, manifest and gates");
    all->add_option("--stage", stages, "restrict to these stages")->delimiter(',');
    for (auto* s : {dump, v1, prof, cert, spec, sim, all}) {
        s->add_option("-c,--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
        s->add_option("--env-prefix", env_prefix, "environment override prefix");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        Pipeline p(load_config(config_path, env_prefix));
        if (*all) {
            std::vector<StageResult> res;
            bool ok = p.run_all(stages.empty() ? stage_names() : stages, &res);
            for (const auto& r : res) report(r);
            std::printf("manifest: %s\n", p.path("manifest.json").c_str());
            return ok ? kExitOk : kExitGate;
        }
        StageResult r;
        if (*dump) r = p.dump_profiles();
        else if (*v1) r = p.build_v1();
        else if (*prof) r = p.build_profile();
        else if (*cert) r = p.certify();
        else if (*spec) {
            if (xi_d_only) {
                auto b = find_xi_d(p.config().spectral);
                std::printf("xi_d = %s\nxi_d (100x looser tolerance) = %s\nagreeing digits = %d\n", fmt17(b.xi_d).c_str(),
                            fmt17(b.xi_d_coarse).c_str(), b.agreement_digits());
                return kExitOk;
            }
            r = p.spectral(out);
        } else if (*sim) {
            r = p.simulate(out, svg);
        }
        report(r);
        return r.passed() ? kExitOk : kExitGate;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
}
