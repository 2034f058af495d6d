#include "blowup/pipeline.hpp"

#include <json.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "blowup/errors.hpp"
#include "blowup/io.hpp"
#include "blowup/parallel.hpp"
#include "blowup/profiles.hpp"
#include "blowup/residual.hpp"
#include "blowup/simd.hpp"
#include "blowup/simulator.hpp"

namespace blowup {

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<std::string, std::string>> kVersions = {
    {"scaling", "1.0"}, {"profiles", "1.0"}, {"correction_one", "1.0"}, {"correction_two", "1.0"},
    {"residual", "1.0"}, {"spectral", "1.0"}, {"simulator", "1.0"}, {"cli", "1.0"},
};

std::vector<double> geomspace(double a, double b, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = a * std::pow(b / a, i / double(n - 1));
    return x;
}

Gate le(const std::string& name, double v, double bound) {
    return {name, v <= bound, v, "<= " + fmt17(bound)};
}
Gate lt(const std::string& name, double v, double bound) {
    return {name, v < bound, v, "< " + fmt17(bound)};
}
Gate ge(const std::string& name, double v, double bound) {
    return {name, v >= bound, v, ">= " + fmt17(bound)};
}

double bump(double x, double c, double w) {
    double y = (x - c) / w;
    return std::abs(y) < 1 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

}  // namespace

bool StageResult::passed() const {
    for (const auto& g : gates)
        if (!g.pass) return false;
    return true;
}

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"dump-profiles", "build-v1", "build-profile",
                                                   "certify",       "spectral", "simulate"};
    return names;
}

Pipeline::Pipeline(Config cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    thread_limit() = static_cast<std::size_t>(cfg_.output.threads);
    const auto& isa = cfg_.output.isa;
    if (isa == "scalar") simd::set_isa(simd::Isa::Scalar);
    else if (isa == "avx2") simd::set_isa(simd::Isa::Avx2);
    else if (isa == "neon") simd::set_isa(simd::Isa::Neon);
    else simd::set_isa(simd::detected_isa());
    fs::create_directories(cfg_.output.dir);
}

Pipeline::~Pipeline() = default;

std::string Pipeline::path(const std::string& file) const {
    fs::path p(file);
    return p.is_absolute() ? p.string() : (fs::path(cfg_.output.dir) / p).string();
}

const FirstCorrection& Pipeline::first_correction() {
    if (sc_) return sc_->fc;
    if (!fc_) fc_ = std::make_unique<FirstCorrection>(build_first_correction(cfg_.scaling));
    return *fc_;
}

const SecondCorrection& Pipeline::second_correction() {
    if (!sc_) sc_ = std::make_unique<SecondCorrection>(build_second_correction(cfg_.scaling, cfg_.recursion.N));
    return *sc_;
}

const SpectralData& Pipeline::spectral_data() {
    if (!sd_) sd_ = std::make_unique<SpectralData>(build_spectral(cfg_.spectral));
    return *sd_;
}

StageResult Pipeline::dump_profiles() {
    Timer tm;
    StageResult r;
    r.name = "dump-profiles";
    auto [phi1, phi2] = L0_fundamental();
    auto [pt1, pt2] = L0_tilde_fundamental();
    auto g1 = g1_profile(), g2 = g2_profile();
    CsvWriter csv(path("profiles.csv"), {"R", "W", "phi1", "phi2", "phit1", "phit2", "g1", "g2", "V"});
    for (double R : geomspace(0.01, 50.0, 401))
        csv.row({R, W(R), phi1.eval(R), phi2.eval(R), pt1.eval(R), pt2.eval(R), g1.eval(R), g2.eval(R),
                 potential_V(R)});
    r.files = {"profiles.csv"};
    r.seconds = tm.seconds();
    return r;
}

StageResult Pipeline::build_v1() {
    Timer tm;
    StageResult r;
    r.name = "build-v1";
    const auto& fc = first_correction();
    CsvWriter csv(path("v1.csv"), {"R", "f1", "f2"});
    for (double R : geomspace(0.01, 1e4, 401)) csv.row({R, fc.f1.f.eval(R), fc.f2.f.eval(R)});
    r.files = {"v1.csv"};
    r.constants = {{"b1_1", fc.f1.head.b1}, {"b2_1", fc.f1.head.b2}, {"b1_2", fc.f2.head.b1},
                   {"b2_2", fc.f2.head.b2}, {"near_zero_1", fc.f1.near_zero}, {"near_zero_2", fc.f2.near_zero}};
    r.gates = {le("head_fit_residual_1", fc.f1.fit_residual, 1e-6), le("head_fit_residual_2", fc.f2.fit_residual, 1e-6)};
    r.seconds = tm.seconds();
    return r;
}

StageResult Pipeline::build_profile() {
    Timer tm;
    StageResult r;
    r.name = "build-profile";
    const auto& sc = second_correction();
    {
        CsvWriter csv(path("growth.csv"), {"n", "q1_level_max", "q1_root", "q2_level_max", "q2_root"});
        const auto &a = sc.q1.growth, &b = sc.q2.growth;
        for (std::size_t n = 0; n < a.level_max.size() && n < b.level_max.size(); ++n)
            csv.row({double(n), a.level_max[n], n < a.roots.size() ? a.roots[n] : 0.0, b.level_max[n],
                     n < b.roots.size() ? b.roots[n] : 0.0});
    }
    {
        CsvWriter csv(path("u2.csv"), {"t", "a", "R", "U2", "V2"});
        double t0 = cfg_.scaling.t0;
        for (double t : {t0 / 2, t0 / 4, t0 / 8}) {
            double lam = lambda_of(sc.params, t), s = std::sqrt(lam);
            for (int i = 0; i <= 50; ++i) {
                double a = i / 50.0, rr = a * t;
                csv.row({t, a, rr * lam, u2(sc, t, rr) / s, v2(sc, t, rr) / s});
            }
        }
    }
    r.files = {"growth.csv", "u2.csv"};
    for (const auto* q : {&sc.q1, &sc.q2}) {
        std::string j = std::to_string(q->j);
        r.constants.push_back({"C0_" + j, q->growth.C0});
        r.constants.push_back({"C0_drift_" + j, q->growth.drift});
        r.gates.push_back(lt("C0_drift_" + j, q->growth.drift, 0.10));
        r.constants.push_back({"tail_bound_" + j, q->growth.tail_bound});
        r.gates.push_back(le("tail_bound_" + j, q->growth.tail_bound, 1e-8));
    }
    r.seconds = tm.seconds();
    return r;
}

StageResult Pipeline::certify() {
    Timer tm;
    StageResult r;
    r.name = "certify";
    const auto& sc = second_correction();
    double t0 = cfg_.scaling.t0;
    auto rep = certify_e2_bound(sc, {t0 / 2, t0 / 4, t0 / 8});
    {
        CsvWriter csv(path("certify.csv"),
                      {"t", "sup", "argmax_R", "sup_small_R", "sup_tdt", "sup_rdr", "e_in", "e_out", "e_out_tlambda"});
        for (const auto& s : rep.slices)
            csv.row({s.t, s.sup, s.argmax_R, s.sup_small_R, s.sup_tdt, s.sup_rdr, s.e_in, s.e_out,
                     s.e_out * mu_of(sc.params, s.t)});
    }
    double fd0 = e2_fd_agreement(sc, t0), fd1 = e2_fd_agreement(sc, t0 / 2);
    {
        CsvWriter csv(path("fd_agreement.csv"), {"t", "max_rel_diff"});
        csv.row({t0, fd0});
        csv.row({t0 / 2, fd1});
    }
    r.files = {"certify.csv", "fd_agreement.csv"};
    r.constants = {{"sup_bound", rep.sup_bound}, {"fd_agreement_t0", fd0}, {"fd_agreement_t0_2", fd1}};
    double lo = 1e300, hi = 0;
    for (const auto& s : rep.slices) {
        double v = s.e_out * mu_of(sc.params, s.t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    r.gates = {Gate{"e2_bounded", rep.bounded, rep.sup_bound, "finite, decade ratios in [1/3, 3]"},
               le("fd_agreement", std::max(fd0, fd1), 1e-4), le("e_out_tlambda_spread", hi / lo, 3.0)};
    r.seconds = tm.seconds();
    return r;
}

StageResult Pipeline::spectral(const std::string& out) {
    Timer tm;
    StageResult r;
    r.name = "spectral";
    const auto& sd = spectral_data();
    std::string file = out.empty() ? "spec.csv" : out;
    {
        CsvWriter csv(path(file), {"xi", "rho", "a_re", "a_im"});
        for (std::size_t i = 0; i < sd.xi.size(); ++i) csv.row({sd.xi[i], sd.rho[i], sd.a_amp[i].real(), sd.a_amp[i].imag()});
    }
    r.files = {file};
    double lo = sd.rho_at(1e-4) * 3 * M_PI * std::sqrt(1e-4), hi = sd.rho_at(100.0) * M_PI / std::sqrt(100.0);
    std::vector<double> f(sd.R.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = bump(sd.R[i], 3.0, 2.0);
    double rt = round_trip_error(sd, f), dg = diagonalization_error(sd, f);
    int digits = sd.bound.agreement_digits();
    r.constants = {{"xi_d", sd.xi_d()}, {"xi_d_coarse", sd.bound.xi_d_coarse}, {"agreement_digits", double(digits)},
                   {"rho_small_law", lo}, {"rho_large_law", hi}, {"round_trip", rt}, {"diagonalization", dg}};
    r.gates = {le("rho_small_law", std::abs(lo - 1), 0.1), le("rho_large_law", std::abs(hi - 1), 0.1),
               Gate{"unique_xi_d", sd.bound.sign_changes == 1, double(sd.bound.sign_changes), "== 1"},
               ge("xi_d_digits", digits, 6), le("round_trip", rt, 1e-3), le("diagonalization", dg, 1e-3)};
    r.seconds = tm.seconds();
    return r;
}

StageResult Pipeline::simulate(const std::string& out, bool svg) {
    Timer tm;
    StageResult r;
    r.name = "simulate";
    const auto& sc = second_correction();
    Simulator sim(cfg_.simulate, cfg_.simulate.residual ? &sc : nullptr);
    auto rep = sim.run(sim.zero_state());
    std::string file = out.empty() ? "traj.csv" : out;
    {
        CsvWriter csv(path(file), {"tau", "t", "energy_in", "energy_out", "sup_eps", "lambda_fit", "kappa_eff"});
        for (const auto& row : rep.rows)
            csv.row({row.tau, row.t, row.energy_in, row.energy_out, row.sup_eps, row.lambda_fit, row.kappa_eff});
    }
    r.files = {file};
    if (svg || cfg_.output.svg) {
        std::string name = fs::path(file).replace_extension(".svg").string();
        Series e{"cone energy", {}, {}}, s{"sup |eps|", {}, {}};
        for (const auto& row : rep.rows) {
            e.x.push_back(row.tau);
            e.y.push_back(row.energy_in);
            s.x.push_back(row.tau);
            s.y.push_back(row.sup_eps);
        }
        write_svg(path(name), "simulate: log10 of cone energy and sup|eps| against tau", {e, s}, false, true);
        r.files.push_back(name);
    }
    double track = cfg_.simulate.residual ? lambda_tracking(sc, rep.rows.front().t, rep.eps_rel_max) : 0.0;
    r.constants = {{"dtau", rep.dtau},
                   {"steps", double(rep.steps)},
                   {"energy_peak", rep.energy_peak},
                   {"energy_slope_late", rep.energy_slope_late},
                   {"norm_slope_late", rep.norm_slope_late},
                   {"eps_rel_max", rep.eps_rel_max},
                   {"lambda_track_window", rep.lambda_track},
                   {"lambda_track_half_period", track}};
    r.gates = {Gate{"energy_finite", std::isfinite(rep.energy_peak), rep.energy_peak, "finite"},
               Gate{"energy_trend_down", rep.energy_trend_down, rep.energy_slope_late, "late slope < 0"},
               le("lambda_track_half_period", track, 0.05)};
    r.seconds = tm.seconds();
    return r;
}

StageResult Pipeline::run_stage(const std::string& name) {
    if (name == "dump-profiles") return dump_profiles();
    if (name == "build-v1") return build_v1();
    if (name == "build-profile") return build_profile();
    if (name == "certify") return certify();
    if (name == "spectral") return spectral();
    if (name == "simulate") return simulate();
    throw ValidationError("unknown stage '" + name + "'");
}

bool Pipeline::run_all(const std::vector<std::string>& stages, std::vector<StageResult>* results) {
    for (const auto& s : stages)
        if (std::find(stage_names().begin(), stage_names().end(), s) == stage_names().end())
            throw ValidationError("unknown stage '" + s + "'");
    std::vector<StageResult> res;
    // pipeline order regardless of how the list was given
    for (const auto& s : stage_names())
        if (std::find(stages.begin(), stages.end(), s) != stages.end()) res.push_back(run_stage(s));

    using nlohmann::ordered_json;
    ordered_json m, timing;
    std::string canon = cfg_.canonical();
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08x", crc32_string(canon));
    m["config_crc32"] = hex;
    ordered_json c;
    for (const auto& k : config_keys()) {
        auto pos = canon.find(k + " = ");
        auto end = canon.find('\n', pos);
        c[k] = canon.substr(pos + k.size() + 3, end - pos - k.size() - 3);
    }
    m["config"] = c;
    ordered_json v;
    for (const auto& [mod, ver] : kVersions) v[mod] = ver;
    m["versions"] = v;
    m["isa"] = simd::isa_name(simd::active_isa());
    m["threads"] = cfg_.output.threads;
    bool ok = true;
    ordered_json st = ordered_json::array();
    for (const auto& r : res) {
        ordered_json s;
        s["name"] = r.name;
        ordered_json files = ordered_json::array();
        for (const auto& f : r.files) {
            std::snprintf(hex, sizeof hex, "%08x", crc32_file(path(f)));
            files.push_back({{"name", f}, {"bytes", fs::file_size(path(f))}, {"crc32", hex}});
        }
        s["files"] = files;
        ordered_json k;
        for (const auto& [name, val] : r.constants) k[name] = fmt17(val);
        s["constants"] = k;
        ordered_json g = ordered_json::array();
        for (const auto& gt : r.gates) g.push_back({{"name", gt.name}, {"pass", gt.pass}, {"value", fmt17(gt.value)}, {"rule", gt.rule}});
        s["gates"] = g;
        st.push_back(s);
        timing[r.name] = r.seconds;
        ok = ok && r.passed();
    }
    m["stages"] = st;
    m["all_gates_pass"] = ok;
    m["timings_file"] = "timings.json";
    std::ofstream(path("manifest.json"), std::ios::binary) << m.dump(2) << '\n';
    std::ofstream(path("timings.json"), std::ios::binary) << timing.dump(2) << '\n';
    if (results) *results = std::move(res);
    return ok;
}

}  // namespace blowup
