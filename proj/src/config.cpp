#include "blowup/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double x = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return x;
}

int parse_int(const std::string& s) {
    double x = parse_double(s);
    if (x != static_cast<int>(x)) throw std::invalid_argument("not an integer");
    return static_cast<int>(x);
}

bool parse_bool(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("not a boolean");
}

std::vector<int> parse_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(item));
    return out;
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

struct Key {
    std::string section, name;
    std::function<std::string(const Config&)> get;
    std::function<void(Config&, const std::string&)> set;
};

#define D(sec, field, member)                                                                        \
    Key{sec, field, [](const Config& c) { return fmt_double(c.member); },                            \
        [](Config& c, const std::string& v) { c.member = parse_double(v); }}
#define I(sec, field, member)                                                                        \
    Key{sec, field, [](const Config& c) { return std::to_string(c.member); },                        \
        [](Config& c, const std::string& v) { c.member = parse_int(v); }}
#define B(sec, field, member)                                                                        \
    Key{sec, field, [](const Config& c) { return std::string(c.member ? "true" : "false"); },        \
        [](Config& c, const std::string& v) { c.member = parse_bool(v); }}
#define S(sec, field, member)                                                                        \
    Key{sec, field, [](const Config& c) { return c.member; }, [](Config& c, const std::string& v) { c.member = v; }}

const std::vector<Key>& schema() {
    static const std::vector<Key> keys = {
        D("scaling", "nu", scaling.nu),
        D("scaling", "eps0", scaling.eps0),
        D("scaling", "t0", scaling.t0),
        I("recursion", "N", recursion.N),
        Key{"recursion", "levels",
            [](const Config& c) {
                std::string s;
                for (int j : c.recursion.levels) s += (s.empty() ? "" : ",") + std::to_string(j);
                return s;
            },
            [](Config& c, const std::string& v) { c.recursion.levels = parse_list(v); }},
        D("spectral", "ode_tol", spectral.ode_tol),
        B("spectral", "potential", spectral.potential),
        D("spectral", "xi_min", spectral.xi_min),
        D("spectral", "xi_max", spectral.xi_max),
        I("spectral", "n_xi", spectral.n_xi),
        D("spectral", "R_max", spectral.R_max),
        D("spectral", "dR", spectral.dR),
        D("spectral", "k_panel", spectral.k_panel),
        D("simulate", "tau0", simulate.tau0),
        D("simulate", "tau1", simulate.tau1),
        D("simulate", "dR", simulate.dR),
        D("simulate", "cfl", simulate.cfl),
        D("simulate", "dtau", simulate.dtau),
        D("simulate", "R_max", simulate.R_max),
        B("simulate", "potential", simulate.potential),
        B("simulate", "comoving", simulate.comoving),
        B("simulate", "residual", simulate.residual),
        B("simulate", "project_unstable", simulate.project_unstable),
        D("simulate", "snapshot_ds", simulate.snapshot_ds),
        D("simulate", "output_dtau", simulate.output_dtau),
        S("output", "dir", output.dir),
        B("output", "svg", output.svg),
        I("output", "threads", output.threads),
        S("output", "isa", output.isa),
    };
    return keys;
}

#undef D
#undef I
#undef B
#undef S

std::string env_name(const std::string& prefix, const Key& k) {
    std::string s = prefix + k.section + "_" + k.name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : schema()) out.push_back(k.section + "." + k.name);
    return out;
}

std::vector<std::string> Config::problems() const {
    std::vector<std::string> out;
    auto collect = [&](const std::string& path, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            out.push_back(path + ": " + e.what());
        }
    };
    collect("scaling", [&] { scaling.validate(); });
    if (recursion.N < 2 || recursion.N > 60) out.push_back("recursion.N: must lie in [2, 60]");
    if (recursion.levels.empty()) out.push_back("recursion.levels: empty");
    for (int j : recursion.levels) {
        if (j != 1 && j != 2) {
            out.push_back("recursion.levels: level " + std::to_string(j) + " is not 1 or 2");
        } else if (!(scaling.nu_tilde(j) > 1.0)) {
            out.push_back("recursion.levels: nu_tilde(" + std::to_string(j) + ") = " + fmt_double(scaling.nu_tilde(j)) +
                          " must exceed 1 (raise scaling.nu)");
        }
    }
    if (std::count(recursion.levels.begin(), recursion.levels.end(), 1) != 1 ||
        std::count(recursion.levels.begin(), recursion.levels.end(), 2) != 1)
        out.push_back("recursion.levels: the second correction needs levels 1 and 2, each once");
    collect("spectral", [&] { spectral.validate(); });
    collect("simulate", [&] { simulate.validate(); });
    if (output.threads < 0) out.push_back("output.threads: must be >= 0");
    if (output.dir.empty()) out.push_back("output.dir: empty");
    static const std::vector<std::string> isas{"auto", "scalar", "avx2", "neon"};
    if (std::find(isas.begin(), isas.end(), output.isa) == isas.end())
        out.push_back("output.isa: expected auto, scalar, avx2 or neon");
    return out;
}

void Config::validate() const {
    auto p = problems();
    if (p.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& s : p) msg += "\n  " + s;
    throw ValidationError(msg);
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& k : schema()) out += k.section + "." + k.name + " = " + k.get(*this) + "\n";
    return out;
}

Config load_config(const std::string& path, const std::string& env_prefix) {
    Config cfg;
    std::vector<std::string> errors;
    auto assign = [&](const Key& k, const std::string& value, const std::string& origin) {
        try {
            k.set(cfg, trim(value));
        } catch (const std::exception&) {
            errors.push_back(k.section + "." + k.name + ": cannot parse '" + value + "' (" + origin + ")");
        }
    };
    if (!path.empty()) {
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::read_ini(path, tree);
        } catch (const std::exception& e) {
            throw ValidationError(std::string("config: ") + e.what());
        }
        for (const auto& [sec, body] : tree) {
            if (body.empty() && !body.data().empty()) {
                errors.push_back(sec + ": key outside any section");
                continue;
            }
            for (const auto& [name, val] : body) {
                auto it = std::find_if(schema().begin(), schema().end(),
                                       [&](const Key& k) { return k.section == sec && k.name == name; });
                if (it == schema().end()) {
                    errors.push_back(sec + "." + name + ": unknown key");
                    continue;
                }
                assign(*it, val.data(), path);
            }
        }
    }
    for (const auto& k : schema()) {
        std::string name = env_name(env_prefix, k);
        if (const char* v = std::getenv(name.c_str())) assign(k, v, name);
    }
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& s : errors) msg += "\n  " + s;
        throw ValidationError(msg);
    }
    cfg.validate();
    return cfg;
}

}  // namespace blowup
