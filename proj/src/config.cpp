#include "mfhjb/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mfhjb/grid.hpp"

namespace mfhjb {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"grid", {"lower", "upper", "n"}},
        {"weight", {"blend_inner", "blend_outer"}},
        {"problem", {"fixture", "sigma", "horizon", "atoms", "cost_constant"}},
        {"search", {"pieces", "dt"}},
        {"experiments",
         {"seed", "n_particles", "particle_dt", "dictionary_size", "time_grid_size",
          "doubling_eps", "residual_probes"}},
        {"output", {"dir"}},
    };
    return k;
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    ExperimentConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (!known_keys().count(section))
                throw std::invalid_argument("config: unknown section [" + section + "] at line " +
                                            std::to_string(lineno));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section.empty() || !known_keys().at(section).count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' in section [" +
                                        section + "]");
        try {
            if (section == "grid") {
                if (key == "lower") cfg.grid_lower = std::stod(val);
                else if (key == "upper") cfg.grid_upper = std::stod(val);
                else cfg.grid_n = std::stoi(val);
            } else if (section == "weight") {
                if (key == "blend_inner") cfg.blend_inner = std::stod(val);
                else cfg.blend_outer = std::stod(val);
            } else if (section == "problem") {
                if (key == "fixture") cfg.fixture = val;
                else if (key == "sigma") cfg.sigma = std::stod(val);
                else if (key == "horizon") cfg.horizon = std::stod(val);
                else if (key == "atoms") cfg.atoms = parse_list(val);
                else cfg.cost_constant = std::stod(val);
            } else if (section == "search") {
                if (key == "pieces") cfg.pieces = std::stoi(val);
                else cfg.dt = std::stod(val);
            } else if (section == "experiments") {
                if (key == "seed") cfg.seed = std::stoull(val);
                else if (key == "n_particles") cfg.n_particles = std::stoi(val);
                else if (key == "particle_dt") cfg.particle_dt = std::stod(val);
                else if (key == "dictionary_size") cfg.dictionary_size = std::stoi(val);
                else if (key == "time_grid_size") cfg.time_grid_size = std::stoi(val);
                else if (key == "doubling_eps") cfg.doubling_eps = std::stod(val);
                else cfg.residual_probes = std::stoi(val);
            } else {  // output
                cfg.output_dir = val;
            }
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("config: bad value for '" + key + "' at line " +
                                        std::to_string(lineno));
        }
    }
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (grid_n < 16) throw std::invalid_argument("config: grid n must be >= 16");
    if (!(grid_lower < -2.5 && grid_upper > 2.5))
        throw std::invalid_argument("config: grid must contain [-2.5, 2.5]");
    if (sigma <= 0.0) throw std::invalid_argument("config: sigma must be positive");
    if (horizon <= 0.0) throw std::invalid_argument("config: horizon must be positive");
    if (atoms.empty()) throw std::invalid_argument("config: empty atom list");
    if (pieces < 1 || pieces > 6) throw std::invalid_argument("config: pieces in [1, 6]");
    if (dt <= 0.0 || particle_dt <= 0.0)
        throw std::invalid_argument("config: time steps must be positive");
    const double h = (grid_upper - grid_lower) / (grid_n - 1);
    if (dt > h * h / (2.0 * sigma * sigma))
        throw std::invalid_argument("config: dt violates the stability bound h^2/(2 sigma^2)");
    if (n_particles < 100) throw std::invalid_argument("config: n_particles must be >= 100");
    if (dictionary_size < 2 || dictionary_size > 12)
        throw std::invalid_argument("config: dictionary_size in [2, 12]");
    if (time_grid_size < 2 || time_grid_size > 8)
        throw std::invalid_argument("config: time_grid_size in [2, 8]");
    if (doubling_eps <= 0.0 || doubling_eps >= 1.0)
        throw std::invalid_argument("config: doubling_eps in (0, 1)");
    if (residual_probes < 1) throw std::invalid_argument("config: residual_probes must be >= 1");
    if (std::set<std::string>{"zero-drift", "pm-drift", "control-irrelevant", "ou"}.count(
            fixture) == 0)
        throw std::invalid_argument("config: unknown fixture '" + fixture + "'");
}

std::string ExperimentConfig::hash() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << grid_lower << grid_upper << grid_n << fixture << sigma << horizon << pieces << dt
       << seed << n_particles << particle_dt << dictionary_size << time_grid_size << doubling_eps
       << residual_probes << cost_constant;
    for (double a : atoms) ss << a;
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : ss.str()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

}  // namespace mfhjb
