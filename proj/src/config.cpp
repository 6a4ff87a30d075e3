#include "chac/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chac/errors.hpp"
#include "chac/study.hpp"

namespace chac {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string where(int line) { return line > 0 ? "line " + std::to_string(line) + ": " : ""; }

template <class T>
T parse_number(std::string_view key, std::string_view value, int line) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || value.empty()) {
        throw ConfigError(line, where(line) + "invalid value '" + std::string(value) + "' for " + std::string(key));
    }
    return out;
}

std::string key_list() {
    std::string s;
    for (const auto& k : config_keys()) {
        if (!s.empty()) s += ", ";
        s += k;
    }
    return s;
}

}  // namespace

double RunConfig::h() const { return std::ldexp(1.0, -mesh_k); }
double RunConfig::tau() const { return tau_factor * h(); }

std::size_t RunConfig::n_steps() const {
    try {
        return steps_for_level(T, tau_factor, mesh_k);
    } catch (const InvalidParameter& ex) {
        throw ConfigError(0, ex.what());
    }
}

ModelParams RunConfig::model() const {
    ModelParams p;
    p.gamma_rho = gamma_rho;
    p.gamma_eta = gamma_eta;
    p.potential = PotentialSpec{C, D, alpha};
    p.mobility = MobilitySpec{l22, l12_scale, normal_c};
    return p;
}

RunOptions RunConfig::run_options() const {
    RunOptions o;
    o.newton.tol_residual = newton_tol;
    o.newton.abs_floor = newton_abs_floor;
    o.newton.max_iter = newton_max_iter;
    o.time_quad_points = time_quad_points;
    return o;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "mesh_k",     "tau_factor",       "T",           "gamma_rho",      "gamma_eta",
        "C",          "D",                "alpha",       "l22",            "l12_scale",
        "normal_c",   "newton_tol",       "newton_abs_floor", "newton_max_iter", "quad_degree",
        "time_quad_points", "snapshot_every", "output_dir", "seed"};
    return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value, int line) {
    auto dbl = [&] { return parse_number<double>(key, value, line); };
    auto integer = [&] { return parse_number<int>(key, value, line); };
    if (key == "mesh_k") cfg.mesh_k = integer();
    else if (key == "tau_factor") cfg.tau_factor = dbl();
    else if (key == "T") cfg.T = dbl();
    else if (key == "gamma_rho") cfg.gamma_rho = dbl();
    else if (key == "gamma_eta") cfg.gamma_eta = dbl();
    else if (key == "C") cfg.C = dbl();
    else if (key == "D") cfg.D = dbl();
    else if (key == "alpha") cfg.alpha = dbl();
    else if (key == "l22") cfg.l22 = dbl();
    else if (key == "l12_scale") cfg.l12_scale = dbl();
    else if (key == "normal_c") cfg.normal_c = dbl();
    else if (key == "newton_tol") cfg.newton_tol = dbl();
    else if (key == "newton_abs_floor") cfg.newton_abs_floor = dbl();
    else if (key == "newton_max_iter") cfg.newton_max_iter = integer();
    else if (key == "quad_degree") cfg.quad_degree = integer();
    else if (key == "time_quad_points") cfg.time_quad_points = integer();
    else if (key == "snapshot_every") cfg.snapshot_every = integer();
    else if (key == "output_dir") {
        if (value.empty()) throw ConfigError(line, where(line) + "output_dir must not be empty");
        cfg.output_dir = std::string(value);
    } else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value, line);
    else {
        throw ConfigError(line, where(line) + "unknown key '" + std::string(key) + "'; valid keys: " + key_list());
    }
}

RunConfig parse_config(std::string_view text, const RunConfig& base) {
    RunConfig cfg = base;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(line_no, where(line_no) + "expected 'key = value', got '" + std::string(line) + "'");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(line_no, where(line_no) + "missing key before '='");
        set_config_value(cfg, key, trim(line.substr(eq + 1)), line_no);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), base);
    } catch (const ConfigError& ex) {
        throw ConfigError(ex.line(), path.string() + ": " + ex.what());
    }
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(0, "override '" + std::string(assignment) + "' is not of the form key=value");
    }
    set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void validate_config(const RunConfig& cfg) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(0, msg);
    };
    require(cfg.mesh_k >= 1 && cfg.mesh_k <= 12, "mesh_k must be in [1, 12]");
    require(cfg.tau_factor > 0.0, "tau_factor must be positive");
    require(cfg.T > 0.0, "T must be positive");
    require(cfg.newton_tol > 0.0, "newton_tol must be positive");
    require(cfg.newton_abs_floor >= 0.0, "newton_abs_floor must be nonnegative");
    require(cfg.newton_max_iter >= 1, "newton_max_iter must be >= 1");
    require(cfg.quad_degree >= FeSpace::kMinQuadDegree,
            "quad_degree must be >= " + std::to_string(FeSpace::kMinQuadDegree));
    require(cfg.time_quad_points >= 1, "time_quad_points must be >= 1");
    require(cfg.snapshot_every >= 0, "snapshot_every must be >= 0");
    (void)cfg.n_steps();
    try {
        const ModelParams p = cfg.model();
        validate(p);
        check_mobility_spd(p.mobility, 1000, 1e3, cfg.seed);
    } catch (const InvalidParameter& ex) {
        throw ConfigError(0, ex.what());
    }
}

std::string format_config(const RunConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "mesh_k = " << cfg.mesh_k << '\n'
       << "tau_factor = " << cfg.tau_factor << '\n'
       << "T = " << cfg.T << '\n'
       << "gamma_rho = " << cfg.gamma_rho << '\n'
       << "gamma_eta = " << cfg.gamma_eta << '\n'
       << "C = " << cfg.C << '\n'
       << "D = " << cfg.D << '\n'
       << "alpha = " << cfg.alpha << '\n'
       << "l22 = " << cfg.l22 << '\n'
       << "l12_scale = " << cfg.l12_scale << '\n'
       << "normal_c = " << cfg.normal_c << '\n'
       << "newton_tol = " << cfg.newton_tol << '\n'
       << "newton_abs_floor = " << cfg.newton_abs_floor << '\n'
       << "newton_max_iter = " << cfg.newton_max_iter << '\n'
       << "quad_degree = " << cfg.quad_degree << '\n'
       << "time_quad_points = " << cfg.time_quad_points << '\n'
       << "snapshot_every = " << cfg.snapshot_every << '\n'
       << "output_dir = " << cfg.output_dir << '\n'
       << "seed = " << cfg.seed << '\n'
       << "# h = " << cfg.h() << '\n'
       << "# tau = " << cfg.tau() << '\n'
       << "# N = " << cfg.n_steps() << '\n';
    return os.str();
}

}  // namespace chac
