#include "cotrack/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cotrack/errors.hpp"

namespace cotrack {

const char* feature_name(FeatureKind k) {
    switch (k) {
    case FeatureKind::Hog: return "hog";
    case FeatureKind::Cn: return "cn";
    case FeatureKind::Lbp: return "lbp";
    }
    return "?";
}

double SolverConfig::epsilon_for(std::size_t nvar) const {
    return epsilon_factor * std::sqrt(static_cast<double>(nvar));
}

void SolverConfig::validate() const {
    if (lambda0 < 0.0) throw ConfigError("config: lambda0 must be >= 0");
    if (lambda_pair < 0.0) throw ConfigError("config: lambda_pair must be >= 0");
    if (!lambda_pair_matrix.empty()) {
        const auto n2 = lambda_pair_matrix.size();
        const auto n = static_cast<std::size_t>(std::lround(std::sqrt(double(n2))));
        if (n * n != n2)
            throw ConfigError("config: lambda_pair_matrix must be square");
        for (std::size_t i = 0; i < n; ++i) {
            if (lambda_pair_matrix[i * n + i] != 0.0)
                throw ConfigError("config: lambda_pair_matrix diagonal must be zero");
            for (std::size_t j = 0; j < n; ++j) {
                const double a = lambda_pair_matrix[i * n + j];
                if (a < 0.0)
                    throw ConfigError("config: lambda_pair_matrix must be >= 0");
                if (std::abs(a - lambda_pair_matrix[j * n + i]) > 1e-12)
                    throw ConfigError("config: lambda_pair_matrix must be symmetric");
            }
        }
    }
    if (ridge_lambda < 0.0) throw ConfigError("config: ridge_lambda must be >= 0");
    if (!(mu0 > 0.0)) throw ConfigError("config: mu0 must be > 0");
    if (rho < 1.0) throw ConfigError("config: rho must be >= 1");
    if (mu_max < mu0) throw ConfigError("config: mu_max must be >= mu0");
    if (!(epsilon_factor > 0.0)) throw ConfigError("config: epsilon_factor must be > 0");
    if (max_iter < 1) throw ConfigError("config: max_iter must be >= 1");
    if (max_iter_warm < 1) throw ConfigError("config: max_iter_warm must be >= 1");
}

std::vector<double> TrackerConfig::default_scale_factors() {
    std::vector<double> s;
    for (int n = -3; n <= 3; ++n)
        s.push_back(std::pow(1.02, n));
    return s;
}

void TrackerConfig::validate() const {
    if (cell_size < 1) throw ConfigError("config: cell_size must be >= 1");
    if (padding < 1.0) throw ConfigError("config: padding must be >= 1");
    if (!(label_sigma_factor > 0.0))
        throw ConfigError("config: label_sigma_factor must be > 0");
    if (learning_rate < 0.0 || learning_rate > 1.0)
        throw ConfigError("config: learning_rate must be in [0, 1]");
    if (scale_factors.empty())
        throw ConfigError("config: scale_factors must not be empty");
    if (!std::is_sorted(scale_factors.begin(), scale_factors.end()))
        throw ConfigError("config: scale_factors must be sorted ascending");
    for (double s : scale_factors)
        if (!(s > 0.0))
            throw ConfigError("config: scale_factors must be positive");
    if (std::none_of(scale_factors.begin(), scale_factors.end(),
                     [](double s) { return s == 1.0; }))
        throw ConfigError("config: scale_factors must contain 1.0");
    if (!(scale_prior_sigma > 0.0))
        throw ConfigError("config: scale_prior_sigma must be > 0");
    if (features_enabled.empty())
        throw ConfigError("config: features_enabled must not be empty");
    for (std::size_t i = 0; i < features_enabled.size(); ++i)
        for (std::size_t j = i + 1; j < features_enabled.size(); ++j)
            if (features_enabled[i] == features_enabled[j])
                throw ConfigError("config: features_enabled lists a feature twice");
    solver.validate();
}

int TrackerConfig::unit_scale_index() const {
    for (std::size_t i = 0; i < scale_factors.size(); ++i)
        if (scale_factors[i] == 1.0)
            return static_cast<int>(i);
    return static_cast<int>(scale_factors.size()) / 2;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size())
            throw ConfigError("config: invalid number for key \"" + key + "\"");
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config: invalid number for key \"" + key + "\"");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    double d = parse_double(key, v);
    int i = static_cast<int>(std::lround(d));
    if (double(i) != d)
        throw ConfigError("config: key \"" + key + "\" expects an integer");
    return i;
}

std::vector<std::string> parse_list(const std::string& key, const std::string& v) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ConfigError("config: key \"" + key + "\" expects a [..] list");
    std::vector<std::string> items;
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            items.push_back(item);
    }
    return items;
}

void apply_key(TrackerConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "cell_size") cfg.cell_size = parse_int(key, value);
    else if (key == "padding") cfg.padding = parse_double(key, value);
    else if (key == "label_sigma_factor") cfg.label_sigma_factor = parse_double(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
    else if (key == "scale_prior_sigma") cfg.scale_prior_sigma = parse_double(key, value);
    else if (key == "scale_factors") {
        cfg.scale_factors.clear();
        for (const auto& item : parse_list(key, value))
            cfg.scale_factors.push_back(parse_double(key, item));
    } else if (key == "features_enabled") {
        cfg.features_enabled.clear();
        for (const auto& item : parse_list(key, value)) {
            if (item == "hog") cfg.features_enabled.push_back(FeatureKind::Hog);
            else if (item == "cn") cfg.features_enabled.push_back(FeatureKind::Cn);
            else if (item == "lbp") cfg.features_enabled.push_back(FeatureKind::Lbp);
            else throw ConfigError("config: unknown feature \"" + item + "\"");
        }
    } else if (key == "lambda0") cfg.solver.lambda0 = parse_double(key, value);
    else if (key == "lambda_pair") cfg.solver.lambda_pair = parse_double(key, value);
    else if (key == "ridge_lambda") cfg.solver.ridge_lambda = parse_double(key, value);
    else if (key == "mu0") cfg.solver.mu0 = parse_double(key, value);
    else if (key == "rho") cfg.solver.rho = parse_double(key, value);
    else if (key == "mu_max") cfg.solver.mu_max = parse_double(key, value);
    else if (key == "epsilon_factor") cfg.solver.epsilon_factor = parse_double(key, value);
    else if (key == "max_iter") cfg.solver.max_iter = parse_int(key, value);
    else if (key == "max_iter_warm") cfg.solver.max_iter_warm = parse_int(key, value);
    else if (key == "prox_mode") {
        if (value == "block_shrinkage") cfg.solver.prox_mode = ProxMode::BlockShrinkage;
        else if (value == "elementwise_soft_threshold")
            cfg.solver.prox_mode = ProxMode::ElementwiseSoftThreshold;
        else throw ConfigError("config: invalid prox_mode \"" + value + "\"");
    } else if (key == "sweep_mode") {
        if (value == "gauss_seidel") cfg.solver.sweep_mode = SweepMode::GaussSeidel;
        else if (value == "jacobi") cfg.solver.sweep_mode = SweepMode::Jacobi;
        else throw ConfigError("config: invalid sweep_mode \"" + value + "\"");
    } else if (key == "solve_kernel") {
        if (value == "woodbury") cfg.solver.solve_kernel = SolveKernel::Woodbury;
        else if (value == "dense") cfg.solver.solve_kernel = SolveKernel::Dense;
        else throw ConfigError("config: invalid solve_kernel \"" + value + "\"");
    } else {
        throw ConfigError("config: unknown key \"" + key + "\"");
    }
}

} // namespace

TrackerConfig parse_config_text(const std::string& text) {
    TrackerConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not of the form key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: empty key on line " + std::to_string(lineno));
        apply_key(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

TrackerConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("config: cannot read \"" + path + "\"");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

} // namespace cotrack
