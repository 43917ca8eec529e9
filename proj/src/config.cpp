#include "hetheat/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hetheat/errors.hpp"

namespace hetheat {

namespace {

std::string hex_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double parse_number(const std::string& s, const char* field) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ValidationError(field, "not a number: '" + s + "'");
    }
    if (used != s.size()) throw ValidationError(field, "not a number: '" + s + "'");
    return v;
}

template <typename T>
T get(const nlohmann::json& v, const char* field) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(field, "has the wrong type");
    }
}

void require(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ValidationError(field, msg);
}

}  // namespace

ZRange parse_z_range(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    require(parts.size() == 3, "z_range", "expected lo:hi:step");
    ZRange r{parse_number(parts[0], "z_range"), parse_number(parts[1], "z_range"),
             parse_number(parts[2], "z_range")};
    require(r.step > 0.0 && r.hi >= r.lo, "z_range", "need lo <= hi and step > 0");
    return r;
}

void ExperimentConfig::validate() const {
    static const char* names[] = {"a1", "a2", "rho1", "rho2"};
    for (std::size_t i = 0; i < 4; ++i) {
        require(std::isfinite(medium[i]) && medium[i] > 0.0, names[i], "must be strictly positive and finite");
    }
    require(std::isfinite(t_max) && t_max > 0.0, "t_max", "must be > 0");
    require(std::isfinite(t) && t > 0.0 && t <= t_max, "t", "must lie in (0, t_max]");
    require(!n_list.empty(), "n_list", "must be nonempty");
    require(std::is_sorted(n_list.begin(), n_list.end()) &&
                std::adjacent_find(n_list.begin(), n_list.end()) == n_list.end(),
            "n_list", "must be strictly increasing");
    require(n_list.front() >= 1 && n_list.back() <= 8192, "n_list", "entries must lie in [1, 8192]");
    require(m_replicas >= 1000, "m", "must be >= 1000");
    require(K >= 1 && K <= 13, "K", "must lie in [1, 13]");
    require(paths >= 1, "paths", "must be >= 1");
    require(sample_replicas >= 1, "sample_replicas", "must be >= 1");
    require(std::isfinite(rel_tol) && rel_tol > 0.0, "rel_tol", "must be > 0");
    require(std::isfinite(abs_tol) && abs_tol > 0.0, "abs_tol", "must be > 0");
    require(max_subdivisions >= 64, "max_subdivisions", "must be >= 64");
    require(std::isfinite(u) && u > 0.0, "u", "must be > 0");
    require(std::isfinite(x), "x", "must be finite");
    require(z_range.step > 0.0 && z_range.hi >= z_range.lo && (z_range.hi - z_range.lo) / z_range.step <= 1e6,
            "z_range", "need lo <= hi, step > 0 and at most 1e6 points");
    require(!output_dir.empty(), "output_dir", "must be nonempty");
    require(!cache_dir.empty(), "cache_dir", "must be nonempty");
}

Medium ExperimentConfig::make_medium() const {
    return hetheat::make_medium(medium[0], medium[1], medium[2], medium[3]);
}

QuadratureSpec ExperimentConfig::quadrature() const {
    QuadratureSpec q;
    q.rel_tol = rel_tol;
    q.abs_tol = abs_tol;
    q.max_subdivisions = max_subdivisions;
    return q;
}

nlohmann::json ExperimentConfig::canonical() const {
    nlohmann::json j;
    j["medium"] = {hex_double(medium[0]), hex_double(medium[1]), hex_double(medium[2]), hex_double(medium[3])};
    j["t"] = hex_double(t);
    j["t_max"] = hex_double(t_max);
    j["n_list"] = n_list;
    j["m"] = m_replicas;
    j["K"] = K;
    j["paths"] = paths;
    j["sample_replicas"] = sample_replicas;
    j["seed"] = seed;
    j["rel_tol"] = hex_double(rel_tol);
    j["abs_tol"] = hex_double(abs_tol);
    j["max_subdivisions"] = max_subdivisions;
    j["u"] = hex_double(u);
    j["x"] = hex_double(x);
    j["z_range"] = {hex_double(z_range.lo), hex_double(z_range.hi), hex_double(z_range.step)};
    return j;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["medium"] = medium;
    j["t"] = t;
    j["t_max"] = t_max;
    j["n_list"] = n_list;
    j["m"] = m_replicas;
    j["K"] = K;
    j["paths"] = paths;
    j["sample_replicas"] = sample_replicas;
    j["seed"] = seed;
    j["rel_tol"] = rel_tol;
    j["abs_tol"] = abs_tol;
    j["max_subdivisions"] = max_subdivisions;
    j["u"] = u;
    j["x"] = x;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g:%.17g:%.17g", z_range.lo, z_range.hi, z_range.step);
    j["z_range"] = buf;
    j["output_dir"] = output_dir;
    j["cache_dir"] = cache_dir;
    return j;
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical().dump())));
    return buf;
}

std::string ExperimentConfig::run_id() const { return hash().substr(0, 12); }

void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config", "top level must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "medium") {
            const auto m = get<std::vector<double>>(v, "medium");
            if (m.size() != 4) throw ValidationError("medium", "expected [a1, a2, rho1, rho2]");
            std::copy(m.begin(), m.end(), cfg.medium.begin());
        } else if (key == "t") {
            cfg.t = get<double>(v, "t");
        } else if (key == "t_max") {
            cfg.t_max = get<double>(v, "t_max");
        } else if (key == "n_list") {
            cfg.n_list = get<std::vector<int>>(v, "n_list");
        } else if (key == "m") {
            cfg.m_replicas = get<int>(v, "m");
        } else if (key == "K") {
            cfg.K = get<int>(v, "K");
        } else if (key == "paths") {
            cfg.paths = get<int>(v, "paths");
        } else if (key == "sample_replicas") {
            cfg.sample_replicas = get<int>(v, "sample_replicas");
        } else if (key == "seed") {
            cfg.seed = get<std::uint64_t>(v, "seed");
        } else if (key == "rel_tol") {
            cfg.rel_tol = get<double>(v, "rel_tol");
        } else if (key == "abs_tol") {
            cfg.abs_tol = get<double>(v, "abs_tol");
        } else if (key == "max_subdivisions") {
            cfg.max_subdivisions = get<int>(v, "max_subdivisions");
        } else if (key == "u") {
            cfg.u = get<double>(v, "u");
        } else if (key == "x") {
            cfg.x = get<double>(v, "x");
        } else if (key == "z_range") {
            cfg.z_range = parse_z_range(get<std::string>(v, "z_range"));
        } else if (key == "output_dir") {
            cfg.output_dir = get<std::string>(v, "output_dir");
        } else if (key == "cache_dir") {
            cfg.cache_dir = get<std::string>(v, "cache_dir");
        } else {
            throw ValidationError(key, "unknown configuration key");
        }
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config", std::string("invalid JSON: ") + e.what());
    }
    apply_json(cfg, j);
}

}  // namespace hetheat
