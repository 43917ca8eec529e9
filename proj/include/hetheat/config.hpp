#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetheat/kernel.hpp"
#include "hetheat/quadrature.hpp"

namespace hetheat {

struct ZRange {
    double lo = -3.0;
    double hi = 3.0;
    double step = 0.1;
};

ZRange parse_z_range(const std::string& text);

struct ExperimentConfig {
    std::array<double, 4> medium{1.0, 4.0, 1.0, 2.0};  ///< a1, a2, rho1, rho2
    double t = 1.0;
    double t_max = 10.0;
    std::vector<int> n_list{16, 32, 64, 128, 256, 512};
    int m_replicas = 10000;
    int K = 12;
    int paths = 8;
    int sample_replicas = 100;
    std::uint64_t seed = 7;
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 200;
    // kernel-table
    double u = 0.5;
    double x = 0.0;
    ZRange z_range{};
    // Locations; not part of the config hash.
    std::string output_dir = "output";
    std::string cache_dir = "cache";

    /// Throws ValidationError naming the offending field.
    void validate() const;

    Medium make_medium() const;
    QuadratureSpec quadrature() const;

    /// Every field that influences results, with exact (hex) doubles.
    nlohmann::json canonical() const;
    /// Human-readable echo of the whole configuration.
    nlohmann::json to_json() const;
    /// 16 hex digits of a 64-bit FNV-1a hash of canonical().
    std::string hash() const;
    /// First 12 hex digits of hash().
    std::string run_id() const;
};

/// Applies the keys of a flat JSON object. Unknown keys and wrongly typed values are rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

/// Reads and applies a JSON file. A missing or unparsable file is a ValidationError on "config".
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace hetheat
