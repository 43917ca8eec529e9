#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hetheat/covariance.hpp"
#include "hetheat/errors.hpp"

namespace hetheat {

namespace {

constexpr int kCacheVersion = 1;

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

nlohmann::json params_json(const std::string& kernel_id, double t, int n, const QuadratureSpec& q) {
    // Hex floats so that the key is exact and locale independent.
    return {{"version", kCacheVersion},
            {"kernel", kernel_id},
            {"t", hex_double(t)},
            {"n", n},
            {"rel_tol", hex_double(q.rel_tol)},
            {"abs_tol", hex_double(q.abs_tol)},
            {"max_subdivisions", q.max_subdivisions},
            {"time_substitution", q.time_substitution},
            {"semi_analytic", q.semi_analytic}};
}

std::string unique_suffix() {
    std::random_device rd;
    char buf[32];
    std::snprintf(buf, sizeof buf, ".tmp%08x", rd());
    return buf;
}

void write_atomically(const std::filesystem::path& target, const std::string& bytes) {
    const std::filesystem::path tmp = target.string() + unique_suffix();
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace

GramCache::GramCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path GramCache::default_dir(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("HETHEAT_CACHE_DIR"); env && *env) {
        return std::filesystem::path(env) / "gram";
    }
    return fallback / "gram";
}

std::string GramCache::key(const std::string& kernel_id, double t, int n, const QuadratureSpec& q) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(params_json(kernel_id, t, n, q).dump())));
    return buf;
}

std::optional<IncrementGram> GramCache::load(const std::string& key) const {
    const auto bin = dir_ / (key + ".bin");
    const auto meta = dir_ / (key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(bin, ec) || !std::filesystem::exists(meta, ec)) return std::nullopt;

    nlohmann::json j;
    try {
        std::ifstream in(meta);
        in >> j;
    } catch (const std::exception&) {
        return std::nullopt;
    }
    const int n = j.value("params", nlohmann::json::object()).value("n", 0);
    if (n < 1) return std::nullopt;

    IncrementGram g;
    g.grid_n = n;
    g.t = std::strtod(j["params"].value("t", "0").c_str(), nullptr);
    g.kernel_id = j["params"].value("kernel", "");
    g.entries.resize(n, n);
    const auto bytes = static_cast<std::streamsize>(sizeof(double)) * n * n;
    std::ifstream in(bin, std::ios::binary);
    in.read(reinterpret_cast<char*>(g.entries.data()), bytes);
    if (in.gcount() != bytes) return std::nullopt;
    return g;
}

void GramCache::store(const std::string& key, const IncrementGram& gram, const QuadratureSpec& q) const {
    std::filesystem::create_directories(dir_);
    const auto n = gram.grid_n;
    std::string bytes(sizeof(double) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n), '\0');
    std::memcpy(bytes.data(), gram.entries.data(), bytes.size());
    write_atomically(dir_ / (key + ".bin"), bytes);

    nlohmann::json meta;
    meta["params"] = params_json(gram.kernel_id, gram.t, n, q);
    meta["key"] = key;
    write_atomically(dir_ / (key + ".json"), meta.dump(2) + "\n");
}

}  // namespace hetheat
