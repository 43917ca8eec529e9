#include "hetheat/rng.hpp"

#include <cmath>
#include <numbers>

namespace hetheat {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

PhiloxKey key_of(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

PhiloxCounter counter_of(std::uint64_t block, std::uint64_t replica) {
    return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
}

// Uniform on the open interval (0, 1) from 64 random bits.
double open_uniform(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::array<double, 2> box_muller(const PhiloxCounter& r) {
    const double u1 = open_uniform(r[0], r[1]);
    const double u2 = open_uniform(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t replica, std::uint64_t first_draw)
    : key_(key_of(seed)), replica_(replica), block_(first_draw / 2) {
    refill();
    next_ = static_cast<int>(first_draw % 2);
}

void NormalStream::refill() {
    cached_ = box_muller(philox4x32(counter_of(block_, replica_), key_));
    ++block_;
    next_ = 0;
}

double NormalStream::operator()() {
    if (next_ == 2) refill();
    return cached_[static_cast<std::size_t>(next_++)];
}

double NormalStream::at(std::uint64_t seed, std::uint64_t replica, std::uint64_t draw) {
    return box_muller(philox4x32(counter_of(draw / 2, replica), key_of(seed)))[draw % 2];
}

}  // namespace hetheat
