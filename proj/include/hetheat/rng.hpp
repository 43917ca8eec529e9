#pragma once

#include <array>
#include <cstdint>

namespace hetheat {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

/// Stream of standard normals for one (seed, replica) pair.
///
/// Draw d is a pure function of (seed, replica, d): block d/2 of the Philox counter
/// (d/2, replica) under key `seed`, turned into two normals by Box-Muller. Streams for
/// different replicas never share a counter, so replicas can be generated in any order.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t replica, std::uint64_t first_draw = 0);

    double operator()();

    static double at(std::uint64_t seed, std::uint64_t replica, std::uint64_t draw);

private:
    void refill();

    PhiloxKey key_;
    std::uint64_t replica_;
    std::uint64_t block_;
    std::array<double, 2> cached_{};
    int next_ = 2;
};

}  // namespace hetheat
