#include "hetheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hetheat/errors.hpp"

namespace hetheat {

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) throw ValidationError("rel_tol", "must be > 0");
    if (!(abs_tol > 0.0) || !std::isfinite(abs_tol)) throw ValidationError("abs_tol", "must be > 0");
    if (max_subdivisions < 64) throw ValidationError("max_subdivisions", "must be >= 64");
}

namespace {

struct Panel {
    double a;
    double b;
    double value;
    double error;
};

bool smaller_error(const Panel& lhs, const Panel& rhs) { return lhs.error < rhs.error; }

Panel gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using Gauss = boost::math::quadrature::gauss<double, 7>;
    static const auto& nodes = Kronrod::abscissa();
    static const auto& kw = Kronrod::weights();
    static const auto& gw = Gauss::weights();

    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    // nodes[0] == 0; Gauss nodes are the even-indexed Kronrod nodes.
    const double f0 = f(mid);
    double kronrod = kw[0] * f0;
    double gauss = gw[0] * f0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double dx = half * nodes[i];
        const double pair = f(mid - dx) + f(mid + dx);
        kronrod += kw[i] * pair;
        if (i % 2 == 0) gauss += gw[i / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureSpec& spec, std::span<const double> breaks) {
    QuadratureResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }

    std::vector<double> cuts{a};
    for (double p : breaks) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Panel> heap;
    heap.reserve(static_cast<std::size_t>(spec.max_subdivisions) + cuts.size());
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        heap.push_back(gauss_kronrod_15(f, cuts[i], cuts[i + 1]));
        value += heap.back().value;
        error += heap.back().error;
    }
    std::make_heap(heap.begin(), heap.end(), smaller_error);

    int subdivisions = static_cast<int>(heap.size());
    auto done = [&] { return error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value)); };
    while (!done() && subdivisions < spec.max_subdivisions) {
        std::pop_heap(heap.begin(), heap.end(), smaller_error);
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted at machine precision
        const Panel left = gauss_kronrod_15(f, worst.a, mid);
        const Panel right = gauss_kronrod_15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), smaller_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), smaller_error);
        ++subdivisions;
    }

    // Re-sum to shed the drift of the running updates.
    value = 0.0;
    error = 0.0;
    for (const Panel& p : heap) {
        value += p.value;
        error += p.error;
    }
    out.value = sign * value;
    out.error = error;
    out.subdivisions = subdivisions;
    out.converged = done();
    return out;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSpec& spec, const char* op, std::span<const double> breaks) {
    const QuadratureResult r = integrate_adaptive(f, a, b, spec, breaks);
    if (!r.converged) throw QuadratureError(op, r.value, r.error);
    return r.value;
}

}  // namespace hetheat
