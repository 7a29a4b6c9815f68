#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bfdecide/errors.hpp"
#include "bfdecide/interval.hpp"

namespace bfd {

// One-dimensional parameter space. Finite ends belong to the space.
struct ParameterSpace {
    double lower = -kInf;
    double upper = kInf;

    ParameterSpace() = default;
    ParameterSpace(double lo, double hi) : lower(lo), upper(hi) {
        if (!(lo < hi)) throw DomainError("parameter space requires lower < upper");
    }

    static ParameterSpace real_line() { return {}; }
    static ParameterSpace unit_interval() { return {0.0, 1.0}; }

    bool contains(double theta) const noexcept { return theta >= lower && theta <= upper; }
    bool bounded() const noexcept { return std::isfinite(lower) && std::isfinite(upper); }
    double width() const noexcept { return upper - lower; }

    Interval as_interval() const { return Interval::make(lower, upper, true, true); }
    IntervalUnion as_union() const { return IntervalUnion{as_interval()}; }

    friend bool operator==(const ParameterSpace&, const ParameterSpace&) = default;
};

enum class Membership { InTheta0, InTheta1, Boundary };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::InTheta0: return "theta0";
        case Membership::InTheta1: return "theta1";
        case Membership::Boundary: return "boundary";
    }
    return "?";
}

struct HypothesisPair {
    ParameterSpace space;
    IntervalUnion theta0;
    IntervalUnion theta1;
    std::pair<std::string, std::string> labels{"H0", "H1"};

    // Theta0 = [a, b] against its complement in the space; Theta0 closed, Theta1 open at a and b.
    static HypothesisPair interval_vs_complement(double a, double b, ParameterSpace space = {}) {
        HypothesisPair p;
        p.space = space;
        p.theta0 = intersect(IntervalUnion{Interval::closed(a, b)}, space.as_union());
        p.theta1 = difference(space.as_union(), p.theta0);
        return p;
    }

    // Point null {a} against the rest of the space.
    static HypothesisPair point_vs_complement(double a, ParameterSpace space = {}) {
        return interval_vs_complement(a, a, space);
    }

    bool point_null() const noexcept { return !theta0.empty() && theta0.measure_zero(); }
    bool point_alternative() const noexcept { return !theta1.empty() && theta1.measure_zero(); }

    HypothesisPair swapped() const {
        HypothesisPair p{space, theta1, theta0, {labels.second, labels.first}};
        return p;
    }
};

inline Membership membership(const HypothesisPair& pair, double theta) {
    if (std::isnan(theta) || !pair.space.contains(theta))
        throw DomainError("theta = " + format_bound(theta) + " lies outside the parameter space");
    if (pair.theta0.contains(theta)) return Membership::InTheta0;
    if (pair.theta1.contains(theta)) return Membership::InTheta1;
    return Membership::Boundary;
}

struct PartitionReport {
    bool valid = true;
    std::vector<Interval> gaps;           // positive-length pieces covered by neither set
    std::vector<Interval> overlaps;       // pieces covered by both sets
    std::vector<Interval> outside_space;  // pieces of theta0/theta1 outside the space
    std::vector<double> boundary_points;  // isolated points covered by neither set (allowed)
    std::vector<std::string> messages;
    bool point_null = false;
};

inline PartitionReport validate_partition(const HypothesisPair& pair) {
    PartitionReport r;
    const IntervalUnion space = pair.space.as_union();

    for (const auto* set : {&pair.theta0, &pair.theta1}) {
        const IntervalUnion outside = difference(*set, space);
        for (const auto& iv : outside.intervals()) r.outside_space.push_back(iv);
    }
    if (!r.outside_space.empty()) {
        r.valid = false;
        r.messages.push_back("hypothesis sets extend beyond the parameter space");
    }
    if (pair.theta0.empty() || pair.theta1.empty()) {
        r.valid = false;
        r.messages.push_back(pair.theta0.empty() ? "theta0 is empty" : "theta1 is empty");
    }

    const IntervalUnion overlap = intersect(pair.theta0, pair.theta1);
    for (const auto& iv : overlap.intervals()) r.overlaps.push_back(iv);
    if (!r.overlaps.empty()) {
        r.valid = false;
        for (const auto& iv : r.overlaps) r.messages.push_back("overlap " + to_string(iv));
    }

    const IntervalUnion uncovered = difference(space, unite(pair.theta0, pair.theta1));
    for (const auto& iv : uncovered.intervals()) {
        if (iv.lo == iv.hi) {
            r.boundary_points.push_back(iv.lo);
        } else {
            r.gaps.push_back(iv);
            r.valid = false;
            r.messages.push_back("gap " + to_string(iv));
        }
    }
    r.point_null = pair.point_null();
    return r;
}

inline bool set_equal(const HypothesisPair& a, const HypothesisPair& b) {
    return a.space == b.space && a.theta0 == b.theta0 && a.theta1 == b.theta1;
}

} // namespace bfd
