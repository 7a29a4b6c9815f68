#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bfdecide/errors.hpp"

namespace bfd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One interval of the extended real line. Infinite endpoints are always open.
// A degenerate interval [a, a] represents a single point.
struct Interval {
    double lo = -kInf;
    double hi = kInf;
    bool lo_closed = false;
    bool hi_closed = false;

    static Interval closed(double a, double b) { return make(a, b, true, true); }
    static Interval open(double a, double b) { return make(a, b, false, false); }
    static Interval point(double a) { return make(a, a, true, true); }

    static Interval make(double a, double b, bool a_closed, bool b_closed) {
        if (std::isnan(a) || std::isnan(b)) throw DomainError("interval endpoint is NaN");
        Interval iv{a, b, a_closed && std::isfinite(a), b_closed && std::isfinite(b)};
        return iv;
    }

    bool empty() const noexcept {
        if (lo < hi) return false;
        return !(lo == hi && lo_closed && hi_closed);
    }

    bool is_point() const noexcept { return lo == hi && lo_closed && hi_closed; }

    double length() const noexcept { return empty() ? 0.0 : hi - lo; }

    bool contains(double x) const noexcept {
        if (x < lo || x > hi) return false;
        if (x == lo && !lo_closed) return false;
        if (x == hi && !hi_closed) return false;
        return true;
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval intersect(const Interval& a, const Interval& b) {
    Interval r;
    if (a.lo > b.lo) {
        r.lo = a.lo;
        r.lo_closed = a.lo_closed;
    } else if (b.lo > a.lo) {
        r.lo = b.lo;
        r.lo_closed = b.lo_closed;
    } else {
        r.lo = a.lo;
        r.lo_closed = a.lo_closed && b.lo_closed;
    }
    if (a.hi < b.hi) {
        r.hi = a.hi;
        r.hi_closed = a.hi_closed;
    } else if (b.hi < a.hi) {
        r.hi = b.hi;
        r.hi_closed = b.hi_closed;
    } else {
        r.hi = a.hi;
        r.hi_closed = a.hi_closed && b.hi_closed;
    }
    return r;
}

inline std::string format_bound(double x) {
    if (x == kInf) return "+inf";
    if (x == -kInf) return "-inf";
    std::ostringstream os;
    os.precision(15);
    os << x;
    return os.str();
}

inline std::string to_string(const Interval& iv) {
    if (iv.is_point()) return "{" + format_bound(iv.lo) + "}";
    return std::string(iv.lo_closed ? "[" : "(") + format_bound(iv.lo) + ", " + format_bound(iv.hi) +
           (iv.hi_closed ? "]" : ")");
}

// Sorted, pairwise-disjoint union of intervals. Construction normalizes:
// empty pieces are dropped and touching or overlapping pieces are merged.
class IntervalUnion {
public:
    IntervalUnion() = default;
    IntervalUnion(std::initializer_list<Interval> ivs) : IntervalUnion(std::vector<Interval>(ivs)) {}
    explicit IntervalUnion(std::vector<Interval> ivs) : pieces_(normalize(std::move(ivs))) {}

    static IntervalUnion real_line() { return IntervalUnion{Interval{}}; }

    const std::vector<Interval>& intervals() const noexcept { return pieces_; }
    bool empty() const noexcept { return pieces_.empty(); }
    std::size_t size() const noexcept { return pieces_.size(); }

    bool contains(double x) const noexcept {
        return std::any_of(pieces_.begin(), pieces_.end(), [x](const Interval& iv) { return iv.contains(x); });
    }

    double measure() const noexcept {
        double m = 0.0;
        for (const auto& iv : pieces_) m += iv.length();
        return m;
    }

    // True when every piece is a single point (so the set has Lebesgue measure zero).
    bool measure_zero() const noexcept {
        return std::all_of(pieces_.begin(), pieces_.end(), [](const Interval& iv) { return iv.lo == iv.hi; });
    }

    double lower() const noexcept { return pieces_.empty() ? kInf : pieces_.front().lo; }
    double upper() const noexcept { return pieces_.empty() ? -kInf : pieces_.back().hi; }

    // Finite endpoints of all pieces, ascending and unique.
    std::vector<double> finite_endpoints() const {
        std::vector<double> out;
        for (const auto& iv : pieces_) {
            if (std::isfinite(iv.lo)) out.push_back(iv.lo);
            if (std::isfinite(iv.hi)) out.push_back(iv.hi);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

private:
    static std::vector<Interval> normalize(std::vector<Interval> ivs) {
        std::erase_if(ivs, [](const Interval& iv) { return iv.empty(); });
        for (auto& iv : ivs) {
            if (!std::isfinite(iv.lo)) iv.lo_closed = false;
            if (!std::isfinite(iv.hi)) iv.hi_closed = false;
        }
        std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) {
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.lo_closed && !b.lo_closed;
        });
        std::vector<Interval> out;
        for (const auto& iv : ivs) {
            if (!out.empty()) {
                Interval& last = out.back();
                const bool touches = iv.lo < last.hi || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
                if (touches) {
                    if (iv.hi > last.hi) {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    } else if (iv.hi == last.hi) {
                        last.hi_closed = last.hi_closed || iv.hi_closed;
                    }
                    continue;
                }
            }
            out.push_back(iv);
        }
        return out;
    }

    std::vector<Interval> pieces_;
};

inline IntervalUnion intersect(const IntervalUnion& a, const IntervalUnion& b) {
    std::vector<Interval> out;
    for (const auto& x : a.intervals())
        for (const auto& y : b.intervals()) {
            Interval r = intersect(x, y);
            if (!r.empty()) out.push_back(r);
        }
    return IntervalUnion(std::move(out));
}

inline IntervalUnion unite(const IntervalUnion& a, const IntervalUnion& b) {
    std::vector<Interval> all = a.intervals();
    all.insert(all.end(), b.intervals().begin(), b.intervals().end());
    return IntervalUnion(std::move(all));
}

// Complement with respect to the whole real line.
inline IntervalUnion complement(const IntervalUnion& a) {
    std::vector<Interval> out;
    double lo = -kInf;
    bool lo_closed = false;
    for (const auto& iv : a.intervals()) {
        out.push_back(Interval{lo, iv.lo, lo_closed, !iv.lo_closed});
        lo = iv.hi;
        lo_closed = !iv.hi_closed;
    }
    out.push_back(Interval{lo, kInf, lo_closed, false});
    return IntervalUnion(std::move(out));
}

inline IntervalUnion difference(const IntervalUnion& a, const IntervalUnion& b) {
    return intersect(a, complement(b));
}

inline std::string to_string(const IntervalUnion& u) {
    if (u.empty()) return "{}";
    std::string s;
    for (std::size_t i = 0; i < u.intervals().size(); ++i) {
        if (i) s += " U ";
        s += to_string(u.intervals()[i]);
    }
    return s;
}

} // namespace bfd
