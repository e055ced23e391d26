#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifslab {

// Point in R^d, d <= 3. Unused coordinates stay zero so lexicographic
// comparisons and distance loops can run over all three slots.
struct Vec {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    int dim = 1;

    Vec() = default;
    explicit Vec(double x) : c{x, 0.0, 0.0}, dim(1) {}
    Vec(double x, double y) : c{x, y, 0.0}, dim(2) {}
    Vec(double x, double y, double z) : c{x, y, z}, dim(3) {}

    double &operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }

    double norm() const {
        return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    }

    friend Vec operator+(Vec a, const Vec &b) {
        for (int i = 0; i < 3; ++i) a.c[static_cast<size_t>(i)] += b.c[static_cast<size_t>(i)];
        return a;
    }
    friend Vec operator-(Vec a, const Vec &b) {
        for (int i = 0; i < 3; ++i) a.c[static_cast<size_t>(i)] -= b.c[static_cast<size_t>(i)];
        return a;
    }
    friend Vec operator*(double s, Vec a) {
        for (auto &x : a.c) x *= s;
        return a;
    }
    friend bool operator==(const Vec &a, const Vec &b) {
        return a.dim == b.dim && a.c == b.c;
    }
    // Lexicographic order; used for deterministic pruning and merging.
    friend bool operator<(const Vec &a, const Vec &b) { return a.c < b.c; }
};

inline double euclidean_distance(const Vec &a, const Vec &b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct Box {
    Vec lo, hi;
    int dim = 1;

    bool contains(const Vec &p, double slack = 0.0) const {
        for (int i = 0; i < dim; ++i)
            if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
        return true;
    }
    Vec center() const {
        Vec m;
        m.dim = dim;
        for (int i = 0; i < dim; ++i) m[i] = 0.5 * (lo[i] + hi[i]);
        return m;
    }
    double diameter() const { return euclidean_distance(lo, hi); }
    bool empty() const {
        for (int i = 0; i < dim; ++i)
            if (hi[i] < lo[i]) return true;
        return false;
    }
    // Scales every half-width by `factor` around the center.
    Box inflated(double factor) const {
        Box b = *this;
        const Vec m = center();
        for (int i = 0; i < dim; ++i) {
            const double h = 0.5 * (hi[i] - lo[i]) * factor;
            b.lo[i] = m[i] - h;
            b.hi[i] = m[i] + h;
        }
        return b;
    }
};

enum class SpaceVariant { euclidean, circle };

// The working space: an axis-aligned box in R^d, or the circle [0,1) with
// arc-length metric (d = 1 only).
struct Space {
    int dim = 1;
    Box bounds;
    SpaceVariant variant = SpaceVariant::euclidean;
};

inline double circle_gap(double x, double y) {
    double d = std::fabs(x - y);
    if (d > 0.5) d = 1.0 - d;
    return d;
}

inline double distance(const Space &sp, const Vec &a, const Vec &b) {
    if (sp.variant == SpaceVariant::circle) return circle_gap(a[0], b[0]);
    return euclidean_distance(a, b);
}

inline Vec wrap_point(const Space &sp, Vec p) {
    if (sp.variant == SpaceVariant::circle) {
        p[0] = p[0] - std::floor(p[0]);
        if (p[0] >= 1.0) p[0] = 0.0;
    }
    return p;
}

inline double space_diameter(const Space &sp) {
    if (sp.variant == SpaceVariant::circle) return 0.5;
    return sp.bounds.diameter();
}

// Deterministic 64-bit generator with portable uniform doubles; the standard
// distributions are implementation-defined, so we derive doubles directly
// from the raw stream.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {
        for (int i = 0; i < 4; ++i) next_raw();
    }

    uint64_t next_raw() {
        // splitmix64
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double uniform01() { return static_cast<double>(next_raw() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform index in [0, n).
    size_t index(size_t n) { return static_cast<size_t>(uniform01() * static_cast<double>(n)) % n; }

    // Categorical draw from positive weights summing to ~1; returns 0-based index.
    int categorical(const std::vector<double> &w) {
        double u = uniform01();
        double acc = 0.0;
        for (size_t i = 0; i < w.size(); ++i) {
            acc += w[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(w.size()) - 1;
    }

    Vec point_in(const Box &box) {
        Vec p;
        p.dim = box.dim;
        for (int i = 0; i < box.dim; ++i) p[i] = uniform(box.lo[i], box.hi[i]);
        return p;
    }

  private:
    uint64_t state_;
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string &m) : std::runtime_error(m) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string &m) : std::runtime_error(m) {}
};

struct BudgetError : NumericError {
    explicit BudgetError(const std::string &m) : NumericError(m) {}
};

} // namespace ifslab
