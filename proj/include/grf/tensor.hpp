#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace grf {

/// Dense tensor field with all indices down.
///
/// `pts` sample points (1 for a homogeneous geometry, N^dim for a lattice),
/// `order` slots each of dimension `dim`.  Components are stored point-major
/// with the component index big-endian in the slots, so slot s has stride
/// dim^(order-1-s).  Raising an index is always an explicit contraction with
/// the inverse metric; nothing here knows about the metric.
struct Tensor {
    int dim = 0;
    int order = 0;
    std::size_t pts = 1;
    std::vector<double> a;

    Tensor() = default;
    Tensor(int dim_, int order_, std::size_t pts_)
        : dim(dim_), order(order_), pts(pts_), a(pts_ * ipow(dim_, order_), 0.0) {}

    static std::size_t ipow(int b, int e) {
        std::size_t r = 1;
        for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(b);
        return r;
    }

    std::size_t comps() const { return ipow(dim, order); }
    std::size_t size() const { return a.size(); }

    double& at(std::size_t p, std::size_t c) { return a[p * comps() + c]; }
    double at(std::size_t p, std::size_t c) const { return a[p * comps() + c]; }

    double* pt(std::size_t p) { return a.data() + p * comps(); }
    const double* pt(std::size_t p) const { return a.data() + p * comps(); }

    bool same_shape(const Tensor& o) const {
        return dim == o.dim && order == o.order && pts == o.pts;
    }

    Tensor& operator+=(const Tensor& o) {
        check_shape(o);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
        return *this;
    }
    Tensor& operator-=(const Tensor& o) {
        check_shape(o);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
        return *this;
    }
    Tensor& operator*=(double s) {
        for (double& x : a) x *= s;
        return *this;
    }
    friend Tensor operator+(Tensor l, const Tensor& r) { return l += r; }
    friend Tensor operator-(Tensor l, const Tensor& r) { return l -= r; }
    friend Tensor operator*(double s, Tensor t) { return t *= s; }

    void axpy(double s, const Tensor& o) {
        check_shape(o);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * o.a[i];
    }

    double norm_inf() const {
        double m = 0.0;
        for (double x : a) m = std::max(m, std::abs(x));
        return m;
    }

    void check_shape(const Tensor& o) const {
        if (!same_shape(o)) throw std::invalid_argument("tensor shape mismatch");
    }
};

/// Decode flat component index into slot digits (base dim).
inline void decode(std::size_t c, int dim, int order, int* idx) {
    for (int s = order - 1; s >= 0; --s) {
        idx[s] = static_cast<int>(c % static_cast<std::size_t>(dim));
        c /= static_cast<std::size_t>(dim);
    }
}

inline std::size_t encode(const int* idx, int dim, int order) {
    std::size_t c = 0;
    for (int s = 0; s < order; ++s) c = c * static_cast<std::size_t>(dim) + static_cast<std::size_t>(idx[s]);
    return c;
}

/// Symmetric / skew parts of an order-2 tensor.
inline Tensor sym2(const Tensor& t) {
    Tensor r(t.dim, 2, t.pts);
    const int n = t.dim;
    for (std::size_t p = 0; p < t.pts; ++p) {
        const double* x = t.pt(p);
        double* y = r.pt(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) y[i * n + j] = 0.5 * (x[i * n + j] + x[j * n + i]);
    }
    return r;
}

inline Tensor skew2(const Tensor& t) {
    Tensor r(t.dim, 2, t.pts);
    const int n = t.dim;
    for (std::size_t p = 0; p < t.pts; ++p) {
        const double* x = t.pt(p);
        double* y = r.pt(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) y[i * n + j] = 0.5 * (x[i * n + j] - x[j * n + i]);
    }
    return r;
}

inline Tensor transpose2(const Tensor& t) {
    Tensor r(t.dim, 2, t.pts);
    const int n = t.dim;
    for (std::size_t p = 0; p < t.pts; ++p) {
        const double* x = t.pt(p);
        double* y = r.pt(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) y[i * n + j] = x[j * n + i];
    }
    return r;
}

/// Max deviation from full antisymmetry under adjacent-slot swaps.
inline double antisymmetry_defect(const Tensor& t) {
    if (t.order < 2) return 0.0;
    double m = 0.0;
    const int n = t.dim, p = t.order;
    std::vector<int> idx(p), jdx(p);
    for (std::size_t pt = 0; pt < t.pts; ++pt) {
        const double* x = t.pt(pt);
        for (std::size_t c = 0; c < t.comps(); ++c) {
            decode(c, n, p, idx.data());
            for (int s = 0; s + 1 < p; ++s) {
                jdx = idx;
                std::swap(jdx[s], jdx[s + 1]);
                double v = x[c] + x[encode(jdx.data(), n, p)];
                m = std::max(m, std::abs(v));
            }
        }
    }
    return m;
}

inline void require_antisymmetric(const Tensor& t, double tol, const char* what) {
    double d = antisymmetry_defect(t);
    if (d > tol)
        throw std::invalid_argument(std::string(what) + ": antisymmetry defect " + std::to_string(d));
}

}  // namespace grf
