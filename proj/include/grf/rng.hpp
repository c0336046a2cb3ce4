#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "grf/lattice.hpp"
#include "grf/tensor.hpp"

namespace grf {

enum class Symmetry { none, symmetric, skew, form };

/// Band-limited random scalar on the torus, defined analytically so the same
/// function can be sampled on grids of different resolution.
struct SmoothScalar {
    struct Mode {
        std::array<int, 4> k{};
        double amp = 0.0, phase = 0.0;
    };
    int dim = 3;
    double L = 2.0 * std::numbers::pi;
    std::vector<Mode> modes;

    double eval(const double* x) const {
        double v = 0.0;
        const double w = 2.0 * std::numbers::pi / L;
        for (const Mode& m : modes) {
            double arg = m.phase;
            for (int a = 0; a < dim; ++a) arg += w * m.k[a] * x[a];
            v += m.amp * std::cos(arg);
        }
        return v;
    }

    /// Analytic partial derivative, for stencil-accuracy oracles.
    double eval_d(const double* x, int axis) const {
        double v = 0.0;
        const double w = 2.0 * std::numbers::pi / L;
        for (const Mode& m : modes) {
            double arg = m.phase;
            for (int a = 0; a < dim; ++a) arg += w * m.k[a] * x[a];
            v -= m.amp * w * m.k[axis] * std::sin(arg);
        }
        return v;
    }
};

inline SmoothScalar make_smooth_scalar(int dim, double L, std::mt19937_64& eng, int nmodes = 3, int kmax = 2) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> K(-kmax, kmax);
    SmoothScalar s;
    s.dim = dim;
    s.L = L;
    for (int m = 0; m < nmodes; ++m) {
        SmoothScalar::Mode mode;
        bool nonzero = false;
        for (int a = 0; a < dim; ++a) {
            mode.k[a] = K(eng);
            nonzero = nonzero || mode.k[a] != 0;
        }
        if (!nonzero) mode.k[0] = 1;
        mode.amp = U(eng);
        mode.phase = std::numbers::pi * U(eng);
        s.modes.push_back(mode);
    }
    return s;
}

/// Band-limited random tensor with declared index symmetry.
struct SmoothTensor {
    int dim = 3, order = 0;
    Symmetry sym = Symmetry::none;
    std::vector<SmoothScalar> comp;  // one per raw component; symmetrized on evaluation

    Tensor sample(const GridTables& tab) const {
        const auto& g = tab.grid;
        Tensor out(dim, order, g.pts());
        const int N = g.N;
        const double h = g.h();
        std::vector<int> xi(g.dim);
        std::array<double, 4> x{};
        std::vector<int> idx(order > 0 ? order : 1), jdx(order > 0 ? order : 1);
        for (std::size_t p = 0; p < g.pts(); ++p) {
            std::size_t r = p;
            for (int a = g.dim - 1; a >= 0; --a) {
                xi[a] = static_cast<int>(r % N);
                r /= N;
            }
            for (int a = 0; a < g.dim; ++a) x[a] = xi[a] * h;
            for (std::size_t c = 0; c < out.comps(); ++c) out.at(p, c) = eval_comp(c, x.data());
        }
        return out;
    }

    double eval_comp(std::size_t c, const double* x) const {
        std::vector<int> idx(order > 0 ? order : 1);
        decode(c, dim, order, idx.data());
        if (order == 0) return comp[0].eval(x);
        if (sym == Symmetry::none) return comp[c].eval(x);
        if (sym == Symmetry::symmetric && order == 2) {
            int i = std::min(idx[0], idx[1]), j = std::max(idx[0], idx[1]);
            return comp[static_cast<std::size_t>(i) * dim + j].eval(x);
        }
        if (sym == Symmetry::skew && order == 2) {
            if (idx[0] == idx[1]) return 0.0;
            int i = idx[0], j = idx[1];
            double sgn = (i < j) ? 1.0 : -1.0;
            int a = std::min(i, j), b = std::max(i, j);
            return sgn * comp[static_cast<std::size_t>(a) * dim + b].eval(x);
        }
        // fully antisymmetric form of any order
        std::vector<int> srt(idx.begin(), idx.begin() + order);
        double sgn = 1.0;
        for (int i = 0; i < order; ++i)
            for (int j = i + 1; j < order; ++j) {
                if (srt[i] == srt[j]) return 0.0;
                if (srt[i] > srt[j]) {
                    std::swap(srt[i], srt[j]);
                    sgn = -sgn;
                }
            }
        return sgn * comp[encode(srt.data(), dim, order)].eval(x);
    }
};

inline SmoothTensor make_smooth_tensor(int dim, int order, Symmetry sym, double L, std::mt19937_64& eng,
                                       int nmodes = 3, int kmax = 2) {
    SmoothTensor t;
    t.dim = dim;
    t.order = order;
    t.sym = sym;
    t.comp.resize(Tensor::ipow(dim, order > 0 ? order : 0));
    if (t.comp.empty()) t.comp.resize(1);
    for (auto& c : t.comp) c = make_smooth_scalar(dim, L, eng, nmodes, kmax);
    return t;
}

/// Random invariant tensor on the homogeneous backend: entries i.i.d. uniform
/// in [-1,1], then symmetrized / antisymmetrized as requested.
inline Tensor random_invariant(int n, int order, Symmetry sym, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Tensor raw(n, order, 1);
    for (double& x : raw.a) x = U(eng);
    if (sym == Symmetry::none || order == 0) return raw;
    if (order == 2) return sym == Symmetry::symmetric ? sym2(raw) : skew2(raw);
    // antisymmetrize a form of general order
    Tensor out(n, order, 1);
    std::vector<int> idx(order), perm(order), p(order);
    for (std::size_t c = 0; c < out.comps(); ++c) {
        decode(c, n, order, idx.data());
        for (int i = 0; i < order; ++i) p[i] = i;
        double v = 0.0;
        do {
            int sgn = 1;
            for (int i = 0; i < order; ++i)
                for (int j = i + 1; j < order; ++j)
                    if (p[i] > p[j]) sgn = -sgn;
            for (int i = 0; i < order; ++i) perm[i] = idx[p[i]];
            v += sgn * raw.a[encode(perm.data(), n, order)];
        } while (std::next_permutation(p.begin(), p.end()));
        out.a[c] = v / std::tgamma(order + 1.0);
    }
    return out;
}

}  // namespace grf
